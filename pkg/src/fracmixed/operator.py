"""Discrete Gagliardo bilinear form, Neumann extension, and energy functional.

The bilinear form collects three pair classes of the restricted double
integral: Omega x Omega, Omega x Sigma1 (exterior value pinned to zero, via
the closed-form kappa1 weights), and Omega x Sigma2 (explicit cells up to the
truncation radius, plus a mean-frozen analytic tail).  Sigma2 unknowns are
eliminated through the nonlocal-Neumann extension map, which is exactly the
energy-minimizing exterior value, so the reduced operator is the Schur
complement of the full pair system and stays symmetric positive semidefinite.

In 1D the kernel mass of every cell pair is integrated in closed form over
the target cell; in 2D midpoint quadrature is used.  Same-cell pairs carry no
energy for piecewise-constant fields and are skipped.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .geometry import Discretization, KernelParams

__all__ = [
    "Field",
    "ProblemParams",
    "GagliardoForm",
    "assemble_form",
    "neumann_extension",
    "apply_frac_laplacian",
    "nonlocal_normal_derivative",
    "oracle_pv",
    "energy_J",
    "grad_J",
]


@dataclass
class Field:
    """Nodal values on the interior grid, optionally with explicit Sigma2 values.

    The Dirichlet exterior carries no storage: it is identically zero by the
    definition of the solution space.
    """

    interior: np.ndarray
    neumann: Optional[np.ndarray] = None

    def __post_init__(self):
        self.interior = np.asarray(self.interior, dtype=float)
        if not np.all(np.isfinite(self.interior)):
            raise ValueError("interior values must be finite")
        if self.neumann is not None:
            self.neumann = np.asarray(self.neumann, dtype=float)
            if not np.all(np.isfinite(self.neumann)):
                raise ValueError("Sigma2 values must be finite")

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.interior))) if self.interior.size else 0.0


@dataclass(frozen=True)
class ProblemParams:
    """Exponents and parameter of the concave-convex right-hand side.

    lam * u^q + u^p with 0 < q < 1 < p.  The subcritical flag records whether
    p stays below (N + 2s)/(N - 2s); the threshold is infinite when N <= 2s.
    """

    s: float
    q: float
    p: float
    lam: float = 0.0
    a: float = 2.0

    def __post_init__(self):
        if not 0.0 < self.s < 1.0:
            raise ValueError("s must lie in (0, 1)")
        if not 0.0 < self.q < 1.0 < self.p:
            raise ValueError("exponents must satisfy 0 < q < 1 < p")
        if self.lam < 0.0:
            raise ValueError("lam must be nonnegative")

    def critical_exponent(self, N: int) -> float:
        if N <= 2.0 * self.s:
            return np.inf
        return (N + 2.0 * self.s) / (N - 2.0 * self.s)

    def is_subcritical(self, N: int) -> bool:
        return self.p < self.critical_exponent(N)

    def with_lam(self, lam: float) -> "ProblemParams":
        return ProblemParams(s=self.s, q=self.q, p=self.p, lam=lam, a=self.a)


@dataclass
class GagliardoForm:
    """Reduced bilinear operator, Sigma2 extension map, and quadrature mass."""

    A: np.ndarray
    extension: np.ndarray
    mass: np.ndarray
    disc: Discretization
    blocks: Optional[dict] = None
    _chol: Optional[tuple] = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def energy(self, u: np.ndarray) -> float:
        return float(u @ (self.A @ u))

    def inner(self, u: np.ndarray, v: np.ndarray) -> float:
        return float(u @ (self.A @ v))


def _cell_kernel_mass_1d(x_src, w_src, x_tgt, w_tgt, s, same_set):
    """Symmetrized closed-form kernel mass of 1D cell pairs.

    G[i, j] approximates the double integral of |x-y|^(-(1+2s)) over
    cell_i x cell_j; the kernel factor is integrated exactly over one cell
    and the other is treated by midpoint, then the two roles are averaged.
    Same-cell pairs are zeroed (no energy for piecewise constants).
    """
    two_s = 2.0 * s
    D = np.abs(x_src[:, None] - x_tgt[None, :])
    if same_set:
        np.fill_diagonal(D, np.inf)

    def psi(t):
        return t ** (-two_s) / two_s

    half_t = 0.5 * w_tgt[None, :]
    half_s = 0.5 * w_src[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        into_tgt = psi(np.maximum(D - half_t, 1e-300)) - psi(D + half_t)
        into_src = psi(np.maximum(D - half_s, 1e-300)) - psi(D + half_s)
    G = 0.5 * (w_src[:, None] * into_tgt + w_tgt[None, :] * into_src)
    if same_set:
        np.fill_diagonal(G, 0.0)
    return G


def _pair_mass(d: Discretization, x_src, w_src, x_tgt, w_tgt, same_set=False):
    if d.kernel.N == 1:
        return _cell_kernel_mass_1d(
            x_src[:, 0], w_src, x_tgt[:, 0], w_tgt, d.kernel.s, same_set
        )
    diff = x_src[:, None, :] - x_tgt[None, :, :]
    D = np.sqrt((diff**2).sum(axis=2))
    if same_set:
        np.fill_diagonal(D, np.inf)
    G = w_src[:, None] * w_tgt[None, :] * D ** (-d.kernel.exponent)
    if same_set:
        np.fill_diagonal(G, 0.0)
    return G


def _sigma2_coupling(d: Discretization) -> np.ndarray:
    """Kernel mass of Omega x Sigma2 cell pairs, shape (n_interior, n_neumann)."""
    return _pair_mass(
        d, d.interior_nodes, d.interior_weights, d.neumann_nodes, d.neumann_weights
    )


def neumann_extension(d: Discretization, u: np.ndarray) -> np.ndarray:
    """Sigma2 values forced by the vanishing nonlocal normal derivative.

    Each exterior cell receives the kernel-weighted average of the interior
    values, so the output is linear in u and lies within [min u, max u].
    """
    u = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u)):
        raise ValueError("interior values must be finite")
    if d.n_neumann == 0:
        return np.zeros(0)
    G = _sigma2_coupling(d)
    denom = G.sum(axis=0)
    return (G.T @ u) / denom


def _extension_matrix(G2: np.ndarray) -> np.ndarray:
    denom = G2.sum(axis=0)
    return (G2 / denom[None, :]).T


def assemble_form(d: Discretization, keep_full: bool = False, max_nodes: int = 20000) -> GagliardoForm:
    """Assemble the reduced symmetric operator over interior unknowns.

    With ``keep_full`` the un-eliminated Omega/Sigma2 block system is retained
    in ``blocks`` for residual-style testing of the Neumann condition.
    """
    n = d.n_interior
    if n + d.n_neumann > max_nodes:
        raise MemoryError(
            f"{n + d.n_neumann} nodes exceeds the assembly cap {max_nodes}"
        )
    a = d.kernel.a
    w = d.interior_weights

    G0 = _pair_mass(d, d.interior_nodes, w, d.interior_nodes, w, same_set=True)
    A = -a * G0
    np.fill_diagonal(A, np.diag(A) + a * G0.sum(axis=1))

    # Omega x Sigma1: exterior value 0 contributes a diagonal kernel mass.
    A[np.diag_indices(n)] += a * w * d.kappa1

    # Mean-frozen far Sigma2 tail.
    tw = w * d.tail_sigma2
    if np.any(tw):
        m_vec = w / w.sum()
        A[np.diag_indices(n)] += a * tw
        A -= a * np.outer(tw, m_vec)
        A -= a * np.outer(m_vec, tw)
        A += a * tw.sum() * np.outer(m_vec, m_vec)

    blocks = None
    if d.n_neumann:
        G2 = _sigma2_coupling(d)
        col = G2.sum(axis=1)
        c = G2.sum(axis=0)
        E = _extension_matrix(G2)
        if keep_full:
            blocks = {
                "A_II": A + a * np.diag(col),
                "A_IS": -a * G2,
                "A_SS": a * np.diag(c),
            }
        A = A + a * (np.diag(col) - G2 @ (G2 / c[None, :]).T)
    else:
        E = np.zeros((0, n))
        if keep_full:
            blocks = {"A_II": A.copy(), "A_IS": np.zeros((n, 0)), "A_SS": np.zeros((0, 0))}

    A = 0.5 * (A + A.T)
    return GagliardoForm(A=A, extension=E, mass=w.copy(), disc=d, blocks=blocks)


def apply_frac_laplacian(d: Discretization, form: GagliardoForm, u: np.ndarray) -> np.ndarray:
    """Weak-form residual density (A u) / w, the discrete operator value.

    Consistent with the bilinear form and the homogeneous mixed exterior
    condition: Sigma1 values are zero and Sigma2 values are eliminated.
    """
    u = np.asarray(u, dtype=float)
    if u.shape != (form.n,):
        raise ValueError(f"expected {form.n} interior values, got shape {u.shape}")
    return (form.A @ u) / form.mass


def nonlocal_normal_derivative(d: Discretization, fld: Field, k: int) -> float:
    """Nonlocal normal derivative at the k-th Sigma2 node.

    a * int_Omega (u(x_k) - u(y)) K(x_k, y) dy with the kernel integrated
    cellwise, matching the assembly quadrature.
    """
    if not 0 <= k < d.n_neumann:
        raise IndexError(f"{k} is not a Sigma2 node index")
    if fld.neumann is None:
        raise ValueError("field must supply Sigma2 values")
    G2 = _sigma2_coupling(d)
    g = G2[:, k] / d.neumann_weights[k]
    return float(d.kernel.a * (g * (fld.neumann[k] - fld.interior)).sum())


def oracle_pv(
    u: Callable[[np.ndarray], np.ndarray],
    x,
    s: float,
    a: float = 2.0,
    quad_depth: int = 8,
    z_max: float = 1.0e6,
    z_min: float = 1.0e-8,
    N: int = 1,
    n_theta: int = 64,
    breakpoints=None,
) -> float:
    """Principal-value quadrature of the fractional Laplacian at one point.

    Independent of the assembled form: integrates the symmetric difference
    2u(x) - u(x+z) - u(x-z) against |z|^(-(N+2s)) on a geometrically graded
    radial grid with Gauss panels (``quad_depth`` panels per decade), plus an
    analytic second-order correction for the innermost interval.  ``u`` must
    be vectorized over points and supply exterior values consistent with the
    intended exterior condition.  Radii where the closure has a derivative
    kink (region boundaries) can be passed as ``breakpoints``; panel edges
    are forced there so Gauss panels never straddle a kink.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    decades = np.log10(z_max / z_min)
    n_panels = max(1, int(np.ceil(quad_depth * decades)))
    edges = np.geomspace(z_min, z_max, n_panels + 1)
    if breakpoints is not None:
        bps = np.asarray([b for b in breakpoints if z_min < b < z_max], dtype=float)
        if bps.size:
            edges = np.unique(np.concatenate([edges, bps]))
    gauss_x, gauss_w = np.polynomial.legendre.leggauss(6)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    zs = (mid[:, None] + half[:, None] * gauss_x[None, :]).ravel()
    ws = (half[:, None] * gauss_w[None, :]).ravel()

    if N == 1:
        ux = float(u(x.reshape(1, 1))[0])
        up = u(x[0] + zs.reshape(-1, 1))
        um = u(x[0] - zs.reshape(-1, 1))
        diff2 = 2.0 * ux - np.asarray(up, dtype=float) - np.asarray(um, dtype=float)
        if not np.all(np.isfinite(diff2)):
            raise ValueError("non-finite field samples in the PV quadrature")
        val = float((diff2 * zs ** (-(1.0 + 2.0 * s)) * ws).sum())
        # Inner window: the symmetric difference behaves like c z^2.
        dplus = float(u(np.array([[x[0] + z_min]]))[0])
        dminus = float(u(np.array([[x[0] - z_min]]))[0])
        c = (2.0 * ux - dplus - dminus) / z_min**2
        val += c * z_min ** (2.0 - 2.0 * s) / (2.0 - 2.0 * s)
        return a * val
    theta = (np.arange(n_theta) + 0.5) * np.pi / n_theta
    dirs = np.column_stack([np.cos(theta), np.sin(theta)])
    ux = float(u(x.reshape(1, 2))[0])
    total = 0.0
    for e in dirs:
        pts_p = x[None, :] + zs[:, None] * e[None, :]
        pts_m = x[None, :] - zs[:, None] * e[None, :]
        diff2 = 2.0 * ux - np.asarray(u(pts_p), dtype=float) - np.asarray(u(pts_m), dtype=float)
        if not np.all(np.isfinite(diff2)):
            raise ValueError("non-finite field samples in the PV quadrature")
        total += float((diff2 * zs ** (-(1.0 + 2.0 * s)) * ws).sum())
    return a * total * (np.pi / n_theta) * 0.5


def _potential_terms(params: ProblemParams, w: np.ndarray, u: np.ndarray):
    up = np.maximum(u, 0.0)
    conc = (w * up ** (params.q + 1.0)).sum() / (params.q + 1.0)
    conv = (w * up ** (params.p + 1.0)).sum() / (params.p + 1.0)
    return up, conc, conv


def energy_J(form: GagliardoForm, params: ProblemParams, u: np.ndarray) -> float:
    """J(u) = 1/2 ||u||^2 - lam/(q+1) |u_+|_{q+1}^{q+1} - 1/(p+1) |u_+|_{p+1}^{p+1}."""
    u = np.asarray(u, dtype=float)
    up, conc, conv = _potential_terms(params, form.mass, u)
    return 0.5 * form.energy(u) - params.lam * conc - conv


def grad_J(form: GagliardoForm, params: ProblemParams, u: np.ndarray) -> np.ndarray:
    """Nodal gradient A u - w (lam u_+^q + u_+^p)."""
    u = np.asarray(u, dtype=float)
    up = np.maximum(u, 0.0)
    return form.A @ u - form.mass * (params.lam * up**params.q + up**params.p)
