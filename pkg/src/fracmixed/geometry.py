"""Domain discretization for the mixed Dirichlet / nonlocal-Neumann exterior problem.

The computational domain is an axis-aligned box Omega whose exterior is split
into a Dirichlet region Sigma1 (values pinned to zero) and a Neumann region
Sigma2 (values determined by the vanishing of the nonlocal normal derivative).
The exterior is represented explicitly by midpoint cells up to a truncation
radius R; beyond R the Dirichlet part is handled in closed form and the
Neumann part is folded into an analytic tail weight (the field there is
frozen to the interior mean by the assembly).

All quantities are produced once at build time and are immutable afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "DomainSpec",
    "KernelParams",
    "Discretization",
    "build_discretization",
    "kernel_coefficient",
    "far_field_tail",
    "halfline_kernel_integral",
    "interval_kernel_integral",
]

DIRICHLET = "dirichlet"
NEUMANN = "neumann"

_SIDE_LABELS = (DIRICHLET, NEUMANN)


@dataclass(frozen=True)
class KernelParams:
    """Parameters of the singular kernel a * |x - y|^(-(N + 2s))."""

    N: int
    s: float
    a: float = 2.0

    def __post_init__(self):
        if self.N not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {self.N}")
        if not 0.0 < self.s < 1.0:
            raise ValueError(f"s must lie in (0, 1), got {self.s}")
        if self.a <= 0.0:
            raise ValueError("normalization constant must be positive")

    @property
    def exponent(self) -> float:
        return self.N + 2.0 * self.s


@dataclass(frozen=True)
class DomainSpec:
    """Geometry of Omega and the Sigma1/Sigma2 exterior partition.

    Parameters
    ----------
    dimension : 1 or 2.
    omega : per-axis (lo, hi) bounds of the box.
    sigma_partition : for 1D a pair of side labels (left, right), each
        "dirichlet" or "neumann".  For 2D either "all_dirichlet",
        "all_neumann", or ("axis", k, threshold) assigning exterior points
        with coordinate k below the threshold to Sigma1.
    truncation_radius : radius R beyond which the exterior is handled
        analytically.
    resolution : number of midpoint cells per axis inside Omega.
    exterior_resolution : spacing factor for explicit Sigma2 cells
        (spacing = factor * interior spacing).
    """

    dimension: int = 1
    omega: tuple = ((0.0, 1.0),)
    sigma_partition: tuple | str = (DIRICHLET, NEUMANN)
    truncation_radius: float = 20.0
    resolution: int = 200
    exterior_resolution: float = 1.0

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise ValueError("only dimensions 1 and 2 are supported")
        if len(self.omega) != self.dimension:
            raise ValueError("omega must supply one (lo, hi) pair per axis")
        for lo, hi in self.omega:
            if not hi > lo:
                raise ValueError("omega must have positive extent on every axis")
        if self.resolution < 4:
            raise ValueError("resolution must be at least 4")
        if self.exterior_resolution <= 0.0:
            raise ValueError("exterior_resolution must be positive")
        self._validate_partition()
        # R must clear the whole domain: strictly more than diameter plus the
        # distance from Omega to the origin.
        if self.truncation_radius <= self.diameter + self.distance_to_origin:
            raise ValueError(
                "truncation_radius must exceed diameter(Omega) + dist(Omega, 0)"
            )

    def _validate_partition(self):
        part = self.sigma_partition
        if self.dimension == 1:
            if (
                not isinstance(part, (tuple, list))
                or len(part) != 2
                or any(lab not in _SIDE_LABELS for lab in part)
            ):
                raise ValueError(
                    "1D sigma_partition must be a (left, right) pair of "
                    "'dirichlet'/'neumann' labels"
                )
        else:
            if isinstance(part, str):
                if part not in ("all_dirichlet", "all_neumann"):
                    raise ValueError(f"unknown 2D partition {part!r}")
            elif (
                not isinstance(part, (tuple, list))
                or len(part) != 3
                or part[0] != "axis"
                or part[1] not in (0, 1)
            ):
                raise ValueError(
                    "2D sigma_partition must be 'all_dirichlet', 'all_neumann' "
                    "or ('axis', k, threshold)"
                )

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm([hi - lo for lo, hi in self.omega]))

    @property
    def distance_to_origin(self) -> float:
        d = [max(lo, 0.0, -hi) for lo, hi in self.omega]
        return float(np.linalg.norm(d))

    @property
    def volume(self) -> float:
        return float(np.prod([hi - lo for lo, hi in self.omega]))

    def exterior_label(self, y) -> str:
        """Sigma label of an exterior point."""
        part = self.sigma_partition
        if self.dimension == 1:
            lo, hi = self.omega[0]
            y0 = float(np.atleast_1d(y)[0])
            if y0 <= lo:
                return part[0]
            if y0 >= hi:
                return part[1]
            raise ValueError(f"point {y0} is not exterior to Omega")
        if part == "all_dirichlet":
            return DIRICHLET
        if part == "all_neumann":
            return NEUMANN
        _, k, thr = part
        return DIRICHLET if y[k] < thr else NEUMANN

    @property
    def has_dirichlet(self) -> bool:
        if self.dimension == 1:
            return DIRICHLET in self.sigma_partition
        if self.sigma_partition == "all_dirichlet":
            return True
        if self.sigma_partition == "all_neumann":
            return False
        return True

    @property
    def has_neumann(self) -> bool:
        if self.dimension == 1:
            return NEUMANN in self.sigma_partition
        if self.sigma_partition == "all_neumann":
            return True
        if self.sigma_partition == "all_dirichlet":
            return False
        return True


@dataclass
class Discretization:
    """Node sets, quadrature weights and analytic exterior coefficients.

    ``kappa1`` holds the full Sigma1 kernel mass per interior node,
    int_{Sigma1} |x_i - y|^(-(N+2s)) dy, without the normalization constant.
    ``tail_sigma2`` is the analogous weight of the Sigma2 part beyond the
    truncation radius (the region whose value is frozen to the interior mean).
    """

    spec: DomainSpec
    kernel: KernelParams
    interior_nodes: np.ndarray
    interior_weights: np.ndarray
    neumann_nodes: np.ndarray
    neumann_weights: np.ndarray
    kappa1: np.ndarray
    tail_sigma2: np.ndarray
    h: float

    def __post_init__(self):
        for arr in (
            self.interior_nodes,
            self.interior_weights,
            self.neumann_nodes,
            self.neumann_weights,
            self.kappa1,
            self.tail_sigma2,
        ):
            arr.setflags(write=False)

    @property
    def n_interior(self) -> int:
        return self.interior_nodes.shape[0]

    @property
    def n_neumann(self) -> int:
        return self.neumann_nodes.shape[0]


def kernel_coefficient(x, y, kernel: KernelParams) -> float:
    """Evaluate a * |x - y|^(-(N + 2s)) for distinct points."""
    r = float(np.linalg.norm(np.atleast_1d(x) - np.atleast_1d(y)))
    if r == 0.0:
        raise ValueError("kernel is singular at coincident points")
    return kernel.a * r ** (-kernel.exponent)


def halfline_kernel_integral(x: float, b: float, s: float, left: bool) -> float:
    """int |x - y|^(-(1+2s)) dy over (-inf, b] if left, else [b, +inf).

    Requires x strictly inside the complementary half-line.
    """
    d = (x - b) if left else (b - x)
    if d <= 0.0:
        raise ValueError("point must lie strictly outside the half-line")
    return d ** (-2.0 * s) / (2.0 * s)


def interval_kernel_integral(x: float, a: float, b: float, s: float) -> float:
    """int_a^b |x - y|^(-(1+2s)) dy for x outside [a, b] (1D, no constant)."""
    if not b > a:
        raise ValueError("empty interval")
    if a < x < b:
        raise ValueError("point must lie outside the interval")
    two_s = 2.0 * s
    if x >= b:
        lo, hi = x - b, x - a
    else:
        lo, hi = a - x, b - x
    if lo == 0.0:
        raise ValueError("interval touches the evaluation point")
    return (lo ** (-two_s) - hi ** (-two_s)) / two_s


def far_field_tail(x, R: float, kernel: KernelParams) -> float:
    """Kernel mass of the exterior of the ball B_R seen from an interior point.

    Returns int_{|y| > R} a |x - y|^(-(N+2s)) dy.  Closed form in 1D; angular
    quadrature of the exact radial integral in 2D.
    """
    xv = np.atleast_1d(np.asarray(x, dtype=float))
    if float(np.linalg.norm(xv)) >= R:
        raise ValueError("evaluation point must lie inside the ball B_R")
    two_s = 2.0 * kernel.s
    if kernel.N == 1:
        x0 = xv[0]
        return kernel.a * ((R - x0) ** (-two_s) + (R + x0) ** (-two_s)) / two_s
    # 2D: in polar coordinates around x the inner radial integral is exact,
    # leaving a smooth periodic integrand in the angle.
    theta = np.linspace(0.0, 2.0 * np.pi, 512, endpoint=False)
    r0 = _ray_exit_radius(xv, theta, R)
    return kernel.a * float(np.mean(r0 ** (-two_s) / two_s)) * 2.0 * np.pi


def _ray_exit_radius(x: np.ndarray, theta: np.ndarray, R: float) -> np.ndarray:
    """Distance from x to the sphere |y| = R along direction theta."""
    d2 = float(x @ x)
    ct = np.cos(theta) * x[0] + np.sin(theta) * x[1]
    return -ct + np.sqrt(np.maximum(ct**2 + R**2 - d2, 0.0))


def build_discretization(
    spec: DomainSpec, s: float, a: float = 2.0
) -> Discretization:
    """Build midpoint cells for Omega and Sigma2, and the exterior weights.

    Rejects s with N < 2s (the problem statement needs the Sobolev range) and
    configurations whose exterior is entirely unlabeled.
    """
    if not 0.0 < s < 1.0:
        raise ValueError(f"s must lie in (0, 1), got {s}")
    if spec.dimension < 2.0 * s:
        raise ValueError(
            f"dimension N={spec.dimension} with s={s} violates N >= 2s"
        )
    kernel = KernelParams(N=spec.dimension, s=s, a=a)
    if spec.dimension == 1:
        return _build_1d(spec, kernel)
    return _build_2d(spec, kernel)


def _midpoint_cells(lo: float, hi: float, n: int):
    h = (hi - lo) / n
    nodes = lo + h * (np.arange(n) + 0.5)
    return nodes, h


def _graded_cells(length: float, h_target: float, growth: float = 1.5, refine: int = 64):
    """Cell sizes filling [0, length], geometrically graded near 0.

    Starts at ``h_target / refine`` and grows by ``growth`` per cell until the
    target size is reached, then continues uniformly.  The fine end resolves
    the boundary layer of the Neumann extension at the interface, where the
    kernel weight seen from nearby interior nodes is largest.
    """
    sizes = []
    size = h_target / refine
    pos = 0.0
    while size < h_target and pos + size < length:
        sizes.append(size)
        pos += size
        size *= growth
    m = max(1, int(round((length - pos) / h_target)))
    hy = (length - pos) / m
    sizes.extend([hy] * m)
    return np.asarray(sizes)


def _build_1d(spec: DomainSpec, kernel: KernelParams) -> Discretization:
    (lo, hi), = spec.omega
    s = kernel.s
    R = spec.truncation_radius
    nodes, h = _midpoint_cells(lo, hi, spec.resolution)
    weights = np.full(spec.resolution, h)

    left_label, right_label = spec.sigma_partition

    kappa1 = np.zeros(spec.resolution)
    tail = np.zeros(spec.resolution)
    if left_label == DIRICHLET:
        kappa1 += np.array([halfline_kernel_integral(x, lo, s, left=True) for x in nodes])
    else:
        tail += np.array([halfline_kernel_integral(x, -R, s, left=True) for x in nodes])
    if right_label == DIRICHLET:
        kappa1 += np.array([halfline_kernel_integral(x, hi, s, left=False) for x in nodes])
    else:
        tail += np.array([halfline_kernel_integral(x, R, s, left=False) for x in nodes])

    ext_nodes = []
    ext_weights = []
    h_ext_target = h * spec.exterior_resolution
    if left_label == NEUMANN:
        sizes = _graded_cells(lo + R, h_ext_target)
        edges = lo - np.concatenate([[0.0], np.cumsum(sizes)])
        ext_nodes.append(0.5 * (edges[:-1] + edges[1:]))
        ext_weights.append(sizes)
    if right_label == NEUMANN:
        sizes = _graded_cells(R - hi, h_ext_target)
        edges = hi + np.concatenate([[0.0], np.cumsum(sizes)])
        ext_nodes.append(0.5 * (edges[:-1] + edges[1:]))
        ext_weights.append(sizes)
    if ext_nodes:
        neumann_nodes = np.concatenate(ext_nodes).reshape(-1, 1)
        neumann_weights = np.concatenate(ext_weights)
    else:
        neumann_nodes = np.zeros((0, 1))
        neumann_weights = np.zeros(0)

    return Discretization(
        spec=spec,
        kernel=kernel,
        interior_nodes=nodes.reshape(-1, 1),
        interior_weights=weights,
        neumann_nodes=neumann_nodes,
        neumann_weights=neumann_weights,
        kappa1=kappa1,
        tail_sigma2=tail,
        h=h,
    )


def _build_2d(spec: DomainSpec, kernel: KernelParams) -> Discretization:
    (x_lo, x_hi), (y_lo, y_hi) = spec.omega
    s = kernel.s
    R = spec.truncation_radius
    n = spec.resolution
    xs, hx = _midpoint_cells(x_lo, x_hi, n)
    ys, hy = _midpoint_cells(y_lo, y_hi, n)
    XX, YY = np.meshgrid(xs, ys, indexing="ij")
    nodes = np.column_stack([XX.ravel(), YY.ravel()])
    weights = np.full(nodes.shape[0], hx * hy)
    h = max(hx, hy)

    # Explicit exterior cells tile the bounding square of B_R minus Omega.
    h_ext = h * spec.exterior_resolution
    m = int(np.ceil(2.0 * R / h_ext))
    exs, hex_ = _midpoint_cells(-R, R, m)
    EX, EY = np.meshgrid(exs, exs, indexing="ij")
    pts = np.column_stack([EX.ravel(), EY.ravel()])
    inside_omega = (
        (pts[:, 0] > x_lo) & (pts[:, 0] < x_hi)
        & (pts[:, 1] > y_lo) & (pts[:, 1] < y_hi)
    )
    inside_ball = np.hypot(pts[:, 0], pts[:, 1]) < R
    ext_pts = pts[~inside_omega & inside_ball]
    labels = np.array([spec.exterior_label(p) for p in ext_pts])

    neumann_pts = ext_pts[labels == NEUMANN]
    dirichlet_pts = ext_pts[labels == DIRICHLET]
    ext_w = hex_ * hex_

    # Sigma1 mass within B_R by cell midpoints, plus the analytic radial
    # tail split by the label seen far along each direction.
    exponent = kernel.exponent
    kappa1 = np.zeros(nodes.shape[0])
    tail = np.zeros(nodes.shape[0])
    if dirichlet_pts.shape[0]:
        diff = nodes[:, None, :] - dirichlet_pts[None, :, :]
        dist = np.sqrt((diff**2).sum(axis=2))
        kappa1 += ext_w * (dist ** (-exponent)).sum(axis=1)
    theta = np.linspace(0.0, 2.0 * np.pi, 256, endpoint=False)
    dirs = np.column_stack([np.cos(theta), np.sin(theta)])
    for i, xnode in enumerate(nodes):
        r0 = _ray_exit_radius(xnode, theta, R)
        far = xnode[None, :] + (10.0 * R) * dirs
        far_lab = np.array([spec.exterior_label(p) for p in far])
        contrib = r0 ** (-2.0 * kernel.s) / (2.0 * kernel.s)
        dtheta = 2.0 * np.pi / theta.size
        kappa1[i] += float(contrib[far_lab == DIRICHLET].sum()) * dtheta
        tail[i] += float(contrib[far_lab == NEUMANN].sum()) * dtheta

    return Discretization(
        spec=spec,
        kernel=kernel,
        interior_nodes=nodes,
        interior_weights=weights,
        neumann_nodes=neumann_pts,
        neumann_weights=np.full(neumann_pts.shape[0], ext_w),
        kappa1=kappa1,
        tail_sigma2=tail,
        h=h,
    )
