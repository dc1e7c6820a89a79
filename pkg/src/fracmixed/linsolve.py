"""Linear solves and extreme eigenpairs for the reduced Gagliardo operator.

The operator is dense but small at desk scale, so the default path is a
cached Cholesky factorization; larger systems fall back to conjugate
gradients with a diagonal preconditioner.  Eigenvalues come from shifted
inverse iteration on the mass-scaled pencil.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla

from .errors import ConvergenceError, PureNeumannError
from .operator import Field, GagliardoForm, neumann_extension

__all__ = ["solve_linear", "stampacchia_linfty_bound", "min_eigen"]

DENSE_FACTOR_CAP = 500


def _cholesky(form: GagliardoForm):
    if form._chol is None:
        form._chol = sla.cho_factor(form.A, lower=True, check_finite=False)
    return form._chol


def solve_linear(form: GagliardoForm, f: np.ndarray, tol: float = 1.0e-10) -> Field:
    """Solve A u = W f (the weak linear problem with homogeneous mixed data).

    Requires a nonempty Dirichlet region: the pure-Neumann operator is
    singular on constants and is rejected explicitly.  Returns the field with
    its Sigma2 extension attached; the residual satisfies
    ||A u - W f|| <= tol ||W f||.
    """
    if not form.disc.spec.has_dirichlet:
        raise PureNeumannError(
            "Sigma1 is empty: the reduced operator is singular on constants"
        )
    f = np.asarray(f, dtype=float)
    rhs = form.mass * f
    if form.n <= DENSE_FACTOR_CAP:
        u = sla.cho_solve(_cholesky(form), rhs, check_finite=False)
    else:
        u, history = _pcg(form.A, rhs, tol)
        if history[-1] > tol * max(np.linalg.norm(rhs), 1e-300):
            raise ConvergenceError(
                f"CG stalled at residual {history[-1]:.3e}", history=history
            )
    res = np.linalg.norm(form.A @ u - rhs)
    scale = np.linalg.norm(rhs)
    if scale > 0 and res > tol * scale:
        # One step of iterative refinement covers mildly ill-conditioned cases.
        du = sla.cho_solve(_cholesky(form), rhs - form.A @ u, check_finite=False)
        u = u + du
        res = np.linalg.norm(form.A @ u - rhs)
        if res > tol * scale:
            raise ConvergenceError(
                f"linear solve residual {res:.3e} exceeds {tol:.1e} * ||Wf||",
                history=[res],
            )
    return Field(interior=u, neumann=neumann_extension(form.disc, u))


def _pcg(A, rhs, tol, max_iter=5000):
    diag = np.diag(A)
    M = spla.LinearOperator(A.shape, matvec=lambda v: v / diag)
    history = []

    def cb(xk):
        history.append(np.linalg.norm(A @ xk - rhs))

    u, info = spla.cg(A, rhs, rtol=tol, atol=0.0, M=M, maxiter=max_iter, callback=cb)
    if not history:
        history.append(np.linalg.norm(A @ u - rhs))
    return u, history


def stampacchia_linfty_bound(form: GagliardoForm, f: np.ndarray, m: float) -> float:
    """A priori sup-norm bound via the discrete level-set recursion.

    Runs the truncation/Chebyshev chain with discretely valid constants: the
    coercivity eigenvalue stands in for the Sobolev constant through the
    crude embedding ||u||_r^2 <= w_min^(2/r - 1) ||u||_2^2.  The bound is
    finite and dominates the solution sup-norm, but is not claimed tight.
    """
    N = form.disc.kernel.N
    s = form.disc.kernel.s
    if m <= N / (2.0 * s):
        raise ValueError(f"integrability exponent m={m} must exceed N/(2s)")
    f = np.asarray(f, dtype=float)
    w = form.mass
    norm_f = float((w * np.abs(f) ** m).sum() ** (1.0 / m))
    if norm_f == 0.0:
        return 0.0

    if N > 2.0 * s:
        r = 2.0 * N / (N - 2.0 * s)
    else:
        # Morrey regime: any finite exponent embeds; pick one making the
        # level-set recursion supercritical.
        r = max(4.0, 2.0 * (2.0 * m / (m - 1.0)))
    beta = r * (1.0 - 1.0 / r - 1.0 / m)
    if beta <= 1.0:
        raise ValueError("level-set exponent not supercritical; increase m")

    lam1, _ = min_eigen(form, weight=None)
    w_min = float(w.min())
    S = lam1 * w_min ** (1.0 - 2.0 / r)
    volume = float(w.sum())
    C = (norm_f / S) ** r
    d = (C * volume ** (beta - 1.0) * 2.0 ** (r * beta / (beta - 1.0))) ** (1.0 / r)
    return float(d)


def min_eigen(
    form: GagliardoForm,
    weight=None,
    tol: float = 1.0e-8,
    max_iter: int = 200,
):
    """Smallest eigenpair of (A - W_weight) u = mu W u with ||u||_W = 1.

    Shifted inverse iteration on the mass-scaled symmetric matrix, starting
    from a Gershgorin lower bound and switching to Rayleigh shifts once the
    estimate settles.  The eigenvector sign is fixed to nonnegative mean.
    """
    w = form.mass
    if weight is None:
        weight = np.zeros(form.n)
    weight = np.asarray(weight, dtype=float)
    if weight.shape != (form.n,) or not np.all(np.isfinite(weight)):
        raise ValueError("weight must be a finite vector over interior nodes")

    sqw = np.sqrt(w)
    B = (form.A / sqw[:, None]) / sqw[None, :]
    B[np.diag_indices(form.n)] -= weight
    B = 0.5 * (B + B.T)

    diag = np.diag(B)
    radius = np.abs(B).sum(axis=1) - np.abs(diag)
    sigma = float((diag - radius).min()) - 1.0

    rng_v = np.ones(form.n) + 1e-3 * np.sin(np.arange(form.n))
    v = rng_v / np.linalg.norm(rng_v)
    rho = float(v @ (B @ v))
    history = []
    for it in range(max_iter):
        try:
            lu = sla.lu_factor(B - sigma * np.eye(form.n), check_finite=False)
            v_new = sla.lu_solve(lu, v, check_finite=False)
        except (sla.LinAlgError, ValueError):
            sigma -= max(1.0, abs(sigma)) * 1e-8
            continue
        v = v_new / np.linalg.norm(v_new)
        rho = float(v @ (B @ v))
        res = float(np.linalg.norm(B @ v - rho * v))
        history.append(res)
        if res <= tol * max(1.0, abs(rho)):
            break
        if it >= 4:
            sigma = rho - max(res, 1e-12)
    else:
        raise ConvergenceError(
            f"inverse iteration residual {history[-1]:.3e} above tolerance",
            history=history,
        )
    phi = v / sqw
    nrm = float(np.sqrt((w * phi**2).sum()))
    phi = phi / nrm
    if phi.sum() < 0:
        phi = -phi
    return rho, phi
