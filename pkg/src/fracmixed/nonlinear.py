"""Constructive solvers for the concave-convex problem lam*u^q + u^p.

The pipeline follows the classical sub/supersolution program: a concave
auxiliary solution provides the subsolution seed, a monotone iteration climbs
to the minimal solution, bisection on lam brackets the extremal threshold,
and a translated mountain-pass search produces the second solution below it.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np
import scipy.linalg as sla

from .errors import (
    BracketInconsistencyError,
    CapViolationError,
    ConvergenceError,
    FracmixedError,
)
from .operator import Field, GagliardoForm, ProblemParams, energy_J, grad_J, neumann_extension
from .linsolve import min_eigen, solve_linear

__all__ = [
    "SolutionRecord",
    "Branch",
    "Diverged",
    "solve_concave",
    "monotone_iterate",
    "find_minimal",
    "mu1_linearized",
    "lambda_star",
    "estimate_Lambda",
    "BracketResult",
    "extremal_solution",
    "mountain_pass_second",
]

POSITIVITY_FLOOR = 1.0e-14
KINDS = ("minimal", "extremal", "mountain_pass", "concave_aux")


@dataclass
class Diverged:
    """Sentinel for a monotone iteration that left every bounded regime."""

    lam: float
    sup_history: list
    reason: str

    def __bool__(self):
        return False


@dataclass
class SolutionRecord:
    """One converged solution with its diagnostics."""

    lam: float
    field: Field
    residual: float
    energy: float
    sup_norm: float
    mu1: float | None
    kind: str
    iterations: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown record kind {self.kind!r}")
        if np.min(self.field.interior) < -1.0e-10 * max(1.0, self.sup_norm):
            raise FracmixedError("solution record violates nonnegativity slack")


@dataclass
class Branch:
    """Minimal-solution family ordered by lam, with the Lambda bracket."""

    records: list
    bracket: tuple = (0.0, np.inf)

    def __post_init__(self):
        lams = [r.lam for r in self.records]
        if any(b <= a for a, b in zip(lams, lams[1:])):
            raise FracmixedError("branch lambdas must be strictly increasing")
        for lo, hi in zip(self.records, self.records[1:]):
            gap = float(np.min(hi.field.interior - lo.field.interior))
            if gap < -1.0e-8:
                raise FracmixedError(
                    f"branch ordering violated between lam={lo.lam} and {hi.lam}"
                )


def _raw_residual(form, params, u):
    return float(np.abs(grad_J(form, params, u)).max())


def _record(form, params, u, kind, iterations, mu1=None):
    u = np.asarray(u, dtype=float)
    return SolutionRecord(
        lam=params.lam,
        field=Field(interior=u, neumann=neumann_extension(form.disc, u)),
        residual=_raw_residual(form, params, u),
        energy=energy_J(form, params, u),
        sup_norm=float(np.abs(u).max()),
        mu1=mu1,
        kind=kind,
        iterations=iterations,
    )


def _newton_polish(form, residual_fn, jacobian_fn, u, tol, max_iter=50, positive=False):
    """Damped Newton on a nodal residual; returns (u, iterations).

    The Jacobian may be indefinite (saddle points are legitimate targets);
    damping only enforces decrease of the residual norm.
    """
    r = residual_fn(u)
    nrm = np.linalg.norm(r)
    for it in range(max_iter):
        if np.abs(r).max() <= tol:
            return u, it
        J = jacobian_fn(u)
        try:
            step = sla.lu_solve(sla.lu_factor(J, check_finite=False), r, check_finite=False)
        except (sla.LinAlgError, ValueError):
            raise ConvergenceError("singular Jacobian in Newton polish")
        t = 1.0
        while t > 1.0e-12:
            u_try = u - t * step
            if positive:
                u_try = np.maximum(u_try, 0.0)
            r_try = residual_fn(u_try)
            n_try = np.linalg.norm(r_try)
            if n_try < (1.0 - 0.25 * t) * nrm or n_try < tol:
                u, r, nrm = u_try, r_try, n_try
                break
            t *= 0.5
        else:
            raise ConvergenceError(
                f"Newton line search stalled at residual {nrm:.3e}"
            )
    if np.abs(r).max() <= tol:
        return u, max_iter
    raise ConvergenceError(f"Newton did not reach tolerance; residual {nrm:.3e}")


def solve_concave(form: GagliardoForm, params: ProblemParams, u0=None, tol: float = 1.0e-11):
    """Unique positive solution of the concave problem (-Lap)^s z = lam z^q.

    The fixed-point map z -> solve_linear(lam z^q) is a contraction on the
    positive cone with rate q, so any positive start converges to the same
    solution; a short Newton polish then drives the nodal gradient below
    tolerance.  The solution obeys the scaling law z_lam = lam^(1/(1-q)) z_1.
    """
    lam, q = params.lam, params.q
    if lam <= 0:
        raise ValueError("solve_concave requires lam > 0")
    if not (0.0 < q < 1.0):
        raise ValueError("solve_concave requires 0 < q < 1")
    w = form.mass
    if u0 is None:
        u = solve_linear(form, np.full(form.n, lam)).interior
    else:
        u = np.maximum(np.asarray(u0, dtype=float), POSITIVITY_FLOOR)
    its = 0
    for its in range(1, 200):
        u_new = solve_linear(form, lam * np.maximum(u, 0.0) ** q).interior
        rel = np.abs(u_new - u).max() / max(u_new.max(), POSITIVITY_FLOOR)
        u = u_new
        if rel < 1.0e-12:
            break

    def res(v):
        return form.A @ v - w * (lam * np.maximum(v, 0.0) ** q)

    def jac(v):
        vp = np.maximum(v, POSITIVITY_FLOOR)
        J = form.A.copy()
        J[np.diag_indices(form.n)] -= w * lam * q * vp ** (q - 1.0)
        return J

    u, polish_its = _newton_polish(form, res, jac, u, tol, positive=True)
    conc = (w * np.maximum(u, 0.0) ** (q + 1.0)).sum() / (q + 1.0)
    objective = 0.5 * form.energy(u) - lam * conc
    rec = SolutionRecord(
        lam=lam,
        field=Field(interior=u, neumann=neumann_extension(form.disc, u)),
        residual=float(np.abs(res(u)).max()),
        energy=objective,
        sup_norm=float(u.max()),
        mu1=None,
        kind="concave_aux",
        iterations=its + polish_its,
    )
    return rec


def monotone_iterate(
    form: GagliardoForm,
    params: ProblemParams,
    v0,
    cap=None,
    tol: float = 1.0e-10,
    max_iter: int = 1000,
    history_out: list | None = None,
):
    """Monotone iteration v_n = solve_linear(lam v^q + v^p) from a subsolution.

    Returns a SolutionRecord on convergence, or the Diverged sentinel when the
    sup-norm passes the blow-up threshold / keeps growing at the iteration cap
    (the numerical signature of lam above the extremal threshold).
    """
    lam, q, p = params.lam, params.q, params.p
    v = np.maximum(np.asarray(v0, dtype=float), 0.0)
    blow_up = 1.0e6 * (1.0 + float(v.max()))
    sup_hist = [float(v.max())]
    if cap is not None:
        cap = np.asarray(cap, dtype=float)
    for it in range(1, max_iter + 1):
        rhs = lam * v**q + v**p
        v_new = solve_linear(form, rhs).interior
        v_new = np.maximum(v_new, 0.0)
        sup = float(v_new.max())
        sup_hist.append(sup)
        if not np.isfinite(sup) or sup > blow_up:
            return Diverged(lam=lam, sup_history=sup_hist, reason="blow-up threshold")
        if cap is not None and np.any(v_new > cap + 1.0e-10 * max(1.0, sup)):
            raise CapViolationError(
                f"iterate escaped its supersolution cap at iteration {it}"
            )
        delta = float(np.abs(v_new - v).max())
        v = v_new
        if history_out is not None:
            history_out.append(v.copy())
        if delta < tol:
            return _record(form, params, v, kind="minimal", iterations=it)
    if len(sup_hist) > 10 and sup_hist[-1] > sup_hist[-10] * (1.0 + 1.0e-10):
        return Diverged(lam=lam, sup_history=sup_hist, reason="still growing at max_iter")
    raise ConvergenceError(
        f"monotone iteration stagnated below tolerance at lam={lam}",
        history=sup_hist,
    )


def mu1_linearized(form: GagliardoForm, u, params: ProblemParams) -> float:
    """Stability index: smallest eigenvalue of the linearization at u.

    The weight a(x) = lam*q*u^(q-1) + p*u^(p-1) is singular at u = 0, so the
    field must be strictly positive; minimal solutions come out with mu1 >= 0.
    """
    u = np.asarray(u, dtype=float)
    if np.any(u <= POSITIVITY_FLOOR):
        raise ValueError("mu1 weight is singular: field has a nonpositive node")
    a_weight = params.lam * params.q * u ** (params.q - 1.0) + params.p * u ** (
        params.p - 1.0
    )
    val, _ = min_eigen(form, weight=a_weight)
    return float(val)


def lambda_star(form: GagliardoForm, z, p: float) -> float:
    """Rayleigh threshold inf ||phi||^2 / int z^(p-1) phi^2 for the bound on Lambda.

    Computed as the smallest eigenvalue of A phi = mu * W_{z^(p-1)} phi; the
    derived upper bound for the extremal parameter is lambda_star^((1-q)/(p-1)).
    """
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0.0):
        raise ValueError("lambda_star requires a strictly positive field")
    M = form.mass * z ** (p - 1.0)
    vals = sla.eigh(
        form.A, np.diag(M), subset_by_index=[0, 0], check_finite=False
    )[0]
    return float(vals[0])


@dataclass
class BracketResult:
    """Bisection output: certified-at-desk-scale bracket for Lambda."""

    lo: float
    hi: float
    bound: float
    probes: list = dc_field(default_factory=list)

    def __iter__(self):
        return iter((self.lo, self.hi))


def _probe(form, params, lam, z_unit, probe_tol, max_iter):
    """One bisection probe: monotone iteration seeded by the scaled concave solution."""
    pl = params.with_lam(lam)
    z_lam = lam ** (1.0 / (1.0 - params.q)) * z_unit
    try:
        result = monotone_iterate(form, pl, z_lam, tol=probe_tol, max_iter=max_iter)
    except ConvergenceError:
        return None, False
    if isinstance(result, Diverged):
        return result, False
    return result, True


def estimate_Lambda(
    form: GagliardoForm,
    params: ProblemParams,
    bracket_tol: float = 1.0e-2,
    probe_tol: float = 1.0e-9,
    probe_max_iter: int = 2000,
) -> BracketResult:
    """Bisection bracket (Lambda_lo, Lambda_hi) for the extremal threshold.

    Success of the seeded monotone iteration certifies lam in the solvable
    interval; divergence is treated as above-threshold evidence (numerical,
    not a proof).  The rigorous Rayleigh bound lambda_star^((1-q)/(p-1)) caps
    the search and is cross-checked against the bracket.
    """
    if bracket_tol <= 0:
        raise ValueError("bracket_tol must be positive")
    q, p = params.q, params.p
    z1 = solve_concave(form, params.with_lam(1.0)).field.interior
    lam_star = lambda_star(form, z1, p)
    bound = lam_star ** ((1.0 - q) / (p - 1.0)) if p > 1.0 + 1.0e-12 else np.inf

    probes = []

    def run(lam):
        _, ok = _probe(form, params, lam, z1, probe_tol, probe_max_iter)
        probes.append((lam, ok))
        return ok

    hi = bound if np.isfinite(bound) else 1.0
    while run(hi):
        hi *= 1.3
        if hi > 1.0e6 * max(bound, 1.0):
            raise ConvergenceError("no failing probe found; threshold unbounded?")
    lo = hi / 2.0
    while not run(lo):
        lo /= 2.0
        if lo < 1.0e-12:
            raise ConvergenceError("no succeeding probe found; threshold at zero?")
    while hi / lo - 1.0 > bracket_tol:
        mid = np.sqrt(lo * hi)
        if run(mid):
            lo = mid
        else:
            hi = mid
    successes = [l for l, ok in probes if ok]
    failures = [l for l, ok in probes if not ok]
    if successes and failures and max(successes) > min(failures) * (1.0 + 1.0e-12):
        raise BracketInconsistencyError(
            f"probe succeeded at {max(successes)} above a failure at {min(failures)}"
        )
    return BracketResult(lo=float(lo), hi=float(hi), bound=float(bound), probes=probes)


def find_minimal(form: GagliardoForm, params: ProblemParams, tol: float = 1.0e-10):
    """Minimal positive solution at params.lam via the monotone scheme.

    Seeds from the concave auxiliary solution (a subsolution for lam fixed),
    climbs monotonically, then Newton-polishes the nodal gradient.  Asserts
    the minimal-branch signatures: negative energy and mu1 >= -1e-6.
    """
    if params.lam <= 0:
        raise ValueError("find_minimal requires lam > 0")
    z = solve_concave(form, params)
    result = monotone_iterate(form, params, z.field.interior, tol=max(tol, 1.0e-10))
    if isinstance(result, Diverged):
        return result
    u = result.field.interior

    w = form.mass

    def res(v):
        return grad_J(form, params, v)

    def jac(v):
        vp = np.maximum(v, POSITIVITY_FLOOR)
        J = form.A.copy()
        J[np.diag_indices(form.n)] -= w * (
            params.lam * params.q * vp ** (params.q - 1.0)
            + params.p * vp ** (params.p - 1.0)
        )
        return J

    u, polish_its = _newton_polish(form, res, jac, u, tol, positive=True)
    mu1 = mu1_linearized(form, u, params)
    rec = _record(
        form, params, u, kind="minimal", iterations=result.iterations + polish_its, mu1=mu1
    )
    if rec.energy >= 0.0:
        raise FracmixedError(f"minimal solution with nonnegative energy {rec.energy}")
    if mu1 < -1.0e-6:
        raise FracmixedError(f"minimal solution with unstable index mu1={mu1}")
    return rec


def extremal_solution(form: GagliardoForm, params: ProblemParams, lam_lo: float):
    """Solution at the lower bracket edge, the desk-scale stand-in for u*.

    Continues the minimal branch to lam = lam_lo with damped Newton seeded by
    the last comfortably-converged minimal solution, after checking the
    uniform energy bound that justifies passing to the limit:
    (1/2 - 1/(p+1)) ||u||^2 <= lam (1/(q+1) - 1/(p+1)) ||u_+||_{q+1}^{q+1}.
    """
    q, p = params.q, params.p
    seed_lams = [0.98 * lam_lo, 0.9 * lam_lo, 0.75 * lam_lo]
    last = None
    for sl in seed_lams:
        try:
            rec = find_minimal(form, params.with_lam(sl))
        except (ConvergenceError, FracmixedError):
            continue
        if isinstance(rec, Diverged):
            continue
        u = rec.field.interior
        lhs = (0.5 - 1.0 / (p + 1.0)) * form.energy(u)
        rhs = (
            sl
            * (1.0 / (q + 1.0) - 1.0 / (p + 1.0))
            * float((form.mass * np.maximum(u, 0.0) ** (q + 1.0)).sum())
        )
        if lhs > rhs * (1.0 + 1.0e-8):
            raise FracmixedError(
                "uniform energy bound violated along the branch; refusing to extrapolate"
            )
        last = rec
        break
    if last is None:
        raise ConvergenceError("no converged minimal solution near the bracket edge")

    pl = params.with_lam(lam_lo)
    w = form.mass

    def res(v):
        return grad_J(form, pl, v)

    def jac(v):
        vp = np.maximum(v, POSITIVITY_FLOOR)
        J = form.A.copy()
        J[np.diag_indices(form.n)] -= w * (
            pl.lam * pl.q * vp ** (pl.q - 1.0) + pl.p * vp ** (pl.p - 1.0)
        )
        return J

    try:
        u, its = _newton_polish(form, res, jac, last.field.interior, 1.0e-10, positive=True)
    except ConvergenceError:
        # Report the branch endpoint rather than fabricating a limit.
        return SolutionRecord(
            lam=last.lam,
            field=last.field,
            residual=last.residual,
            energy=last.energy,
            sup_norm=last.sup_norm,
            mu1=last.mu1,
            kind="extremal",
            iterations=last.iterations,
        )
    mu1 = mu1_linearized(form, u, pl)
    return _record(form, pl, u, kind="extremal", iterations=last.iterations + its, mu1=mu1)


# ---------------------------------------------------------------------------
# Mountain pass
# ---------------------------------------------------------------------------


def _translated_pieces(form, params, theta):
    """Nonlinearity g, primitive G, and derivative g' of the translated functional.

    g(r) = lam((theta+r)^q - theta^q) + (theta+r)^p - theta^p for r >= 0 and 0
    below, so critical points v >= 0 of J_hat(v) = 1/2||v||^2 - int G(v)
    correspond to solutions theta + v of the original problem above theta.
    """
    lam, q, p = params.lam, params.q, params.p
    th = np.maximum(theta, POSITIVITY_FLOOR)

    def g(r):
        rp = np.maximum(r, 0.0)
        with np.errstate(over="ignore", invalid="ignore"):
            return lam * ((th + rp) ** q - th**q) + (th + rp) ** p - th**p

    def G(r):
        rp = np.maximum(r, 0.0)
        with np.errstate(over="ignore", invalid="ignore"):
            conc = ((th + rp) ** (q + 1.0) - th ** (q + 1.0)) / (q + 1.0) - th**q * rp
            conv = ((th + rp) ** (p + 1.0) - th ** (p + 1.0)) / (p + 1.0) - th**p * rp
            return lam * conc + conv

    def gprime(r):
        rp = np.maximum(r, 0.0)
        d = lam * q * (th + rp) ** (q - 1.0) + p * (th + rp) ** (p - 1.0)
        return np.where(r >= 0.0, d, 0.0)

    return g, G, gprime


def _box_minimize(form, params, u_bar, start, tol, max_iter=2000):
    """Projected gradient descent for J over the box 0 <= u <= u_bar."""
    u = np.clip(np.asarray(start, dtype=float), 0.0, u_bar)
    step = 1.0 / np.abs(form.A).sum(axis=1).max()
    val = energy_J(form, params, u)
    for _ in range(max_iter):
        gvec = grad_J(form, params, u)
        t = step
        moved = 0.0
        while t > 1.0e-16 * step:
            u_try = np.clip(u - t * gvec, 0.0, u_bar)
            v_try = energy_J(form, params, u_try)
            if v_try < val - 1.0e-16 * abs(val):
                moved = float(np.abs(u_try - u).max())
                u, val = u_try, v_try
                break
            t *= 0.5
        if moved == 0.0:
            break
        if moved < 0.01 * tol and t == step:
            break
    return u


def mountain_pass_second(
    form: GagliardoForm,
    params: ProblemParams,
    u_min: SolutionRecord,
    u_bar,
    tol: float = 1.0e-8,
    path_states: int = 21,
    seed: int = 0,
):
    """Second solution above the minimal one via a discretized mountain pass.

    Stage 1 minimizes J over the box [0, u_bar]; if that already yields a
    solution separated from u_min it is returned.  Stage 2 builds the
    translated functional at theta (the box minimizer), finds a downhill
    endpoint, deforms a discrete path by steepest descent on its maximum, and
    Newton-polishes the pass state into a critical point.
    """
    crit = params.critical_exponent(form.disc.kernel.N)
    if params.p >= crit:
        raise ValueError(f"mountain pass requires subcritical p < {crit}")
    u_bar = np.asarray(u_bar, dtype=float)
    rng = np.random.default_rng(seed)
    w = form.mass

    theta = _box_minimize(form, params, u_bar, start=u_min.field.interior, tol=tol)
    theta, _ = _newton_polish(
        form,
        lambda v: grad_J(form, params, v),
        lambda v: _minimal_jacobian(form, params, v),
        theta,
        tol,
        positive=True,
    )
    if np.abs(theta - u_min.field.interior).max() > 10.0 * tol:
        mu1 = mu1_linearized(form, theta, params) if np.all(theta > POSITIVITY_FLOOR) else None
        return _record(form, params, theta, kind="mountain_pass", iterations=0, mu1=mu1)

    g, G, gprime = _translated_pieces(form, params, theta)

    def J_hat(v):
        # Line searches probe huge trial states; non-finite values are
        # rejected by the backtracking, so overflow here is benign.
        with np.errstate(over="ignore", invalid="ignore"):
            return 0.5 * form.energy(v) - float((w * G(v)).sum())

    def grad_hat(v):
        with np.errstate(over="ignore", invalid="ignore"):
            return form.A @ v - w * g(v)

    # Downhill endpoint: scan along the principal eigenfield (positive).
    _, phi = min_eigen(form)
    phi = phi / phi.max()
    scale = abs(J_hat(phi))
    t_end = None
    with np.errstate(over="ignore", invalid="ignore"):
        for t in 1.5 ** np.arange(0, 80):
            val = J_hat(t * phi)
            if not np.isfinite(val):
                break
            if val < -scale - 1.0e-6:
                t_end = t
                break
    if t_end is None:
        raise ConvergenceError("no downhill endpoint found for the translated functional")
    v_end = t_end * phi

    for attempt in range(3):
        path = [s * v_end for s in np.linspace(0.0, 1.0, path_states)]
        if attempt > 0:
            bump = 0.05 * v_end.max() * rng.standard_normal(form.n)
            path = [np.maximum(p_ + min(k, path_states - 1 - k) / path_states * bump, 0.0)
                    for k, p_ in enumerate(path)]
        pass_v, pass_val = _deform_path(form, J_hat, grad_hat, path)
        if pass_val <= 1.0e-12:
            continue  # degenerate pass level; retry perturbed
        try:
            v_hat, its = _newton_polish(
                form,
                grad_hat,
                lambda v: _hat_jacobian(form, w, gprime, v),
                pass_v,
                tol,
            )
        except ConvergenceError:
            continue
        v_hat = np.maximum(v_hat, 0.0)
        if np.abs(v_hat).max() <= 100.0 * tol:
            continue  # collapsed to the trivial critical point
        u2 = theta + v_hat
        rec = _record(form, params, u2, kind="mountain_pass", iterations=its,
                      mu1=mu1_linearized(form, u2, params))
        if np.min(u2 - u_min.field.interior) < -1.0e-8:
            raise FracmixedError("mountain-pass state dropped below the minimal solution")
        if np.abs(u2 - u_min.field.interior).max() <= 10.0 * tol:
            continue
        return rec
    raise ConvergenceError("mountain pass degenerate (level ~ 0) after 3 attempts")


def _minimal_jacobian(form, params, v):
    vp = np.maximum(v, POSITIVITY_FLOOR)
    J = form.A.copy()
    J[np.diag_indices(form.n)] -= form.mass * (
        params.lam * params.q * vp ** (params.q - 1.0)
        + params.p * vp ** (params.p - 1.0)
    )
    return J


def _hat_jacobian(form, w, gprime, v):
    J = form.A.copy()
    J[np.diag_indices(form.n)] -= w * gprime(v)
    return J


def _deform_path(form, J_hat, grad_hat, path, rounds=400):
    """Elastic-string descent: lower the path maximum until it stalls.

    Interior states take backtracking steepest-descent steps (endpoints stay
    fixed); returns the final maximal state and its value.
    """
    path = [p.copy() for p in path]
    P = len(path)
    vals = [J_hat(p) for p in path]
    step0 = 1.0 / np.abs(form.A).sum(axis=1).max()
    last_max = max(vals)
    stall = 0
    for _ in range(rounds):
        for k in range(1, P - 1):
            gvec = grad_hat(path[k])
            t = step0
            while t > 1.0e-14 * step0:
                cand = np.maximum(path[k] - t * gvec, 0.0)
                cv = J_hat(cand)
                if cv < vals[k]:
                    path[k], vals[k] = cand, cv
                    break
                t *= 0.5
        cur_max = max(vals[1:-1])
        if cur_max > last_max - 1.0e-13 * max(1.0, abs(last_max)):
            stall += 1
            if stall >= 3:
                break
        else:
            stall = 0
        last_max = cur_max
    k_star = 1 + int(np.argmax(vals[1:-1]))
    return path[k_star], vals[k_star]
