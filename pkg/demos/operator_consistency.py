"""Assembled fractional Laplacian vs an adaptive-quadrature oracle.

Builds the default mixed-exterior discretization of Omega = (0, 1) (Dirichlet
on the left half-line, nonlocal Neumann on [1, R]), applies the assembled
operator to a smooth compactly supported field, and compares row by row with
a direct principal-value quadrature of the kernel integral.

The assembled row is a cell average while the oracle is pointwise; within
O(h) of the interfaces the two notions legitimately differ, so the comparison
is restricted to the fixed window [0.05, 0.95].  Run at two resolutions to
see the first-order decay of the discrepancy.
"""

import numpy as np

from fracmixed import (
    DomainSpec,
    apply_frac_laplacian,
    assemble_form,
    build_discretization,
    neumann_extension,
    oracle_pv,
)

S = 0.5
R = 20.0


def field(x):
    return x**2 * (1.0 - x) ** 2 * (1.0 + 0.5 * x)


def run(n):
    disc = build_discretization(DomainSpec(resolution=n, truncation_radius=R), s=S)
    form = assemble_form(disc)
    x = disc.interior_nodes[:, 0]
    u = field(x)

    # Pointwise closure for the oracle: the interior profile, zero on the
    # Dirichlet side, and the discrete Neumann extension (cell averages) on
    # the right, held flat beyond the truncation radius.
    ext = neumann_extension(disc, u)
    y_ext = disc.neumann_nodes[:, 0]
    far = float(ext.mean())

    def closure(pts):
        pts = np.asarray(pts, dtype=float).reshape(-1)
        out = np.zeros_like(pts)
        inside = (pts > 0.0) & (pts < 1.0)
        out[inside] = field(pts[inside])
        right = pts >= 1.0
        idx = np.clip(np.searchsorted(y_ext, pts[right]) - 1, 0, y_ext.size - 1)
        out[right] = np.where(pts[right] < R, ext[idx], far)
        return out

    discrete = apply_frac_laplacian(disc, form, u)
    mask = (x >= 0.05) & (x <= 0.95)
    oracle = np.array(
        [oracle_pv(closure, xi, S, breakpoints=[xi, 1.0 - xi, R - xi]) for xi in x[mask]]
    )
    w = disc.interior_weights[mask]
    rel = np.sqrt((w * (discrete[mask] - oracle) ** 2).sum() / (w * oracle**2).sum())
    return rel


if __name__ == "__main__":
    print("weighted relative L2 discrepancy on [0.05, 0.95]:")
    errs = {}
    for n in (100, 200):
        errs[n] = run(n)
        print(f"  n = {n:4d}:  {errs[n]:.3e}")
    # The oracle reuses the piecewise-constant discrete extension on the
    # Neumann side, so part of the discrepancy is shared between levels and
    # the observed ratio sits below the clean first-order value of 2 (the
    # acceptance tests use a closed-form extension and recover ratio >= 2).
    print(f"refinement ratio: {errs[100] / errs[200]:.2f}")
