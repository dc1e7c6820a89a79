"""Bracketing the extremal parameter Lambda by bisection on solvability.

Below Lambda the monotone iteration converges to the minimal solution; above
it every iterate blows up.  Geometric bisection on that dichotomy yields a
certified-at-desk-scale bracket, which is cross-checked against the
eigenvalue upper bound derived from the concave auxiliary solution.
"""

from fracmixed import (
    DomainSpec,
    ProblemParams,
    assemble_form,
    build_discretization,
    estimate_Lambda,
)

if __name__ == "__main__":
    disc = build_discretization(DomainSpec(resolution=120), s=0.5)
    form = assemble_form(disc)
    params = ProblemParams(s=0.5, q=0.5, p=3.0, lam=1.0)

    bracket = estimate_Lambda(form, params)

    print("solvability probes (lambda, converged?):")
    for lam, ok in bracket.probes:
        print(f"  {lam:10.5f}  {'converged' if ok else 'diverged'}")
    print()
    lo, hi = bracket
    print(f"Lambda in [{lo:.6f}, {hi:.6f}]  "
          f"(relative width {hi / lo - 1.0:.2e})")
    print(f"eigenvalue upper bound: {bracket.bound:.4f}  "
          f"(bracket must sit below it: {hi <= bracket.bound})")
