"""Randomized verification of the structural inequalities.

Runs the nodewise analogues of the estimates the solvers rely on -- the
Picone inequality, weak and strong maximum principles, sub/supersolution
comparison, truncation energy splitting, and a compactness surrogate for
minimizing sequences -- over a seeded batch of random fields, and prints
the per-check tally.
"""

from collections import Counter

from fracmixed import (
    DomainSpec,
    ProblemParams,
    assemble_form,
    build_discretization,
    run_suite,
)

if __name__ == "__main__":
    disc = build_discretization(DomainSpec(resolution=100), s=0.5)
    form = assemble_form(disc)
    params = ProblemParams(s=0.5, q=0.5, p=3.0, lam=1.0)

    results, summary = run_suite(form, params, seed=0, n_cases=50)

    tally = Counter((r.name, r.status) for r in results)
    names = sorted({r.name for r in results})
    print(f"{'check':<14} {'pass':>6} {'fail':>6} {'skip':>6}")
    for name in names:
        print(f"{name:<14} {tally[(name, 'PASS')]:>6} "
              f"{tally[(name, 'FAIL')]:>6} {tally[(name, 'SKIP')]:>6}")
    print()
    print(f"seed {summary['seed']}: {summary['passed']} passed, "
          f"{summary['failed']} failed, {summary['skipped']} skipped")
