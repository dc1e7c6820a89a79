"""Acceptance gate: the nine primary criteria at desk scale.

Default configuration: 1D, Omega=(0,1), Dirichlet left exterior, Neumann
right exterior, R=20, n=200, s=0.5, q=0.5, p=3.  Each criterion prints an
explicit PASS line with its measured numbers so a failed run localizes fast.
"""

import time

import numpy as np

from fracmixed import (
    Branch,
    Diverged,
    DomainSpec,
    apply_frac_laplacian,
    assemble_form,
    build_discretization,
    energy_J,
    find_minimal,
    grad_J,
    min_eigen,
    monotone_iterate,
    mountain_pass_second,
    oracle_pv,
    run_suite,
    solve_concave,
)
from fracmixed.cli import main as cli_main

from fields import R_TRUNC, damped_random_coeffs, make_closure

# The assembled row is a cell average while the oracle is pointwise; within
# O(h) of the interfaces the two notions legitimately differ (logarithmic
# boundary layer of the operator at the Neumann interface), so the
# consistency norm is taken on the fixed compact subdomain [0.05, 0.95].
ORACLE_MARGIN = 0.05


def _field_error(coeffs, n):
    d = build_discretization(DomainSpec(resolution=n), s=0.5)
    form = assemble_form(d)
    x = d.interior_nodes[:, 0]
    f, closure, _ = make_closure(coeffs)
    rd = apply_frac_laplacian(d, form, f(x))
    mask = (x >= ORACLE_MARGIN) & (x <= 1.0 - ORACLE_MARGIN)
    ro = np.array(
        [
            oracle_pv(closure, xi, 0.5, breakpoints=[xi, 1.0 - xi, R_TRUNC - xi])
            for xi in x[mask]
        ]
    )
    w = d.interior_weights[mask]
    return float(np.sqrt((w * (rd[mask] - ro) ** 2).sum() / (w * ro**2).sum()))


def test_criterion_1_operator_consistency():
    t0 = time.monotonic()
    rng = np.random.default_rng(7)
    ratios, errors = [], []
    for _ in range(5):
        cs = damped_random_coeffs(rng)
        e200 = _field_error(cs, 200)
        e400 = _field_error(cs, 400)
        errors.append(e200)
        ratios.append(e200 / e400)
    elapsed = time.monotonic() - t0
    assert max(errors) < 1e-2, f"worst relative L2 error {max(errors):.3e}"
    assert min(ratios) >= 2.0, f"worst refinement ratio {min(ratios):.2f}"
    assert elapsed < 30.0
    print(
        f"PASS criterion 1: operator consistency, worst err {max(errors):.2e}, "
        f"worst ratio {min(ratios):.2f}, {elapsed:.1f}s"
    )


def test_criterion_2_form_invariants(disc200, form200):
    t0 = time.monotonic()
    assert np.abs(form200.A - form200.A.T).max() == 0.0
    lam1, _ = min_eigen(form200)
    assert lam1 > 0.0
    e = np.ones(form200.n)
    lhs = float(e @ (form200.A @ e))
    rhs = 2.0 * float((disc200.interior_weights * disc200.kappa1).sum())
    assert abs(lhs - rhs) <= 1e-10 * rhs
    elapsed = time.monotonic() - t0
    assert elapsed < 10.0
    print(
        f"PASS criterion 2: form invariants, lambda_1 = {lam1:.4f}, "
        f"constant identity rel err {abs(lhs - rhs) / rhs:.1e}, {elapsed:.1f}s"
    )


def test_criterion_3_inequality_suite(form200, params):
    t0 = time.monotonic()
    results, summary = run_suite(form200, params, seed=1234, n_cases=100)
    elapsed = time.monotonic() - t0
    counts = {}
    for r in results:
        counts[r.name] = counts.get(r.name, 0) + 1
    assert counts["picone"] >= 100 and counts["truncation"] >= 100
    assert counts["weak_max"] >= 100
    assert summary["failed"] == 0, [r for r in results if r.status == "FAIL"]
    assert summary["skipped"] == 0
    assert elapsed < 60.0
    print(
        f"PASS criterion 3: inequality suite, {summary['passed']} checks, "
        f"seed {summary['seed']}, {elapsed:.1f}s"
    )


def test_criterion_4_minimal_branch(form200, params, bracket):
    t0 = time.monotonic()
    lams = np.geomspace(1e-3 * bracket.lo, 0.9 * bracket.lo, 8)
    records = []
    for lam in lams:
        rec = find_minimal(form200, params.with_lam(float(lam)))
        assert not isinstance(rec, Diverged), f"diverged at lam={lam}"
        assert rec.energy < 0.0
        assert rec.mu1 >= -1e-6
        records.append(rec)
    Branch(records=records, bracket=(bracket.lo, bracket.hi))  # monotone within 1e-8
    elapsed = time.monotonic() - t0
    assert elapsed < 120.0
    print(
        f"PASS criterion 4: minimal branch over 8 lambdas in "
        f"[{lams[0]:.3g}, {lams[-1]:.3g}], all J<0, mu1>=-1e-6, monotone, "
        f"{elapsed:.1f}s"
    )


def test_criterion_5_lambda_bracketing(form200, params, bracket):
    t0 = time.monotonic()
    width = bracket.hi / bracket.lo - 1.0
    assert width <= 1e-2, f"bracket relative width {width:.3e}"
    assert bracket.lo > 0.0 and np.isfinite(bracket.hi)
    assert bracket.lo <= bracket.bound * 1.05
    z1 = solve_concave(form200, params.with_lam(1.0)).field.interior
    exp = 1.0 / (1.0 - params.q)
    for mult in (1.1, 1.5):
        lam = mult * bracket.hi
        out = monotone_iterate(
            form200, params.with_lam(lam), lam**exp * z1, tol=1e-9, max_iter=2000
        )
        assert isinstance(out, Diverged), f"probe at {mult}*Lambda_hi converged"
    elapsed = time.monotonic() - t0 + getattr(bracket, "elapsed", 0.0)
    assert elapsed < 300.0
    print(
        f"PASS criterion 5: bracket [{bracket.lo:.5g}, {bracket.hi:.5g}] "
        f"(width {width:.2e}, bound {bracket.bound:.4g}), divergence above, "
        f"{elapsed:.1f}s"
    )


def test_criterion_6_second_solutions(form200, params, bracket):
    t0 = time.monotonic()
    u_bar = find_minimal(form200, params.with_lam(0.9 * bracket.lo))
    seps = []
    for frac in (0.1, 0.5, 0.8):
        lam = frac * bracket.lo
        u_min = find_minimal(form200, params.with_lam(lam))
        second = mountain_pass_second(
            form200, params.with_lam(lam), u_min, u_bar.field.interior, tol=1e-8
        )
        assert second.residual <= 1e-8
        gap = second.field.interior - u_min.field.interior
        assert gap.min() >= -1e-8
        sep = float(np.abs(gap).max())
        assert sep > 1e-4
        assert energy_J(form200, params.with_lam(lam), second.field.interior) > u_min.energy
        seps.append(sep)
    elapsed = time.monotonic() - t0
    assert elapsed < 300.0
    print(
        f"PASS criterion 6: second solutions at 0.1/0.5/0.8 Lambda_lo, "
        f"separations {['%.3g' % s for s in seps]}, {elapsed:.1f}s"
    )


def test_criterion_7_concave_scaling(form200, params):
    t0 = time.monotonic()
    z1 = solve_concave(form200, params.with_lam(1.0)).field.interior
    exp = 1.0 / (1.0 - params.q)
    for lam in (0.1, 1.0, 10.0):
        z = solve_concave(form200, params.with_lam(lam)).field.interior
        err = np.abs(z - lam**exp * z1).max() / z.max()
        assert err < 1e-6, f"scaling law violated at lam={lam}: {err:.2e}"
    rng = np.random.default_rng(21)
    za = solve_concave(form200, params, u0=0.5 + rng.random(form200.n)).field.interior
    zb = solve_concave(form200, params, u0=5.0 * rng.random(form200.n) + 1.0).field.interior
    uniq = np.abs(za - zb).max()
    assert uniq < 1e-8
    elapsed = time.monotonic() - t0
    assert elapsed < 30.0
    print(
        f"PASS criterion 7: concave scaling to 1e-6, uniqueness gap "
        f"{uniq:.1e}, {elapsed:.1f}s"
    )


def test_criterion_8_gradient_correctness(form200, params):
    t0 = time.monotonic()
    rng = np.random.default_rng(42)
    pl = params.with_lam(1.7)
    eps = 1e-5
    worst = 0.0
    for _ in range(20):
        u = 0.5 + rng.random(form200.n)
        for _ in range(20):
            v = rng.standard_normal(form200.n)
            fd = (
                energy_J(form200, pl, u + eps * v) - energy_J(form200, pl, u - eps * v)
            ) / (2.0 * eps)
            an = float(grad_J(form200, pl, u) @ v)
            worst = max(worst, abs(fd - an) / max(abs(an), 1e-300))
    assert worst < 1e-6, f"worst gradient mismatch {worst:.2e}"
    elapsed = time.monotonic() - t0
    assert elapsed < 10.0
    print(f"PASS criterion 8: gradient vs finite differences, worst rel err "
          f"{worst:.1e}, {elapsed:.1f}s")


def test_criterion_9_csv_determinism(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text(
        "seed = 11\n"
        "[domain]\nresolution = 100\n"
        '[lambda]\nmode = "single"\nvalues = [0.5, 1.0, 2.0]\n'
    )
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    assert cli_main(["solve", "--config", str(cfg), "--out", str(out1), "--quiet"]) == 0
    assert cli_main(["solve", "--config", str(cfg), "--out", str(out2), "--quiet"]) == 0
    b1 = (out1 / "branch.csv").read_bytes()
    b2 = (out2 / "branch.csv").read_bytes()
    assert b1 == b2
    print(f"PASS criterion 9: cmd_solve CSV byte-identical across runs "
          f"({len(b1)} bytes)")
