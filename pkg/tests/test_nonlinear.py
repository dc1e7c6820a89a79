import numpy as np
import pytest

from fracmixed import (
    Branch,
    CapViolationError,
    Diverged,
    DomainSpec,
    FracmixedError,
    ProblemParams,
    assemble_form,
    build_discretization,
    find_minimal,
    lambda_star,
    monotone_iterate,
    mu1_linearized,
    solve_concave,
)


@pytest.fixture(scope="module")
def setup():
    d = build_discretization(DomainSpec(resolution=100), s=0.5)
    return assemble_form(d), ProblemParams(s=0.5, q=0.5, p=3.0, lam=1.0)


def test_concave_requires_positive_lam(setup):
    form, params = setup
    with pytest.raises(ValueError):
        solve_concave(form, params.with_lam(0.0))


def test_concave_scaling_law(setup):
    form, params = setup
    z1 = solve_concave(form, params.with_lam(1.0)).field.interior
    z2 = solve_concave(form, params.with_lam(2.0)).field.interior
    e = 1.0 / (1.0 - params.q)
    assert np.abs(z2 - 2.0**e * z1).max() <= 1e-6 * z2.max()


def test_concave_positive_and_negative_objective(setup):
    form, params = setup
    rec = solve_concave(form, params)
    assert np.all(rec.field.interior > 0.0)
    assert rec.energy < 0.0
    assert rec.kind == "concave_aux"


def test_monotone_zero_lambda_fixed_point(setup):
    form, params = setup
    rec = monotone_iterate(form, params.with_lam(0.0), np.zeros(form.n))
    assert rec.iterations == 1
    assert rec.sup_norm == 0.0


def test_monotone_sup_nondecreasing_from_subsolution(setup):
    form, params = setup
    pl = params.with_lam(0.5)
    z = solve_concave(form, pl).field.interior
    history = []
    monotone_iterate(form, pl, z, history_out=history)
    sups = [h.max() for h in history]
    assert all(b >= a - 1e-10 for a, b in zip(sups, sups[1:]))


def test_monotone_cap_violation_raises(setup):
    form, params = setup
    pl = params.with_lam(0.5)
    z = solve_concave(form, pl).field.interior
    with pytest.raises(CapViolationError):
        monotone_iterate(form, pl, z, cap=0.5 * z)


def test_monotone_divergence_above_threshold(setup):
    form, params = setup
    z = solve_concave(form, params).field.interior
    out = monotone_iterate(form, params.with_lam(50.0), 50.0**2 * z, max_iter=500)
    assert isinstance(out, Diverged)
    assert not out  # falsy sentinel


def test_find_minimal_contract(setup):
    form, params = setup
    rec = find_minimal(form, params.with_lam(1.0))
    assert rec.kind == "minimal"
    assert rec.energy < 0.0
    assert rec.mu1 >= -1e-6
    assert rec.residual <= 1e-9
    assert np.all(rec.field.interior >= 0.0)


def test_minimal_ordering_in_lambda(setup):
    form, params = setup
    r1 = find_minimal(form, params.with_lam(0.5))
    r2 = find_minimal(form, params.with_lam(1.5))
    diff = r2.field.interior - r1.field.interior
    assert diff.min() >= -1e-8
    assert diff.max() > 0.0  # strict at the interior maximum


def test_branch_validation():
    f = lambda arr: arr  # placeholder
    d = build_discretization(DomainSpec(resolution=50), s=0.5)
    form = assemble_form(d)
    params = ProblemParams(s=0.5, q=0.5, p=3.0, lam=1.0)
    r1 = find_minimal(form, params.with_lam(0.5))
    r2 = find_minimal(form, params.with_lam(1.0))
    Branch(records=[r1, r2])
    with pytest.raises(FracmixedError):
        Branch(records=[r2, r1])


def test_mu1_rejects_nonpositive_field(setup):
    form, params = setup
    with pytest.raises(ValueError):
        mu1_linearized(form, np.zeros(form.n), params)


def test_lambda_star_homogeneity(setup):
    form, params = setup
    z = solve_concave(form, params).field.interior
    l1 = lambda_star(form, z, params.p)
    l2 = lambda_star(form, 2.0 * z, params.p)
    assert np.isclose(l2, l1 * 2.0 ** (-(params.p - 1.0)), rtol=1e-10)


def test_lambda_star_requires_positive_field(setup):
    form, params = setup
    with pytest.raises(ValueError):
        lambda_star(form, np.zeros(form.n), params.p)
