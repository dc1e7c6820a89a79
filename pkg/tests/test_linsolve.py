import numpy as np
import pytest

from fracmixed import (
    DomainSpec,
    PureNeumannError,
    assemble_form,
    build_discretization,
    min_eigen,
    solve_linear,
    stampacchia_linfty_bound,
)


@pytest.fixture(scope="module")
def setup():
    d = build_discretization(DomainSpec(resolution=100), s=0.5)
    return d, assemble_form(d)


def test_zero_rhs_gives_zero(setup):
    _, form = setup
    u = solve_linear(form, np.zeros(form.n))
    assert np.all(u.interior == 0.0)


def test_torsion_function_positive(setup):
    _, form = setup
    u = solve_linear(form, np.ones(form.n))
    assert np.all(u.interior > 0.0)


def test_linearity(setup):
    _, form = setup
    rng = np.random.default_rng(9)
    f = rng.standard_normal(form.n)
    u1 = solve_linear(form, f).interior
    u3 = solve_linear(form, 3.0 * f).interior
    assert np.abs(u3 - 3.0 * u1).max() <= 1e-10 * np.abs(u3).max()


def test_residual_contract(setup):
    _, form = setup
    rng = np.random.default_rng(10)
    f = rng.standard_normal(form.n)
    u = solve_linear(form, f, tol=1e-10).interior
    rhs = form.mass * f
    assert np.linalg.norm(form.A @ u - rhs) <= 1e-10 * np.linalg.norm(rhs)


def test_pure_neumann_rejected():
    spec = DomainSpec(resolution=50, sigma_partition=("neumann", "neumann"))
    d = build_discretization(spec, s=0.5)
    form = assemble_form(d)
    with pytest.raises(PureNeumannError):
        solve_linear(form, np.ones(form.n))


def test_weak_maximum_principle_random(setup):
    _, form = setup
    rng = np.random.default_rng(77)
    for _ in range(100):
        f = rng.random(form.n)
        u = solve_linear(form, f).interior
        assert u.min() >= -1e-10 * max(np.abs(u).max(), 1e-300)


def test_stampacchia_zero_and_dominance(setup):
    _, form = setup
    assert stampacchia_linfty_bound(form, np.zeros(form.n), m=4.0) == 0.0
    f = np.ones(form.n)
    B = stampacchia_linfty_bound(form, f, m=4.0)
    sup = np.abs(solve_linear(form, f).interior).max()
    assert np.isfinite(B) and B >= sup


def test_stampacchia_monotone_in_data(setup):
    _, form = setup
    f = np.ones(form.n)
    B1 = stampacchia_linfty_bound(form, f, m=4.0)
    B2 = stampacchia_linfty_bound(form, 2.0 * f, m=4.0)
    assert B2 >= 2.0 * B1 - 1e-12 * B1  # homogeneity of the recursion constants


def test_stampacchia_rejects_small_exponent(setup):
    _, form = setup
    with pytest.raises(ValueError):
        stampacchia_linfty_bound(form, np.ones(form.n), m=0.9)


def test_min_eigen_principal(setup):
    _, form = setup
    val, phi = min_eigen(form)
    assert val > 0.0
    assert np.all(phi > 0.0)  # principal eigenfield is signless
    # residual contract
    B = form.A @ phi - val * form.mass * phi
    assert np.linalg.norm(B) <= 1e-6 * val


def test_min_eigen_shift_invariance(setup):
    _, form = setup
    val0, _ = min_eigen(form)
    c = 2.5
    val_c, _ = min_eigen(form, weight=np.full(form.n, c))
    assert np.isclose(val_c, val0 - c, atol=1e-8)


def test_min_eigen_normalization(setup):
    _, form = setup
    _, phi = min_eigen(form)
    assert np.isclose((form.mass * phi**2).sum(), 1.0, rtol=1e-10)
