import numpy as np
import pytest

from fracmixed import DomainSpec, KernelParams, build_discretization
from fracmixed.geometry import (
    far_field_tail,
    halfline_kernel_integral,
    interval_kernel_integral,
    kernel_coefficient,
)


def test_refinement_halves_cell_diameter():
    d1 = build_discretization(DomainSpec(resolution=100), s=0.5)
    d2 = build_discretization(DomainSpec(resolution=200), s=0.5)
    assert d2.h == 0.5 * d1.h


def test_interior_weights_cover_omega():
    d = build_discretization(DomainSpec(resolution=137), s=0.5)
    assert np.isclose(d.interior_weights.sum(), 1.0, rtol=1e-14)


def test_neumann_cells_cover_explicit_region():
    d = build_discretization(DomainSpec(resolution=100), s=0.5)
    assert np.isclose(d.neumann_weights.sum(), 19.0, rtol=1e-12)
    # graded toward the interface: first cell much finer than the bulk
    assert d.neumann_weights[0] < 0.1 * d.neumann_weights.max()
    assert np.all(np.diff(d.neumann_nodes[:, 0]) > 0)


def test_kappa1_closed_form_midpoint():
    # Sigma1 = (-inf, 0]: kappa1(x) = x^(-2s) / (2s); at x=0.5, s=0.5 -> 2.0
    d = build_discretization(DomainSpec(resolution=200), s=0.5)
    i = np.argmin(np.abs(d.interior_nodes[:, 0] - 0.5))
    x = d.interior_nodes[i, 0]
    assert np.isclose(d.kappa1[i], x ** (-1.0), rtol=1e-14)


def test_halfline_and_interval_integrals_consistent():
    s = 0.3
    # splitting the halfline at b' must be additive
    left_all = halfline_kernel_integral(0.7, 0.0, s, left=True)
    left_far = halfline_kernel_integral(0.7, -5.0, s, left=True)
    mid = interval_kernel_integral(0.7, -5.0, 0.0, s)
    assert np.isclose(left_all, left_far + mid, rtol=1e-13)


def test_far_field_tail_1d_closed_form():
    k = KernelParams(N=1, s=0.5)
    x, R = 0.3, 20.0
    expected = k.a * ((R - x) ** -1.0 + (R + x) ** -1.0)
    assert np.isclose(far_field_tail(x, R, k), expected, rtol=1e-14)


def test_kernel_coefficient_singularity():
    k = KernelParams(N=1, s=0.5)
    with pytest.raises(ValueError):
        kernel_coefficient(0.5, 0.5, k)
    assert kernel_coefficient(0.0, 0.5, k) == pytest.approx(2.0 * 0.5**-2.0)


def test_rejects_supercritical_s_in_1d():
    with pytest.raises(ValueError, match="N >= 2s"):
        build_discretization(DomainSpec(resolution=50), s=0.75)


def test_rejects_small_truncation_radius():
    with pytest.raises(ValueError, match="truncation_radius"):
        DomainSpec(resolution=50, truncation_radius=0.5)


def test_rejects_bad_partition_labels():
    with pytest.raises(ValueError):
        DomainSpec(sigma_partition=("dirichlet", "robin"))


def test_rejects_tiny_resolution():
    with pytest.raises(ValueError):
        DomainSpec(resolution=3)


def test_discretization_is_immutable():
    d = build_discretization(DomainSpec(resolution=50), s=0.5)
    with pytest.raises(ValueError):
        d.kappa1[0] = 1.0


def test_2d_build_smoke():
    spec = DomainSpec(
        dimension=2,
        omega=((0.0, 1.0), (0.0, 1.0)),
        sigma_partition="all_dirichlet",
        truncation_radius=20.0,
        resolution=8,
    )
    d = build_discretization(spec, s=0.4)
    assert d.n_interior == 64
    assert d.n_neumann == 0
    assert np.all(d.kappa1 > 0)
