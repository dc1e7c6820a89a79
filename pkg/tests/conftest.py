import numpy as np
import pytest

from fracmixed import (
    DomainSpec,
    ProblemParams,
    assemble_form,
    build_discretization,
    estimate_Lambda,
)


@pytest.fixture(scope="session")
def disc200():
    return build_discretization(DomainSpec(resolution=200), s=0.5)


@pytest.fixture(scope="session")
def form200(disc200):
    return assemble_form(disc200)


@pytest.fixture(scope="session")
def disc120():
    return build_discretization(DomainSpec(resolution=120), s=0.5)


@pytest.fixture(scope="session")
def form120(disc120):
    return assemble_form(disc120)


@pytest.fixture(scope="session")
def params():
    return ProblemParams(s=0.5, q=0.5, p=3.0, lam=1.0)


@pytest.fixture(scope="session")
def bracket(form200, params):
    """Lambda bracket on the default configuration (shared: ~30 s)."""
    import time

    t0 = time.monotonic()
    br = estimate_Lambda(form200, params)
    br.elapsed = time.monotonic() - t0
    return br
