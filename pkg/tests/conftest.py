"""Shared fixtures: session-scoped reference integrations.

The traces below are reused across test modules so the expensive forward
integrations run once per session:

* ``trace_ref``    -- moderate curvature, strong oscillation near the far end;
  the main workhorse for identity, bound, and extraction checks.
* ``trace_alpha1`` -- zero-torsion case with a closed-form solution.
* ``trace_smallc`` -- near-zero curvature, closed-form limit solution.
* ``trace_c001``   -- small curvature, large x_max (slow phase growth).
* ``trace_quad``   -- short run used for adaptive-quadrature cross-checks.
* ``trace_weak``   -- long run covering the similarity range that a
  compactly supported test function needs down to T - t = 1e-3.
"""

import pytest

from llgshrink import make_params
from llgshrink.constants import extract_by_matching
from llgshrink.integrator import integrate


@pytest.fixture(scope="session")
def trace_ref():
    return integrate(make_params(0.5, 0.5), 10.6, 1e-12)


@pytest.fixture(scope="session")
def trace_alpha1():
    return integrate(make_params(0.5, 1.0), 6.0, 1e-12)


@pytest.fixture(scope="session")
def lc_ref(trace_ref):
    return extract_by_matching(trace_ref, 1e-8)


@pytest.fixture(scope="session")
def lc_alpha1(trace_alpha1):
    return extract_by_matching(trace_alpha1, 1e-8)


@pytest.fixture(scope="session")
def trace_smallc():
    return integrate(make_params(1e-8, 0.5), 3.0, 1e-12)


@pytest.fixture(scope="session")
def trace_c001():
    return integrate(make_params(0.01, 0.5), 11.5, 1e-10)


@pytest.fixture(scope="session")
def trace_quad():
    return integrate(make_params(0.5, 0.5), 5.0, 1e-11)


@pytest.fixture(scope="session")
def trace_weak():
    return integrate(make_params(0.5, 0.5), 11.1, 1e-10, store_dpsi=0.9)
