import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.services.base import DomainError, NotApplicableError
from app.services.curvature import CurvatureField, restrict_to_geodesic
from app.services.distortion import (
    INFINITE,
    boundary_derivatives,
    ext_mul,
    finite_difference_derivatives,
    fixed_point_residual,
    get_distortion_service,
    log_convex_G,
    log_convex_combine,
    sigma,
    sigma_lsc_limit,
    sigma_profile,
    taylor_remainder,
)
from app.services.ode_comparison import constant_cos, constant_sin

from conftest import constant_field, step_field

THETAS = np.linspace(0.05, 2.5, 21)
TS = np.linspace(0.0, 1.0, 21)

step_values = st.lists(st.floats(-2.0, 2.0, allow_nan=False), min_size=1, max_size=5)


@pytest.mark.parametrize("k", [-1.0, 0.0, 1.0])
def test_sigma_matches_closed_forms(k: float) -> None:
    field = constant_field(k, 3.0)
    for theta in THETAS.tolist():
        prof = sigma_profile(field, theta, TS)
        expected = np.asarray(constant_sin(k, TS * theta)) / float(constant_sin(k, theta))
        np.testing.assert_allclose(prof.values, expected, atol=1e-8)


@pytest.mark.parametrize("k", [-1.0, 0.0, 1.0])
def test_boundary_derivatives_match_closed_forms(k: float) -> None:
    field = constant_field(k, 3.0)
    for theta in (0.3, 1.0, 2.5):
        d = boundary_derivatives(field, theta)
        s, c = float(constant_sin(k, theta)), float(constant_cos(k, theta))
        assert float(d.at0) == pytest.approx(theta / s, abs=1e-8)
        assert d.at1 == pytest.approx(theta * c / s, abs=1e-8)


def test_sigma_edge_values() -> None:
    field = constant_field(1.0, 4.0)
    assert float(sigma(field, 0.3, 0.0).value) == pytest.approx(0.3)
    assert float(sigma(field, 0.0, 2.0).value) == 0.0
    assert float(sigma(field, 1.0, 2.0).value) == 1.0


def test_sigma_is_infinite_past_the_first_zero() -> None:
    value = sigma(constant_field(1.0, 4.0), 0.5, 3.2)
    assert value.value is INFINITE
    assert not value.finite
    assert value.to_dict()["value"] == math.inf


def test_infinite_times_zero_is_zero() -> None:
    assert ext_mul(INFINITE, 0.0) == 0.0
    assert ext_mul(INFINITE, 2.0) is INFINITE
    assert ext_mul(0.5, 2.0) == 1.0


def test_sigma_rejects_t_outside_the_unit_interval() -> None:
    with pytest.raises(DomainError):
        sigma(constant_field(0.0), 1.5, 0.5)
    with pytest.raises(DomainError):
        sigma(constant_field(0.0), 0.5, 2.0)


@settings(derandomize=True, max_examples=20, deadline=None)
@given(values=step_values, theta=st.floats(0.2, 1.0))
def test_fixed_point_identity_holds_for_step_fields(values: list, theta: float) -> None:
    field = step_field(values)
    assert fixed_point_residual(field, theta) <= 1e-6


def test_fixed_point_residual_is_not_applicable_when_infinite() -> None:
    with pytest.raises(NotApplicableError):
        fixed_point_residual(constant_field(1.0, 4.0), 3.5)


@settings(derandomize=True, max_examples=500, deadline=None)
@given(lo=step_values, bump=st.floats(0.0, 1.0), t=st.floats(0.0, 1.0), theta=st.floats(0.1, 1.0))
def test_sigma_is_monotone_in_the_curvature(lo: list, bump: float, t: float, theta: float) -> None:
    a = step_field(lo)
    b = step_field([v + bump for v in lo])
    assert float(sigma(b, t, theta).value) - float(sigma(a, t, theta).value) >= -1e-9


@settings(derandomize=True, max_examples=500, deadline=None)
@given(
    a=step_values,
    b=step_values,
    lam=st.floats(0.0, 1.0),
    t=st.floats(0.0, 1.0),
    theta=st.floats(0.1, 1.0),
)
def test_sigma_is_log_convex_in_the_curvature(a: list, b: list, lam: float, t: float, theta: float) -> None:
    assert log_convex_combine(step_field(a), step_field(b), lam, t, theta) >= -1e-9


def test_log_convex_G_for_flat_curvature() -> None:
    gc = restrict_to_geodesic(constant_field(0.0, 2.0), 0.0, 1.5)
    t, x, y = 0.3, 0.2, -0.4
    expected = math.log((1 - t) * math.exp(x) + t * math.exp(y))
    assert log_convex_G(gc, x, y, t, 1.5) == pytest.approx(expected, abs=1e-10)


@pytest.mark.parametrize("k", [-1.0, 1.0])
@pytest.mark.parametrize("t", [0.25, 0.5, 0.75])
def test_taylor_remainder_is_fourth_order(k: float, t: float) -> None:
    hs = np.array([0.2, 0.1, 0.05, 0.025])
    field = constant_field(k, 1.0)
    rem = np.array([abs(taylor_remainder(field, t, h)) for h in hs])
    slope = np.polyfit(np.log(hs), np.log(rem), 1)[0]
    assert slope >= 2.9


def test_lsc_limit_of_a_continuous_field_is_sigma() -> None:
    field = constant_field(1.0, 2.0)
    limit = sigma_lsc_limit(field, 0.4, 1.5)
    assert float(limit.value) == pytest.approx(float(sigma(field, 0.4, 1.5).value), abs=1e-10)


def test_lsc_limit_approaches_sigma_of_a_step_field_from_below() -> None:
    field = step_field([1.0, -0.5])
    limit = sigma_lsc_limit(field, 0.5, 1.0, n0=64, doublings=4, rtol=5e-2)
    exact = float(sigma(field, 0.5, 1.0).value)
    assert float(limit.value) <= exact + 1e-9
    assert float(limit.value) == pytest.approx(exact, abs=2e-2)


def test_green_derivatives_agree_with_finite_differences() -> None:
    field = CurvatureField.from_function(lambda x: 1.0 + 0.5 * np.sin(3 * x), np.linspace(0, 2, 201))
    green = boundary_derivatives(field, 1.7)
    fd = finite_difference_derivatives(field, 1.7)
    assert float(green.at0) == pytest.approx(float(fd.at0), abs=1e-5)
    assert green.at1 == pytest.approx(fd.at1, abs=1e-5)


def test_infinite_sigma_has_infinite_boundary_derivative() -> None:
    d = boundary_derivatives(constant_field(1.0, 4.0), 3.5)
    assert d.at0 is INFINITE
    assert d.at1 == -math.inf


def test_service_uses_the_lsc_limit_on_request() -> None:
    service = get_distortion_service()
    field = constant_field(0.0, 1.0)
    assert float(service.coefficient(field, 0.5, 1.0).value) == pytest.approx(0.5)
    assert float(service.coefficient(field, 0.5, 1.0, lsc_n0=1).value) == pytest.approx(0.5)
    assert float(service.derivatives(field, 1.0).at0) == pytest.approx(1.0)
