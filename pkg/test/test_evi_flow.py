import math
from dataclasses import replace

import numpy as np
import pytest

from app.common.sampled import SampledFunction
from app.services.base import DomainError, NotApplicableError, PreconditionError
from app.services.evi_flow import (
    asymptotic_contraction_rhs,
    contraction_bound_infinite,
    descending_slope,
    dimensional_contraction_bound,
    dissipation_residual,
    evi_residual,
    evi_residual_constant,
    get_evi_flow_service,
    gradient_flow,
    gronwall_bound,
    sharp_kappa_N,
)

from conftest import constant_field

QUAD = SampledFunction.quadratic()
TIMES = [0.1, 0.5, 0.9]


def whole_line(value: float):
    return constant_field(value, 20.0, -10.0)


@pytest.fixture(scope="module")
def trace():
    return gradient_flow(QUAD, 1.0, 1.0, dt=1e-3)


@pytest.fixture(scope="module")
def z_points():
    return np.random.default_rng(20240601).uniform(-3.0, 3.0, 20).tolist()


def test_quadratic_flow_is_exponential_decay(trace) -> None:
    np.testing.assert_allclose(trace.states, np.exp(-trace.times), atol=1e-10)
    assert trace.horizon == pytest.approx(1.0)
    assert not trace.truncated and not trace.flagged
    assert float(trace.position(0.5)) == pytest.approx(math.exp(-0.5), abs=1e-8)


def test_trace_time_lookup(trace) -> None:
    assert trace.index_of(0.5) == 500
    with pytest.raises(DomainError):
        trace.index_of(1.5)
    with pytest.raises(DomainError):
        trace.position(np.array([2.0]))


def test_flow_argument_errors() -> None:
    with pytest.raises(DomainError):
        gradient_flow(QUAD, 11.0, 1.0)
    with pytest.raises(DomainError):
        gradient_flow(QUAD, 1.0, 0.0)


def test_flow_leaving_the_domain_is_truncated() -> None:
    concave = SampledFunction.from_callable(
        lambda x: -0.5 * np.asarray(x) ** 2, -10.0, 10.0, lambda x: -np.asarray(x, dtype=float)
    )
    out = gradient_flow(concave, 1.0, 5.0)
    assert out.truncated
    assert out.horizon < 5.0
    assert np.all(np.abs(out.states) <= 10.0)


def test_energy_dissipation_holds_along_the_flow(trace) -> None:
    assert abs(dissipation_residual(trace, 0.0, 1.0)) < 1e-5
    assert abs(dissipation_residual(trace, 0.2, 0.7)) < 1e-5
    assert dissipation_residual(trace, 0.4, 0.4) == 0.0
    with pytest.raises(PreconditionError):
        dissipation_residual(trace, 0.7, 0.2)


def test_dissipation_detects_a_perturbed_trace(trace) -> None:
    perturbed = replace(trace, f_values=trace.f_values + 0.01 * trace.times)
    assert abs(dissipation_residual(perturbed, 0.0, 1.0)) > 1e-3


def test_descending_slope() -> None:
    assert float(descending_slope(QUAD, 1.0, 0.1)) == pytest.approx(1.0, abs=1e-9)
    assert float(descending_slope(QUAD, 0.0, 0.1)) == pytest.approx(0.0, abs=1e-12)
    edge = descending_slope(QUAD, 10.0, 0.1)
    assert edge.one_sided
    assert edge.value == pytest.approx(10.0, rel=1e-3)
    with pytest.raises(DomainError):
        descending_slope(QUAD, 12.0, 0.1)
    with pytest.raises(PreconditionError):
        descending_slope(QUAD, 1.0, 0.0)


def test_evi_infinite_holds_with_unit_curvature(trace, z_points) -> None:
    field = whole_line(1.0)
    for z in z_points:
        for s in TIMES:
            assert evi_residual(trace, z, field, math.inf, s) >= -1e-5


def test_evi_infinite_fails_when_curvature_is_overclaimed(trace) -> None:
    assert evi_residual(trace, 3.0, whole_line(1.2), math.inf, 0.5) < -0.1


@pytest.mark.parametrize("N", [2.0, 10.0])
def test_evi_holds_with_sharp_dimensional_curvature(trace, z_points, N: float) -> None:
    field = sharp_kappa_N(QUAD, N)
    for z in z_points:
        for s in (0.1, 0.9):
            assert evi_residual(trace, z, field, N, s) >= -1e-5


def test_dimensional_residual_times_N_tends_to_the_infinite_one(trace) -> None:
    field = whole_line(1.0)
    z, s = 2.0, 0.5
    limit = evi_residual(trace, z, field, math.inf, s)
    gaps = [abs(N * evi_residual(trace, z, field, N, s) - limit) for N in (10.0, 100.0, 1e3, 1e4)]
    assert all(b < a for a, b in zip(gaps, gaps[1:])), gaps
    assert gaps[-1] < 1e-3


def test_sharp_curvature_of_the_quadratic() -> None:
    nodes = np.linspace(-2.0, 2.0, 9)
    field = sharp_kappa_N(QUAD, 4.0, nodes)
    assert field.cell_value(np.array([0.1]), "right")[0] == pytest.approx(1.0 - 0.25 / 4.0)
    assert field.cell_value(np.array([1.6]), "right")[0] == pytest.approx(0.0)
    flat = sharp_kappa_N(QUAD, math.inf, nodes)
    assert flat.cell_value(np.array([1.3]), "right")[0] == pytest.approx(1.0)
    with pytest.raises(DomainError):
        sharp_kappa_N(QUAD, -1.0, nodes)


@pytest.mark.parametrize("z", [-2.0, 0.3, 2.5])
def test_constant_form_matches_general_residual(trace, z: float) -> None:
    K, N, s = 1.0, 3.0, 0.5
    x = float(trace.states[trace.index_of(s)])
    d = abs(x - z)
    k = K / N
    general = evi_residual(trace, z, whole_line(K), N, s)
    scale = math.sin(math.sqrt(k) * d) / math.sqrt(k) / d
    assert evi_residual_constant(trace, z, K, N, s) == pytest.approx(general * scale, abs=1e-6)


def test_constant_form_domain(trace) -> None:
    with pytest.raises(DomainError):
        evi_residual_constant(trace, 1.0, 1.0, math.inf, 0.5)
    with pytest.raises(NotApplicableError):
        evi_residual_constant(trace, 3.0, 10.0, 1.0, 0.5)
    with pytest.raises(DomainError):
        evi_residual(trace, 11.0, whole_line(1.0), math.inf, 0.5)


@pytest.fixture(scope="module")
def pair():
    return get_evi_flow_service().flow_pair(QUAD, 1.0, -0.5, 1.0, dt=5e-4)


def test_flow_pair_shares_the_grid(pair) -> None:
    tx, ty = pair
    np.testing.assert_array_equal(tx.times, ty.times)


def test_contraction_with_unit_curvature(pair) -> None:
    report = contraction_bound_infinite(*pair, whole_line(1.0))
    assert report.kind == "infinite"
    assert report.min_margin >= -1e-4
    np.testing.assert_allclose(report.rates, 1.0, atol=1e-12)
    expected = 2.25 * np.exp(-2.0 * report.times)
    np.testing.assert_allclose(gronwall_bound(report), expected, rtol=1e-5)
    np.testing.assert_allclose(report.distance2, expected, rtol=1e-5)


def test_contraction_fails_with_overclaimed_curvature(pair) -> None:
    report = contraction_bound_infinite(*pair, whole_line(1.2))
    assert report.min_margin < -0.01
    assert report.to_dict()["kind"] == "infinite"
    assert len(report.to_rows()) == report.times.size


def test_contraction_needs_a_common_grid() -> None:
    a = gradient_flow(QUAD, 1.0, 1.0, dt=1e-3, refine=False)
    b = gradient_flow(QUAD, -1.0, 1.0, dt=2e-3, refine=False)
    with pytest.raises(PreconditionError):
        contraction_bound_infinite(a, b, whole_line(1.0))


@pytest.mark.parametrize("lam", [1.0, 1.5])
def test_dimensional_contraction_with_constant_curvature(pair, lam: float) -> None:
    report = dimensional_contraction_bound(
        *pair, whole_line(0.5), 10.0, lam, r_grid=np.linspace(0.0, 0.6, 7)
    )
    assert report.kind == "dimensional"
    assert report.times.size == 7
    assert report.min_margin >= -1e-4


@pytest.mark.parametrize("lam", [0.5, 2.0])
def test_dimensional_contraction_for_N_two(pair, lam: float) -> None:
    # x²/2 has κ = 1 − x²/2 ≥ 0.25 wherever the pair travels
    report = dimensional_contraction_bound(
        *pair, whole_line(0.25), 2.0, lam, r_grid=np.linspace(0.0, 0.45, 10)
    )
    assert report.times.size == 10
    assert report.min_margin >= -1e-4


def test_dimensional_contraction_arguments(pair) -> None:
    with pytest.raises(DomainError):
        dimensional_contraction_bound(*pair, whole_line(0.5), math.inf)
    with pytest.raises(DomainError):
        dimensional_contraction_bound(*pair, whole_line(0.5), 2.0, lam=0.0)


def test_asymptotic_rhs() -> None:
    assert asymptotic_contraction_rhs(1.0, 2.0, 1.0, 2.0) == pytest.approx(-8.0)
    assert asymptotic_contraction_rhs(0.0, 2.0, 4.0, 1.0) == pytest.approx(9.0)
    with pytest.raises(DomainError):
        asymptotic_contraction_rhs(1.0, 2.0, -1.0, 1.0)


def test_service_rows(trace) -> None:
    service = get_evi_flow_service()
    rows = service.evi_rows(trace, 2.0, whole_line(1.0), math.inf)
    assert rows and all(margin >= -1e-5 for _, _, _, margin in rows)
    diss = service.dissipation_rows(trace)
    assert diss[0][1] == 0.0
    assert abs(diss[-1][3]) < 1e-5
    report = service.contraction(*service.flow_pair(QUAD, 1.0, 2.0, 0.5, dt=5e-4), whole_line(1.0))
    assert report.min_margin >= -1e-4
