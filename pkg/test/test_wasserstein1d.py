import math

import numpy as np
import pytest
from scipy import stats

from app.common.sampled import SampledFunction
from app.services.base import DomainError, NotApplicableError, PreconditionError, TableFormatError
from app.services.evi_flow import sharp_kappa_N
from app.services.wasserstein1d import (
    MMSpace1D,
    ProbMeasure1D,
    bishop_gromov_check,
    check_entropic_cd,
    density_inequality_check,
    displacement_geodesic,
    entropy,
    get_wasserstein1d_service,
    load_measure_table,
    load_space_table,
    minkowski_content,
    perturb_space,
    quantile_levels,
    u_n,
    volume_growth_check,
    w2_distance,
)

from conftest import constant_field

GAUSS_SPACE = MMSpace1D.gaussian()
FLAT = MMSpace1D.lebesgue(0.0, 10.0)


def whole_line(value: float):
    return constant_field(value, 24.0, -12.0)


# ----------------------------------------------------------------------
# 测度与传输
# ----------------------------------------------------------------------


def test_quantile_levels_are_cell_midpoints() -> None:
    np.testing.assert_allclose(quantile_levels(4), [0.125, 0.375, 0.625, 0.875])


def test_w2_of_translations_and_scalings() -> None:
    mu = ProbMeasure1D.uniform(0.0, 1.0)
    assert w2_distance(mu, mu.translated(2.0)) == pytest.approx(2.0, abs=1e-12)
    g = ProbMeasure1D.gaussian(0.0, 1.0)
    assert w2_distance(g, ProbMeasure1D.gaussian(3.0, 1.0)) == pytest.approx(3.0, abs=1e-12)
    assert w2_distance(g, ProbMeasure1D.gaussian(0.0, 2.0)) == pytest.approx(1.0, rel=1e-2)
    with pytest.raises(PreconditionError):
        w2_distance(mu, ProbMeasure1D.uniform(0.0, 1.0, levels=64))


def test_displacement_interpolation() -> None:
    geo = displacement_geodesic(ProbMeasure1D.uniform(0.0, 1.0), ProbMeasure1D.uniform(2.0, 4.0))
    mid = geo.interpolant(0.5)
    assert mid.mean() == pytest.approx(1.75)
    np.testing.assert_allclose(mid.dq, 1.5)
    assert geo.theta == pytest.approx(w2_distance(geo.mu0, geo.mu1))
    assert len(geo.measures()) == 21
    with pytest.raises(DomainError):
        geo.interpolant(1.5)
    with pytest.raises(DomainError):
        displacement_geodesic(geo.mu0, geo.mu1, [0.0, 2.0])


def test_measure_construction() -> None:
    mu = ProbMeasure1D.from_density([0.0, 2.0], [1.0, 1.0])
    np.testing.assert_allclose(mu.q, 2.0 * mu.levels, atol=1e-12)
    np.testing.assert_allclose(mu.dq, 2.0)
    assert ProbMeasure1D.dirac(1.0).has_atoms
    assert not mu.has_atoms
    assert mu.cdf(1.0) == pytest.approx(0.5)
    with pytest.raises(PreconditionError):
        ProbMeasure1D(np.array([1.0, 0.0]), np.array([1.0, 1.0]))
    with pytest.raises(DomainError):
        ProbMeasure1D.from_density([0.0, 1.0], [0.0, 0.0])
    with pytest.raises(DomainError):
        ProbMeasure1D.gaussian(0.0, 0.0)


# ----------------------------------------------------------------------
# 空间与熵
# ----------------------------------------------------------------------


def test_entropy_on_lebesgue() -> None:
    assert entropy(ProbMeasure1D.uniform(0.0, 1.0), FLAT) == pytest.approx(0.0, abs=1e-12)
    assert entropy(ProbMeasure1D.uniform(0.0, 2.0), FLAT) == pytest.approx(-math.log(2.0))
    assert math.isinf(entropy(ProbMeasure1D.uniform(9.0, 11.0), FLAT))
    assert math.isinf(entropy(ProbMeasure1D.dirac(3.0), FLAT))


def test_entropy_of_standard_gaussian_against_gaussian_weight() -> None:
    ent = entropy(ProbMeasure1D.gaussian(0.0, 1.0), GAUSS_SPACE)
    assert ent == pytest.approx(-0.5 * math.log(2.0 * math.pi), abs=1e-5)


def test_entropy_of_truncated_gaussian() -> None:
    xs = np.linspace(-1.0, 2.0, 401)
    mu = ProbMeasure1D.from_density(xs, stats.norm.pdf(xs))
    expected = -float(stats.truncnorm(-1.0, 2.0).entropy())
    assert entropy(mu, MMSpace1D.lebesgue(-3.0, 3.0)) == pytest.approx(expected, abs=2e-3)


def test_u_n() -> None:
    mu = ProbMeasure1D.uniform(0.0, 2.0)
    assert u_n(mu, FLAT, 2.0) == pytest.approx(math.sqrt(2.0))
    assert u_n(ProbMeasure1D.dirac(1.0), FLAT, 2.0) == 0.0
    with pytest.raises(DomainError):
        u_n(mu, FLAT, 0.0)


def test_point_space() -> None:
    space = MMSpace1D.point(0.0, 2.0)
    assert space.is_point
    assert entropy(ProbMeasure1D.dirac(0.0), space) == pytest.approx(-math.log(2.0))
    assert math.isinf(entropy(ProbMeasure1D.dirac(1.0), space))
    assert volume_growth_check(space, 1.0).value == pytest.approx(2.0)


def test_space_validation_and_perturbation() -> None:
    with pytest.raises(DomainError):
        MMSpace1D.from_weight([0.0, 1.0], [-1.0, 1.0])
    with pytest.raises(PreconditionError):
        MMSpace1D.from_weight([1.0, 0.0], [1.0, 1.0])
    with pytest.raises(DomainError):
        MMSpace1D.from_weight([0.0, 1.0], [1.0, 1.0], reference=2.0)
    with pytest.raises(DomainError):
        MMSpace1D.model_sphere(0.5)
    tilted = perturb_space(FLAT, SampledFunction.constant(1.0))
    assert tilted.total_mass == pytest.approx(10.0 * math.exp(-1.0))
    assert FLAT.ball_volume(5.0, 1.0) == pytest.approx(2.0)
    assert FLAT.ball_volume(0.5, 1.0) == pytest.approx(1.5)


def test_tables(write_table) -> None:
    path = write_table("mu.csv", ("x", "density"), [(0.0, 1.0), (1.0, 1.0), (2.0, 1.0)])
    mu = load_measure_table(path)
    assert mu.name == "mu"
    assert mu.support[1] == pytest.approx(2.0, abs=1e-3)
    space = load_space_table(write_table("w.csv", ("x", "weight"), [(0.0, 1.0), (3.0, 1.0)]), 1.0)
    assert space.total_mass == pytest.approx(3.0)
    assert space.reference == 1.0
    bad = write_table("bad.csv", ("x", "weight"), [(0.0, 1.0), (1.0, -1.0)])
    with pytest.raises(TableFormatError):
        load_space_table(bad)


# ----------------------------------------------------------------------
# CD^e
# ----------------------------------------------------------------------


@pytest.fixture(scope="module")
def gaussian_pair():
    mu0 = ProbMeasure1D.gaussian(-1.0, 0.5)
    return mu0, mu0.translated(2.0)


def test_gaussian_space_is_unit_convex(gaussian_pair) -> None:
    cert = check_entropic_cd(GAUSS_SPACE, whole_line(1.0), math.inf, *gaussian_pair)
    assert cert.criterion == "entropy_convexity"
    assert cert.passed
    assert abs(cert.worst_margin) < 1e-4


def test_gaussian_space_rejects_larger_curvature(gaussian_pair) -> None:
    cert = check_entropic_cd(GAUSS_SPACE, whole_line(1.2), math.inf, *gaussian_pair)
    assert not cert.passed
    assert cert.worst_margin < -0.05
    assert cert.worst_witness is not None
    assert 0.0 < cert.worst_witness["t"] < 1.0


@pytest.mark.parametrize("N", [2.0, 3.0])
def test_model_sphere_satisfies_its_curvature_dimension_bound(N: float) -> None:
    space = MMSpace1D.model_sphere(N)
    field = constant_field(N - 1.0, math.pi)
    cert = check_entropic_cd(
        space, field, N, ProbMeasure1D.uniform(0.3, 1.0), ProbMeasure1D.uniform(1.5, 2.5)
    )
    assert cert.passed, cert.worst_witness


def test_flat_space_translations() -> None:
    mu0, mu1 = ProbMeasure1D.uniform(1.0, 2.0), ProbMeasure1D.uniform(5.0, 6.0)
    flat_field = constant_field(0.0, 10.0)
    cert = check_entropic_cd(FLAT, flat_field, 3.0, mu0, mu1)
    assert cert.passed
    assert abs(cert.worst_margin) < 1e-6
    overclaimed = check_entropic_cd(FLAT, constant_field(1.0, 10.0), 3.0, mu0, mu1)
    assert not overclaimed.passed
    assert overclaimed.worst_witness["theta"] == pytest.approx(4.0)


def test_density_inequality_per_particle() -> None:
    mu0, mu1 = ProbMeasure1D.uniform(1.0, 2.0), ProbMeasure1D.uniform(5.0, 6.0)
    cert = density_inequality_check(FLAT, constant_field(0.0, 10.0), 3.0, mu0, mu1)
    assert cert.criterion == "density"
    assert cert.passed
    bad = density_inequality_check(FLAT, constant_field(1.0, 10.0), 3.0, mu0, mu1)
    assert not bad.passed
    with pytest.raises(DomainError):
        density_inequality_check(FLAT, constant_field(0.0, 10.0), math.inf, mu0, mu1)
    with pytest.raises(NotApplicableError):
        density_inequality_check(FLAT, constant_field(0.0, 10.0), 3.0, ProbMeasure1D.dirac(1.0), mu1)


SPHERE3 = MMSpace1D.model_sphere(3.0)
CD_CASES = [
    (FLAT, constant_field(0.0, 10.0), ProbMeasure1D.uniform(1.0, 2.0), ProbMeasure1D.uniform(5.0, 7.0)),
    (SPHERE3, constant_field(2.0, math.pi), ProbMeasure1D.uniform(0.3, 1.0), ProbMeasure1D.uniform(1.5, 2.5)),
]


@pytest.mark.parametrize("space, field, mu0, mu1", CD_CASES, ids=["flat", "sphere"])
def test_per_particle_inequality_implies_the_integrated_one(space, field, mu0, mu1) -> None:
    per_particle = density_inequality_check(space, field, 3.0, mu0, mu1)
    assert per_particle.passed, per_particle.worst_witness
    cert = check_entropic_cd(space, field, 3.0, mu0, mu1)
    assert cert.passed, cert.worst_witness


@pytest.mark.parametrize("space, field, mu0, mu1", CD_CASES, ids=["flat", "sphere"])
def test_finite_dimension_implies_entropy_convexity(space, field, mu0, mu1) -> None:
    assert check_entropic_cd(space, field, 3.0, mu0, mu1).passed
    cert = check_entropic_cd(space, field, math.inf, mu0, mu1)
    assert cert.criterion == "entropy_convexity"
    assert cert.passed, cert.worst_witness


def test_perturbation_adds_curvature_and_dimension() -> None:
    base = MMSpace1D.from_function(np.ones_like, -3.0, 3.0)
    V = SampledFunction.quadratic(-3.0, 3.0)
    mu0, mu1 = ProbMeasure1D.uniform(-1.5, -0.5), ProbMeasure1D.uniform(0.0, 1.5)
    assert check_entropic_cd(base, constant_field(0.0, 6.0, -3.0), 1.0, mu0, mu1).passed
    # Lebesgue is (0, 1); x²/2 is (1 − x²/9, 9)-convex
    field = sharp_kappa_N(V, 9.0, np.linspace(-3.0, 3.0, 601))
    cert = check_entropic_cd(perturb_space(base, V), field, 10.0, mu0, mu1)
    assert cert.passed, cert.worst_witness


def test_cd_edge_cases() -> None:
    mu = ProbMeasure1D.uniform(1.0, 2.0)
    same = check_entropic_cd(FLAT, constant_field(5.0, 10.0), 2.0, mu, mu)
    assert same.passed and same.note == "Θ = 0"
    with pytest.raises(PreconditionError):
        check_entropic_cd(FLAT, constant_field(0.0, 10.0), 2.0, ProbMeasure1D.dirac(1.0), mu)
    with pytest.raises(DomainError):
        check_entropic_cd(FLAT, constant_field(0.0, 10.0), -1.0, mu, mu.translated(1.0))


# ----------------------------------------------------------------------
# Bishop–Gromov 与体积增长
# ----------------------------------------------------------------------


def test_bishop_gromov_equality_on_the_model() -> None:
    space = MMSpace1D.model_sphere(3.0, eps=1e-6)
    report = bishop_gromov_check(space, 1e-6, 1.0, 2.5, 2.0, 3.0, profile="sharp")
    assert report.ok
    # s is rising at r, so the outer quotient overshoots by O(δ)
    assert -1e-4 < report.s_margin < 3e-3
    assert abs(report.v_margin) < 1e-3
    assert report.s_ratio == pytest.approx(math.sin(1.0) ** 2 / math.sin(2.5) ** 2, rel=2e-3)


def test_bishop_gromov_entropic_profile_holds_on_the_model() -> None:
    space = MMSpace1D.model_sphere(3.0, eps=1e-6)
    assert bishop_gromov_check(space, 1e-6, 0.5, 2.0, 2.0, 3.0).ok


def test_bishop_gromov_detects_overclaimed_curvature() -> None:
    space = MMSpace1D.model_sphere(3.0, eps=1e-6)
    report = bishop_gromov_check(space, 1e-6, 0.5, 2.0, 4.0, 3.0, profile="sharp")
    assert not report.ok
    assert report.s_margin < -1.0
    assert report.to_dict()["ok"] is False


def test_bishop_gromov_dimension_one() -> None:
    report = bishop_gromov_check(FLAT, 5.0, 1.0, 2.0, 0.0, 1.0)
    assert report.s_ratio == pytest.approx(1.0, abs=1e-6)
    assert report.v_ratio == pytest.approx(0.5)
    assert report.ok


def test_bishop_gromov_arguments() -> None:
    with pytest.raises(DomainError):
        bishop_gromov_check(FLAT, 5.0, 2.0, 1.0, 0.0, 2.0)
    with pytest.raises(DomainError):
        bishop_gromov_check(FLAT, 5.0, 1.0, 2.0, 0.0, math.inf)
    with pytest.raises(DomainError):
        bishop_gromov_check(FLAT, 5.0, 1.0, 2.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        bishop_gromov_check(FLAT, 5.0, 1.0, 2.0, 0.0, 2.0, profile="other")  # type: ignore[arg-type]
    with pytest.raises(DomainError):
        bishop_gromov_check(FLAT, 5.0, 1.0, 3.5, 2.0, 3.0, profile="sharp")
    with pytest.raises(DomainError):
        bishop_gromov_check(FLAT, 11.0, 1.0, 2.0, 0.0, 2.0)


def test_minkowski_content() -> None:
    assert minkowski_content(FLAT, 5.0, 1.0) == pytest.approx(2.0, abs=1e-9)
    assert minkowski_content(FLAT, 0.0, 1.0) == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(DomainError):
        minkowski_content(FLAT, 5.0, -1.0)


def test_minkowski_content_keeps_the_largest_quotient() -> None:
    rising = MMSpace1D.from_function(np.exp, 0.0, 5.0)
    v = rising.ball_volume(0.0, 1.0)
    quotients = [(rising.ball_volume(0.0, 1.0 + d) - v) / d for d in (1e-3, 5e-4)]
    s = minkowski_content(rising, 0.0, 1.0, (1e-3, 5e-4))
    assert s == pytest.approx(max(quotients), rel=1e-12)
    assert s > math.e
    assert s == pytest.approx(math.e, rel=1e-3)
    # decreasing density: the extrapolated value sits above both quotients
    assert minkowski_content(GAUSS_SPACE, 0.0, 1.0) == pytest.approx(2.0 * math.exp(-0.5), rel=1e-5)


def test_volume_growth() -> None:
    assert volume_growth_check(GAUSS_SPACE, 0.5).value == pytest.approx(math.sqrt(math.pi), rel=1e-6)
    half = volume_growth_check(FLAT, 1.0, extrapolate_tails=True)
    assert half.finite
    assert half.value == pytest.approx(0.5 * math.sqrt(math.pi), rel=1e-6)
    growing = MMSpace1D.from_function(lambda x: np.exp(x * x), 0.0, 5.0, points=2001)
    diverging = volume_growth_check(growing, 0.5, extrapolate_tails=True)
    assert not diverging.finite
    assert math.isinf(diverging.value)
    with pytest.raises(DomainError):
        volume_growth_check(FLAT, 0.0)


def test_service(gaussian_pair) -> None:
    service = get_wasserstein1d_service()
    info = service.describe(GAUSS_SPACE, *gaussian_pair)
    assert info["theta"] == pytest.approx(2.0)
    assert info["Ent0"] == pytest.approx(info["Ent1"], abs=1e-4)
    mu0, mu1 = ProbMeasure1D.uniform(1.0, 2.0), ProbMeasure1D.uniform(5.0, 6.0)
    cert = service.entropic_cd(FLAT, constant_field(0.0, 10.0), 3.0, mu0, mu1, per_particle=True)
    assert cert.criterion == "density"
    report = service.bishop_gromov(FLAT, 5.0, 1.0, 2.0, 0.0, 2.0)
    assert report.ok
    assert service.growth(FLAT, 1.0).value == pytest.approx(0.5 * math.sqrt(math.pi), rel=1e-6)
