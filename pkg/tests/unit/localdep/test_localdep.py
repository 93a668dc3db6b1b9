"""
Tests for the local dependence functions.
"""

import itertools
import math

import numpy as np
import pytest

from src.localdep.core.exceptions import (
    DimensionMismatchError,
    MissingRhoTermError,
    NonPositiveDensityInStencilError,
    ValidationError,
)
from src.localdep.core.gaussian_backend import gaussian_density, gaussian_density_model, mixed_central_moment
from src.localdep.core.localdep import (
    B_direct,
    H_bivariate,
    H_direct,
    H_nvariate,
    H_trivariate,
    Q_direct,
    bivariate_closed_form,
    conditional_second_moment,
    evaluate,
    expansion_subsets,
    h_surrogate,
    holland_wang_gaussian,
    holland_wang_H1,
    phi_at,
    rho_terms,
)
from src.localdep.models.model_core import DensityModel, GaussianModel
from tests.conftest import random_spd

TABLE_TOL = 5e-4

# (point, H) for the reference trivariate model
REFERENCE_VALUES = [
    ((0.0, 0.0, 0.0), 0.0),
    ((0.0, 0.0, 1.0), -0.1245),
    ((0.0, 0.0, -1.0), 0.1245),
    ((0.0, 0.0, 10.0), -0.2861),
    ((0.0, 0.0, -10.0), 0.2861),
    ((0.0, 0.0, 20.0), -0.1803),
    ((0.0, 0.0, 100.0), -0.0396),
    ((0.0, 1.0, 0.0), -0.3005),
    ((0.0, -1.0, 0.0), 0.3005),
    ((0.0, 1.0, 1.0), -0.4209),
    ((0.0, -1.0, -1.0), 0.4209),
    ((0.0, 1.0, 10.0), -0.5319),
    ((0.0, 1.0, 20.0), -0.4601),
    ((0.0, 1.0, -20.0), -0.1000),
    ((0.0, 1.0, -100.0), -0.2768),
    ((-1.0, 0.0, 0.0), 0.1756),
    ((-1.0, 0.0, 1.0), 0.0581),
    ((-1.0, 0.0, -1.0), 0.2695),
    ((10.0, 0.0, 0.0), -0.2682),
    ((-10.0, 0.0, 0.0), 0.2682),
    ((-10.0, 10.0, 0.0), 0.8143),
    ((10.0, 10.0, -20.0), 0.5564),
    ((-0.8, -1.0, -1.0), 0.5324),
    ((-1.0, 0.8, 1.0), -0.1831),
    ((0.0, 0.8, 1.0), -0.3723),
    ((100.0, 0.0, 100.0), -0.9965),
    ((100.0, 0.0, -100.0), 0.9886),
    ((100.0, 0.0, 0.0), -0.0344),
]


def _points(rng: np.random.Generator, count: int, dim: int, scale: float = 3.0) -> np.ndarray:
    return rng.uniform(-scale, scale, size=(count, dim))


class TestReferenceValues:
    """Test H against the reference table."""

    @pytest.mark.parametrize("point,expected", REFERENCE_VALUES)
    def test_reference_point(self, reference_model: GaussianModel, point, expected):
        """Closed-form H matches the tabulated value."""
        assert evaluate(reference_model, point).h_value == pytest.approx(expected, abs=TABLE_TOL)

    def test_far_corner(self, reference_model: GaussianModel):
        """H approaches -1 along (0, t, t)."""
        assert evaluate(reference_model, (0.0, 100.0, 100.0)).h_value == pytest.approx(-0.9996, abs=1e-3)

    def test_phi_linear_forms(self, reference_model: GaussianModel):
        """φ_X = −(0.38y + 0.1z)/0.84 for the reference covariance."""
        phi = phi_at(reference_model, (0.7, -1.3, 2.1))
        assert phi.phi[0] == pytest.approx(-(0.38 * -1.3 + 0.1 * 2.1) / 0.84, abs=1e-12)
        assert phi.phi[1] == pytest.approx(-(0.38 * 0.7 + 0.25 * 2.1) / 0.91, abs=1e-12)
        assert phi.xi == phi.phi

    def test_result_parts(self, reference_model: GaussianModel):
        """H is numerator over denominator; ρ_S are carried along."""
        result = evaluate(reference_model, (0.0, 1.0, 1.0))
        assert result.h_value == pytest.approx(result.numerator / result.denominator)
        assert result.denominator >= 1.0
        assert result.rho_terms[(0, 1)] == pytest.approx(0.5)
        assert result.rho_terms[(0, 1, 2)] == 0.0


class TestBivariate:
    """Test the two-variable case."""

    @pytest.mark.parametrize(
        "x,y,expected", [(0.0, 0.0, 0.5), (3.0, 3.0, 0.84615), (1.0, -1.0, 0.2)]
    )
    def test_closed_form_values(self, x, y, expected):
        """(ρ + ρ²xy) / (√(1+ρ²y²)√(1+ρ²x²)) at ρ = 0.5."""
        assert bivariate_closed_form(0.5, x, y) == pytest.approx(expected, abs=1e-5)

    def test_matches_closed_form(self, bivariate_model: GaussianModel):
        """The general path reproduces the standard-normal closed form."""
        rng = np.random.default_rng(17)
        for x, y in _points(rng, 200, 2):
            h = H_bivariate(bivariate_model, (x, y)).h_value
            assert h == pytest.approx(bivariate_closed_form(0.5, x, y), abs=1e-12)

    def test_scale_invariant(self):
        """Rescaling the axes rescales the evaluation point only."""
        scaled = GaussianModel.bivariate(-0.6, sigma_x=2.0, sigma_y=0.5)
        h = evaluate(scaled, (2.0 * 1.2, 0.5 * -0.4)).h_value
        assert h == pytest.approx(bivariate_closed_form(-0.6, 1.2, -0.4), abs=1e-12)

    def test_even_symmetry(self, bivariate_model: GaussianModel):
        """For two variables H(μ + d) = H(μ − d)."""
        rng = np.random.default_rng(23)
        for d in _points(rng, 100, 2):
            assert evaluate(bivariate_model, d).h_value == pytest.approx(
                evaluate(bivariate_model, -d).h_value, abs=1e-12
            )

    def test_wrong_dimension(self, reference_model: GaussianModel, bivariate_model: GaussianModel):
        """Fixed-dimension entry points check the model."""
        with pytest.raises(DimensionMismatchError):
            H_bivariate(reference_model, (0.0, 0.0, 0.0))
        with pytest.raises(DimensionMismatchError):
            H_trivariate(bivariate_model, (0.0, 0.0))


class TestExpansion:
    """Test the subset expansion against the fixed-dimension formulas."""

    def test_subset_order(self):
        """Size first, then lexicographic."""
        assert expansion_subsets(3) == ((0, 1), (0, 2), (1, 2), (0, 1, 2))
        assert len(expansion_subsets(5)) == 2**5 - 5 - 1

    def test_paths_agree(self, reference_model: GaussianModel, strong_model: GaussianModel):
        """Trivariate and n-variate paths agree to 1e-12."""
        rng = np.random.default_rng(31)
        for model in (reference_model, strong_model):
            for point in _points(rng, 200, 3):
                a = H_trivariate(model, point).h_value
                b = H_nvariate(model, point).h_value
                assert a == pytest.approx(b, abs=1e-12)

    def test_bivariate_paths_agree(self):
        """Bivariate and n-variate paths agree on random models."""
        rng = np.random.default_rng(29)
        for _ in range(20):
            model = GaussianModel.from_arrays(rng.normal(size=2), random_spd(rng, 2))
            for point in _points(rng, 10, 2):
                a = H_bivariate(model, point).h_value
                b = H_nvariate(model, point).h_value
                assert a == pytest.approx(b, abs=1e-12)

    def test_odd_symmetry(self, reference_model: GaussianModel):
        """For three Gaussian variables H(μ + d) = −H(μ − d)."""
        rng = np.random.default_rng(37)
        for d in _points(rng, 1000, 3, scale=10.0):
            assert evaluate(reference_model, d).h_value == pytest.approx(
                -evaluate(reference_model, -d).h_value, abs=1e-12
            )

    def test_bivariate_bounded_by_one(self):
        """|H| <= 1 for two variables on random models and points."""
        rng = np.random.default_rng(41)
        for _ in range(50):
            model = GaussianModel.bivariate(float(rng.uniform(-0.99, 0.99)))
            for point in _points(rng, 20, 2, scale=20.0):
                assert abs(evaluate(model, point).h_value) <= 1.0 + 1e-9

    def test_independence_gives_zero(self, diagonal_model: GaussianModel):
        """Independent coordinates give H = 0 on a 21³ grid."""
        axis = np.linspace(-5.0, 5.0, 21)
        for point in itertools.product(axis, axis, axis):
            assert evaluate(diagonal_model, point).h_value == 0.0

    def test_four_variables_at_mean(self):
        """At μ every φ vanishes, so H = ρ_0123."""
        rng = np.random.default_rng(43)
        mean = rng.normal(size=4)
        model = GaussianModel.from_arrays(mean, random_spd(rng, 4))
        h = evaluate(model, mean).h_value
        assert h == pytest.approx(mixed_central_moment(model, (0, 1, 2, 3)), abs=1e-12)

    def test_unsupported_model(self):
        """Only GaussianModel and DensityModel are accepted."""
        with pytest.raises(ValidationError):
            rho_terms(object())


class TestSurrogate:
    """Test h(t, s, w) over explicit coefficients."""

    def test_origin(self, reference_model: GaussianModel):
        """h(0, 0, 0) = ρ_XYZ."""
        terms = {(0, 1): 0.5, (0, 2): 0.3, (1, 2): 0.4, (0, 1, 2): 0.2}
        assert h_surrogate(terms, (0.0, 0.0, 0.0)) == pytest.approx(0.2)
        assert h_surrogate(rho_terms(reference_model), (0.0, 0.0, 0.0)) == 0.0

    def test_argument_pairing(self, reference_model: GaussianModel):
        """h(φ_Z, φ_X, φ_Y) reproduces H."""
        rng = np.random.default_rng(47)
        terms = rho_terms(reference_model)
        for point in _points(rng, 50, 3):
            result = evaluate(reference_model, point)
            fx, fy, fz = result.phi.phi
            assert h_surrogate(terms, (fz, fx, fy)) == pytest.approx(result.h_value, abs=1e-12)

    def test_gradient_at_origin(self, reference_model: GaussianModel):
        """∂h/∂t = ρ_XY, ∂h/∂s = ρ_YZ, ∂h/∂w = ρ_XZ at the origin."""
        terms = rho_terms(reference_model)
        step = 1e-6
        expected = (0.5, 0.4, 0.3)
        for k in range(3):
            forward = [0.0, 0.0, 0.0]
            backward = [0.0, 0.0, 0.0]
            forward[k] = step
            backward[k] = -step
            slope = (h_surrogate(terms, forward) - h_surrogate(terms, backward)) / (2 * step)
            assert slope == pytest.approx(expected[k], abs=1e-8)

    def test_hessian_vanishes_at_origin(self, reference_model: GaussianModel):
        """No second-order terms at the origin for a Gaussian."""
        terms = rho_terms(reference_model)
        step = 1e-3

        def h(t):
            return h_surrogate(terms, t)

        for j, k in itertools.product(range(3), repeat=2):
            corners = []
            for sj, sk in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
                t = [0.0, 0.0, 0.0]
                t[j] += sj * step
                t[k] += sk * step
                corners.append(h(t))
            mixed = (corners[0] - corners[1] - corners[2] + corners[3]) / (4 * step * step)
            assert mixed == pytest.approx(0.0, abs=1e-4)

    def test_bivariate_form(self):
        """Two arguments use (ρ + ts) / (√(1+t²)√(1+s²))."""
        value = h_surrogate({(0, 1): 0.5}, (1.0, 2.0))
        assert value == pytest.approx(2.5 / (math.sqrt(2.0) * math.sqrt(5.0)))

    def test_pairing_symmetry(self):
        """Permuting (argument, paired ρ) couples together leaves h unchanged."""
        couples = [(0.7, 0.5), (-1.2, 0.4), (2.3, 0.3)]

        def h(order):
            (t, r_xy), (s, r_yz), (w, r_xz) = order
            terms = {(0, 1): r_xy, (1, 2): r_yz, (0, 2): r_xz, (0, 1, 2): 0.1}
            return h_surrogate(terms, (t, s, w))

        reference = h(couples)
        for order in itertools.permutations(couples):
            assert h(order) == pytest.approx(reference, abs=1e-14)

    @pytest.mark.parametrize("rho", [0.5, -0.3, 0.9])
    def test_bivariate_saddle(self, rho):
        """h(t, s) has a stationary point at the origin with negative Hessian determinant."""
        terms = {(0, 1): rho}
        step = 1e-4

        def h(t, s):
            return h_surrogate(terms, (t, s))

        dt = (h(step, 0.0) - h(-step, 0.0)) / (2 * step)
        ds = (h(0.0, step) - h(0.0, -step)) / (2 * step)
        assert abs(dt) <= 1e-6
        assert abs(ds) <= 1e-6

        h0 = h(0.0, 0.0)
        assert h0 == pytest.approx(rho)
        htt = (h(step, 0.0) - 2 * h0 + h(-step, 0.0)) / step**2
        hss = (h(0.0, step) - 2 * h0 + h(0.0, -step)) / step**2
        hts = (h(step, step) - h(step, -step) - h(-step, step) + h(-step, -step)) / (4 * step**2)
        assert htt * hss - hts**2 < 0.0

    def test_missing_term(self):
        """Every subset with |S| >= 2 must be present."""
        with pytest.raises(MissingRhoTermError):
            h_surrogate({(0, 1): 0.5}, (0.0, 0.0, 0.0))

    def test_needs_two_arguments(self):
        """A single argument is a dimension mismatch."""
        with pytest.raises(DimensionMismatchError):
            h_surrogate({}, (0.0,))


class TestHollandWang:
    """Test the log-density mixed derivative."""

    def test_gaussian_constant(self, bivariate_model: GaussianModel):
        """H₁ = ρ/(1−ρ²) everywhere for a standard bivariate normal."""
        density = gaussian_density(bivariate_model)
        axis = np.linspace(-2.0, 2.0, 5)
        for point in itertools.product(axis, axis):
            assert holland_wang_H1(density, point) == pytest.approx(2.0 / 3.0, abs=1e-5)

    def test_closed_form(self):
        """ρ / ((1−ρ²) σ_x σ_y)."""
        assert holland_wang_gaussian(0.5) == pytest.approx(2.0 / 3.0)
        assert holland_wang_gaussian(0.5, 2.0, 0.5) == pytest.approx(2.0 / 3.0)
        assert holland_wang_gaussian(-0.5, 2.0, 1.0) == pytest.approx(-1.0 / 3.0)

    def test_varies_where_h1_does_not(self, bivariate_model: GaussianModel):
        """The local dependence function is not constant over the plane."""
        values = [evaluate(bivariate_model, p).h_value for p in ((0.0, 0.0), (3.0, 3.0))]
        assert max(values) - min(values) > 0.1

    def test_product_density(self):
        """Independence gives H₁ = 0."""

        def density(points: np.ndarray) -> np.ndarray:
            return 4.0 * points[:, 0] * points[:, 1]

        assert holland_wang_H1(density, (0.4, 0.6)) == pytest.approx(0.0, abs=1e-6)

    def test_stencil_leaves_support(self):
        """Non-positive density inside the stencil is an error."""

        def density(points: np.ndarray) -> np.ndarray:
            return 4.0 * points[:, 0] * points[:, 1]

        with pytest.raises(NonPositiveDensityInStencilError):
            holland_wang_H1(density, (0.0, 0.5))


class TestDensityModels:
    """Test H on numeric density models."""

    def test_pairwise_independent(self, pairwise_independent_density: DensityModel):
        """(1+xyz)/8: H = ρ_XYZ at the origin and 0 at (1, 1, 1)."""
        rho = 1.0 / (3.0 * math.sqrt(3.0))
        assert evaluate(pairwise_independent_density, (0.0, 0.0, 0.0)).h_value == pytest.approx(rho, abs=1e-10)
        assert evaluate(pairwise_independent_density, (1.0, 1.0, 1.0)).h_value == pytest.approx(0.0, abs=1e-10)

    def test_pairwise_reduction(self, pairwise_independent_density: DensityModel):
        """Without pair correlations H = (ρ_XYZ + φ_Xφ_Yφ_Z) / ∏√(1+φ²)."""
        terms = rho_terms(pairwise_independent_density)
        for pair in ((0, 1), (0, 2), (1, 2)):
            assert terms[pair] == pytest.approx(0.0, abs=1e-12)
        for point in ((0.5, -0.3, 0.8), (-1.0, 0.4, 0.9), (0.2, 0.2, -0.7)):
            result = evaluate(pairwise_independent_density, point)
            fx, fy, fz = result.phi.phi
            reduced = (terms[(0, 1, 2)] + fx * fy * fz) / math.sqrt(
                (1 + fx**2) * (1 + fy**2) * (1 + fz**2)
            )
            assert result.h_value == pytest.approx(reduced, abs=1e-12)

    def test_pairwise_independent_direct(self, pairwise_independent_density: DensityModel):
        """Direct integration agrees with the expansion."""
        for point in ((0.0, 0.0, 0.0), (1.0, 1.0, 1.0), (0.5, -0.3, 0.8)):
            direct = H_direct(pairwise_independent_density, point)
            assert direct == pytest.approx(
                evaluate(pairwise_independent_density, point).h_value, abs=1e-10
            )

    def test_uniform_square(self, uniform_square: DensityModel):
        """Independent uniforms give H = 0."""
        assert evaluate(uniform_square, (0.2, 0.9)).h_value == pytest.approx(0.0, abs=1e-12)

    def test_direct_needs_density_model(self, reference_model: GaussianModel):
        """Direct oracles integrate numerically and refuse Gaussian models."""
        with pytest.raises(ValidationError):
            B_direct(reference_model, (0.0, 0.0, 0.0))

    @pytest.mark.oracle
    def test_gaussian_oracle(self, reference_model: GaussianModel, reference_density: DensityModel):
        """Closed form, numeric expansion and direct integrals agree on a 5³ grid."""
        axis = (-2.0, -1.0, 0.0, 1.0, 2.0)
        for point in itertools.product(axis, axis, axis):
            closed = evaluate(reference_model, point).h_value
            assert evaluate(reference_density, point).h_value == pytest.approx(closed, abs=1e-6)
            assert H_direct(reference_density, point) == pytest.approx(closed, abs=1e-6)

    @pytest.mark.oracle
    def test_second_moment_identity(self, reference_model: GaussianModel, reference_density: DensityModel):
        """E(X_i − E(X_i | rest = p))² = σ_i² + ξ_i²."""
        point = (1.0, -0.5, 2.0)
        xi = phi_at(reference_model, point).xi
        for axis in range(3):
            value = conditional_second_moment(reference_density, axis, point)
            assert value == pytest.approx(1.0 + xi[axis] ** 2, abs=1e-6)
        assert Q_direct(reference_density, point) == pytest.approx(
            np.prod([1.0 + x**2 for x in xi]), abs=1e-6
        )

    @pytest.mark.slow
    @pytest.mark.oracle
    def test_four_variables_numeric(self):
        """Four-dimensional quadrature reproduces ρ_0123 at μ."""
        rng = np.random.default_rng(53)
        model = GaussianModel.from_arrays(np.zeros(4), random_spd(rng, 4))
        density = gaussian_density_model(model, sigmas=6.0, quad_order=48, tol=1e-6)
        h = evaluate(density, (0.0, 0.0, 0.0, 0.0)).h_value
        assert h == pytest.approx(mixed_central_moment(model, (0, 1, 2, 3)), abs=1e-5)
