import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qrbackward.params import select_params
from qrbackward.regops import (
    FrequencyThreshold,
    OperatorKind,
    OperatorVariant,
    StabilizedOperator,
    admissible_set,
    apply_perturbing,
    apply_stabilized,
    frequency_threshold,
    stabilized_multipliers,
)
from qrbackward.spectral import Interval, eigenpair
from qrbackward.verify import classical_multiplier_holds, operator_bound_violations, random_coefficients

PI = math.pi
IV = Interval(0, PI)
TRUNC = OperatorVariant("truncation", 1.0)


def phi_samples(j, grid):
    w = eigenpair(j).phi(grid.x)
    w[[0, -1]] = 0.0
    return w


class TestVariantMetadata:
    def test_constants(self):
        assert OperatorVariant("truncation", 2.0).C0bar == 2.0
        assert OperatorVariant("classical", 2.0).C0bar == 1.0
        assert OperatorVariant("hybrid", 2.0).C0bar == 3.0
        assert [OperatorVariant(k, 1.0).source_order for k in ("truncation", "classical", "hybrid")] == [2, 4, 2]
        assert OperatorVariant("truncation", 4.0).C1 == 4.0
        assert OperatorVariant("hybrid", 4.0).C1 == 1.0

    def test_rejects(self):
        with pytest.raises(ValueError):
            OperatorVariant("gevrey", 1.0)
        with pytest.raises(ValueError):
            OperatorVariant("truncation", 0.0)


class TestThreshold:
    @pytest.mark.parametrize("eps, C1, expected", [
        (1e-3, 1.0, 0.7 * math.log(1e3)),
        (1e-5, 1.0, 0.7 * math.log(1e5)),
        (1e-4, 4.0, 0.7 / 4 * math.log(1e4)),
    ])
    def test_values(self, eps, C1, expected):
        lam = frequency_threshold(select_params(eps, C1=C1)).lam
        assert lam == pytest.approx(expected, rel=1e-12)

    def test_reported_digits(self):
        assert frequency_threshold(select_params(1e-3)).lam == pytest.approx(4.835, abs=1e-3)
        assert frequency_threshold(select_params(1e-5)).lam == pytest.approx(8.059, abs=1e-3)
        assert frequency_threshold(select_params(1e-4, C1=4.0)).lam == pytest.approx(1.612, abs=1e-3)

    def test_admissible(self):
        np.testing.assert_array_equal(admissible_set(FrequencyThreshold(4.835), IV), [1, 2])
        np.testing.assert_array_equal(admissible_set(FrequencyThreshold(8.059), IV), [1, 2])
        assert admissible_set(FrequencyThreshold(0.5), IV).size == 0
        np.testing.assert_array_equal(admissible_set(9.0, IV), [1, 2, 3])

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            FrequencyThreshold(0.0)
        with pytest.raises(ValueError):
            apply_perturbing(OperatorVariant("classical", 1.0), [1.0], -1.0, IV)


class TestPerturbing:
    def test_truncation_low_mode_zero(self):
        assert apply_perturbing(TRUNC, [1.0], 4.835, IV)[0] == 0.0

    def test_truncation_high_mode(self):
        np.testing.assert_allclose(apply_perturbing(TRUNC, [0, 0, 1.0], 4.835, IV), [0, 0, 9.0])

    def test_classical(self):
        out = apply_perturbing(OperatorVariant("classical", 1.0), [0.0, 1.0], 4.0, IV)
        np.testing.assert_allclose(out, [0.0, 1.0])


class TestStabilized:
    def test_first_mode(self, unit_grid):
        out = apply_stabilized(TRUNC, phi_samples(1, unit_grid), unit_grid, 4.835)
        np.testing.assert_allclose(out, -phi_samples(1, unit_grid), atol=1e-12)

    def test_outside_admissible(self, unit_grid):
        out = apply_stabilized(TRUNC, phi_samples(3, unit_grid), unit_grid, 4.835)
        np.testing.assert_allclose(out, 0.0, atol=1e-12)

    def test_two_modes(self, unit_grid):
        u = phi_samples(1, unit_grid) + phi_samples(2, unit_grid)
        expected = -(phi_samples(1, unit_grid) + 4 * phi_samples(2, unit_grid))
        np.testing.assert_allclose(apply_stabilized(TRUNC, u, unit_grid, 4.835), expected, atol=1e-12)

    def test_classical_matches_multipliers(self, unit_grid):
        variant = OperatorVariant("classical", 1.0)
        lam = 4.835
        u = phi_samples(5, unit_grid)
        mult = -5**2 * (1 - 5**2 / (4 * lam))
        np.testing.assert_allclose(apply_stabilized(variant, u, unit_grid, lam), mult * u, atol=1e-10)

    def test_hybrid_low_modes_only(self, unit_grid):
        variant = OperatorVariant("hybrid", 4.0)
        lam = 2.0
        u = phi_samples(1, unit_grid) + phi_samples(2, unit_grid)
        expected = (16 / (4 * lam) - 4.0) * phi_samples(1, unit_grid)
        np.testing.assert_allclose(apply_stabilized(variant, u, unit_grid, lam), expected, atol=1e-12)

    @pytest.mark.parametrize("kind", list(OperatorKind))
    def test_linearity(self, kind, unit_grid, rng):
        op = StabilizedOperator(OperatorVariant(kind, 1.3), unit_grid, 5.0)
        a, b = rng.standard_normal((2, unit_grid.M + 1))
        a[[0, -1]] = b[[0, -1]] = 0.0
        np.testing.assert_allclose(op(2.5 * a - b), 2.5 * op(a) - op(b), atol=1e-10)

    def test_rejects_bad_length(self, unit_grid):
        with pytest.raises(ValueError):
            StabilizedOperator(TRUNC, unit_grid, 4.0)(np.zeros(3))


@pytest.mark.parametrize("kind", [OperatorKind.TRUNCATION, OperatorKind.HYBRID])
@pytest.mark.parametrize("Mbar, eps", [(1.0, 1e-3), (1.0, 1e-5), (4.0, 1e-4)])
def test_norm_bounds_on_random_sequences(kind, Mbar, eps, rng):
    lam = select_params(eps, C1=Mbar).lam
    coeffs = random_coefficients(rng, 200, 14)
    stab, pert, worst = operator_bound_violations(OperatorVariant(kind, Mbar), lam, coeffs, IV)
    assert (stab, pert) == (0, 0)
    assert worst <= 1.0


def test_classical_perturbing_bound(rng):
    lam = select_params(1e-3).lam
    coeffs = random_coefficients(rng, 200, 14)
    _, pert, _ = operator_bound_violations(OperatorVariant("classical", 1.0), lam, coeffs, IV)
    assert pert == 0


@settings(max_examples=50, deadline=None)
@given(st.floats(0.1, 10.0), st.floats(0.5, 50.0))
def test_classical_one_sided_multiplier(Mbar, lam):
    assert classical_multiplier_holds(Mbar, lam)
    mu = np.linspace(0, 1e3, 5001)
    assert np.all(stabilized_multipliers(OperatorVariant("classical", Mbar), mu, lam) >= -lam - 1e-9)
