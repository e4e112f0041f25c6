import numpy as np
import pytest

from motrack.appearance import (
    AppearanceParams,
    appearance_cost_matrix,
    dynamic_alpha,
    ema_update,
    normalize_embedding,
)


class TestDynamicAlpha:
    def test_at_threshold_fully_ignores_new(self):
        p = AppearanceParams(alpha_f=0.95, sigma=0.4)
        assert dynamic_alpha(0.4, p) == 1.0

    def test_at_full_confidence_hits_floor(self):
        p = AppearanceParams(alpha_f=0.95, sigma=0.4)
        assert dynamic_alpha(1.0, p) == 0.95

    def test_worked_example(self):
        # direct evaluation: 0.95 + 0.05 * (1 - 0.3/0.6) = 0.975
        p = AppearanceParams(alpha_f=0.95, sigma=0.4)
        assert dynamic_alpha(0.7, p) == pytest.approx(0.975, abs=1e-12)

    def test_endpoints_exact_over_random_params(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            p = AppearanceParams(
                alpha_f=float(rng.uniform(0, 1)), sigma=float(rng.uniform(0.05, 0.95))
            )
            assert dynamic_alpha(p.sigma, p) == 1.0
            assert dynamic_alpha(1.0, p) == p.alpha_f

    def test_affine_midpoint(self):
        rng = np.random.default_rng(13)
        for _ in range(200):
            p = AppearanceParams(
                alpha_f=float(rng.uniform(0, 1)), sigma=float(rng.uniform(0.05, 0.95))
            )
            lo = float(rng.uniform(p.sigma, 1.0))
            hi = float(rng.uniform(lo, 1.0))
            mid = dynamic_alpha((lo + hi) / 2.0, p)
            avg = (dynamic_alpha(lo, p) + dynamic_alpha(hi, p)) / 2.0
            assert mid == pytest.approx(avg, abs=1e-12)

    def test_below_threshold_rejected(self):
        p = AppearanceParams(alpha_f=0.95, sigma=0.4)
        with pytest.raises(ValueError):
            dynamic_alpha(0.39, p)


class TestEmaUpdate:
    def test_alpha_one_is_bit_identical_over_sequence(self):
        rng = np.random.default_rng(3)
        e = normalize_embedding(rng.standard_normal(16))
        baseline = e.copy()
        for _ in range(50):
            e = ema_update(e, normalize_embedding(rng.standard_normal(16)), 1.0)
        assert np.array_equal(e, baseline)

    def test_alpha_zero_replaces(self):
        e_prev = normalize_embedding([1.0, 0.0])
        e_new = normalize_embedding([0.0, 1.0])
        out = ema_update(e_prev, e_new, 0.0)
        assert np.allclose(out, e_new, atol=1e-12)

    def test_even_blend(self):
        # hand arithmetic: (0.5, 0.5) normalized -> (1/sqrt 2, 1/sqrt 2)
        out = ema_update(np.array([1.0, 0.0]), np.array([0.0, 1.0]), 0.5)
        assert np.allclose(out, [1 / np.sqrt(2), 1 / np.sqrt(2)], atol=1e-12)

    def test_degenerate_blend_keeps_previous_and_warns(self):
        e = np.array([1.0, 0.0])
        with pytest.warns(RuntimeWarning):
            out = ema_update(e, -e, 0.5)
        assert np.array_equal(out, e)

    def test_output_unit_norm(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            e1 = normalize_embedding(rng.standard_normal(8))
            e2 = normalize_embedding(rng.standard_normal(8))
            out = ema_update(e1, e2, float(rng.uniform(0, 0.99)))
            assert abs(np.linalg.norm(out) - 1.0) < 1e-6


class TestCostMatrix:
    def test_identical_embedding(self):
        e = normalize_embedding([0.3, 0.4, 0.5])
        assert appearance_cost_matrix([e], [e])[0, 0] == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal(self):
        got = appearance_cost_matrix([[1.0, 0.0]], [[0.0, 1.0]])
        assert got[0, 0] == pytest.approx(0.0, abs=1e-12)

    def test_dot_product_oracle(self):
        got = appearance_cost_matrix([[0.6, 0.8]], [[1.0, 0.0]])
        assert got[0, 0] == pytest.approx(0.6, abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            appearance_cost_matrix([[1.0, 0.0]], [[1.0, 0.0, 0.0]])

    def test_entries_bounded(self):
        rng = np.random.default_rng(11)
        t = rng.standard_normal((6, 32))
        d = rng.standard_normal((9, 32))
        got = appearance_cost_matrix(t, d)
        assert (got >= -1 - 1e-9).all() and (got <= 1 + 1e-9).all()


class TestNormalize:
    def test_zero_rejected(self):
        with pytest.raises(ValueError):
            normalize_embedding([0.0, 0.0])

    def test_nan_rejected(self):
        with pytest.raises(ValueError):
            normalize_embedding([np.nan, 1.0])

    def test_params_validate(self):
        with pytest.raises(ValueError):
            AppearanceParams(sigma=1.0)
        with pytest.raises(ValueError):
            AppearanceParams(alpha_f=1.5)
