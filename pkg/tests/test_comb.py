import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from algoselect.comb import (
    Endpoint,
    SeedingFunction,
    as_features,
    comb_select,
    logit,
    make_rng,
    n_path_distribution,
    sample_path,
    seed,
    sigmoid,
    validate_distribution,
)

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)


class TestSeed:
    def test_zero_weights_give_half(self):
        s = SeedingFunction((0.0, 0.0, 0.0), 0.0)
        assert seed(s, [5.0, -3.0, 1e3]) == 0.5

    def test_zero_input_gives_half(self):
        assert seed(SeedingFunction((1.0,), 0.0), [0.0]) == 0.5

    def test_log3_gives_three_quarters(self):
        # 1 / (1 + e^{-ln 3}) = 1 / (1 + 1/3)
        assert seed(SeedingFunction((1.0,), 0.0), [math.log(3)]) == pytest.approx(0.75, abs=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            seed(SeedingFunction((1.0, 2.0), 0.0), [1.0])

    @pytest.mark.parametrize("bad", [[float("nan")], [float("inf")], []])
    def test_rejects_nonfinite_or_empty(self, bad):
        with pytest.raises(ValueError):
            as_features(bad)

    @pytest.mark.parametrize("x", [-1e9, -41.0, 41.0, 1e9])
    def test_saturates_strictly_inside_unit_interval(self, x):
        t = sigmoid(x)
        assert 0.0 < t < 1.0

    @given(st.lists(finite, min_size=1, max_size=6), finite, st.floats(0.01, 100))
    def test_strictly_monotone_in_bias(self, w, b, delta):
        phi = np.ones(len(w)) * 0.1
        s1, s2 = SeedingFunction(tuple(w), b), SeedingFunction(tuple(w), b + delta)
        z = float(np.dot(w, phi)) + b
        if abs(z) < 30:  # away from saturation the increase is visible in float64
            assert seed(s2, phi) > seed(s1, phi)
        else:
            assert seed(s2, phi) >= seed(s1, phi)

    @given(st.lists(finite, min_size=1, max_size=6), finite)
    def test_output_in_open_interval(self, w, b):
        t = seed(SeedingFunction(tuple(w), b), np.full(len(w), 3.0))
        assert 0.0 < t < 1.0

    def test_logit_inverts_sigmoid(self):
        for t in (0.1, 0.5, 0.9):
            assert sigmoid(logit(t)) == pytest.approx(t, abs=1e-15)

    def test_json_round_trip(self):
        s = SeedingFunction((0.25, -1.5), 0.75)
        again = SeedingFunction.from_json(s.to_json())
        assert again == s
        assert json.loads(s.to_json()) == {"weights": [0.25, -1.5], "bias": 0.75}


class TestCombSelect:
    def test_t_zero_is_systematic(self):
        rng = make_rng(1)
        assert all(comb_select(0.0, rng) is Endpoint.SYSTEMATIC for _ in range(2000))

    def test_t_one_is_random(self):
        rng = make_rng(2)
        assert all(comb_select(1.0, rng) is Endpoint.RANDOM for _ in range(2000))

    def test_half_frequency(self):
        rng = make_rng(3)
        n = 100_000
        frac = sum(comb_select(0.5, rng) is Endpoint.SYSTEMATIC for _ in range(n)) / n
        # binomial 3 sigma at n=1e5 is 0.0047, inside the 0.01 tolerance
        assert abs(frac - 0.5) < 0.01

    def test_t_and_one_minus_t_are_mirror_images(self):
        n, t = 50_000, 0.3
        r1, r2 = make_rng(5), make_rng(6)
        f_ran = sum(comb_select(t, r1) is Endpoint.RANDOM for _ in range(n)) / n
        f_sys = sum(comb_select(1 - t, r2) is Endpoint.SYSTEMATIC for _ in range(n)) / n
        sigma = math.sqrt(2 * t * (1 - t) / n)
        assert abs(f_ran - f_sys) < 3 * sigma

    @pytest.mark.parametrize("t", [-0.1, 1.1, float("nan")])
    def test_rejects_out_of_range(self, t):
        with pytest.raises(ValueError):
            comb_select(t, make_rng(0))


class TestNPath:
    def test_two_zeros(self):
        np.testing.assert_allclose(n_path_distribution([0, 0]), [0.5, 0.5], atol=1e-15)

    @pytest.mark.parametrize("c", [-700.0, 0.0, 3.3, 900.0])
    def test_constant_scores_are_uniform(self, c):
        np.testing.assert_allclose(n_path_distribution([c] * 4), [0.25] * 4, atol=1e-15)

    def test_log_integers(self):
        p = n_path_distribution([math.log(1), math.log(2), math.log(3)])
        np.testing.assert_allclose(p, [1 / 6, 2 / 6, 3 / 6], atol=1e-12)

    @pytest.mark.parametrize("t", [0.1, 0.5, 0.9])
    def test_reduces_to_two_path_comb(self, t):
        np.testing.assert_allclose(n_path_distribution([0.0, logit(t)]), [1 - t, t], atol=1e-9)

    @given(st.lists(st.floats(-500, 500), min_size=1, max_size=12), st.floats(-1e3, 1e3))
    def test_shift_invariance(self, scores, c):
        p = n_path_distribution(scores)
        q = n_path_distribution(np.asarray(scores) + c)
        np.testing.assert_allclose(p, q, atol=1e-12)

    @given(st.lists(finite, min_size=1, max_size=12))
    def test_is_a_distribution(self, scores):
        p = n_path_distribution(scores)
        assert np.all(p >= 0)
        assert abs(p.sum() - 1.0) <= 1e-9

    def test_validate_rejects_bad(self):
        with pytest.raises(ValueError):
            validate_distribution([0.5, 0.6])
        with pytest.raises(ValueError):
            validate_distribution([1.2, -0.2])


class TestSamplePath:
    def test_point_masses(self):
        rng = make_rng(7)
        assert {sample_path([1, 0, 0], rng) for _ in range(1000)} == {0}
        assert {sample_path([0, 0, 1], rng) for _ in range(1000)} == {2}

    def test_frequencies(self):
        rng = make_rng(8)
        p = np.array([0.2, 0.3, 0.5])
        n = 100_000
        counts = np.bincount([sample_path(p, rng) for _ in range(n)], minlength=3)
        np.testing.assert_allclose(counts / n, p, atol=0.01)

    @settings(max_examples=50)
    @given(st.lists(st.floats(0, 10), min_size=1, max_size=8).filter(lambda v: sum(v) > 0), st.integers(0, 2**32))
    def test_index_has_mass(self, w, s):
        p = np.asarray(w) / sum(w)
        i = sample_path(p, make_rng(s))
        assert 0 <= i < len(p) and p[i] > 0
