import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from algoselect.online import (
    FPLState,
    RegretLedger,
    UCBArmState,
    UCBTree,
    adaptive_window_run,
    cascade_choose,
    fpl_choose,
    fpl_run,
    fpl_update,
    gumbel,
    ucb1_choose,
    ucb_tree_route,
)
from algoselect.simulate import (
    alternating_stream,
    fpl_bound_ratio,
    near_tie_stream,
    run_adaptive,
    run_cascade,
    run_fpl,
    run_ucb_tree,
    switch_stream,
    ucb_tree_bound,
)


def rng(s=0):
    return np.random.default_rng(s)


class TestFPL:
    def test_single_action(self):
        r = rng(1)
        assert {fpl_choose(FPLState.start(1), r) for _ in range(100)} == {0}

    def test_huge_lead_wins(self):
        r = rng(2)
        state = FPLState((0.0, 1e6))
        picks = [fpl_choose(state, r) for _ in range(10_000)]
        assert picks.count(0) / len(picks) > 0.999

    def test_symmetric_ties(self):
        r = rng(3)
        state = FPLState((2.0,) * 4)
        counts = np.bincount([fpl_choose(state, r) for _ in range(100_000)], minlength=4)
        np.testing.assert_allclose(counts / counts.sum(), 0.25, atol=0.01)

    def test_gumbel_moments(self):
        g = gumbel(rng(4), 200_000)
        # Gumbel(0, 1): mean is the Euler-Mascheroni constant, variance pi^2 / 6
        assert abs(g.mean() - np.euler_gamma) < 0.01
        assert abs(g.var() - math.pi**2 / 6) < 0.03
        assert np.all(np.isfinite(g))

    def test_choice_probability_is_softmax(self):
        # Gumbel-max trick: P(a) = exp(-L_a) / sum exp(-L)
        L = np.array([0.0, 0.5, 1.5])
        r = rng(5)
        state = FPLState(tuple(L))
        n = 100_000
        freq = np.bincount([fpl_choose(state, r) for _ in range(n)], minlength=3) / n
        p = np.exp(-L) / np.exp(-L).sum()
        assert np.all(np.abs(freq - p) < 3 * np.sqrt(p * (1 - p) / n) + 1e-3)

    def test_update_zero(self):
        s = fpl_update(FPLState((1.0, 2.0), 3), [0.0, 0.0])
        assert s == FPLState((1.0, 2.0), 4)

    def test_update_twice(self):
        s = FPLState.start(2)
        for _ in range(2):
            s = fpl_update(s, [1.0, 0.0])
        assert s.cumulative_losses == (2.0, 0.0)

    def test_update_matches_column_sums(self):
        losses = rng(6).random((100, 5))
        s = FPLState.start(5)
        for row in losses:
            s = fpl_update(s, row)
        expected = [math.fsum(losses[:, j]) for j in range(5)]
        np.testing.assert_allclose(s.cumulative_losses, expected, rtol=1e-12)
        assert s.round == 100

    def test_update_rejects_length_mismatch(self):
        with pytest.raises(ValueError):
            fpl_update(FPLState.start(2), [0.1])
        with pytest.raises(ValueError):
            fpl_update(FPLState.start(2), [0.1, 1.5])

    def test_shift_invariance_under_shared_seed(self):
        base = FPLState((0.3, 1.7, 0.9))
        shifted = FPLState(tuple(c + 123.0 for c in base.cumulative_losses))
        a, b = rng(7), rng(7)
        assert [fpl_choose(base, a) for _ in range(500)] == [fpl_choose(shifted, b) for _ in range(500)]

    def test_vectorised_run_matches_stepwise(self):
        stream = near_tie_stream(200, 4, rng(8))
        fast = fpl_run(stream, rng(9))
        r, s, slow = rng(9), FPLState.start(4), []
        for row in stream:
            slow.append(fpl_choose(s, r))
            s = fpl_update(s, row)
        assert fast.tolist() == slow

    def test_cumulative_nondecreasing(self):
        s, prev = FPLState.start(3), np.zeros(3)
        for row in rng(10).random((50, 3)):
            s = fpl_update(s, row)
            assert np.all(np.asarray(s.cumulative_losses) >= prev)
            prev = np.asarray(s.cumulative_losses)


class TestLedger:
    def test_regret_recomputes(self):
        losses = rng(0).random((30, 3))
        chosen = rng(1).integers(0, 3, 30)
        led = RegretLedger(losses, chosen)
        expected = sum(losses[t, chosen[t]] for t in range(30)) - min(losses[:, j].sum() for j in range(3))
        assert led.regret() == pytest.approx(expected, abs=1e-12)
        assert led.regret_curve()[-1] == pytest.approx(expected, abs=1e-12)

    def test_csv(self):
        led = RegretLedger(np.array([[0.0, 1.0], [1.0, 0.0]]), np.array([1, 1]))
        rows = list(csv.DictReader(io.StringIO(led.to_csv())))
        assert [r["regret"] for r in rows] == ["1.0", "0.0"]
        assert rows[1]["best_fixed_cumloss"] == "1.0"

    def test_single_round_regret_bounded(self):
        for s in range(20):
            led = run_fpl(1, 3, s)
            assert 0.0 <= led.regret() <= 1.0

    def test_segments(self):
        stream, segs = switch_stream(10, 2)
        led = RegretLedger(stream, np.zeros(10, dtype=int), segs)
        assert led.segment_bounds() == [(0, 5), (5, 10)]
        assert led.segment_best() == [0.0, 0.0]
        assert led.segment_regret() == 5.0
        assert led.regret() == 0.0

    def test_replay_determinism(self):
        a, b = run_fpl(500, 4, 3), run_fpl(500, 4, 3)
        assert a.to_csv() == b.to_csv()
        c1, c2 = run_cascade(300, [(0, 0.3), (10, 0.0)], 5), run_cascade(300, [(0, 0.3), (10, 0.0)], 5)
        assert c1.ledger.to_csv() == c2.ledger.to_csv()
        assert run_ucb_tree(300, 2, 1).to_csv() == run_ucb_tree(300, 2, 1).to_csv()
        x, y = run_adaptive(300, 2, 4), run_adaptive(300, 2, 4)
        assert x[0].to_csv() == y[0].to_csv() and x[1].to_csv() == y[1].to_csv()


class TestUCB1:
    def test_unpulled_first(self):
        assert ucb1_choose([UCBArmState(), UCBArmState()], 1) == 0
        assert ucb1_choose([UCBArmState(pulls=1), UCBArmState()], 2) == 1

    def test_better_mean_wins(self):
        assert ucb1_choose([UCBArmState(50, 0.0), UCBArmState(50, 1.0)], 100) == 0

    def test_single_arm(self):
        arm = UCBArmState()
        for t in range(1, 20):
            assert ucb1_choose([arm], t) == 0
            arm.update(0.5)

    def test_errors(self):
        with pytest.raises(ValueError):
            ucb1_choose([], 1)
        with pytest.raises(ValueError):
            UCBArmState().update(1.5)

    @given(st.lists(st.floats(0, 1), min_size=1, max_size=40))
    def test_mean_stays_in_unit_interval(self, xs):
        arm = UCBArmState()
        for x in xs:
            arm.update(x)
        assert 0.0 <= arm.mean <= 1.0
        assert arm.mean == pytest.approx(float(np.mean(xs)), abs=1e-9)

    def test_regret_is_sublinear(self):
        # deterministic leaf losses (0, 1): doubling T far less than doubles regret
        r1 = run_ucb_tree(2000, 1, 0).regret()
        r2 = run_ucb_tree(4000, 1, 0).regret()
        assert r2 / r1 < 2


class TestCascade:
    def test_dominant_arm(self):
        arms = [UCBArmState(1000, 0.0, 1.0), UCBArmState(1000, 0.8, 1.0)]
        assert cascade_choose(arms, 2001, 5000) == 0

    def test_single_arm(self):
        assert cascade_choose([UCBArmState(cost=3.0)], 1, 10) == 0

    def test_unsorted_costs(self):
        with pytest.raises(ValueError):
            cascade_choose([UCBArmState(cost=2.0), UCBArmState(cost=1.0)], 1, 10)

    def test_every_arm_is_tried(self):
        res = run_cascade(50, [(0, 0.3), (10, 0.0)], 0)
        assert set(res.ledger.chosen[:2].tolist()) == {0, 1}

    def test_prefers_cheap_arm_when_losses_tie(self):
        res = run_cascade(1000, [(0, 0.0), (10, 0.0)], 1)
        window = res.ledger.chosen[99:1000]
        assert np.mean(window == 0) > 0.95

    def test_converges_to_cheap_noisy_arm(self):
        res = run_cascade(5000, [(0, 0.3), (10, 0.0)], 2)
        assert res.optimal == pytest.approx(0.3)
        assert abs(res.excess) < 0.05


class TestUCBTree:
    def test_depth_zero(self):
        tree = UCBTree(0)
        assert tree.select() == (0, [])
        assert ucb_tree_route(tree, lambda leaf: 0.5) == 0

    def test_depth_one_finds_zero_leaf(self):
        tree = UCBTree(1)
        picks = [ucb_tree_route(tree, lambda leaf: float(leaf != 0)) for _ in range(2000)]
        assert picks.count(0) / 2000 > 0.95

    def test_loss_credited_to_every_gate(self):
        tree = UCBTree(3)
        leaf, path = tree.select()
        tree.update(path, 0.25)
        assert len(path) == 3
        for g, arm in path:
            assert tree.gates[g][arm].pulls == 1 and tree.gates[g][arm].mean == 0.25
        assert sum(a.pulls for gate in tree.gates for a in gate) == 3

    def test_rejects_bad_loss(self):
        with pytest.raises(ValueError):
            ucb_tree_route(UCBTree(1), lambda leaf: -0.1)

    def test_depth_two_bound(self):
        led = run_ucb_tree(10_000, 2, 0)
        assert led.regret() <= ucb_tree_bound(10_000, 2)
        assert ucb_tree_bound(10_000, 2) == pytest.approx(3 * 2 * math.sqrt(1e4 * math.log(1e4)))

    def test_leaf_numbering(self):
        # forcing the right arm at every gate reaches the last leaf
        tree = UCBTree(2)
        for gate in tree.gates:
            gate[0].pulls, gate[0].mean = 100, 1.0
            gate[1].pulls, gate[1].mean = 100, 0.0
        assert tree.select()[0] == 3


class TestAdaptiveWindow:
    def test_stationary_regret_small(self):
        ada, _ = run_adaptive(5000, 2, 0, stationary=True)
        assert ada.regret() / 5000 < 0.05

    def test_single_round(self):
        led = adaptive_window_run(np.array([[0.0, 1.0]]), (), rng(0))
        assert 0.0 <= led.regret() <= 1.0

    def test_empty_stream(self):
        with pytest.raises(ValueError):
            adaptive_window_run(np.zeros((0, 2)), (), rng(0))

    def test_beats_plain_fpl_after_switch(self):
        ada, plain = run_adaptive(2000, 2, 1)
        assert ada.segment_regret() < plain.segment_regret()
        assert ada.regret() < plain.regret()
        assert ada.segments == plain.segments == (1000,)


class TestStreams:
    def test_alternating(self):
        s = alternating_stream(4, 3)
        assert s.tolist() == [[1, 0, 1], [0, 1, 1], [1, 0, 1], [0, 1, 1]]

    @settings(max_examples=20, deadline=None)
    @given(st.integers(1, 300), st.integers(2, 6), st.integers(0, 1000))
    def test_near_tie_is_binary(self, T, K, s):
        stream = near_tie_stream(T, K, rng(s))
        assert stream.shape == (T, K)
        assert set(np.unique(stream)) <= {0.0, 1.0}

    def test_fpl_ratio_on_alternation_grows(self):
        # a deterministic alternation defeats scale-1 FPL: regret is linear in T
        small = np.mean([fpl_bound_ratio(run_fpl(1000, 2, s, env="alternating")) for s in range(5)])
        large = np.mean([fpl_bound_ratio(run_fpl(10_000, 2, s, env="alternating")) for s in range(5)])
        assert large > 2 * small
