import math
import random

import numpy as np
import pytest

from emojilab.errors import InputError, NumericalError
from emojilab.ingest import Post, normalize_text
from emojilab.polarity import (
    PolarityRecord,
    compare_polarity,
    flip_analysis,
    harmonic_weights,
    jeffreys,
    maud,
    polarity_table,
    select_comparison_set,
    weighted_spearman,
)

ROCKET, FIRE, GEM, BEAR = "\U0001F680", "\U0001F525", "\U0001F48E", "\U0001F43B"


def _posts(emoji, n_pos, n_neg, prefix="p"):
    posts = []
    for i in range(n_pos):
        posts.append(Post(id=f"{prefix}{emoji}p{i}", raw_text=emoji,
                          text=normalize_text(emoji), label="positive"))
    for i in range(n_neg):
        posts.append(Post(id=f"{prefix}{emoji}n{i}", raw_text=emoji,
                          text=normalize_text(emoji), label="negative"))
    return posts


def _rec(emoji, pos, neg):
    return PolarityRecord(emoji=emoji, pos=pos, neg=neg, theta=jeffreys(pos, neg))


# --- brute-force oracle: counting-definition ranks + explicit weighted Pearson


def oracle_weighted_spearman(xs, ys, ws):
    def ranks(vals):
        out = []
        for i, v in enumerate(vals):
            below = sum(1 for u in vals if u < v)
            equal = sum(1 for j, u in enumerate(vals) if u == v and j != i)
            out.append(1 + below + equal / 2)
        return out

    rx, ry = ranks(xs), ranks(ys)
    total = sum(ws)
    w = [wi / total for wi in ws]
    mx = sum(wi * xi for wi, xi in zip(w, rx))
    my = sum(wi * yi for wi, yi in zip(w, ry))
    cov = sum(wi * (xi - mx) * (yi - my) for wi, xi, yi in zip(w, rx, ry))
    vx = sum(wi * (xi - mx) ** 2 for wi, xi in zip(w, rx))
    vy = sum(wi * (yi - my) ** 2 for wi, yi in zip(w, ry))
    return cov / math.sqrt(vx * vy)


class TestPolarityTable:
    def test_jeffreys_values(self):
        assert jeffreys(30, 70) == pytest.approx(30.5 / 101)
        assert jeffreys(1, 0) == 0.75

    def test_counts_presence_once_per_post(self):
        posts = [
            Post(id="1", raw_text=f"{ROCKET}{ROCKET}", text=f"{ROCKET}{ROCKET}",
                 label="positive"),
            Post(id="2", raw_text=ROCKET, text=ROCKET, label="negative"),
        ]
        table = polarity_table(posts)
        assert table[ROCKET].pos == 1 and table[ROCKET].neg == 1

    def test_unlabeled_ignored(self):
        posts = _posts(ROCKET, 2, 1) + [
            Post(id="u", raw_text=ROCKET, text=ROCKET, label="unlabeled")
        ]
        table = polarity_table(posts)
        assert table[ROCKET].support == 3

    def test_theta_strictly_inside_unit_interval(self):
        for pos, neg in [(0, 1), (1, 0), (0, 50), (50, 0), (3, 4)]:
            if pos + neg >= 1:
                t = jeffreys(pos, neg)
                assert 0.0 < t < 1.0


class TestSelectComparisonSet:
    def test_threshold_failure_only_reachable_via_tail(self):
        # 300 uses but 29 positives fails the platform_asset class minimum;
        # in a small pool it can only enter through the extreme tails.
        a = {ROCKET: _rec(ROCKET, 29, 271), FIRE: _rec(FIRE, 200, 200)}
        b = {ROCKET: _rec(ROCKET, 40, 260), FIRE: _rec(FIRE, 210, 190)}
        selected = {r.emoji: r for r in select_comparison_set(a, b, "platform_asset")}
        assert selected[ROCKET].in_tail is True
        assert selected[FIRE].in_tail is False

    def test_language_threshold_boundary_included(self):
        a = {GEM: _rec(GEM, 12, 108), FIRE: _rec(FIRE, 100, 100)}
        b = {GEM: _rec(GEM, 15, 110), FIRE: _rec(FIRE, 90, 90)}
        selected = {r.emoji: r for r in select_comparison_set(a, b, "language")}
        assert GEM in selected
        assert selected[GEM].in_tail is False

    def test_low_support_tail_member_included(self):
        # rank-1 theta on both sides with only 10 uses: tail admission
        a = {ROCKET: _rec(ROCKET, 9, 1), FIRE: _rec(FIRE, 150, 160)}
        b = {ROCKET: _rec(ROCKET, 8, 2), FIRE: _rec(FIRE, 160, 150)}
        selected = {r.emoji: r for r in select_comparison_set(a, b, "platform_asset")}
        assert selected[ROCKET].in_tail is True

    def test_mid_ranked_threshold_failure_excluded(self):
        # language regime: 120 threshold-passing emojis spread over theta,
        # one mid-ranked low-support emoji falls outside both 50-tails.
        a, b = {}, {}
        for i in range(120):
            e = chr(0x1F400 + i)
            pos = 20 + i  # thetas increase with i
            a[e] = _rec(e, pos, 160 - pos)
            b[e] = _rec(e, pos, 160 - pos)
        mid = "\U0001F680"
        a[mid] = _rec(mid, 25, 25)  # theta ~0.5 -> mid ranked, support 50 < 120
        b[mid] = _rec(mid, 25, 25)
        selected = {r.emoji for r in select_comparison_set(a, b, "language")}
        assert mid not in selected
        assert len(selected) == 120

    def test_empty_intersection_errors(self):
        with pytest.raises(InputError):
            select_comparison_set(
                {ROCKET: _rec(ROCKET, 5, 5)}, {FIRE: _rec(FIRE, 5, 5)}, "language"
            )

    def test_unknown_regime(self):
        with pytest.raises(InputError):
            select_comparison_set(
                {ROCKET: _rec(ROCKET, 5, 5)}, {ROCKET: _rec(ROCKET, 5, 5)}, "nope"
            )


class TestHarmonicWeights:
    def test_equal_supports_proportional(self):
        w = harmonic_weights([100, 200, 300], [100, 200, 300])
        assert w.tolist() == pytest.approx([1 / 6, 2 / 6, 3 / 6])

    def test_dominated_by_smaller_side(self):
        w = harmonic_weights([1000, 100], [10, 100])
        raw = 2 * 1000 * 10 / 1010
        assert raw == pytest.approx(19.8, abs=0.01)
        assert w[0] == pytest.approx(raw / (raw + 100))

    def test_single_emoji_weight_one(self):
        assert harmonic_weights([42], [17]).tolist() == [1.0]


class TestWeightedSpearman:
    def test_identical_orderings(self):
        rng = random.Random(1)
        xs = [0.1, 0.4, 0.5, 0.9]
        ws = [rng.random() for _ in xs]
        assert weighted_spearman(xs, xs, ws) == pytest.approx(1.0, abs=1e-12)

    def test_reversed_orderings(self):
        xs = [0.1, 0.2, 0.3, 0.8]
        assert weighted_spearman(xs, xs[::-1]) == pytest.approx(-1.0, abs=1e-12)

    def test_against_bruteforce_oracle(self):
        rng = random.Random(2024)
        for _ in range(200):
            n = rng.randint(3, 10)
            xs = [rng.choice([0.1, 0.25, 0.5, 0.75, 0.9]) for _ in range(n)]
            ys = [rng.random() for _ in range(n)]
            ws = [rng.uniform(0.1, 2.0) for _ in range(n)]
            try:
                expected = oracle_weighted_spearman(xs, ys, ws)
            except ZeroDivisionError:
                continue
            assert weighted_spearman(xs, ys, ws) == pytest.approx(expected, abs=1e-10)

    def test_equal_weights_match_classical_spearman(self):
        from scipy.stats import spearmanr

        rng = random.Random(5)
        for _ in range(50):
            n = rng.randint(4, 10)
            xs = [rng.choice([0.2, 0.4, 0.6, 0.8]) for _ in range(n)]
            ys = [rng.random() for _ in range(n)]
            if len(set(xs)) < 2 or len(set(ys)) < 2:
                continue
            assert weighted_spearman(xs, ys) == pytest.approx(
                spearmanr(xs, ys).statistic, abs=1e-10
            )

    def test_zero_variance_errors(self):
        with pytest.raises(NumericalError):
            weighted_spearman([0.5, 0.5, 0.5], [0.1, 0.2, 0.3])

    def test_too_few(self):
        with pytest.raises(InputError):
            weighted_spearman([0.1, 0.2], [0.2, 0.1])

    def test_swap_symmetric(self):
        xs = [0.1, 0.7, 0.3, 0.9]
        ys = [0.2, 0.5, 0.8, 0.4]
        ws = [1.0, 2.0, 0.5, 1.5]
        assert weighted_spearman(xs, ys, ws) == pytest.approx(
            weighted_spearman(ys, xs, ws), abs=1e-14
        )


class TestMaud:
    def test_zero_on_identical(self):
        assert maud([0.4, 0.6], [0.4, 0.6]) == 0.0

    def test_arithmetic(self):
        assert maud([0.5, 0.5], [0.4, 0.2]) == pytest.approx(0.2)

    def test_weighted(self):
        assert maud([0.5, 0.5], [0.4, 0.2], [3.0, 1.0]) == pytest.approx(
            0.75 * 0.1 + 0.25 * 0.3
        )

    def test_swap_symmetric(self):
        a, b = [0.2, 0.9, 0.4], [0.5, 0.3, 0.6]
        assert maud(a, b) == maud(b, a)


class TestFlipAnalysis:
    def test_decisive_flip(self):
        a = _posts(ROCKET, 900, 100, "a")
        b = _posts(ROCKET, 100, 900, "b")
        results, rate, rate_w = flip_analysis(a, b, [ROCKET], n_boot=300, seed=1)
        assert results[0].is_flip
        assert rate == 1.0 and rate_w == 1.0

    def test_weak_signal_not_flip(self):
        a = _posts(ROCKET, 16, 14, "a")  # theta ~0.53
        b = _posts(ROCKET, 14, 16, "b")  # theta ~0.47
        results, rate, _ = flip_analysis(a, b, [ROCKET], n_boot=500, seed=2)
        assert not results[0].is_flip
        assert rate == 0.0

    def test_same_sign_not_flip(self):
        a = _posts(ROCKET, 70, 30, "a")
        b = _posts(ROCKET, 72, 28, "b")
        results, rate, _ = flip_analysis(a, b, [ROCKET], n_boot=300, seed=3)
        assert not results[0].is_flip

    def test_delta_sign_negates_on_swap(self):
        a = _posts(ROCKET, 80, 20, "a")
        b = _posts(ROCKET, 30, 70, "b")
        res_ab, _, _ = flip_analysis(a, b, [ROCKET], n_boot=300, seed=4)
        res_ba, _, _ = flip_analysis(b, a, [ROCKET], n_boot=300, seed=4)
        assert res_ab[0].theta_a == res_ba[0].theta_b
        assert (res_ab[0].theta_a - res_ab[0].theta_b) == pytest.approx(
            -(res_ba[0].theta_a - res_ba[0].theta_b)
        )
        assert res_ab[0].is_flip == res_ba[0].is_flip

    def test_flip_rate_w_zero_when_no_flips(self):
        a = _posts(ROCKET, 50, 50, "a") + _posts(FIRE, 60, 40, "a")
        b = _posts(ROCKET, 55, 45, "b") + _posts(FIRE, 58, 42, "b")
        results, rate, rate_w = flip_analysis(
            a, b, [ROCKET, FIRE], n_boot=200, seed=5, weights=[0.9, 0.1]
        )
        assert rate == 0.0 and rate_w == 0.0

    def test_min_boot_enforced(self):
        with pytest.raises(InputError):
            flip_analysis(_posts(ROCKET, 5, 5), _posts(ROCKET, 5, 5), [ROCKET], n_boot=10)


class TestComparePolarity:
    def _corpora(self):
        a = (
            _posts(ROCKET, 300, 60, "a")
            + _posts(FIRE, 200, 200, "a")
            + _posts(GEM, 80, 320, "a")
            + _posts(BEAR, 40, 360, "a")
        )
        b = (
            _posts(ROCKET, 280, 80, "b")
            + _posts(FIRE, 190, 210, "b")
            + _posts(GEM, 90, 310, "b")
            + _posts(BEAR, 320, 80, "b")  # planted flip
        )
        return a, b

    def test_end_to_end(self):
        a, b = self._corpora()
        cmp = compare_polarity(a, b, regime="platform_asset", n_boot=200, seed=9)
        assert [r.emoji for r in cmp.records_a] == [r.emoji for r in cmp.records_b]
        assert cmp.weights.sum() == pytest.approx(1.0)
        assert -1.0 <= cmp.rho_w <= 1.0
        assert cmp.maud >= 0 and cmp.maud_w >= 0
        flipped = {f.emoji for f in cmp.flips}
        assert flipped == {BEAR}
        assert 0 < cmp.flip_rate_w <= 1

    def test_swap_invariance_of_global_metrics(self):
        a, b = self._corpora()
        ab = compare_polarity(a, b, regime="platform_asset", n_boot=150, seed=9)
        ba = compare_polarity(b, a, regime="platform_asset", n_boot=150, seed=9)
        assert ab.rho_w == pytest.approx(ba.rho_w, abs=1e-12)
        assert ab.maud == pytest.approx(ba.maud, abs=1e-12)
        assert ab.maud_w == pytest.approx(ba.maud_w, abs=1e-12)
        assert {f.emoji for f in ab.flips} == {f.emoji for f in ba.flips}
