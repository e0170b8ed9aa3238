import itertools
import math

import numpy as np
import pytest

from gallager3.channel import (
    BudgetExceeded,
    CounterStream,
    FERPoint,
    bsc_transmit,
    colex_unrank,
    dominant_term_model,
    exhaustive_verify,
    fer_estimate,
    set_workers,
    slope_fit,
    trial_failures,
    wilson_interval,
)
from gallager3.decoder import DecoderConfig, decode_supports, gallager_a_decode

from conftest import load

Z95 = 1.959963984540054


def test_counter_stream_reproducible_and_sliced():
    a = CounterStream(7, 3).random(100)
    s = CounterStream(7, 3)
    b = np.concatenate([s.random(30), s.random(70)])
    assert np.array_equal(a, b)
    assert not np.array_equal(a, CounterStream(7, 4).random(100))
    assert not np.array_equal(a, CounterStream(8, 3).random(100))


def test_counter_stream_is_uniform():
    u = np.concatenate([CounterStream(1, t).random(1000) for t in range(200)])
    assert u.min() >= 0 and u.max() < 1
    counts, _ = np.histogram(u, bins=10, range=(0, 1))
    expected = u.size / 10
    chi2 = ((counts - expected) ** 2 / expected).sum()
    assert chi2 < 30  # 9 dof, p ~ 4e-4
    assert abs(np.corrcoef(u[:-1], u[1:])[0, 1]) < 0.01


def test_bsc_flip_sets_nested_in_alpha():
    zero = np.zeros(500, np.uint8)
    for t in range(20):
        prev = np.zeros(500, bool)
        for alpha in (0.001, 0.01, 0.05, 0.2, 0.5):
            cur = bsc_transmit(zero, alpha, CounterStream(0, t)).astype(bool)
            assert np.all(cur[prev])
            prev = cur


def test_bsc_rate_and_validation():
    rng = np.random.default_rng(0)
    flips = bsc_transmit(np.zeros(200_000, np.uint8), 0.1, rng).mean()
    assert abs(flips - 0.1) < 5 * math.sqrt(0.09 / 200_000)
    word = np.ones(10, np.uint8)
    assert np.array_equal(bsc_transmit(word, 0.0, rng), word)
    with pytest.raises(ValueError):
        bsc_transmit(word, 0.7, rng)


@pytest.mark.parametrize("k, n", [(0, 10), (3, 10), (10, 10), (5, 1000), (50, 100_000)])
def test_wilson_matches_closed_form(k, n):
    p = k / n
    denom = 1 + Z95**2 / n
    centre = (p + Z95**2 / (2 * n)) / denom
    half = Z95 * math.sqrt(p * (1 - p) / n + Z95**2 / (4 * n * n)) / denom
    lo, hi = wilson_interval(k, n)
    assert lo == pytest.approx(max(0.0, centre - half), abs=1e-12)
    assert hi == pytest.approx(min(1.0, centre + half), abs=1e-12)


def test_fer_point_bounds():
    p = FERPoint.from_counts(0.01, 1000, 50)
    assert p.ci_low <= p.fer <= p.ci_high and p.fer == 0.05
    assert FERPoint.from_counts(0.01, 0, 0).fer == 0.0


def test_trial_failures_match_single_decodes():
    g = load("girth6")
    cfg = DecoderConfig()
    flags = trial_failures(g, 0.03, 9, 100, 300, cfg)
    zero = np.zeros(g.n, np.uint8)
    for i, f in enumerate(flags):
        e = bsc_transmit(zero, 0.03, CounterStream(9, 100 + i))
        assert bool(f) == (not gallager_a_decode(g, e, cfg).success)


def test_fer_estimate_stops_on_exact_trial():
    g = load("girth6")
    big = fer_estimate(g, 0.02, min_failures=30, seed=4)
    small = fer_estimate(g, 0.02, min_failures=30, seed=4, batch=97)
    assert big == small and big.failures == 30
    flags = trial_failures(g, 0.02, 4, 0, big.trials)
    assert flags.sum() == 30 and flags[-1] == 1


def test_fer_estimate_trial_cap():
    p = fer_estimate(load("gq22"), 0.001, min_failures=10**6, max_trials=5000, seed=1)
    assert p.trials == 5000 and p.failures < 10**6
    with pytest.raises(ValueError):
        fer_estimate(load("gq22"), 0.6)


def test_monte_carlo_agrees_with_exact_enumeration():
    """gq22 has n = 15: every error word can be decoded, giving the exact FER."""
    g = load("gq22")
    fails_by_weight = [0] * (g.n + 1)
    for w in range(1, g.n + 1):
        sups = list(itertools.combinations(range(g.n), w))
        fails_by_weight[w] = int(decode_supports(g, sups).sum())
    alpha = 0.08
    exact = sum(fails_by_weight[w] * alpha**w * (1 - alpha) ** (g.n - w) for w in range(g.n + 1))
    p = fer_estimate(g, alpha, min_failures=4000, seed=2)
    assert p.ci_low - 0.002 <= exact <= p.ci_high + 0.002
    assert abs(p.fer - exact) < 5 * math.sqrt(exact * (1 - exact) / p.trials)


def test_exhaustive_matches_direct_loop():
    g = load("girth6")
    rep = exhaustive_verify(g, 3)
    expected = []
    for k in (1, 2, 3):
        sups = list(itertools.combinations(range(g.n), k))
        flags = decode_supports(g, sups)
        expected += [s for s, f in zip(sups, flags) if f]
    assert rep.failures == expected
    assert rep.patterns_checked == sum(math.comb(g.n, k) for k in (1, 2, 3))
    assert sum(rep.per_weight.values()) == len(expected) and not rep.passed


def test_exhaustive_chunking_invariant():
    g = load("girth6")
    a = exhaustive_verify(g, 3).to_dict(timing=False)
    b = exhaustive_verify(g, 3, chunk=1001).to_dict(timing=False)
    assert a == b


def test_exhaustive_budget():
    g = load("girth6")
    with pytest.raises(BudgetExceeded) as info:
        exhaustive_verify(g, 3, budget=1000)
    assert info.value.required == 96 + math.comb(96, 2) + math.comb(96, 3)


def test_colex_unrank_order():
    seq = [colex_unrank(r, 3) for r in range(math.comb(7, 3))]
    assert seq == sorted(itertools.combinations(range(7), 3), key=lambda s: s[::-1])


def test_clean_code_corrects_weights_one_and_two(clean_code):
    rep = exhaustive_verify(clean_code, 2)
    assert rep.passed and rep.patterns_checked == 200 + math.comb(200, 2)


def test_slope_fit_recovers_synthetic_power_law():
    alphas = [0.003, 0.005, 0.008, 0.012, 0.02]
    for i, c in [(3, 2.5e4), (4, 7.0e5)]:
        pts = [FERPoint.from_counts(a, 10**12, round(c * a**i * 10**12)) for a in alphas]
        fit = slope_fit(pts)
        assert fit.slope == pytest.approx(i, abs=1e-6)
        exact = [FERPoint(a, 1, 100, c * a**i, 0, 1) for a in alphas]
        fit = slope_fit(exact)
        assert abs(fit.slope - i) < 1e-9 and abs(fit.c_i - c) / c < 1e-9 and fit.residual < 1e-9


def test_slope_fit_validation():
    pts = [FERPoint(a, 100, 50, a, 0, 1) for a in (0.01, 0.02, 0.03)]
    with pytest.raises(ValueError, match="factor"):
        slope_fit(pts)
    with pytest.raises(ValueError, match="3 points"):
        slope_fit(pts[:2])
    few = [FERPoint(a, 100, 5, a, 0, 1) for a in (0.01, 0.02, 0.05)]
    with pytest.raises(ValueError):
        slope_fit(few)


def test_dominant_term_model():
    assert dominant_term_model(10.0, 3, 0.1) == pytest.approx(0.01)
    assert dominant_term_model(10.0, 3, 0.1, n=5) == pytest.approx(0.01 * 0.81)
    assert dominant_term_model(1.0, 2, [0.1, 0.2]).tolist() == pytest.approx([0.01, 0.04])


def test_set_workers_clamps():
    from gallager3.channel import MAX_WORKERS as top

    assert set_workers(None) == top
    assert set_workers(10**6) == top
    assert set_workers(1) == 1
    set_workers(None)
