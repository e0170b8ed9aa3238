"""BSC simulation: Monte Carlo FER, exhaustive low-weight verification, slope fits.

Everything assumes the all-zero codeword was sent, so the channel output is
the error pattern itself.

Monte Carlo trials draw their uniforms from a counter-based stream keyed by
``(seed, trial index)``: trial ``t`` sees the same bits whatever the batch
size or thread count, and bit ``i`` flips iff its uniform is below ``alpha``.
For a fixed seed the flip sets are therefore nested in ``alpha``.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy.stats import binomtest

from . import _kernels as K
from .decoder import DecoderConfig
from .tanner import GraphError, TannerGraph

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 10**8
CHUNK = 1 << 20
BLOCK = 4096
# pool size is fixed when numba starts; later edits to the environment do not change it
MAX_WORKERS = numba.config.NUMBA_NUM_THREADS


class BudgetExceeded(RuntimeError):
    def __init__(self, required: int, budget: int):
        super().__init__(f"exhaustive sweep needs {required} decodes, budget is {budget}")
        self.required = required
        self.budget = budget


def set_workers(workers: int | None) -> int:
    """Set the numba thread count (clamped to the pool numba was started with)."""
    top = MAX_WORKERS
    if workers is None or workers < 1:
        workers = top
    if workers > top:
        log.warning("requested %d workers, numba allows %d (set NUMBA_NUM_THREADS)", workers, top)
        workers = top
    numba.set_num_threads(workers)
    return workers


class CounterStream:
    """Uniforms of one trial; quacks like ``numpy.random.Generator.random``."""

    def __init__(self, seed: int, trial: int):
        self.seed = seed
        self.trial = trial
        self._used = 0

    def random(self, size: int) -> np.ndarray:
        u = K.trial_uniforms(self.seed, self.trial, self._used + size)[self._used:]
        self._used += size
        return u


def bsc_transmit(word, alpha: float, rng) -> np.ndarray:
    """Flip every bit of ``word`` independently with probability ``alpha``.

    ``rng`` is anything with a ``random(size)`` method returning uniforms in
    [0, 1): a numpy ``Generator`` or a ``CounterStream``.
    """
    if not 0.0 <= alpha <= 0.5:
        raise ValueError(f"crossover probability {alpha} outside [0, 0.5]")
    w = np.asarray(word, dtype=np.uint8)
    return w ^ (rng.random(w.shape[0]) < alpha).astype(np.uint8)


def wilson_interval(failures: int, trials: int) -> tuple[float, float]:
    if trials == 0:
        return 0.0, 1.0
    ci = binomtest(failures, trials).proportion_ci(confidence_level=0.95, method="wilson")
    return float(ci.low), float(ci.high)


@dataclass(frozen=True)
class FERPoint:
    alpha: float
    trials: int
    failures: int
    fer: float
    ci_low: float
    ci_high: float

    @classmethod
    def from_counts(cls, alpha: float, trials: int, failures: int) -> FERPoint:
        lo, hi = wilson_interval(failures, trials)
        fer = failures / trials if trials else 0.0
        return cls(alpha, trials, failures, fer, min(lo, fer), max(hi, fer))


def _require_cw3(g: TannerGraph) -> None:
    if not g.is_column_weight(3):
        raise GraphError("simulation requires a column-weight-three graph")


def trial_failures(g: TannerGraph, alpha: float, seed: int, start: int, count: int, cfg: DecoderConfig | None = None) -> np.ndarray:
    """Per-trial failure flags for trials ``start .. start+count-1``."""
    cfg = cfg or DecoderConfig()
    _require_cw3(g)
    a = g.arrays()
    return K.mc_trials(
        a.var_ptr, a.edge_chk, a.chk_ptr, a.chk_edges, a.chk_var,
        seed, start, count, float(alpha), cfg.max_iterations, cfg.rule_code, BLOCK,
    )


def fer_estimate(
    g: TannerGraph,
    alpha: float,
    min_failures: int = 50,
    max_trials: int = 10**7,
    seed: int = 0,
    cfg: DecoderConfig | None = None,
    batch: int = 1 << 16,
) -> FERPoint:
    """Monte Carlo frame error rate at crossover probability ``alpha``.

    Trials run in order until ``min_failures`` failures have been seen or
    ``max_trials`` trials have run; the stopping trial is the same for any
    batch size. A failure is any output other than the all-zero word.
    """
    if min_failures < 1:
        raise ValueError("min_failures must be >= 1")
    if not 0.0 <= alpha <= 0.5:
        raise ValueError(f"crossover probability {alpha} outside [0, 0.5]")
    trials = failures = 0
    while trials < max_trials and failures < min_failures:
        count = min(batch, max_trials - trials)
        flags = trial_failures(g, alpha, seed, trials, count, cfg)
        hits = np.flatnonzero(flags)
        need = min_failures - failures
        if hits.size >= need:
            trials += int(hits[need - 1]) + 1
            failures = min_failures
            break
        trials += count
        failures += int(hits.size)
    return FERPoint.from_counts(alpha, trials, failures)


@dataclass
class VerifyReport:
    t: int
    patterns_checked: int
    failures: list[tuple[int, ...]] = field(default_factory=list)
    per_weight: dict[int, int] = field(default_factory=dict)
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self, timing: bool = True) -> dict:
        out = {
            "t": self.t,
            "patterns_checked": self.patterns_checked,
            "failure_count": len(self.failures),
            "failures": [list(f) for f in self.failures],
            "failures_per_weight": {str(k): v for k, v in sorted(self.per_weight.items())},
            "passed": self.passed,
        }
        if timing:
            out["wall_time"] = self.wall_time
        return out


def colex_unrank(rank: int, k: int) -> tuple[int, ...]:
    out = np.empty(max(k, 1), dtype=np.int64)
    K.colex_unrank(rank, k, out)
    return tuple(int(x) for x in out[:k])


def exhaustive_verify(
    g: TannerGraph,
    t: int,
    cfg: DecoderConfig | None = None,
    budget: int = DEFAULT_BUDGET,
    chunk: int = CHUNK,
) -> VerifyReport:
    """Decode every error pattern of weight 1..t and list the ones not corrected.

    Patterns of each weight are visited in colexicographic order, in chunks of
    ``chunk`` ranks; within a chunk, threads take fixed blocks. Failures are
    reported sorted by (weight, support), so the report does not depend on
    chunking or thread count.

    Raises
    ------
    BudgetExceeded
        When the number of patterns exceeds ``budget``.
    """
    cfg = cfg or DecoderConfig()
    _require_cw3(g)
    if t < 0:
        raise ValueError("t must be >= 0")
    required = sum(math.comb(g.n, k) for k in range(1, t + 1))
    if required > budget:
        raise BudgetExceeded(required, budget)
    a = g.arrays()
    t0 = time.perf_counter()
    failures: list[tuple[int, ...]] = []
    per_weight: dict[int, int] = {}
    for k in range(1, t + 1):
        total = math.comb(g.n, k)
        bad = 0
        for lo in range(0, total, chunk):
            hi = min(total, lo + chunk)
            flags = K.sweep_weight(
                a.var_ptr, a.edge_chk, a.chk_ptr, a.chk_edges, a.chk_var,
                k, lo, hi, cfg.max_iterations, cfg.rule_code, BLOCK,
            )
            for r in np.flatnonzero(flags):
                failures.append(colex_unrank(lo + int(r), k))
            bad += int(flags.sum())
        per_weight[k] = bad
        log.info("weight %d: %d patterns, %d failures", k, total, bad)
    failures.sort(key=lambda s: (len(s), s))
    return VerifyReport(t, required, failures, per_weight, time.perf_counter() - t0)


# -- small-alpha model ---------------------------------------------------------------


def dominant_term_model(c_i: float, i: int, alpha, n: int | None = None):
    """Leading term ``c_i * alpha**i`` of the FER expansion, times ``(1-alpha)**(n-i)`` if ``n`` given."""
    alpha = np.asarray(alpha, dtype=float)
    out = c_i * alpha**i
    if n is not None:
        out = out * (1 - alpha) ** (n - i)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    points_used: int
    residual: float

    @property
    def c_i(self) -> float:
        return math.exp(self.intercept)


def slope_fit(points: list[FERPoint], min_failures: int = 10) -> SlopeFit:
    """Least-squares slope of log FER against log alpha.

    Only points with at least ``min_failures`` failures count; at least three
    must remain, spanning a factor of four in alpha.
    """
    use = [p for p in points if p.failures >= min_failures and p.fer > 0]
    if len(use) < 3:
        raise ValueError(f"slope fit needs >= 3 points with >= {min_failures} failures, got {len(use)}")
    alphas = np.array([p.alpha for p in use])
    if alphas.max() < 4 * alphas.min():
        raise ValueError("slope fit points must span at least a factor of 4 in alpha")
    x = np.log(alphas)
    y = np.log([p.fer for p in use])
    (slope, intercept), res, *_ = np.polyfit(x, y, 1, full=True)
    rms = math.sqrt(float(res[0]) / len(use)) if len(res) else 0.0
    return SlopeFit(float(slope), float(intercept), len(use), rms)
