"""Gallager A hard-decision decoding over the BSC.

Two routes compute the same thing. ``gallager_a_decode`` runs the compiled
kernel and is what every sweep uses; ``decode_trace`` is a plain numpy
transcription of the message rules that also records every iteration.
Tests hold the two against each other.
"""

from __future__ import annotations

import enum
from collections.abc import Iterable
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .tanner import GraphError, TannerGraph


class DecisionRule(str, enum.Enum):
    A = "A"
    B = "B"


class Status(str, enum.Enum):
    CONVERGED = "Converged"
    FAILED_MAX_ITER = "FailedMaxIter"
    FIXED_POINT = "FixedPoint"


_STATUS = {K.CONVERGED: Status.CONVERGED, K.FAILED: Status.FAILED_MAX_ITER, K.FIXED_POINT: Status.FIXED_POINT}


@dataclass(frozen=True)
class DecoderConfig:
    max_iterations: int = 50
    decision_rule: DecisionRule = DecisionRule.A
    trace: bool = False

    def __post_init__(self) -> None:
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        object.__setattr__(self, "decision_rule", DecisionRule(self.decision_rule))

    @property
    def rule_code(self) -> int:
        return K.RULE_A if self.decision_rule is DecisionRule.A else K.RULE_B


@dataclass(frozen=True)
class MessageState:
    """Edge messages after one iteration, indexed by edge id (variable order)."""

    var_to_chk: np.ndarray
    chk_to_var: np.ndarray


@dataclass
class DecodeOutcome:
    status: Status
    output: np.ndarray
    iterations_used: int
    trace: list[tuple[MessageState, np.ndarray]] | None = field(default=None, repr=False)

    @property
    def residual_error_support(self) -> list[int]:
        return np.flatnonzero(self.output).tolist()

    @property
    def success(self) -> bool:
        """Converged to the all-zero word, i.e. the error was corrected."""
        return self.status is Status.CONVERGED and not self.output.any()


def _prepare(g: TannerGraph, received) -> np.ndarray:
    r = np.asarray(received, dtype=np.uint8)
    if r.shape != (g.n,):
        raise GraphError(f"received word has shape {r.shape}, expected ({g.n},)")
    if not g.is_column_weight(3):
        raise GraphError("Gallager A decoding here requires a column-weight-three graph")
    return r & 1


def gallager_a_decode(g: TannerGraph, received, cfg: DecoderConfig | None = None) -> DecodeOutcome:
    """Decode a hard-decision word.

    Parameters
    ----------
    g : TannerGraph
        Column-weight-three code.
    received : array_like
        Length-``n`` binary word. Under the all-zero convention this is the error pattern.
    cfg : DecoderConfig, optional
        Iteration cap, decision rule and trace switch.

    Returns
    -------
    DecodeOutcome
        ``status`` is ``Converged`` when the estimate satisfies every check,
        ``FixedPoint`` when the received word reproduces its own messages, and
        ``FailedMaxIter`` otherwise. ``output`` is the last estimate.
    """
    cfg = cfg or DecoderConfig()
    r = _prepare(g, received)
    if cfg.trace:
        return _decode_reference(g, r, cfg)
    a = g.arrays()
    E = a.edge_chk.shape[0]
    est = np.empty(g.n, dtype=np.uint8)
    status, iters = K.decode_core(
        a.var_ptr, a.edge_chk, a.chk_ptr, a.chk_edges, a.chk_var, r,
        cfg.max_iterations, cfg.rule_code,
        np.empty(E, np.uint8), np.empty(E, np.uint8), np.empty(E, np.uint8), est,
    )
    return DecodeOutcome(_STATUS[status], est, int(iters))


def _check_update(a, v2c: np.ndarray) -> np.ndarray:
    total = np.zeros(a.m, dtype=np.uint8)
    np.bitwise_xor.at(total, a.edge_chk, v2c)
    return total[a.edge_chk] ^ v2c


def _var_update(a, c2v: np.ndarray, r: np.ndarray) -> np.ndarray:
    ones = np.add.reduceat(c2v.astype(np.int64), a.var_ptr[:-1])
    others = ones[a.edge_var] - c2v
    out = r[a.edge_var].copy()
    out[others == 2] = 1
    out[others == 0] = 0
    return out


def _estimate(a, c2v: np.ndarray, r: np.ndarray, rule: DecisionRule) -> np.ndarray:
    ones = np.add.reduceat(c2v.astype(np.int64), a.var_ptr[:-1])
    if rule is DecisionRule.B:
        return (ones >= 2).astype(np.uint8)
    est = r.copy()
    est[ones == 3] = 1
    est[ones == 0] = 0
    return est


def _decode_reference(g: TannerGraph, r: np.ndarray, cfg: DecoderConfig) -> DecodeOutcome:
    a = g.arrays()
    trace: list[tuple[MessageState, np.ndarray]] = []
    if g.is_codeword(r):
        return DecodeOutcome(Status.CONVERGED, r.copy(), 0, trace)
    v2c = r[a.edge_var].copy()
    est = r.copy()
    for it in range(1, cfg.max_iterations + 1):
        if it >= 2:
            nxt = _var_update(a, c2v, r)
            if np.array_equal(nxt, v2c):
                if np.array_equal(v2c, r[a.edge_var]):
                    return DecodeOutcome(Status.FIXED_POINT, est, it - 1, trace)
                return DecodeOutcome(Status.FAILED_MAX_ITER, est, cfg.max_iterations, trace)
            v2c = nxt
        c2v = _check_update(a, v2c)
        est = _estimate(a, c2v, r, cfg.decision_rule)
        trace.append((MessageState(v2c.copy(), c2v.copy()), est.copy()))
        if g.is_codeword(est):
            return DecodeOutcome(Status.CONVERGED, est, it, trace)
    return DecodeOutcome(Status.FAILED_MAX_ITER, est, cfg.max_iterations, trace)


def decode_trace(g: TannerGraph, received, cfg: DecoderConfig | None = None) -> list[tuple[MessageState, np.ndarray]]:
    """Per-iteration ``(MessageState, estimate)`` pairs of one decoding run.

    The trace is empty when the received word is already a codeword. A run
    that stops on a repeated message state has no entry for the repeat.
    """
    cfg = cfg or DecoderConfig()
    return _decode_reference(g, _prepare(g, received), cfg).trace


def is_fixed_point(g: TannerGraph, pattern: Iterable[int] | np.ndarray, cfg: DecoderConfig | None = None) -> bool:
    """True iff the variable-to-check messages never change from their initial values.

    ``pattern`` is an error support (iterable of indices) or a length-``n`` word.
    One variable update suffices: the recursion is deterministic, so a state
    that reproduces itself once does so forever.
    """
    word = _as_word(g, pattern)
    r = _prepare(g, word)
    a = g.arrays()
    v2c = r[a.edge_var]
    return bool(np.array_equal(_var_update(a, _check_update(a, v2c), r), v2c))


def _as_word(g: TannerGraph, pattern) -> np.ndarray:
    # ndarrays are words; any other iterable is a support
    if isinstance(pattern, np.ndarray):
        return pattern
    return g.word_from_support(pattern)


def decode_supports(g: TannerGraph, supports: list[list[int]] | list[tuple[int, ...]], cfg: DecoderConfig | None = None) -> np.ndarray:
    """Batch failure flags (1 = not corrected to all-zero) for many error supports."""
    cfg = cfg or DecoderConfig()
    if not g.is_column_weight(3):
        raise GraphError("Gallager A decoding here requires a column-weight-three graph")
    width = max((len(s) for s in supports), default=1) or 1
    rows = np.zeros((len(supports), width), dtype=np.int64)
    weights = np.zeros(len(supports), dtype=np.int64)
    for i, s in enumerate(supports):
        rows[i, : len(s)] = sorted(s)
        weights[i] = len(s)
    a = g.arrays()
    return K.decode_patterns(
        a.var_ptr, a.edge_chk, a.chk_ptr, a.chk_edges, a.chk_var,
        rows, weights, cfg.max_iterations, cfg.rule_code, 256,
    )
