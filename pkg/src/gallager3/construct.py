"""Progressive edge growth that keeps girth >= 8 and avoids (5,3) structures.

Every edge after a variable's first goes to a check outside the BFS tree of
depth ``tree_depth`` around the variable, lowest degree first, skipping any
check whose edge would complete a (5,3) structure. Weight-eight (and lighter)
codewords are removed afterwards by rewiring single edges.
"""

from __future__ import annotations

import json
import logging
from collections import deque
from dataclasses import asdict, dataclass, field

import numpy as np

from .tanner import TannerGraph
from . import _kernels as K
from .trapping import find_53_structures, find_80_codewords, has_53

log = logging.getLogger(__name__)


class ConstructionError(RuntimeError):
    pass


class InfeasibleParams(ConstructionError):
    pass


class CandidateExhausted(ConstructionError):
    def __init__(self, var: int, edge: int, log: ConstructionLog):
        super().__init__(f"no admissible check for edge {edge} of variable {var}")
        self.var = var
        self.edge = edge
        self.log = log


class RepairFailed(ConstructionError):
    def __init__(self, survivors: list[tuple[int, ...]], log: ConstructionLog):
        super().__init__(f"{len(survivors)} low-weight codeword(s) survived repair")
        self.survivors = survivors
        self.log = log


@dataclass(frozen=True)
class ConstructionParams:
    n: int
    m: int
    gamma: int = 3
    max_check_degree: int = 7
    tree_depth: int = 6
    rng_seed: int = 0
    randomize: bool = False
    repair_attempts: int = 100
    avoid_53: bool = True
    rewire_moves: int = 5000

    def validate(self) -> None:
        if self.n < 1 or self.m < 1:
            raise InfeasibleParams("n and m must be positive")
        if self.gamma < 1 or self.gamma > self.m:
            raise InfeasibleParams(f"gamma={self.gamma} impossible with m={self.m}")
        if self.n * self.gamma > self.m * self.max_check_degree:
            raise InfeasibleParams(
                f"n*gamma = {self.n * self.gamma} exceeds m*max_check_degree = {self.m * self.max_check_degree}"
            )


@dataclass
class ConstructionLog:
    """Ordered edge operations; replaying them on an empty graph rebuilds the code.

    Each record is a dict with ``op`` ("add" or "remove"), ``var``, ``check`` and,
    for additions, ``edge`` (0-based edge slot of the variable), ``phase``
    ("grow" or "repair"), ``candidates`` (size of the candidate set) and
    ``rejected`` (checks refused because they completed a (5,3) structure).
    """

    n: int
    m: int
    records: list[dict] = field(default_factory=list)

    def rejections(self, var: int) -> int:
        return sum(len(r.get("rejected", ())) for r in self.records if r["var"] == var)

    def replay(self) -> TannerGraph:
        g = TannerGraph(self.n, self.m)
        for r in self.records:
            if r["op"] == "add":
                g.add_edge(r["var"], r["check"])
            elif r["op"] == "remove":
                g.remove_edge(r["var"], r["check"])
        return g

    def to_jsonl(self) -> str:
        head = json.dumps({"n": self.n, "m": self.m}, sort_keys=True)
        return "\n".join([head] + [json.dumps(r, sort_keys=True) for r in self.records]) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> ConstructionLog:
        lines = [ln for ln in text.splitlines() if ln.strip()]
        head = json.loads(lines[0])
        return cls(head["n"], head["m"], [json.loads(ln) for ln in lines[1:]])


def _reached_checks(g: TannerGraph, j: int, depth: int) -> set[int]:
    """Checks within ``depth`` edges of variable ``j``."""
    seen_v = {j}
    seen_c: set[int] = set()
    frontier = deque([(j, True)])
    for level in range(depth):
        nxt = deque()
        if not frontier:
            break
        for node, is_var in frontier:
            if is_var:
                for c in g.var_adj[node]:
                    if c not in seen_c:
                        seen_c.add(c)
                        nxt.append((c, False))
            else:
                for v in g.chk_adj[node]:
                    if v not in seen_v:
                        seen_v.add(v)
                        nxt.append((v, True))
        frontier = nxt
    return seen_c


def candidate_checks(g: TannerGraph, j: int, depth: int = 6, max_check_degree: int = 7) -> list[int]:
    """Checks farther than ``depth`` edges from ``j`` with spare degree, by (degree, index).

    An edge from ``j`` to any returned check only closes cycles of length at
    least ``depth + 2``.
    """
    reached = _reached_checks(g, j, depth)
    cands = [c for c in range(g.m) if c not in reached and len(g.chk_adj[c]) < max_check_degree]
    return sorted(cands, key=lambda c: (len(g.chk_adj[c]), c))


def _first_edge_check(g: TannerGraph, cap: int) -> int | None:
    best = None
    for c in range(g.m):
        d = len(g.chk_adj[c])
        if d < cap and (best is None or d < len(g.chk_adj[best])):
            best = c
    return best


def _place(g: TannerGraph, j: int, params: ConstructionParams, exclude: frozenset[int] = frozenset()) -> tuple[int | None, int, list[int]]:
    """Wire one more edge of ``j``; returns (check or None, candidate count, rejected)."""
    cands = [c for c in candidate_checks(g, j, params.tree_depth, params.max_check_degree) if c not in exclude]
    rejected: list[int] = []
    for c in cands:
        g.add_edge(j, c)
        if params.avoid_53 and has_53(g, j, params.gamma):
            g.remove_edge(j, c)
            rejected.append(c)
            continue
        return c, len(cands), rejected
    return None, len(cands), rejected


def peg_construct(params: ConstructionParams) -> tuple[TannerGraph, ConstructionLog]:
    """Grow a column-weight-``gamma`` Tanner graph edge by edge.

    Raises
    ------
    InfeasibleParams
        ``n * gamma`` cannot fit under the check-degree cap.
    CandidateExhausted
        Every candidate for some edge was refused; the exception carries the log so far.
    """
    params.validate()
    g = TannerGraph(params.n, params.m)
    clog = ConstructionLog(params.n, params.m)
    order = list(range(params.n))
    if params.randomize:
        order = np.random.default_rng(params.rng_seed).permutation(params.n).tolist()
    for j in order:
        for k in range(params.gamma):
            if k == 0:
                c = _first_edge_check(g, params.max_check_degree)
                if c is None:
                    raise CandidateExhausted(j, k, clog)
                g.add_edge(j, c)
                clog.records.append({"op": "add", "var": j, "check": c, "edge": k, "phase": "grow",
                                     "candidates": params.m, "rejected": []})
                continue
            c, size, rejected = _place(g, j, params)
            if c is None:
                clog.records.append({"op": "fail", "var": j, "check": -1, "edge": k, "phase": "grow",
                                     "candidates": size, "rejected": rejected})
                raise CandidateExhausted(j, k, clog)
            clog.records.append({"op": "add", "var": j, "check": c, "edge": k, "phase": "grow",
                                 "candidates": size, "rejected": rejected})
    return g, clog


def repair_weight8(
    g: TannerGraph, params: ConstructionParams, clog: ConstructionLog | None = None
) -> tuple[TannerGraph, ConstructionLog]:
    """Rewire single edges until no codeword of weight <= 8 is left.

    For the lightest remaining codeword, its variables are tried from least to
    most constrained (fewest logged rejections, then index). The chosen
    variable drops its edge to its highest-degree check and is re-placed by
    the usual candidate rule with that check excluded. The input graph is
    not modified.
    """
    g = g.copy()
    clog = clog if clog is not None else ConstructionLog(g.n, g.m)
    for _ in range(params.repair_attempts):
        found = find_80_codewords(g)
        if not found.supports:
            return g, clog
        support = found.supports[0]
        done = False
        for v in sorted(support, key=lambda u: (clog.rejections(u), u)):
            old = max(g.var_adj[v], key=lambda c: (len(g.chk_adj[c]), -c))
            g.remove_edge(v, old)
            c, size, rejected = _place(g, v, params, exclude=frozenset([old]))
            if c is None:
                g.add_edge(v, old)
                continue
            clog.records.append({"op": "remove", "var": v, "check": old, "phase": "repair"})
            clog.records.append({"op": "add", "var": v, "check": c, "edge": g.var_adj[v].index(c),
                                 "phase": "repair", "candidates": size, "rejected": rejected})
            log.info("repair: codeword %s, variable %d moved from check %d to %d", support, v, old, c)
            done = True
            break
        if not done:
            raise RepairFailed(found.supports, clog)
    left = find_80_codewords(g).supports
    if left:
        raise RepairFailed(left, clog)
    return g, clog


def _structures_with(g: TannerGraph, v: int) -> set[tuple[int, ...]]:
    a = g.arrays()
    rows = K.find_53(a.var_ptr, a.edge_chk, a.chk_ptr, a.chk_var, np.array([v], dtype=np.int64), False, 0)
    return {tuple(int(x) for x in r) for r in rows}


def rewire_53(
    g: TannerGraph, params: ConstructionParams, clog: ConstructionLog | None = None
) -> tuple[TannerGraph, ConstructionLog]:
    """Local search that removes (5,3) structures from a complete girth-8 graph.

    A move detaches one edge of a variable on a structure and reattaches it to
    a check from ``candidate_checks`` (so girth >= 8 and the degree cap hold).
    Only structures through the moved variable can change, so the count is
    kept incrementally. The first move that lowers it is taken; when none
    does, a seeded random move that keeps it level is taken instead.

    Raises ``ConstructionError`` if structures remain after ``params.rewire_moves`` moves.
    """
    g = g.copy()
    clog = clog if clog is not None else ConstructionLog(g.n, g.m)
    rng = np.random.default_rng(params.rng_seed)
    live = {rep.vars for rep in find_53_structures(g, check_girth=False)}
    for move in range(params.rewire_moves):
        if not live:
            return g, clog
        chosen = None
        level: list[tuple[int, int, int]] = []
        for st in sorted(live, key=lambda _: rng.random()):
            for v in sorted(st, key=lambda _: rng.random()):
                mine = {x for x in live if v in x}
                for old in list(g.var_adj[v]):
                    g.remove_edge(v, old)
                    for c in candidate_checks(g, v, params.tree_depth, params.max_check_degree):
                        if c == old:
                            continue
                        g.add_edge(v, c)
                        after = _structures_with(g, v)
                        g.remove_edge(v, c)
                        if len(after) < len(mine):
                            chosen = (v, old, c)
                            break
                        if len(after) == len(mine):
                            level.append((v, old, c))
                    g.add_edge(v, old)
                    if chosen:
                        break
                if chosen:
                    break
            if chosen:
                break
        if chosen is None:
            if not level:
                break
            chosen = level[int(rng.integers(len(level)))]
        v, old, c = chosen
        mine = {x for x in live if v in x}
        g.remove_edge(v, old)
        g.add_edge(v, c)
        live = (live - mine) | _structures_with(g, v)
        clog.records.append({"op": "remove", "var": v, "check": old, "phase": "rewire53"})
        clog.records.append({"op": "add", "var": v, "check": c, "edge": g.var_adj[v].index(c),
                             "phase": "rewire53", "candidates": -1, "rejected": []})
    if live:
        raise ConstructionError(f"{len(live)} (5,3) structures left after {params.rewire_moves} rewiring moves")
    return g, clog


def build_code(params: ConstructionParams, repair: bool = True, fallback: bool = True) -> tuple[TannerGraph, ConstructionLog]:
    """Construct a code and clean it up.

    Runs ``peg_construct``. If growth stalls and ``fallback`` is set, the code
    is regrown without (5,3) rejection and ``rewire_53`` removes the
    structures afterwards. ``repair`` then removes codewords of weight <= 8.
    """
    try:
        g, clog = peg_construct(params)
    except CandidateExhausted as exc:
        if not (fallback and params.avoid_53):
            raise
        log.info("growth stalled at variable %d edge %d; regrowing and rewiring", exc.var, exc.edge)
        relaxed = ConstructionParams(**{**asdict(params), "avoid_53": False})
        g, clog = peg_construct(relaxed)
        g, clog = rewire_53(g, params, clog)
    if repair:
        g, clog = repair_weight8(g, params, clog)
    return g, clog


def gf2_rank(g: TannerGraph) -> int:
    """Rank of the parity-check matrix over GF(2); rows packed into Python ints."""
    rows = [sum(1 << v for v in adj) for adj in g.chk_adj]
    rank = 0
    for bit in range(g.n):
        mask = 1 << bit
        pivot = next((i for i in range(rank, len(rows)) if rows[i] & mask), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i] & mask:
                rows[i] ^= rows[rank]
        rank += 1
    return rank


def construction_summary(g: TannerGraph) -> dict:
    return {
        "n": g.n,
        "m": g.m,
        "design_rate": 1 - g.m / g.n,
        "rate": (g.n - gf2_rank(g)) / g.n,
        "girth": g.girth(),
        "check_degree_histogram": {str(k): v for k, v in g.degree_histogram().items()},
    }


def params_dict(params: ConstructionParams) -> dict:
    return asdict(params)

