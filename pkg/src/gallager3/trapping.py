"""Trapping-set classification and the searches for the three small failure structures.

The structures of interest in a column-weight-three Tanner graph:

* (3,3): three variables on a six-cycle,
* (5,3): five variables whose induced subgraph has six degree-2 and three
  degree-1 checks, every variable keeping at most one odd check,
* (8,0): weight-eight codewords.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterable
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .decoder import DecoderConfig, decode_supports
from .tanner import GraphError, TannerGraph

MAX_CRITICAL_SEARCH = 10


@dataclass(frozen=True)
class SubgraphReport:
    vars: tuple[int, ...]
    odd_checks: tuple[int, ...]
    even_checks: tuple[int, ...]
    cond_a: bool
    cond_b: bool
    approximate: bool = False

    @property
    def V(self) -> int:
        return len(self.vars)

    @property
    def C(self) -> int:
        return len(self.odd_checks)

    @property
    def is_trapping_set(self) -> bool:
        return self.cond_a and self.cond_b

    @property
    def label(self) -> str:
        return f"({self.V},{self.C})"


@dataclass(frozen=True)
class CriticalNumberResult:
    value: int | None
    witness: tuple[int, ...] | None
    search_bound: int

    @property
    def found(self) -> bool:
        return self.value is not None


@dataclass
class CodewordSearch:
    supports: list[tuple[int, ...]] = field(default_factory=list)
    exhaustive: bool = True

    def of_weight(self, w: int) -> list[tuple[int, ...]]:
        return [s for s in self.supports if len(s) == w]


def classify_subset(g: TannerGraph, vars: Iterable[int]) -> SubgraphReport:
    """Induced-subgraph (V, C) classification with both trapping-set conditions.

    ``cond_a``: every member has at least two even-degree and at most one
    odd-degree induced check. ``cond_b``: no variable outside the set is
    adjacent to two odd-degree induced checks.
    """
    members = sorted(set(vars))
    if not members:
        raise GraphError("classify_subset needs a nonempty variable set")
    deg = g.induced_subgraph_degrees(members)
    odd = tuple(c for c, d in deg.items() if d % 2)
    even = tuple(c for c, d in deg.items() if d % 2 == 0)
    cond_a = True
    for v in members:
        n_odd = sum(deg[c] % 2 for c in g.var_adj[v])
        if n_odd > 1 or len(g.var_adj[v]) - n_odd < 2:
            cond_a = False
            break
    inside = set(members)
    hits: dict[int, int] = {}
    cond_b = True
    for c in odd:
        for u in g.chk_adj[c]:
            if u in inside:
                continue
            hits[u] = hits.get(u, 0) + 1
            if hits[u] >= 2:
                cond_b = False
    return SubgraphReport(tuple(members), odd, even, cond_a, cond_b)


def find_three_three(g: TannerGraph) -> list[tuple[int, int, int]]:
    """Every variable triple lying on a six-cycle, ascending.

    A triple qualifies when its members pairwise share checks through three
    distinct checks.
    """
    out: set[tuple[int, int, int]] = set()
    for a in range(g.n):
        # neighbor -> checks shared with a
        via: dict[int, list[int]] = {}
        for c in g.var_adj[a]:
            for u in g.chk_adj[c]:
                if u > a:
                    via.setdefault(u, []).append(c)
        nbrs = sorted(via)
        for i, b in enumerate(nbrs):
            for d in nbrs[i + 1:]:
                shared_bd = set(g.var_adj[b]) & set(g.var_adj[d])
                if not shared_bd:
                    continue
                if any(
                    len({c1, c2, c3}) == 3
                    for c1 in via[b] for c2 in via[d] for c3 in shared_bd
                ):
                    out.add((a, b, d))
    return sorted(out)


def find_53_structures(
    g: TannerGraph, restrict_to_var: int | None = None, check_girth: bool = True
) -> list[SubgraphReport]:
    """All five-variable sets with the (5,3) induced degree profile.

    Condition (b) is reported but not required. With ``restrict_to_var`` only
    sets containing that variable are searched. Reports carry
    ``approximate=True`` when the graph has girth below eight, where the
    degree profile no longer pins down the structure.
    """
    a = g.arrays()
    if restrict_to_var is None:
        roots = np.arange(g.n, dtype=np.int64)
        min_root = True
    else:
        if not 0 <= restrict_to_var < g.n:
            raise GraphError(f"variable index {restrict_to_var} out of range")
        roots = np.array([restrict_to_var], dtype=np.int64)
        min_root = False
    rows = K.find_53(a.var_ptr, a.edge_chk, a.chk_ptr, a.chk_var, roots, min_root, 0)
    if len(rows) == 0:
        return []
    approximate = check_girth and g.girth() < 8
    sets = sorted({tuple(int(x) for x in r) for r in rows})
    out = []
    for s in sets:
        rep = classify_subset(g, s)
        if approximate:
            rep = SubgraphReport(rep.vars, rep.odd_checks, rep.even_checks, rep.cond_a, rep.cond_b, True)
        out.append(rep)
    return out


def has_53(g: TannerGraph, v: int, gamma: int = 0) -> bool:
    """Whether some (5,3) structure contains ``v``.

    With ``gamma > 0`` the graph is treated as partial: every variable's
    missing edges count as future degree-1 checks, so structures that any
    girth-8 completion would create are reported already.
    """
    a = g.arrays()
    rows = K.find_53(a.var_ptr, a.edge_chk, a.chk_ptr, a.chk_var, np.array([v], dtype=np.int64), False, gamma)
    return len(rows) > 0


def find_80_codewords(g: TannerGraph, budget: int | None = None, max_weight: int = 8) -> CodewordSearch:
    """Codewords of weight at most ``max_weight`` found by connected growth.

    The search starts from every variable as the smallest member and keeps
    adding a neighbor of the lowest unsatisfied check. It returns every
    codeword of weight <= ``max_weight`` that contains no smaller nonzero
    codeword; all other low-weight codewords are disjoint unions of those.
    Partial sets are pruned once their unsatisfied checks outnumber what the
    remaining variables could repair (three each).

    ``budget`` caps node expansions; hitting it sets ``exhaustive=False``.
    """
    a = g.arrays()
    rows, wts, exhausted = K.find_codewords(a.var_ptr, a.edge_chk, a.chk_ptr, a.chk_var, max_weight, budget or 0)
    sups = sorted({tuple(int(x) for x in r[:w]) for r, w in zip(rows, wts)}, key=lambda s: (len(s), s))
    # growth can close a codeword around a smaller one; every such superset is
    # reducible and its irreducible part is itself among the hits
    kept: list[tuple[int, ...]] = []
    masks: list[int] = []
    for s in sups:
        mask = sum(1 << v for v in s)
        if not any(m & mask == m for m in masks):
            kept.append(s)
            masks.append(mask)
    return CodewordSearch(kept, not exhausted)


def critical_number(g: TannerGraph, vars: Iterable[int], cfg: DecoderConfig | None = None) -> CriticalNumberResult:
    """Smallest k such that some k-subset of ``vars``, taken as the error, is not corrected.

    Subsets are tried in increasing size and lexicographic order, so the
    witness is the first failing subset. Failure means the decoder does not
    return the all-zero word within ``max_iterations``.
    """
    members = sorted(set(vars))
    if len(members) > MAX_CRITICAL_SEARCH:
        raise GraphError(f"critical-number search is exhaustive; at most {MAX_CRITICAL_SEARCH} variables")
    for k in range(1, len(members) + 1):
        subsets = list(itertools.combinations(members, k))
        flags = decode_supports(g, subsets, cfg)
        hit = np.flatnonzero(flags)
        if hit.size:
            return CriticalNumberResult(k, subsets[int(hit[0])], len(members))
    return CriticalNumberResult(None, None, len(members))

