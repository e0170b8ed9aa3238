"""Tanner graph of a binary LDPC code.

Variable and check nodes are 0-based. Neighbor lists stay sorted so that
every query, and every tie-break built on top of one, is deterministic.
"""

from __future__ import annotations

import math
from collections import deque
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np


class GraphError(ValueError):
    """Raised for malformed graphs, bad indices and bad alist input."""


@dataclass(frozen=True)
class GraphArrays:
    """CSR view of a graph, the layout consumed by the numba kernels.

    Edges are numbered in variable order: the edges of variable ``v`` are
    ``var_ptr[v]:var_ptr[v + 1]`` and ``edge_chk[e]`` is the check of edge ``e``.
    ``chk_edges[chk_ptr[c]:chk_ptr[c + 1]]`` lists the edge ids of check ``c``.
    """

    n: int
    m: int
    var_ptr: np.ndarray
    edge_chk: np.ndarray
    edge_var: np.ndarray
    chk_ptr: np.ndarray
    chk_edges: np.ndarray
    chk_var: np.ndarray


@dataclass
class TannerGraph:
    n: int
    m: int
    var_adj: list[list[int]] = field(default_factory=list)
    chk_adj: list[list[int]] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.n < 1 or self.m < 1:
            raise GraphError(f"graph needs at least one node of each kind, got n={self.n}, m={self.m}")
        if not self.var_adj:
            self.var_adj = [[] for _ in range(self.n)]
        if not self.chk_adj:
            self.chk_adj = [[] for _ in range(self.m)]
        if len(self.var_adj) != self.n or len(self.chk_adj) != self.m:
            raise GraphError("adjacency lengths do not match n, m")
        self._arrays: GraphArrays | None = None

    # -- construction -------------------------------------------------------

    @classmethod
    def from_edges(cls, n: int, m: int, edges: Iterable[tuple[int, int]]) -> TannerGraph:
        g = cls(n, m)
        for v, c in edges:
            g.add_edge(v, c)
        return g

    @classmethod
    def from_matrix(cls, H: np.ndarray) -> TannerGraph:
        """Build from a dense ``m x n`` parity-check matrix."""
        H = np.asarray(H)
        m, n = H.shape
        rows, cols = np.nonzero(H % 2)
        return cls.from_edges(n, m, zip(cols.tolist(), rows.tolist()))

    def copy(self) -> TannerGraph:
        return TannerGraph(self.n, self.m, [list(a) for a in self.var_adj], [list(a) for a in self.chk_adj])

    def _check_var(self, v: int) -> None:
        if not 0 <= v < self.n:
            raise GraphError(f"variable index {v} out of range [0, {self.n})")

    def _check_chk(self, c: int) -> None:
        if not 0 <= c < self.m:
            raise GraphError(f"check index {c} out of range [0, {self.m})")

    def add_edge(self, v: int, c: int) -> TannerGraph:
        self._check_var(v)
        self._check_chk(c)
        adj = self.var_adj[v]
        i = _bisect(adj, c)
        if i < len(adj) and adj[i] == c:
            raise GraphError(f"duplicate edge ({v}, {c})")
        adj.insert(i, c)
        cadj = self.chk_adj[c]
        cadj.insert(_bisect(cadj, v), v)
        self._arrays = None
        return self

    def remove_edge(self, v: int, c: int) -> TannerGraph:
        self._check_var(v)
        self._check_chk(c)
        try:
            self.var_adj[v].remove(c)
        except ValueError:
            raise GraphError(f"no edge ({v}, {c})") from None
        self.chk_adj[c].remove(v)
        self._arrays = None
        return self

    def has_edge(self, v: int, c: int) -> bool:
        return c in self.var_adj[v]

    # -- basic queries ------------------------------------------------------

    @property
    def num_edges(self) -> int:
        return sum(len(a) for a in self.var_adj)

    def var_degree(self, v: int) -> int:
        return len(self.var_adj[v])

    def chk_degree(self, c: int) -> int:
        return len(self.chk_adj[c])

    def var_degrees(self) -> list[int]:
        return [len(a) for a in self.var_adj]

    def chk_degrees(self) -> list[int]:
        return [len(a) for a in self.chk_adj]

    def edges(self) -> list[tuple[int, int]]:
        return [(v, c) for v, adj in enumerate(self.var_adj) for c in adj]

    def is_column_weight(self, gamma: int = 3) -> bool:
        return all(len(a) == gamma for a in self.var_adj)

    def degree_histogram(self) -> dict[int, int]:
        hist: dict[int, int] = {}
        for d in self.chk_degrees():
            hist[d] = hist.get(d, 0) + 1
        return dict(sorted(hist.items()))

    def canonical(self) -> tuple:
        return (self.n, self.m, tuple(tuple(sorted(a)) for a in self.var_adj))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TannerGraph):
            return NotImplemented
        return self.canonical() == other.canonical()

    def var_neighbors(self, v: int) -> list[int]:
        """Variables sharing at least one check with ``v``, ascending."""
        out = {u for c in self.var_adj[v] for u in self.chk_adj[c]}
        out.discard(v)
        return sorted(out)

    def validate(self) -> None:
        """Raise ``GraphError`` unless both adjacency views agree and edges are simple."""
        fwd = set()
        for v, adj in enumerate(self.var_adj):
            if len(set(adj)) != len(adj):
                raise GraphError(f"parallel edge at variable {v}")
            for c in adj:
                self._check_chk(c)
                fwd.add((v, c))
        back = set()
        for c, adj in enumerate(self.chk_adj):
            for v in adj:
                self._check_var(v)
                back.add((v, c))
        if fwd != back:
            raise GraphError("variable and check adjacency views disagree")

    def arrays(self) -> GraphArrays:
        """Cached CSR arrays; rebuilt after any mutation."""
        if self._arrays is None:
            var_ptr = np.zeros(self.n + 1, dtype=np.int64)
            var_ptr[1:] = np.cumsum([len(a) for a in self.var_adj])
            edge_chk = np.array([c for a in self.var_adj for c in a], dtype=np.int64)
            edge_var = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(var_ptr))
            order = np.lexsort((edge_var, edge_chk))
            chk_ptr = np.zeros(self.m + 1, dtype=np.int64)
            chk_ptr[1:] = np.cumsum(np.bincount(edge_chk, minlength=self.m))
            self._arrays = GraphArrays(
                self.n, self.m, var_ptr, edge_chk, edge_var,
                chk_ptr, order.astype(np.int64), edge_var[order],
            )
        return self._arrays

    # -- structure ----------------------------------------------------------

    def girth(self) -> float:
        """Length of the shortest cycle, ``math.inf`` for a forest.

        Runs a BFS from every variable node (every cycle passes through one)
        and closes a cycle on each non-tree edge.
        """
        best = math.inf
        nv = self.n
        # node ids: variables 0..n-1, checks n..n+m-1
        for root in range(nv):
            if not self.var_adj[root]:
                continue
            dist = {root: 0}
            parent = {root: -1}
            queue = deque([root])
            while queue:
                u = queue.popleft()
                du = dist[u]
                if 2 * du + 1 >= best:
                    break
                nbrs = (self.var_adj[u] if u < nv else self.chk_adj[u - nv])
                offset = nv if u < nv else 0
                for w in nbrs:
                    w += offset
                    if w == parent[u]:
                        continue
                    if w in dist:
                        best = min(best, du + dist[w] + 1)
                    else:
                        dist[w] = du + 1
                        parent[w] = u
                        queue.append(w)
        return best

    def induced_subgraph_degrees(self, vars: Iterable[int]) -> dict[int, int]:
        """Map each check touching ``vars`` to its number of edges into ``vars``."""
        deg: dict[int, int] = {}
        for v in set(vars):
            self._check_var(v)
            for c in self.var_adj[v]:
                deg[c] = deg.get(c, 0) + 1
        return dict(sorted(deg.items()))

    def syndrome(self, word: Sequence[int] | np.ndarray) -> np.ndarray:
        w = np.asarray(word, dtype=np.uint8)
        if w.shape != (self.n,):
            raise GraphError(f"word length {w.shape} does not match n={self.n}")
        a = self.arrays()
        s = np.zeros(self.m, dtype=np.uint8)
        np.bitwise_xor.at(s, a.edge_chk, w[a.edge_var] & 1)
        return s

    def is_codeword(self, word: Sequence[int] | np.ndarray) -> bool:
        return not self.syndrome(word).any()

    def word_from_support(self, support: Iterable[int]) -> np.ndarray:
        w = np.zeros(self.n, dtype=np.uint8)
        for v in support:
            self._check_var(v)
            w[v] = 1
        return w

    def to_matrix(self) -> np.ndarray:
        H = np.zeros((self.m, self.n), dtype=np.uint8)
        for v, c in self.edges():
            H[c, v] = 1
        return H


def _bisect(a: list[int], x: int) -> int:
    lo, hi = 0, len(a)
    while lo < hi:
        mid = (lo + hi) // 2
        if a[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    return lo


def new_graph(n: int, m: int) -> TannerGraph:
    return TannerGraph(n, m)


# -- alist I/O --------------------------------------------------------------


def write_alist(g: TannerGraph) -> str:
    """Serialize to MacKay's alist format (1-based, zero padded lists)."""
    vdeg = g.var_degrees()
    cdeg = g.chk_degrees()
    dv, dc = max(vdeg, default=0), max(cdeg, default=0)
    lines = [f"{g.n} {g.m}", f"{dv} {dc}", " ".join(map(str, vdeg)), " ".join(map(str, cdeg))]
    for adj in g.var_adj:
        lines.append(" ".join(str(c + 1) for c in adj) + " 0" * (dv - len(adj)))
    for adj in g.chk_adj:
        lines.append(" ".join(str(v + 1) for v in adj) + " 0" * (dc - len(adj)))
    return "\n".join(line.strip() for line in lines) + "\n"


def read_alist(text: str) -> TannerGraph:
    """Parse alist text. Trailing zero padding in neighbor lists is accepted."""
    tokens = iter(text.split())

    def take(what: str) -> int:
        try:
            return int(next(tokens))
        except StopIteration:
            raise GraphError(f"alist truncated while reading {what}") from None
        except ValueError as exc:
            raise GraphError(f"alist: non-integer token while reading {what}: {exc}") from None

    n, m = take("n"), take("m")
    if n < 1 or m < 1:
        raise GraphError(f"alist: bad dimensions n={n}, m={m}")
    dv, dc = take("max variable degree"), take("max check degree")
    vdeg = [take("variable degrees") for _ in range(n)]
    cdeg = [take("check degrees") for _ in range(m)]
    if any(d < 0 or d > dv for d in vdeg) or any(d < 0 or d > dc for d in cdeg):
        raise GraphError("alist: degree exceeds declared maximum")
    if sum(vdeg) != sum(cdeg):
        raise GraphError("alist: variable and check degree sums differ")

    def neighbor_lists(count: int, degs: list[int], width: int, bound: int, kind: str) -> list[list[int]]:
        out = []
        for i in range(count):
            row = [take(f"{kind} {i} neighbors") for _ in range(width)]
            body, pad = row[: degs[i]], row[degs[i]:]
            if any(x < 1 or x > bound for x in body):
                raise GraphError(f"alist: {kind} {i} neighbor out of range 1..{bound} (alist is 1-based)")
            if any(x != 0 for x in pad):
                raise GraphError(f"alist: {kind} {i} lists more neighbors than its degree {degs[i]}")
            out.append([x - 1 for x in body])
        return out

    vlists = neighbor_lists(n, vdeg, dv, m, "variable")
    # some archives omit the check section; accept that when nothing remains
    rest = list(tokens)
    tokens = iter(rest)
    g = TannerGraph(n, m)
    for v, adj in enumerate(vlists):
        for c in adj:
            g.add_edge(v, c)
    if rest:
        clists = neighbor_lists(m, cdeg, dc, n, "check")
        if [sorted(a) for a in clists] != g.chk_adj:
            raise GraphError("alist: check lists disagree with variable lists")
    if g.chk_degrees() != cdeg:
        raise GraphError("alist: check degree list disagrees with neighbor lists")
    return g


def read_alist_file(path) -> TannerGraph:
    with open(path) as fh:
        return read_alist(fh.read())


def write_alist_file(g: TannerGraph, path) -> None:
    with open(path, "w") as fh:
        fh.write(write_alist(g))


def write_edge_list(g: TannerGraph) -> str:
    """Debug dump, one ``v c`` pair per line (0-based)."""
    return "".join(f"{v} {c}\n" for v, c in g.edges())
