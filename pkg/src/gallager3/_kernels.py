"""Numba kernels shared by the decoder, the structure searches and the simulators.

Graphs arrive as the CSR arrays of ``TannerGraph.arrays()``. Nothing in here
validates input; the Python wrappers do that.
"""

import os
import warnings

import numba
import numpy as np
from numba import njit, prange

# The bundled TBB is often too old for numba and only produces a warning;
# prefer OpenMP / workqueue unless the user picked a layer explicitly.
if "NUMBA_THREADING_LAYER" not in os.environ:
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]
warnings.filterwarnings("ignore", message="The TBB threading layer requires", category=numba.NumbaWarning)

CONVERGED = 0
FAILED = 1
FIXED_POINT = 2

RULE_A = 0
RULE_B = 1

# -- counter-based RNG ---------------------------------------------------------

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_INV53 = 1.0 / 9007199254740992.0


@njit(cache=True, inline="always")
def mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def trial_key(seed, trial):
    """64-bit state of one trial, a pure function of ``(seed, trial)``."""
    k = mix64(np.uint64(seed) + _GOLDEN)
    return mix64(k ^ mix64(np.uint64(trial) * _GOLDEN + _M2))


@njit(cache=True, inline="always")
def uniform_at(key, i):
    return float(mix64(key + np.uint64(i + 1) * _GOLDEN) >> np.uint64(11)) * _INV53


@njit(cache=True)
def trial_uniforms(seed, trial, size):
    key = trial_key(seed, trial)
    out = np.empty(size, dtype=np.float64)
    for i in range(size):
        out[i] = uniform_at(key, i)
    return out


# -- Gallager A ---------------------------------------------------------------


@njit(cache=True)
def _syndrome_zero(word, chk_ptr, chk_var, m):
    for c in range(m):
        s = 0
        for p in range(chk_ptr[c], chk_ptr[c + 1]):
            s ^= word[chk_var[p]]
        if s:
            return False
    return True


@njit(cache=True)
def decode_core(var_ptr, edge_chk, chk_ptr, chk_edges, chk_var, r, max_iter, rule, v2c, c2v, nxt, est):
    """Decode hard word ``r`` in place of the work buffers.

    Returns ``(status, iterations_used)``; the final estimate is left in ``est``.
    A repeated variable-to-check state is terminal: if it equals the received
    broadcast the input was a fixed point, otherwise the run is stuck and the
    outcome is that of exhausting ``max_iter``.
    """
    n = var_ptr.shape[0] - 1
    m = chk_ptr.shape[0] - 1
    if _syndrome_zero(r, chk_ptr, chk_var, m):
        est[:] = r
        return CONVERGED, 0
    for v in range(n):
        for e in range(var_ptr[v], var_ptr[v + 1]):
            v2c[e] = r[v]
    for it in range(1, max_iter + 1):
        if it >= 2:
            same = True
            for v in range(n):
                lo = var_ptr[v]
                hi = var_ptr[v + 1]
                deg = hi - lo
                ones = 0
                for e in range(lo, hi):
                    ones += c2v[e]
                for e in range(lo, hi):
                    o = ones - c2v[e]
                    if deg > 1 and o == deg - 1:
                        x = 1
                    elif deg > 1 and o == 0:
                        x = 0
                    else:
                        x = r[v]
                    nxt[e] = x
                    if x != v2c[e]:
                        same = False
            if same:
                for v in range(n):
                    for e in range(var_ptr[v], var_ptr[v + 1]):
                        if v2c[e] != r[v]:
                            return FAILED, max_iter
                return FIXED_POINT, it - 1
            v2c[:] = nxt
        for c in range(m):
            t = 0
            for p in range(chk_ptr[c], chk_ptr[c + 1]):
                t ^= v2c[chk_edges[p]]
            for p in range(chk_ptr[c], chk_ptr[c + 1]):
                e = chk_edges[p]
                c2v[e] = t ^ v2c[e]
        for v in range(n):
            lo = var_ptr[v]
            hi = var_ptr[v + 1]
            deg = hi - lo
            ones = 0
            for e in range(lo, hi):
                ones += c2v[e]
            if rule == RULE_A:
                if deg > 0 and ones == deg:
                    est[v] = 1
                elif deg > 0 and ones == 0:
                    est[v] = 0
                else:
                    est[v] = r[v]
            else:
                est[v] = 1 if 2 * ones > deg else 0
        if _syndrome_zero(est, chk_ptr, chk_var, m):
            return CONVERGED, it
    return FAILED, max_iter


@njit(cache=True)
def _failed(status, est):
    if status != CONVERGED:
        return True
    for x in est:
        if x:
            return True
    return False


# -- exhaustive sweeps ----------------------------------------------------------


@njit(cache=True)
def binom(n, k):
    if k < 0 or k > n:
        return 0
    k = min(k, n - k)
    out = 1
    for i in range(k):
        out = out * (n - i) // (i + 1)
    return out


@njit(cache=True)
def colex_unrank(rank, k, out):
    """Write the ``rank``-th k-subset in colexicographic order into ``out``."""
    for i in range(k, 0, -1):
        c = i - 1
        while binom(c + 1, i) <= rank:
            c += 1
        out[i - 1] = c
        rank -= binom(c, i)


@njit(cache=True)
def colex_next(comb, k):
    i = 0
    while i < k - 1 and comb[i] + 1 == comb[i + 1]:
        comb[i] = i
        i += 1
    comb[i] += 1


@njit(cache=True, parallel=True)
def sweep_weight(var_ptr, edge_chk, chk_ptr, chk_edges, chk_var, k, lo, hi, max_iter, rule, block):
    """Decode every weight-``k`` pattern with colex rank in ``[lo, hi)``.

    Returns a uint8 flag per rank (1 = decoder failure). Work is split into
    fixed blocks of ``block`` ranks, so results never depend on the thread count.
    """
    n = var_ptr.shape[0] - 1
    E = edge_chk.shape[0]
    total = hi - lo
    flags = np.zeros(total, dtype=np.uint8)
    nblocks = (total + block - 1) // block
    for b in prange(nblocks):
        start = lo + b * block
        stop = min(hi, start + block)
        comb = np.empty(max(k, 1), dtype=np.int64)
        r = np.zeros(n, dtype=np.uint8)
        v2c = np.empty(E, dtype=np.uint8)
        c2v = np.empty(E, dtype=np.uint8)
        nxt = np.empty(E, dtype=np.uint8)
        est = np.empty(n, dtype=np.uint8)
        colex_unrank(start, k, comb)
        for rank in range(start, stop):
            for i in range(k):
                r[comb[i]] = 1
            status, _ = decode_core(var_ptr, edge_chk, chk_ptr, chk_edges, chk_var, r, max_iter, rule, v2c, c2v, nxt, est)
            if _failed(status, est):
                flags[rank - lo] = 1
            for i in range(k):
                r[comb[i]] = 0
            if k > 0:
                colex_next(comb, k)
    return flags


# -- Monte Carlo ----------------------------------------------------------------


@njit(cache=True, parallel=True)
def mc_trials(var_ptr, edge_chk, chk_ptr, chk_edges, chk_var, seed, t0, count, alpha, max_iter, rule, block):
    """Run trials ``t0 .. t0+count-1`` on BSC(alpha); returns per-trial failure flags.

    Bit ``i`` of trial ``t`` flips iff its counter-based uniform is below
    ``alpha``, so flip sets are nested across alpha for a fixed seed.
    """
    n = var_ptr.shape[0] - 1
    E = edge_chk.shape[0]
    flags = np.zeros(count, dtype=np.uint8)
    nblocks = (count + block - 1) // block
    for b in prange(nblocks):
        start = b * block
        stop = min(count, start + block)
        r = np.zeros(n, dtype=np.uint8)
        v2c = np.empty(E, dtype=np.uint8)
        c2v = np.empty(E, dtype=np.uint8)
        nxt = np.empty(E, dtype=np.uint8)
        est = np.empty(n, dtype=np.uint8)
        for j in range(start, stop):
            key = trial_key(seed, t0 + j)
            w = 0
            for i in range(n):
                if uniform_at(key, i) < alpha:
                    r[i] = 1
                    w += 1
                else:
                    r[i] = 0
            if w == 0:
                continue
            status, _ = decode_core(var_ptr, edge_chk, chk_ptr, chk_edges, chk_var, r, max_iter, rule, v2c, c2v, nxt, est)
            if _failed(status, est):
                flags[j] = 1
    return flags


@njit(cache=True, parallel=True)
def decode_patterns(var_ptr, edge_chk, chk_ptr, chk_edges, chk_var, supports, weights, max_iter, rule, block):
    """Failure flag for each row of ``supports`` (first ``weights[i]`` entries used)."""
    n = var_ptr.shape[0] - 1
    E = edge_chk.shape[0]
    count = supports.shape[0]
    flags = np.zeros(count, dtype=np.uint8)
    nblocks = (count + block - 1) // block
    for b in prange(nblocks):
        r = np.zeros(n, dtype=np.uint8)
        v2c = np.empty(E, dtype=np.uint8)
        c2v = np.empty(E, dtype=np.uint8)
        nxt = np.empty(E, dtype=np.uint8)
        est = np.empty(n, dtype=np.uint8)
        for j in range(b * block, min(count, (b + 1) * block)):
            for i in range(weights[j]):
                r[supports[j, i]] = 1
            status, _ = decode_core(var_ptr, edge_chk, chk_ptr, chk_edges, chk_var, r, max_iter, rule, v2c, c2v, nxt, est)
            if _failed(status, est):
                flags[j] = 1
            for i in range(weights[j]):
                r[supports[j, i]] = 0
    return flags


# -- structure searches -------------------------------------------------------------


@njit(cache=True)
def _grow(buf, count, row):
    if count == buf.shape[0]:
        bigger = np.empty((2 * buf.shape[0], buf.shape[1]), dtype=np.int64)
        bigger[:count] = buf[:count]
        buf = bigger
    buf[count] = row
    return buf


@njit(cache=True)
def _toggle(w, sign, var_ptr, edge_chk, chk_ptr, chk_var, cdeg, near, odd):
    for e in range(var_ptr[w], var_ptr[w + 1]):
        c = edge_chk[e]
        cdeg[c] += sign
        if cdeg[c] & 1:
            odd += 1
        else:
            odd -= 1
        for p in range(chk_ptr[c], chk_ptr[c + 1]):
            near[chk_var[p]] += sign
    near[w] += sign
    return odd


@njit(cache=True, inline="always")
def _owed(v, var_ptr, gamma):
    if gamma <= 0:
        return 0
    return max(0, gamma - (var_ptr[v + 1] - var_ptr[v]))


@njit(cache=True)
def find_53(var_ptr, edge_chk, chk_ptr, chk_var, roots, min_root, gamma):
    """Five-variable sets with three degree-1 and six degree-2 induced checks.

    Enumerates connected variable sets grown from each root with the ESU
    extension rule (each connected set seen once per root). With ``min_root``
    the root must be the smallest member, which makes a scan over all roots
    duplicate free; without it every set containing the root is visited.
    Branches die as soon as a check reaches induced degree 3 or the odd-check
    count can no longer come down to 3.

    With ``gamma > 0`` each variable also owes ``gamma - degree`` unplaced
    edges, counted as future degree-1 checks. Under the girth-8 placement rule
    those edges cannot land on a check of the set, so a match means the
    structure is unavoidable once the variables are completed.
    """
    K = 5
    n = var_ptr.shape[0] - 1
    m = chk_ptr.shape[0] - 1
    cap = 64
    for v in range(n):
        cap = max(cap, K * (var_ptr[v + 1] - var_ptr[v]) * 8)
    cdeg = np.zeros(m, dtype=np.int64)
    near = np.zeros(n, dtype=np.int64)
    stamp = np.zeros(n, dtype=np.int64)
    tick = 0
    sub = np.empty(K, dtype=np.int64)
    ext = np.empty((K + 1, cap), dtype=np.int64)
    extlen = np.zeros(K + 1, dtype=np.int64)
    out = np.empty((16, K), dtype=np.int64)
    found = 0
    row = np.empty(K, dtype=np.int64)
    for root in roots:
        odd = _toggle(root, 1, var_ptr, edge_chk, chk_ptr, chk_var, cdeg, near, 0)
        owed = _owed(root, var_ptr, gamma)
        sub[0] = root
        L = 1
        tick += 1
        extlen[1] = 0
        for e in range(var_ptr[root], var_ptr[root + 1]):
            c = edge_chk[e]
            for p in range(chk_ptr[c], chk_ptr[c + 1]):
                u = chk_var[p]
                if u != root and stamp[u] != tick and (u > root or not min_root):
                    stamp[u] = tick
                    ext[1, extlen[1]] = u
                    extlen[1] += 1
        while True:
            if extlen[L] == 0:
                if L == 1:
                    break
                L -= 1
                odd = _toggle(sub[L], -1, var_ptr, edge_chk, chk_ptr, chk_var, cdeg, near, odd)
                owed -= _owed(sub[L], var_ptr, gamma)
                continue
            extlen[L] -= 1
            w = ext[L, extlen[L]]
            # exclusive neighbours of w, taken before w joins the set
            nl = extlen[L]
            ext[L + 1, :nl] = ext[L, :nl]
            tick += 1
            for e in range(var_ptr[w], var_ptr[w + 1]):
                c = edge_chk[e]
                for p in range(chk_ptr[c], chk_ptr[c + 1]):
                    u = chk_var[p]
                    if near[u] == 0 and u != w and stamp[u] != tick and (u > root or not min_root):
                        stamp[u] = tick
                        ext[L + 1, nl] = u
                        nl += 1
            odd = _toggle(w, 1, var_ptr, edge_chk, chk_ptr, chk_var, cdeg, near, odd)
            owed += _owed(w, var_ptr, gamma)
            sub[L] = w
            dead = odd + owed - 3 * (K - L - 1) > 3
            if not dead:
                for i in range(L + 1):
                    for e in range(var_ptr[sub[i]], var_ptr[sub[i] + 1]):
                        if cdeg[edge_chk[e]] >= 3:
                            dead = True
            if not dead and L + 1 == K:
                if odd + owed == 3:
                    ok = True
                    nedge = owed
                    for i in range(K):
                        nedge += var_ptr[sub[i] + 1] - var_ptr[sub[i]]
                    if nedge != 15:
                        ok = False
                    for i in range(K):
                        ev = 0
                        od = _owed(sub[i], var_ptr, gamma)
                        for e in range(var_ptr[sub[i]], var_ptr[sub[i] + 1]):
                            if cdeg[edge_chk[e]] == 2:
                                ev += 1
                            else:
                                od += 1
                        if ev < 2 or od > 1:
                            ok = False
                    if ok:
                        row[:] = np.sort(sub)
                        out = _grow(out, found, row)
                        found += 1
                dead = True
            if dead:
                odd = _toggle(w, -1, var_ptr, edge_chk, chk_ptr, chk_var, cdeg, near, odd)
                owed -= _owed(w, var_ptr, gamma)
                continue
            extlen[L + 1] = nl
            L += 1
        odd = _toggle(root, -1, var_ptr, edge_chk, chk_ptr, chk_var, cdeg, near, odd)
    return out[:found]


@njit(cache=True)
def find_codewords(var_ptr, edge_chk, chk_ptr, chk_var, max_weight, budget):
    """Irreducible codewords of weight <= ``max_weight`` (each possibly several times).

    Grows a connected set from every root, always repairing the lowest
    unsatisfied check with a variable larger than the root. Returns
    ``(rows, weights, exhausted)``; ``rows[i, :weights[i]]`` is a support.
    ``budget`` caps node expansions (<= 0 means unlimited).
    """
    W = max_weight
    n = var_ptr.shape[0] - 1
    m = chk_ptr.shape[0] - 1
    cdeg = np.zeros(m, dtype=np.int64)
    near = np.zeros(n, dtype=np.int64)
    insub = np.zeros(n, dtype=np.uint8)
    sub = np.empty(W, dtype=np.int64)
    cand_chk = np.empty(W + 1, dtype=np.int64)
    pos = np.zeros(W + 1, dtype=np.int64)
    out = np.empty((16, W), dtype=np.int64)
    wts = np.empty(16, dtype=np.int64)
    found = 0
    expanded = 0
    exhausted = False
    row = np.full(W, -1, dtype=np.int64)
    for root in range(n):
        if exhausted:
            break
        odd = _toggle(root, 1, var_ptr, edge_chk, chk_ptr, chk_var, cdeg, near, 0)
        insub[root] = 1
        sub[0] = root
        L = 1
        if odd == 0:
            row[0] = root
            row[1:] = -1
            out = _grow(out, found, row)
            if found == wts.shape[0]:
                bigger = np.empty(2 * found, dtype=np.int64)
                bigger[:found] = wts
                wts = bigger
            wts[found] = 1
            found += 1
        # branch check at size L = lowest odd check
        cand_chk[L] = -1
        if odd > 0:
            best = m
            for i in range(L):
                for e in range(var_ptr[sub[i]], var_ptr[sub[i] + 1]):
                    c = edge_chk[e]
                    if cdeg[c] & 1 and c < best:
                        best = c
            cand_chk[L] = best
        pos[L] = chk_ptr[cand_chk[L]] if cand_chk[L] >= 0 else 0
        while L >= 1:
            c = cand_chk[L]
            if c < 0 or pos[L] >= chk_ptr[c + 1] or L == W:
                if L == 1:
                    break
                L -= 1
                insub[sub[L]] = 0
                odd = _toggle(sub[L], -1, var_ptr, edge_chk, chk_ptr, chk_var, cdeg, near, odd)
                continue
            u = chk_var[pos[L]]
            pos[L] += 1
            if u <= root or insub[u]:
                continue
            expanded += 1
            if budget > 0 and expanded > budget:
                exhausted = True
                break
            odd = _toggle(u, 1, var_ptr, edge_chk, chk_ptr, chk_var, cdeg, near, odd)
            if odd == 0:
                for i in range(L):
                    row[i] = sub[i]
                row[L] = u
                row[L + 1:] = -1
                row[:L + 1] = np.sort(row[:L + 1])
                out = _grow(out, found, row)
                if found == wts.shape[0]:
                    bigger = np.empty(2 * found, dtype=np.int64)
                    bigger[:found] = wts
                    wts = bigger
                wts[found] = L + 1
                found += 1
                odd = _toggle(u, -1, var_ptr, edge_chk, chk_ptr, chk_var, cdeg, near, odd)
                continue
            if odd > 3 * (W - L - 1):
                odd = _toggle(u, -1, var_ptr, edge_chk, chk_ptr, chk_var, cdeg, near, odd)
                continue
            insub[u] = 1
            sub[L] = u
            L += 1
            best = m
            for i in range(L):
                for e in range(var_ptr[sub[i]], var_ptr[sub[i] + 1]):
                    cc = edge_chk[e]
                    if cdeg[cc] & 1 and cc < best:
                        best = cc
            cand_chk[L] = best
            pos[L] = chk_ptr[best]
        # unwind whatever is left (normal exit leaves only the root)
        while L > 1:
            L -= 1
            insub[sub[L]] = 0
            odd = _toggle(sub[L], -1, var_ptr, edge_chk, chk_ptr, chk_var, cdeg, near, odd)
        insub[root] = 0
        odd = _toggle(root, -1, var_ptr, edge_chk, chk_ptr, chk_var, cdeg, near, odd)
    return out[:found], wts[:found], exhausted
