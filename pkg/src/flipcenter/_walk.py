"""Compiled segment walks through a fixed triangulation.

A static triangulation is packed into triangle arrays: ``tri[t]`` holds
vertices in ccw order, and ``nbr[t, k]`` is the triangle across the edge
opposite ``tri[t, k]``, or -1 on the hull. ``crossings`` then walks a segment
from one endpoint to the other and counts the edges it crosses properly.
The arithmetic is int64, so callers fall back to the pure-Python walk when
coordinates reach 2**30.
"""
from __future__ import annotations

import numba
import numpy as np


@numba.njit(cache=True)
def _o(xs, ys, i, j, k):
    c = (xs[j] - xs[i]) * (ys[k] - ys[i]) - (ys[j] - ys[i]) * (xs[k] - xs[i])
    if c > 0:
        return 1
    if c < 0:
        return -1
    return 0


@numba.njit(cache=True)
def _index_of(tri, t, v):
    if tri[t, 0] == v:
        return 0
    if tri[t, 1] == v:
        return 1
    return 2


@numba.njit(cache=True)
def crossings(xs, ys, tri, nbr, vt, p, q):
    """Edges properly crossed by segment pq; 0 if pq is an edge, -1 if pq
    passes through a point or cannot be traced."""
    t0 = vt[p]
    # rotate ccw around p, then cw if the hull interrupts
    for direction in range(2):
        t = t0
        for _ in range(xs.shape[0] + 2):
            k = _index_of(tri, t, p)
            a = tri[t, (k + 1) % 3]
            b = tri[t, (k + 2) % 3]
            if a == q or b == q:
                return 0
            if _o(xs, ys, p, a, q) > 0 and _o(xs, ys, p, q, b) > 0:
                return _trace(xs, ys, tri, nbr, t, k, a, b, p, q)
            nxt = nbr[t, (k + 1) % 3] if direction == 0 else nbr[t, (k + 2) % 3]
            if nxt == -1 or nxt == t0:
                break
            t = nxt
    return -1


@numba.njit(cache=True)
def _trace(xs, ys, tri, nbr, t, k, a, b, p, q):
    count = 0
    cur = t
    # edge (a, b) is opposite vertex k of cur
    nxt = nbr[cur, k]
    while True:
        if nxt == -1:
            return -1
        count += 1
        # c: vertex of nxt not on edge (a, b)
        c = tri[nxt, 0]
        if c == a or c == b:
            c = tri[nxt, 1]
            if c == a or c == b:
                c = tri[nxt, 2]
        if c == q:
            return count
        s = _o(xs, ys, p, q, c)
        if s > 0:
            # leave through (a, c): opposite b
            cur = nxt
            nxt = nbr[cur, _index_of(tri, cur, b)]
            b = c
        elif s < 0:
            cur = nxt
            nxt = nbr[cur, _index_of(tri, cur, a)]
            a = c
        else:
            return -1


@numba.njit(cache=True)
def crossings_many(xs, ys, tri, nbr, vt, us, vs):
    out = np.empty(us.shape[0], np.int64)
    for i in range(us.shape[0]):
        out[i] = crossings(xs, ys, tri, nbr, vt, us[i], vs[i])
    return out


@numba.njit(cache=True)
def _pack(n, tri):
    nt = tri.shape[0]
    keys = np.empty(3 * nt, np.int64)
    for t in range(nt):
        for k in range(3):
            a = tri[t, (k + 1) % 3]
            b = tri[t, (k + 2) % 3]
            keys[3 * t + k] = a * n + b
    order = np.argsort(keys)
    skeys = keys[order]
    nbr = -np.ones((nt, 3), np.int64)
    vt = -np.ones(n, np.int64)
    for t in range(nt):
        for k in range(3):
            v = tri[t, k]
            if vt[v] == -1:
                vt[v] = t
            a = tri[t, (k + 1) % 3]
            b = tri[t, (k + 2) % 3]
            twin = b * n + a
            i = np.searchsorted(skeys, twin)
            if i < skeys.shape[0] and skeys[i] == twin:
                nbr[t, k] = order[i] // 3
    return nbr, vt


def pack(n: int, triangles) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Triangle arrays for ``triangles`` given as ccw vertex triples."""
    tri = np.asarray(triangles, dtype=np.int64).reshape(-1, 3)
    nbr, vt = _pack(n, tri)
    return tri, nbr, vt


# -- compiled greedy parallel walk ---------------------------------------------

@numba.njit(cache=True)
def _has(codes, c):
    i = np.searchsorted(codes, c)
    return i < codes.shape[0] and codes[i] == c


@numba.njit(cache=True)
def _cached(xs, ys, ttri, tnbr, tvt, tcodes, cache, p, q):
    n = xs.shape[0]
    if p > q:
        p, q = q, p
    c = p * n + q
    v = cache.get(c, -2)
    if v != -2:
        return v
    if _has(tcodes, c):
        v = 0
    else:
        v = crossings(xs, ys, ttri, tnbr, tvt, p, q)
    cache[c] = v
    return v


@numba.njit(cache=True)
def flip_slot(tri, nbr, t, k):
    """Flip the edge opposite ``tri[t, k]``; both triangles keep their ids."""
    t2 = nbr[t, k]
    p = tri[t, k]
    a = tri[t, (k + 1) % 3]
    b = tri[t, (k + 2) % 3]
    j = 0
    while tri[t2, j] == a or tri[t2, j] == b:
        j += 1
    q = tri[t2, j]
    n_a = nbr[t, (k + 1) % 3]
    n_b = nbr[t, (k + 2) % 3]
    x_aq = nbr[t2, (j + 1) % 3]
    y_qb = nbr[t2, (j + 2) % 3]
    tri[t, 0], tri[t, 1], tri[t, 2] = p, a, q
    nbr[t, 0], nbr[t, 1], nbr[t, 2] = x_aq, t2, n_b
    tri[t2, 0], tri[t2, 1], tri[t2, 2] = q, b, p
    nbr[t2, 0], nbr[t2, 1], nbr[t2, 2] = n_a, t, y_qb
    if x_aq >= 0:
        for i in range(3):
            if nbr[x_aq, i] == t2:
                nbr[x_aq, i] = t
    if n_a >= 0:
        for i in range(3):
            if nbr[n_a, i] == t:
                nbr[n_a, i] = t2


@numba.njit(cache=True)
def parallel_walk(xs, ys, tri, nbr, ttri, tnbr, tvt, tcodes, cache, seed, by_gain, max_steps):
    """Greedy parallel walk from (tri, nbr), modified in place, to the target.

    Same priorities as the pure-Python walk: flips landing on a target edge,
    then crossing-reducing flips (largest drop first if ``by_gain``), random
    tie-break, target edges frozen. Returns (status, offsets, us, vs) where
    step s flipped edges ``us[offsets[s]:offsets[s+1]]``; status is 0 when the
    target is reached, 1 when ``max_steps`` (if >= 0) cut the walk short, -1
    on a stall and -2 if a segment ran through a point.
    """
    np.random.seed(seed)
    n = xs.shape[0]
    nt = tri.shape[0]
    used = np.zeros(nt, np.bool_)
    cand_t = np.empty(nt * 2, np.int64)
    cand_k = np.empty(nt * 2, np.int64)
    keys = np.empty(nt * 2, np.int64)
    chosen = np.empty(nt, np.int64)
    offsets = [0]
    us = [np.int64(0)][:0]
    vs = [np.int64(0)][:0]
    status = 0
    steps = 0
    while True:
        nc = 0
        nbad = 0
        for t in range(nt):
            for k in range(3):
                t2 = nbr[t, k]
                if t2 < t:
                    continue
                a = tri[t, (k + 1) % 3]
                b = tri[t, (k + 2) % 3]
                lo, hi = (a, b) if a < b else (b, a)
                if _has(tcodes, lo * n + hi):
                    continue
                nbad += 1
                p = tri[t, k]
                j = 0
                while tri[t2, j] == a or tri[t2, j] == b:
                    j += 1
                q = tri[t2, j]
                if _o(xs, ys, p, a, q) <= 0 or _o(xs, ys, q, b, p) <= 0:
                    continue
                c_old = _cached(xs, ys, ttri, tnbr, tvt, tcodes, cache, a, b)
                c_new = _cached(xs, ys, ttri, tnbr, tvt, tcodes, cache, p, q)
                if c_old < 0 or c_new < 0:
                    return -2, np.array(offsets), np.array(us), np.array(vs)
                gain = c_old - c_new
                if gain <= 0:
                    continue
                cat = 0 if c_new == 0 else 1
                rank = cat << 31
                if by_gain:
                    rank += (1 << 31) - 1 - min(gain, (1 << 31) - 1)
                cand_t[nc] = t
                cand_k[nc] = k
                keys[nc] = (rank << 20) + np.random.randint(0, 1 << 20)
                nc += 1
        if nbad == 0:
            break
        if nc == 0:
            status = -1
            break
        if max_steps >= 0 and steps >= max_steps:
            status = 1
            break
        order = np.argsort(keys[:nc])
        nchosen = 0
        for i in order:
            t = cand_t[i]
            t2 = nbr[t, cand_k[i]]
            if used[t] or used[t2]:
                continue
            used[t] = True
            used[t2] = True
            chosen[nchosen] = i
            nchosen += 1
        for c in range(nchosen):
            i = chosen[c]
            t = cand_t[i]
            k = cand_k[i]
            used[t] = False
            used[nbr[t, k]] = False
            a = tri[t, (k + 1) % 3]
            b = tri[t, (k + 2) % 3]
            us.append(min(a, b))
            vs.append(max(a, b))
            flip_slot(tri, nbr, t, k)
        offsets.append(len(us))
        steps += 1
    return status, np.array(offsets), np.array(us), np.array(vs)


@numba.njit(cache=True)
def best_walk(xs, ys, tri, nbr, ttri, tnbr, tvt, tcodes, cache, seeds, lower):
    """Shortest of several walks, restart k using seeds[k] and ranking by
    gain when k is even. Later restarts are capped one below the best so far
    and the loop stops once ``lower`` is reached. Returns
    (status, offsets, us, vs); status -1 or -2 reports a failed restart."""
    best_off = np.zeros(1, np.int64)
    best_us = np.zeros(0, np.int64)
    best_vs = np.zeros(0, np.int64)
    best_len = -1
    for k in range(seeds.shape[0]):
        cap = -1 if best_len < 0 else best_len - 1
        status, off, us, vs = parallel_walk(
            xs, ys, tri.copy(), nbr.copy(), ttri, tnbr, tvt, tcodes, cache, seeds[k], k % 2 == 0, cap
        )
        if status < 0:
            return status, off, us, vs
        if status == 0 and (best_len < 0 or off.shape[0] - 1 < best_len):
            best_len = off.shape[0] - 1
            best_off, best_us, best_vs = off, us, vs
        if best_len == lower:
            break
    return 0, best_off, best_us, best_vs


def new_cache():
    return numba.typed.Dict.empty(key_type=numba.types.int64, value_type=numba.types.int64)
