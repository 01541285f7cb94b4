"""Grid-bucketed greedy planar edge insertion.

``greedy_insert`` walks a candidate edge list in order and keeps each edge that
shares no point with any kept edge other than a common endpoint and passes
through no other input point. The uniform grid only narrows down which kept
edges and points get tested. Every accept/reject decision is an exact integer
predicate. A segment's cell cover is a padded superset of the cells it touches,
so bucketing never hides a conflict.

Numba runs the int64 path, which is exact while all |coordinates| < 2**30.
Larger inputs go through the same code uncompiled on object arrays of Python
ints (``.py_func``): still exact, just slow.
"""
from __future__ import annotations

import math
import types

import numba
import numpy as np

SAFE_COORD = 2**30


@numba.njit(cache=True)
def _orient(ax, ay, bx, by, cx, cy):
    c = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    if c > 0:
        return 1
    if c < 0:
        return -1
    return 0


@numba.njit(cache=True)
def _between(ax, ay, bx, by, cx, cy):
    return min(ax, bx) <= cx <= max(ax, bx) and min(ay, by) <= cy <= max(ay, by)


@numba.njit(cache=True)
def _conflict(xs, ys, a, b, c, d):
    if a != c and a != d and b != c and b != d:
        # common case first: two orientations settle most disjoint pairs
        o1 = _orient(xs[a], ys[a], xs[b], ys[b], xs[c], ys[c])
        o2 = _orient(xs[a], ys[a], xs[b], ys[b], xs[d], ys[d])
        if o1 * o2 > 0:
            return False
        o3 = _orient(xs[c], ys[c], xs[d], ys[d], xs[a], ys[a])
        o4 = _orient(xs[c], ys[c], xs[d], ys[d], xs[b], ys[b])
        if o3 * o4 > 0:
            return False
        if o1 * o2 < 0 and o3 * o4 < 0:
            return True
        if o1 == 0 and _between(xs[a], ys[a], xs[b], ys[b], xs[c], ys[c]):
            return True
        if o2 == 0 and _between(xs[a], ys[a], xs[b], ys[b], xs[d], ys[d]):
            return True
        if o3 == 0 and _between(xs[c], ys[c], xs[d], ys[d], xs[a], ys[a]):
            return True
        if o4 == 0 and _between(xs[c], ys[c], xs[d], ys[d], xs[b], ys[b]):
            return True
        return False
    if (a == c and b == d) or (a == d and b == c):
        return True
    if a == c:
        s, p, q = a, b, d
    elif a == d:
        s, p, q = a, b, c
    elif b == c:
        s, p, q = b, a, d
    else:
        s, p, q = b, a, c
    if _orient(xs[s], ys[s], xs[p], ys[p], xs[q], ys[q]) != 0:
        return False
    # collinear with a shared endpoint: overlap iff both leave s the same way
    return (xs[p] - xs[s]) * (xs[q] - xs[s]) + (ys[p] - ys[s]) * (ys[q] - ys[s]) > 0


@numba.njit(cache=True)
def _decode(k, n):
    """Pair index in row-major order over i < j -> (i, j)."""
    i = int((2 * n - 1 - math.sqrt((2.0 * n - 1) ** 2 - 8.0 * k)) // 2)
    if i < 0:
        i = 0
    while i > 0 and i * n - i * (i + 1) // 2 > k:
        i -= 1
    while (i + 1) * n - (i + 1) * (i + 2) // 2 <= k:
        i += 1
    return i, i + 1 + (k - (i * n - i * (i + 1) // 2))


@numba.njit(cache=True)
def _cover(fx0, fy0, fx1, fy1, g, out):
    """Write the cells (row * g + col) a segment may touch into ``out``; return count."""
    if fy0 > fy1:
        fx0, fy0, fx1, fy1 = fx1, fy1, fx0, fy0
    r0 = max(int(math.floor(fy0)) - 1, 0)
    r1 = min(int(math.floor(fy1)) + 1, g - 1)
    k = 0
    dy = fy1 - fy0
    for r in range(r0, r1 + 1):
        if dy > 0.0:
            ta = (r - fy0) / dy
            tb = (r + 1 - fy0) / dy
            ta = min(max(ta, 0.0), 1.0)
            tb = min(max(tb, 0.0), 1.0)
            xa = fx0 + (fx1 - fx0) * ta
            xb = fx0 + (fx1 - fx0) * tb
        else:
            xa = fx0
            xb = fx1
        lo = min(xa, xb)
        hi = max(xa, xb)
        c0 = max(int(math.floor(lo)) - 1, 0)
        c1 = min(int(math.floor(hi)) + 1, g - 1)
        for c in range(c0, c1 + 1):
            if k == out.shape[0]:
                return -1
            out[k] = r * g + c
            k += 1
    return k


@numba.njit(cache=True)
def _greedy(xs, ys, fxs, fys, g, codes, target, first_conflict):
    """Core loop. Returns (accepted flags, conflict pair for the first rejection).

    With ``first_conflict`` set, stops at the first rejected edge and reports
    the index of the kept edge it conflicts with (or -1 - point index when it
    runs through a point).
    """
    n = xs.shape[0]
    ncand = codes.shape[0]
    ncell = g * g
    # points bucketed CSR style
    pcell = np.empty(n, np.int64)
    counts = np.zeros(ncell + 1, np.int64)
    for i in range(n):
        cx = min(max(int(math.floor(fxs[i])), 0), g - 1)
        cy = min(max(int(math.floor(fys[i])), 0), g - 1)
        pcell[i] = cy * g + cx
        counts[pcell[i] + 1] += 1
    for c in range(ncell):
        counts[c + 1] += counts[c]
    pstart = counts.copy()
    plist = np.empty(n, np.int64)
    fill = counts[:-1].copy()
    for i in range(n):
        plist[fill[pcell[i]]] = i
        fill[pcell[i]] += 1

    head = -np.ones(ncell, np.int64)
    cap = max(16 * n, 1024)
    rec_edge = np.empty(cap, np.int64)
    rec_next = np.empty(cap, np.int64)
    nrec = 0
    cells = np.empty(4 * (g + 2) * 3 + 16, np.int64)
    accepted = np.zeros(ncand, np.bool_)
    # kept-edge adjacency as linked lists: (neighbour, kept edge id)
    ahead = -np.ones(n, np.int64)
    ato = np.empty(2 * min(ncand, 3 * n) + 2, np.int64)
    aedge = np.empty(2 * min(ncand, 3 * n) + 2, np.int64)
    anext = np.empty(2 * min(ncand, 3 * n) + 2, np.int64)
    nadj = 0
    # kept edges, compact: endpoints and originating candidate index
    ku = np.empty(min(ncand, 3 * n) + 1, np.int64)
    kv = np.empty(min(ncand, 3 * n) + 1, np.int64)
    kcand = np.empty(min(ncand, 3 * n) + 1, np.int64)
    kept = 0
    bad_edge = -1
    bad_with = 0
    for e in range(ncand):
        if kept >= target:
            break
        a, b = _decode(codes[e], n)
        ok = True
        # quick reject: a late candidate usually crosses an edge incident to
        # a neighbour of one of its endpoints
        for end in range(2):
            x = ahead[a] if end == 0 else ahead[b]
            while x != -1 and ok:
                c = ato[x]
                y = ahead[c]
                while y != -1:
                    if _conflict(xs, ys, a, b, c, ato[y]):
                        ok = False
                        bad_with = kcand[aedge[y]]
                        break
                    y = anext[y]
                x = anext[x]
            if not ok:
                break
        if not ok:
            if first_conflict:
                bad_edge = e
                break
            continue
        # visit cells row by row starting at a's end so that rejections, which
        # usually happen next to an endpoint, exit early
        fx0 = fxs[a]
        fy0 = fys[a]
        fx1 = fxs[b]
        fy1 = fys[b]
        ra = min(max(int(math.floor(fy0)), 0), g - 1)
        rb = min(max(int(math.floor(fy1)), 0), g - 1)
        rstep = 1 if rb >= ra else -1
        r0 = max(ra - rstep, 0) if rstep == 1 else min(ra + 1, g - 1)
        r1 = min(rb + 1, g - 1) if rstep == 1 else max(rb - 1, 0)
        dy = fy1 - fy0
        r = r0
        while True:
            if dy != 0.0:
                ta = min(max((r - fy0) / dy, 0.0), 1.0)
                tb = min(max((r + 1 - fy0) / dy, 0.0), 1.0)
                xa = fx0 + (fx1 - fx0) * ta
                xb = fx0 + (fx1 - fx0) * tb
            else:
                xa = fx0
                xb = fx1
            c0 = max(int(math.floor(min(xa, xb))) - 1, 0)
            c1 = min(int(math.floor(max(xa, xb))) + 1, g - 1)
            if fx1 >= fx0:
                cstart = c0
                cstep = 1
                ncols = c1 - c0 + 1
            else:
                cstart = c1
                cstep = -1
                ncols = c1 - c0 + 1
            for ci in range(ncols):
                cell = r * g + cstart + cstep * ci
                for s in range(pstart[cell], pstart[cell + 1]):
                    p = plist[s]
                    if p != a and p != b:
                        if _orient(xs[a], ys[a], xs[b], ys[b], xs[p], ys[p]) == 0 and _between(
                            xs[a], ys[a], xs[b], ys[b], xs[p], ys[p]
                        ):
                            ok = False
                            bad_with = -1 - p
                            break
                if not ok:
                    break
                q = head[cell]
                while q != -1:
                    f = rec_edge[q]
                    if _conflict(xs, ys, a, b, ku[f], kv[f]):
                        ok = False
                        bad_with = kcand[f]
                        break
                    q = rec_next[q]
                if not ok:
                    break
            if not ok or r == r1:
                break
            r += rstep
        if not ok:
            if first_conflict:
                bad_edge = e
                break
            continue
        accepted[e] = True
        if kept < ku.shape[0]:
            ku[kept] = a
            kv[kept] = b
            kcand[kept] = e
        kid = kept
        kept += 1
        if nadj + 2 <= ato.shape[0]:
            ato[nadj] = b
            aedge[nadj] = kid
            anext[nadj] = ahead[a]
            ahead[a] = nadj
            ato[nadj + 1] = a
            aedge[nadj + 1] = kid
            anext[nadj + 1] = ahead[b]
            ahead[b] = nadj + 1
            nadj += 2
        k = _cover(fx0, fy0, fx1, fy1, g, cells)
        if nrec + k > cap:
            ncap = max(2 * cap, nrec + k)
            ne = np.empty(ncap, np.int64)
            nn = np.empty(ncap, np.int64)
            ne[:nrec] = rec_edge[:nrec]
            nn[:nrec] = rec_next[:nrec]
            rec_edge = ne
            rec_next = nn
            cap = ncap
        for t in range(k):
            cell = cells[t]
            rec_edge[nrec] = kid
            rec_next[nrec] = head[cell]
            head[cell] = nrec
            nrec += 1
    return accepted, bad_edge, bad_with


def _grid(xs, ys, n):
    g = max(1, int(math.ceil(math.sqrt(n / 2.0))))
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    sx = g / (x1 - x0 + 1)
    sy = g / (y1 - y0 + 1)
    fxs = np.array([(x - x0) * sx for x in xs], dtype=np.float64)
    fys = np.array([(y - y0) * sy for y in ys], dtype=np.float64)
    return g, fxs, fys


def pair_codes(us, vs, n):
    """Inverse of ``decode_pairs``; endpoints in either order."""
    us = np.asarray(us, dtype=np.int64)
    vs = np.asarray(vs, dtype=np.int64)
    i = np.minimum(us, vs)
    j = np.maximum(us, vs)
    return i * n - i * (i + 1) // 2 + (j - i - 1)


def _uncompiled(fn, _done=None):
    """Pure-Python copy of a jitted function whose jitted callees are swapped
    for pure-Python copies too, so object arrays of big ints work."""
    done = {} if _done is None else _done
    if fn in done:
        return done[fn]
    py = fn.py_func
    env = dict(py.__globals__)
    copy = types.FunctionType(py.__code__, env, py.__name__, py.__defaults__, py.__closure__)
    done[fn] = copy
    for name, val in py.__globals__.items():
        if isinstance(val, numba.core.registry.CPUDispatcher):
            env[name] = _uncompiled(val, done)
    return copy


def _run(xs, ys, codes, target, first_conflict):
    n = len(xs)
    g, fxs, fys = _grid(xs, ys, n)
    codes = np.ascontiguousarray(codes, dtype=np.int64)
    if max(max(map(abs, xs)), max(map(abs, ys))) < SAFE_COORD:
        ax = np.asarray(xs, dtype=np.int64)
        ay = np.asarray(ys, dtype=np.int64)
        return _greedy(ax, ay, fxs, fys, g, codes, target, first_conflict)
    ax = np.array([int(x) for x in xs], dtype=object)
    ay = np.array([int(y) for y in ys], dtype=object)
    return _uncompiled(_greedy)(ax, ay, fxs, fys, g, codes, target, first_conflict)


def greedy_insert(xs, ys, codes, target: int) -> np.ndarray:
    """Boolean mask over candidate pair codes: which edges the greedy pass keeps."""
    accepted, _, _ = _run(xs, ys, codes, target, False)
    return accepted


def first_conflict(xs, ys, codes):
    """Insert all edges in order; None if they are pairwise compatible, else
    (i, j) where edge i conflicts with the earlier edge j, or (i, -1 - p) when
    edge i runs through point p."""
    _, bad, other = _run(xs, ys, codes, len(codes) + 1, True)
    if bad < 0:
        return None
    return int(bad), int(other)


@numba.njit(cache=True)
def decode_pairs(codes, n):
    m = codes.shape[0]
    us = np.empty(m, np.int64)
    vs = np.empty(m, np.int64)
    for t in range(m):
        us[t], vs[t] = _decode(codes[t], n)
    return us, vs
