"""Compiled subroutine for depth-one and depth-two subproblems.

For a subset of instances the kernel counts, for every pair of features, the
instances (and positives) where both hold, using one matrix product. From these counts it evaluates
every tree of depth <= 2 without touching the instances again.

Results come back per branching budget b = 0..3 as a value, a node count and
a tree code ``[f, gl, gr, a, b, c, d]``: ``f`` is the root feature (-1 for a
single leaf with label ``a``); ``gl``/``gr`` are the features of the left and
right children (-1 when that child is a leaf). Leaf labels fill ``a..d`` in
left-to-right order.
"""

import numpy as np
from numba import njit

TIE_RTOL = 1e-11


@njit(cache=True)
def _tol(v):
    a = abs(v)
    return TIE_RTOL * (a if a > 1.0 else 1.0)


@njit(cache=True)
def _cost(table, n, pos):
    neg = n - pos
    return table[n, pos if pos < neg else neg]


@njit(cache=True)
def _label(n, pos):
    return 1 if pos > n - pos else 0


@njit(cache=True)
def depth2_kernel(X, y, idx, table, omega, depth):
    p = X.shape[1]
    m = idx.shape[0]
    Xs = np.empty((m, p))
    Ys = np.empty((m, p))
    P = 0
    for ii in range(m):
        i = idx[ii]
        yi = y[i]
        P += yi
        for f in range(p):
            v = 1.0 if X[i, f] else 0.0
            Xs[ii, f] = v
            Ys[ii, f] = v if yi else 0.0
    tot = np.empty(p, np.int64)
    posf = np.empty(p, np.int64)
    for f in range(p):
        a = 0.0
        b = 0.0
        for ii in range(m):
            a += Xs[ii, f]
            b += Ys[ii, f]
        tot[f] = np.int64(a)
        posf[f] = np.int64(b)
    pair = depth >= 2
    if pair:
        # counts are exact: integers below 2**53
        XT = Xs.T.copy()
        co = np.rint(XT @ Xs).astype(np.int64)
        cop = np.rint(XT @ Ys).astype(np.int64)
    else:
        co = np.zeros((1, 1), np.int64)
        cop = np.zeros((1, 1), np.int64)

    root_pen = omega * m
    leaf_v = _cost(table, m, P)
    leafL = np.empty(p)
    leafR = np.empty(p)
    for f in range(p):
        leafL[f] = _cost(table, m - tot[f], P - posf[f])
        leafR[f] = _cost(table, tot[f], posf[f])

    # Best tree with at most one node in each child of a root split on f.
    vL1 = leafL.copy()
    vR1 = leafR.copy()
    gL = np.full(p, -1, np.int64)
    gR = np.full(p, -1, np.int64)
    if pair:
        row = np.empty(p)
        for f in range(p):
            # right child: rows with f = 1, split on g
            best = np.inf
            for g in range(p):
                rl = _cost(table, tot[f] - co[f, g], posf[f] - cop[f, g])
                rr = _cost(table, co[f, g], cop[f, g])
                v = rl + rr + omega * tot[f]
                row[g] = v
                if v < best:
                    best = v
            if best < np.inf and best < leafR[f] - _tol(leafR[f]):
                lim = best + _tol(best)
                for g in range(p):
                    if row[g] <= lim:
                        gR[f] = g
                        vR1[f] = row[g]
                        break
            # left child: rows with f = 0, split on g
            best = np.inf
            for g in range(p):
                ln_ = m - tot[f] - tot[g] + co[f, g]
                lp_ = P - posf[f] - posf[g] + cop[f, g]
                v = (_cost(table, ln_, lp_)
                     + _cost(table, tot[g] - co[f, g], posf[g] - cop[f, g])
                     + omega * (m - tot[f]))
                row[g] = v
                if v < best:
                    best = v
            if best < np.inf and best < leafL[f] - _tol(leafL[f]):
                lim = best + _tol(best)
                for g in range(p):
                    if row[g] <= lim:
                        gL[f] = g
                        vL1[f] = row[g]
                        break

    nb = 4 if pair else 2
    values = np.empty(nb)
    nodes = np.zeros(nb, np.int64)
    codes = np.full((nb, 7), -1, np.int64)
    cand = np.empty((p, 4))
    cnod = np.empty((p, 4), np.int64)
    for f in range(p):
        ul = 1 if gL[f] >= 0 else 0
        ur = 1 if gR[f] >= 0 else 0
        # combination order (0,0), (1,0), (0,1), (1,1) is also lexicographic
        cand[f, 0] = leafL[f] + leafR[f] + root_pen
        cand[f, 1] = vL1[f] + leafR[f] + root_pen
        cand[f, 2] = leafL[f] + vR1[f] + root_pen
        cand[f, 3] = vL1[f] + vR1[f] + root_pen
        cnod[f, 0] = 1
        cnod[f, 1] = 1 + ul
        cnod[f, 2] = 1 + ur
        cnod[f, 3] = 1 + ul + ur
    for b in range(nb):
        ncomb = 0 if b == 0 else (1 if b == 1 else (3 if b == 2 else 4))
        vmin = leaf_v
        for f in range(p):
            for c in range(ncomb):
                if cand[f, c] < vmin:
                    vmin = cand[f, c]
        lim = vmin + _tol(vmin)
        bf = -1
        bc = -1
        bn = 1 << 30
        if leaf_v <= lim:
            bn = 0
        else:
            for f in range(p):
                for c in range(ncomb):
                    if cand[f, c] <= lim and cnod[f, c] < bn:
                        bn = cnod[f, c]
                        bf = f
                        bc = c
        if bf < 0:
            values[b] = leaf_v
            nodes[b] = 0
            codes[b, 3] = _label(m, P)
            continue
        values[b] = cand[bf, bc]
        nodes[b] = bn
        codes[b, 0] = bf
        use_l = bc == 1 or bc == 3
        use_r = bc == 2 or bc == 3
        f = bf
        if use_l and gL[f] >= 0:
            g = gL[f]
            codes[b, 1] = g
            codes[b, 3] = _label(m - tot[f] - tot[g] + co[f, g], P - posf[f] - posf[g] + cop[f, g])
            codes[b, 4] = _label(tot[g] - co[f, g], posf[g] - cop[f, g])
        else:
            codes[b, 3] = _label(m - tot[f], P - posf[f])
        if use_r and gR[f] >= 0:
            g = gR[f]
            codes[b, 2] = g
            codes[b, 5] = _label(tot[f] - co[f, g], posf[f] - cop[f, g])
            codes[b, 6] = _label(co[f, g], cop[f, g])
        else:
            codes[b, 5] = _label(tot[f], posf[f])
    return values, nodes, codes
