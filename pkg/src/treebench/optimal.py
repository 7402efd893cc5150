"""Exact minimization of leaf-additive tree objectives by dynamic programming.

The search state is (instance subset, remaining depth). For every state the
solver stores the best tree for *each* branching-node budget up to the depth's
maximum, so one solve answers every size limit at once. Subsets are memoized
by their packed bitset; Python's dict verifies the full key on every hash hit.

Among trees with equal objective value (within a relative tolerance), the one
with fewest branching nodes wins, then the lexicographically smallest
canonical serialization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import depth2_kernel
from .data import BinaryDataset
from .objectives import DEFAULT_PARAMS, ObjectiveKind, ObjectiveParams, leaf_values
from .tree import Branch, Leaf, Tree, route

__all__ = [
    "Infeasible",
    "Penalties",
    "Solution",
    "SolveLimits",
    "Solver",
    "count_trees",
    "enumerate_trees",
    "objective_of_tree",
    "solve",
]

# Relative tolerance used to call two objective values equal.
TIE_RTOL = 1e-11
# Largest training set for which the (n, e) leaf-cost table is materialized.
TABLE_LIMIT = 4000


class Infeasible(ValueError):
    """No tree satisfies the limits and the minimum support."""


@dataclass(frozen=True)
class SolveLimits:
    max_depth: int
    max_branching: int | None = None

    def __post_init__(self) -> None:
        if self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        if self.max_branching is None:
            object.__setattr__(self, "max_branching", 2 ** self.max_depth - 1)
        if not 0 <= self.max_branching <= 2 ** self.max_depth - 1:
            raise ValueError(f"max_branching must lie in [0, {2 ** self.max_depth - 1}], "
                             f"got {self.max_branching}")


@dataclass(frozen=True)
class Penalties:
    """Soft and hard complexity controls.

    ``lambda_cost`` is charged as ``lambda_cost * |D|`` per leaf,
    ``omega_cost`` as ``omega_cost * |b|`` per branching node ``b`` reached by
    ``|b|`` instances, and ``min_support`` bounds every leaf's size from below.
    """

    lambda_cost: float = 0.0
    omega_cost: float = 0.0
    min_support: int = 1

    def __post_init__(self) -> None:
        if self.lambda_cost < 0 or self.omega_cost < 0:
            raise ValueError("penalties must be nonnegative")
        if self.min_support < 1:
            raise ValueError("min_support must be >= 1")


NO_PENALTIES = Penalties()


@dataclass
class Solution:
    tree: Tree
    objective_value: float
    cache_stats: dict = field(default_factory=dict)


def _tol(v: float) -> float:
    return TIE_RTOL * max(1.0, abs(v))


def objective_of_tree(t: Tree, d: BinaryDataset, kind: ObjectiveKind,
                      params: ObjectiveParams = DEFAULT_PARAMS,
                      pen: Penalties = NO_PENALTIES) -> float:
    """Sum of leaf costs plus penalties; ``inf`` when a leaf is below min_support."""
    _, members, path = route(t, d.matrix)
    y = d.y
    n = np.array([len(m) for m in members])
    pos = np.array([int(y[m].sum()) for m in members])
    if (n < pen.min_support).any():
        return math.inf
    e = np.minimum(pos, n - pos)
    leaves = float(leaf_values(kind, params, n, e).sum())
    return leaves + pen.lambda_cost * d.instance_count * len(members) + pen.omega_cost * float(path.sum())


class _Entry:
    """Best trees of one state, indexed by branching budget (at most b nodes)."""

    __slots__ = ("values", "nodes", "trees")

    def __init__(self, values: list[float], nodes: list[int], trees: list[Tree]):
        self.values = values
        self.nodes = nodes
        self.trees = trees


class _Codes:
    """Trees of a compiled state, decoded from their codes on first access."""

    __slots__ = ("codes", "decode", "done")

    def __init__(self, codes: np.ndarray, decode):
        self.codes = codes
        self.decode = decode
        self.done: dict[int, Tree] = {}

    def __len__(self) -> int:
        return len(self.codes)

    def __getitem__(self, b: int) -> Tree:
        t = self.done.get(b)
        if t is None:
            t = self.done[b] = self.decode(self.codes[b].tolist())
        return t

    def __iter__(self):
        return (self[b] for b in range(len(self)))


def _better(v: float, n: int, t: Tree, bv: float, bn: int, bt: Tree) -> bool:
    """True when (v, n, t) beats the incumbent (bv, bn, bt)."""
    if bt is None:
        return v < math.inf
    if v < bv - _tol(bv):
        return True
    if v > bv + _tol(bv):
        return False
    if n != bn:
        return n < bn
    return t.sort_key < bt.sort_key


class Solver:
    """Owns the memo cache for one dataset, objective and penalty setting.

    Independent solvers share nothing, so they can run in separate workers.

    Args:
        d: training data.
        kind, params: leaf objective.
        pen: complexity penalties.
        depth2: use the pairwise co-occurrence subroutine for depth <= 2
            states (the generic recursion otherwise).
    """

    def __init__(self, d: BinaryDataset, kind: ObjectiveKind,
                 params: ObjectiveParams = DEFAULT_PARAMS,
                 pen: Penalties = NO_PENALTIES, depth2: bool = True):
        self.d = d
        self.kind = kind
        self.params = params
        self.pen = pen
        self.depth2 = depth2
        self.n = d.instance_count
        self.p = d.feature_count
        if pen.min_support > self.n:
            raise Infeasible(f"min_support {pen.min_support} exceeds the {self.n} available instances")
        # Work in the order of the features' canonical names so that "first
        # among ties" is the lexicographically smallest serialization.
        self.order = np.array(sorted(range(self.p), key=lambda f: f"{f}("), dtype=np.int64)
        X = d.matrix[:, self.order]
        self.Xb = X
        self.Xf = X.astype(np.float32)
        self.Xu8 = np.ascontiguousarray(X, dtype=np.uint8)
        self.yu8 = d.labels.astype(np.uint8)
        self.yb = d.labels.astype(bool)
        self.yf = self.yb.astype(np.float32)
        self.leaf_charge = pen.lambda_cost * self.n
        self._table = None
        if self.n <= TABLE_LIMIT:
            nn = np.arange(self.n + 1)[:, None]
            ee = np.arange(self.n // 2 + 1)[None, :]
            tab = leaf_values(kind, params, nn, np.minimum(ee, nn)) + self.leaf_charge
            tab[nn[:, 0] < pen.min_support, :] = math.inf
            self._table = tab
        self.cache: dict[tuple[bytes, int], _Entry] = {}
        self.stats = {"subproblems": 0, "cache_hits": 0}

    # -- leaf costs ---------------------------------------------------------
    def leaf_cost(self, n, pos):
        """Vectorized cost of leaves with ``n`` instances of which ``pos`` positive."""
        n = np.asarray(n, dtype=np.int64)
        pos = np.asarray(pos, dtype=np.int64)
        e = np.minimum(pos, n - pos)
        if self._table is not None:
            return self._table[n, e]
        v = leaf_values(self.kind, self.params, n, e) + self.leaf_charge
        return np.where(n < self.pen.min_support, math.inf, v)

    def _leaf(self, n: int, pos: int) -> Leaf:
        return Leaf(1 if pos > n - pos else 0)

    # -- public API ---------------------------------------------------------
    def solve(self, limits: SolveLimits) -> Solution:
        entry = self._state(np.ones(self.n, dtype=bool), limits.max_depth)
        b = min(limits.max_branching, len(entry.values) - 1)
        return self._solution(entry.trees[b])

    def _solution(self, t: Tree) -> Solution:
        value = objective_of_tree(t, self.d, self.kind, self.params, self.pen)
        return Solution(t, value, dict(self.stats))

    def budget_front(self, max_depth: int) -> list[Solution]:
        """Best tree for every branching budget 0..2^max_depth - 1."""
        entry = self._state(np.ones(self.n, dtype=bool), max_depth)
        return [Solution(t, float(v), dict(self.stats)) for v, t in zip(entry.values, entry.trees)]

    def best_with_leaf_penalty(self, max_depth: int, lam: float,
                               max_branching: int | None = None) -> Solution:
        """Optimum of objective + ``lam * |D|`` per leaf, read off the budget front.

        Exact because the leaf penalty depends only on the leaf count; the
        solver itself must be built without a leaf penalty.
        """
        if self.pen.lambda_cost:
            raise ValueError("solver already carries a leaf penalty")
        front = self.budget_front(max_depth)
        if max_branching is not None:
            front = front[: max_branching + 1]
        best = None
        bv, bn = math.inf, 0
        for s in front:
            v = s.objective_value + lam * self.n * s.tree.leaves
            if _better(v, s.tree.branching_count, s.tree, bv, bn, best.tree if best else None):
                best, bv, bn = s, v, s.tree.branching_count
        return Solution(best.tree, bv, dict(self.stats))

    # -- recursion ----------------------------------------------------------
    def _state(self, mask: np.ndarray, depth: int) -> _Entry:
        key = (np.packbits(mask).tobytes(), depth)
        hit = self.cache.get(key)
        if hit is not None:
            self.stats["cache_hits"] += 1
            return hit
        self.stats["subproblems"] += 1
        idx = np.flatnonzero(mask)
        m = len(idx)
        pos = int(self.yb[idx].sum())
        leaf_v = float(self.leaf_cost(m, pos))
        top = 2 ** depth - 1
        leaf = self._leaf(m, pos)
        if depth == 0 or m < 2 * self.pen.min_support or leaf_v <= self.leaf_charge or leaf_v == math.inf:
            # Leaf-only states: no depth left, no feasible split, or the leaf
            # already attains the lower bound (zero objective).
            entry = _Entry([leaf_v] * (top + 1), [0] * (top + 1), [leaf] * (top + 1))
        elif depth <= 2 and self.depth2 and self._table is not None:
            entry = self._compiled(idx, depth)
        elif depth <= 2 and self.depth2:
            entry = self._depth2(idx, depth, m, pos, leaf_v, leaf)
        else:
            entry = self._generic(mask, idx, depth, m, pos, leaf_v, leaf)
        self.cache[key] = entry
        return entry

    def _compiled(self, idx, depth) -> _Entry:
        values, nodes, codes = depth2_kernel(self.Xu8, self.yu8, idx, self._table,
                                             self.pen.omega_cost, depth)
        return _Entry(values.tolist(), nodes.tolist(), _Codes(codes, self._decode))

    def _decode(self, code: list[int]) -> Tree:
        f, gl, gr, a, b, c, d = code
        if f < 0:
            return Leaf(a)
        order = self.order
        left = Leaf(a) if gl < 0 else Branch(int(order[gl]), Leaf(a), Leaf(b))
        right = Leaf(c) if gr < 0 else Branch(int(order[gr]), Leaf(c), Leaf(d))
        return Branch(int(order[f]), left, right)

    def _generic(self, mask, idx, depth, m, pos, leaf_v, leaf) -> _Entry:
        top = 2 ** depth - 1
        child_top = 2 ** (depth - 1) - 1
        omega = self.pen.omega_cost * m
        counts = self.Xb[idx].sum(axis=0)
        ms = self.pen.min_support
        feats, lefts, rights = [], [], []
        for f in range(self.p):
            c = int(counts[f])
            if c < ms or m - c < ms:
                continue
            col = self.Xb[:, f]
            lefts.append(self._state(mask & ~col, depth - 1))
            rights.append(self._state(mask & col, depth - 1))
            feats.append(f)
        values, nodes, trees = [leaf_v], [0], [leaf]
        if not feats:
            return _Entry(values * (top + 1), nodes * (top + 1), trees * (top + 1))
        VL = np.array([e.values for e in lefts])
        VR = np.array([e.values for e in rights])
        NL = np.array([e.nodes for e in lefts])
        NR = np.array([e.nodes for e in rights])
        S = VL[:, :, None] + VR[:, None, :] + omega
        N = 1 + NL[:, :, None] + NR[:, None, :]
        L, R = np.meshgrid(np.arange(child_top + 1), np.arange(child_top + 1), indexing="ij")
        used = L + R
        for b in range(1, top + 1):
            sel = used == b - 1
            if not sel.any():
                values.append(values[-1]); nodes.append(nodes[-1]); trees.append(trees[-1])
                continue
            cand_v = S[:, sel]
            cand_n = N[:, sel]
            ls, rs = L[sel], R[sel]
            best = self._pick(cand_v, cand_n,
                              lambda fi, ci: Branch(int(self.order[feats[fi]]),
                                                    lefts[fi].trees[ls[ci]], rights[fi].trees[rs[ci]]))
            bv, bn, bt = values[-1], nodes[-1], trees[-1]
            if best is not None:
                v, n, t = best
                if _better(v, n, t, bv, bn, bt):
                    bv, bn, bt = v, n, t
            values.append(bv); nodes.append(bn); trees.append(bt)
        return _Entry(values, nodes, trees)

    def _pick(self, cand_v: np.ndarray, cand_n: np.ndarray, build):
        """Best candidate of a (feature, combination) grid, or None if all infinite.

        Features are in canonical order, so among candidates tied on value and
        node count the first feature is lexicographically smallest; remaining
        ties within that feature are settled by comparing the built trees.
        """
        vmin = float(cand_v.min())
        if vmin == math.inf:
            return None
        tied = cand_v <= vmin + _tol(vmin)
        nmin = int(cand_n[tied].min())
        tied &= cand_n == nmin
        fi = int(np.argmax(tied.any(axis=1)))
        cis = np.flatnonzero(tied[fi])
        best_t = None
        for ci in cis:
            t = build(fi, int(ci))
            if best_t is None or t.sort_key < best_t.sort_key:
                best_t, best_ci = t, ci
        return float(cand_v[fi, best_ci]), nmin, best_t

    def _depth2(self, idx, depth, m, pos, leaf_v, leaf) -> _Entry:
        Xs = self.Xf[idx]
        ys = self.yf[idx]
        tot = Xs.sum(axis=0).astype(np.int64)
        pos_f = (ys @ Xs).astype(np.int64)
        omega_w = self.pen.omega_cost
        # Children of a root split on f: right takes rows with f = 1.
        leafL = self.leaf_cost(m - tot, pos - pos_f)
        leafR = self.leaf_cost(tot, pos_f)
        root_pen = omega_w * m
        order = self.order

        if depth == 1:
            v1 = leafL + leafR + root_pen
            values, nodes, trees = [leaf_v, leaf_v], [0, 0], [leaf, leaf]
            best = self._pick(v1[:, None], np.ones((self.p, 1), dtype=np.int64),
                              lambda fi, ci: Branch(int(order[fi]),
                                                    self._leaf(m - tot[fi], pos - pos_f[fi]),
                                                    self._leaf(tot[fi], pos_f[fi])))
            if best is not None and _better(*best, leaf_v, 0, leaf):
                values[1], nodes[1], trees[1] = best
            return _Entry(values, nodes, trees)

        co_tot = np.rint(Xs.T @ Xs).astype(np.int64)
        co_pos = np.rint(Xs.T @ (Xs * ys[:, None])).astype(np.int64)
        # Right child of f split on g.
        rr_n, rr_p = co_tot, co_pos
        rl_n, rl_p = tot[:, None] - co_tot, pos_f[:, None] - co_pos
        stumpR = self.leaf_cost(rl_n, rl_p) + self.leaf_cost(rr_n, rr_p) + omega_w * tot[:, None]
        # Left child of f split on g.
        lr_n, lr_p = tot[None, :] - co_tot, pos_f[None, :] - co_pos
        ll_n = m - tot[:, None] - tot[None, :] + co_tot
        ll_p = pos - pos_f[:, None] - pos_f[None, :] + co_pos
        stumpL = self.leaf_cost(ll_n, ll_p) + self.leaf_cost(lr_n, lr_p) + omega_w * (m - tot)[:, None]

        def child_best(stump, leafc):
            # Best tree with at most one node in each child: leaf unless a
            # stump is strictly better; first g among tied stumps.
            gmin = stump.min(axis=1)
            tol = TIE_RTOL * np.maximum(1.0, np.abs(gmin))
            g = np.argmax(stump <= (gmin + tol)[:, None], axis=1)
            with np.errstate(invalid="ignore"):
                use = (gmin < leafc - TIE_RTOL * np.maximum(1.0, np.abs(leafc))) & np.isfinite(gmin)
            val = np.where(use, gmin, leafc)
            return val, use, g

        vL1, useL, gL = child_best(stumpL, leafL)
        vR1, useR, gR = child_best(stumpR, leafR)

        def left_tree(fi, one):
            if one and useL[fi]:
                g = gL[fi]
                return Branch(int(order[g]), self._leaf(ll_n[fi, g], ll_p[fi, g]),
                              self._leaf(lr_n[fi, g], lr_p[fi, g]))
            return self._leaf(m - tot[fi], pos - pos_f[fi])

        def right_tree(fi, one):
            if one and useR[fi]:
                g = gR[fi]
                return Branch(int(order[g]), self._leaf(rl_n[fi, g], rl_p[fi, g]),
                              self._leaf(rr_n[fi, g], rr_p[fi, g]))
            return self._leaf(tot[fi], pos_f[fi])

        combos = [(0, 0), (1, 0), (0, 1), (1, 1)]
        cv = np.stack([leafL + leafR, vL1 + leafR, leafL + vR1, vL1 + vR1], axis=1) + root_pen
        cn = 1 + np.stack([np.zeros(self.p, dtype=np.int64), useL.astype(np.int64),
                           useR.astype(np.int64), useL.astype(np.int64) + useR], axis=1)
        values, nodes, trees = [leaf_v], [0], [leaf]
        for b in (1, 2, 3):
            allowed = [i for i, (l, r) in enumerate(combos) if l + r <= b - 1]
            sub_v = cv[:, allowed]
            sub_n = cn[:, allowed]
            best = self._pick(sub_v, sub_n,
                              lambda fi, ci: Branch(int(order[fi]),
                                                    left_tree(fi, combos[allowed[ci]][0]),
                                                    right_tree(fi, combos[allowed[ci]][1])))
            bv, bn, bt = values[-1], nodes[-1], trees[-1]
            if best is not None and _better(*best, bv, bn, bt):
                bv, bn, bt = best
            values.append(bv); nodes.append(bn); trees.append(bt)
        return _Entry(values, nodes, trees)


def solve(d: BinaryDataset, kind: ObjectiveKind, params: ObjectiveParams = DEFAULT_PARAMS,
          limits: SolveLimits = SolveLimits(3), pen: Penalties = NO_PENALTIES,
          depth2: bool = True) -> Solution:
    """Globally optimal tree within ``limits`` for objective ``kind`` plus penalties."""
    return Solver(d, kind, params, pen, depth2=depth2).solve(limits)


# -- brute force ------------------------------------------------------------

ENUM_MAX_FEATURES = 10
ENUM_MAX_DEPTH = 3


def _shapes(p: int, depth: int, budget: int):
    yield Leaf(0)
    if depth == 0 or budget == 0:
        return
    for f in range(p):
        for lb in range(budget):
            # Left subtree uses exactly lb nodes so that combinations are distinct.
            for left in _shapes(p, depth - 1, lb):
                if left.branching_count != lb:
                    continue
                for right in _shapes(p, depth - 1, budget - 1 - lb):
                    yield Branch(f, left, right)


def enumerate_trees(d: BinaryDataset | int, limits: SolveLimits):
    """Yield every structurally distinct tree within ``limits`` exactly once.

    Leaf labels are placeholders; objectives relabel leaves by majority.
    ``d`` may be a dataset or a feature count.
    """
    p = d if isinstance(d, int) else d.feature_count
    if p > ENUM_MAX_FEATURES or limits.max_depth > ENUM_MAX_DEPTH:
        raise ValueError(f"enumeration is limited to {ENUM_MAX_FEATURES} features "
                         f"and depth {ENUM_MAX_DEPTH}")
    seen = set()
    for t in _shapes(p, limits.max_depth, limits.max_branching):
        key = t.sort_key
        if key not in seen:
            seen.add(key)
            yield t


def count_trees(p: int, depth: int, budget: int) -> int:
    """Number of trees enumerated by :func:`enumerate_trees` (closed recursion)."""
    exact = _exact_counts(p, depth, budget)
    return sum(exact)


def _exact_counts(p: int, depth: int, budget: int) -> list[int]:
    # exact[b] = trees with depth <= depth and exactly b branching nodes.
    exact = [1] + [0] * budget
    if depth == 0:
        return exact
    sub = _exact_counts(p, depth - 1, budget)
    for b in range(1, budget + 1):
        exact[b] = p * sum(sub[l] * sub[b - 1 - l] for l in range(b))
    return exact


def brute_force(d: BinaryDataset, kind: ObjectiveKind, params: ObjectiveParams = DEFAULT_PARAMS,
                limits: SolveLimits = SolveLimits(2), pen: Penalties = NO_PENALTIES) -> float:
    """Minimum objective over all enumerated trees."""
    return min(objective_of_tree(t, d, kind, params, pen) for t in enumerate_trees(d, limits))
