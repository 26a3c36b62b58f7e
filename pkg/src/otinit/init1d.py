"""Unregularized 1D transport: north-west corner plans and their dual potentials.

For a cost whose cross derivative is negative (e.g. the squared difference)
the north-west corner plan on sorted supports is optimal. Its support graph
is a forest; optimal potentials follow from complementary slackness inside
each tree plus a label-correcting pass that enforces feasibility across
trees. :func:`dualsort` is the specialization to the assignment case.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .measures import CostMatrix

__all__ = [
    "SparsePlan",
    "Tree",
    "SupportForest",
    "NonOptimalPlanError",
    "northwest_corner",
    "forest_from_plan",
    "recover_duals",
    "dualsort",
    "dual_1d",
    "init_1d",
]

# remainders closer than this are treated as exhausted together
_TIE_TOL = 1e-13


class NonOptimalPlanError(ValueError):
    """The plan's support has a cycle or admits no feasible dual pair."""


@dataclass(frozen=True)
class SparsePlan:
    """Plan given as ``(i, j, mass)`` triples, 0-based indices."""

    entries: tuple
    n: int
    m: int

    def dense(self) -> np.ndarray:
        P = np.zeros((self.n, self.m))
        for i, j, w in self.entries:
            P[i, j] += w
        return P

    def cost(self, C) -> float:
        C = C.values if isinstance(C, CostMatrix) else np.asarray(C)
        return float(sum(w * C[i, j] for i, j, w in self.entries))


@dataclass(frozen=True)
class Tree:
    """One connected component of the support graph.

    Nodes are integers: source ``i`` is ``i``, target ``j`` is ``n + j``.
    ``traversal`` lists ``(parent, child)`` edges in breadth-first order
    from ``root``, so a parent always appears before its children.
    """

    root: int
    sources: tuple
    targets: tuple
    traversal: tuple


@dataclass(frozen=True)
class SupportForest:
    trees: tuple
    n: int
    m: int

    def tree_of_sources(self) -> np.ndarray:
        label = np.empty(self.n, dtype=np.intp)
        for k, t in enumerate(self.trees):
            label[list(t.sources)] = k
        return label

    def tree_of_targets(self) -> np.ndarray:
        label = np.empty(self.m, dtype=np.intp)
        for k, t in enumerate(self.trees):
            label[list(t.targets)] = k
        return label


def northwest_corner(a, b) -> SparsePlan:
    """Greedy north-west corner plan for weights already in sorted order."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if np.any(a <= 0) or np.any(b <= 0):
        raise ValueError("weights must be positive")
    n, m = a.size, b.size
    entries = []
    i = j = 0
    ra, rb = a[0], b[0]
    while i < n and j < m:
        if abs(ra - rb) <= _TIE_TOL:
            entries.append((i, j, min(ra, rb)))
            i += 1
            j += 1
            if i < n:
                ra = a[i]
            if j < m:
                rb = b[j]
        elif ra < rb:
            entries.append((i, j, ra))
            rb -= ra
            i += 1
            if i < n:
                ra = a[i]
        else:
            entries.append((i, j, rb))
            ra -= rb
            j += 1
            if j < m:
                rb = b[j]
    return SparsePlan(tuple(entries), n, m)


def forest_from_plan(plan: SparsePlan) -> SupportForest:
    """Split the plan's support graph into rooted trees.

    Trees are ordered by their smallest source node, which is also the root;
    traversals are breadth-first with neighbours visited in index order.
    """
    n, m = plan.n, plan.m
    adj = [[] for _ in range(n + m)]
    parent = list(range(n + m))

    def find(u):
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        return u

    for i, j, w in plan.entries:
        if w <= 0:
            continue
        u, v = i, n + j
        ru, rv = find(u), find(v)
        if ru == rv:
            raise NonOptimalPlanError(f"support has a cycle through ({i}, {j})")
        parent[ru] = rv
        adj[u].append(v)
        adj[v].append(u)
    for nb in adj:
        nb.sort()

    seen = [False] * (n + m)
    trees = []
    for root in range(n):
        if seen[root]:
            continue
        seen[root] = True
        queue = deque([root])
        srcs, tgts, trav = [root], [], []
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if not seen[v]:
                    seen[v] = True
                    trav.append((u, v))
                    (srcs if v < n else tgts).append(v)
                    queue.append(v)
        trees.append(Tree(root, tuple(sorted(srcs)), tuple(sorted(t - n for t in tgts)), tuple(trav)))
    if not all(seen):
        missing = [u - n for u in range(n, n + m) if not seen[u]]
        raise NonOptimalPlanError(f"targets {missing} carry no mass")
    return SupportForest(tuple(trees), n, m)


def _tree_offsets(C, forest):
    """Potentials with every root at 0, propagated along tree edges."""
    n = forest.n
    alpha = np.zeros(forest.n)
    beta = np.zeros(forest.m)
    for tree in forest.trees:
        for u, v in tree.traversal:
            if u < n:  # source -> target
                beta[v - n] = C[u, v - n] - alpha[u]
            else:  # target -> source
                alpha[v] = C[v, u - n] - beta[u - n]
    return alpha, beta


def recover_duals(C, plan: SparsePlan, tol: float = 1e-12, max_rounds=None):
    """Optimal unregularized potentials ``(f, g)`` from an optimal plan.

    Inside each tree the potentials are pinned by tightness on the support.
    Each tree is then shifted as a block by a label-correcting pass (a
    shortest-path computation over trees with every label starting at 0)
    until all pairs satisfy ``f_i + g_j <= C_ij``. The result is returned
    with ``f[0] == 0``.

    Raises
    ------
    NonOptimalPlanError
        If the support has a cycle or the labels keep decreasing after
        ``n + m`` rounds (negative cycle: the plan is not optimal).
    """
    C = C.values if isinstance(C, CostMatrix) else np.asarray(C, dtype=np.float64)
    n, m = plan.n, plan.m
    if C.shape != (n, m):
        raise ValueError(f"cost shape {C.shape} does not match plan ({n}, {m})")
    if n == 1:
        return np.zeros(1), C[0].copy()
    if m == 1:
        return C[:, 0] - C[0, 0], np.array([C[0, 0]])

    forest = forest_from_plan(plan)
    alpha, beta = _tree_offsets(C, forest)
    src_tree = forest.tree_of_sources()
    tgt_tree = forest.tree_of_targets()
    K = len(forest.trees)

    # W[l, k]: min reduced cost from tree l's targets into tree k's sources
    R = C - alpha[:, None] - beta[None, :]
    W = np.full((K, K), np.inf)
    np.minimum.at(W, (tgt_tree[None, :].repeat(n, 0), src_tree[:, None].repeat(m, 1)), R)
    scale = max(1.0, float(np.abs(C).max()))
    if np.any(np.diag(W) < -1e-9 * scale):
        raise NonOptimalPlanError("plan violates feasibility inside a tree")
    np.fill_diagonal(W, np.inf)

    d = np.zeros(K)
    rounds = max_rounds if max_rounds is not None else n + m
    for _ in range(rounds):
        changed = False
        for k in range(K):
            cand = np.min(d + W[:, k])
            if cand < d[k] - tol:
                d[k] = cand
                changed = True
        if not changed:
            break
    else:
        raise NonOptimalPlanError("labels still decreasing: plan is not optimal")

    f = alpha + d[src_tree]
    g = beta - d[tgt_tree]
    shift = f[0]
    return f - shift, g + shift


def dualsort(C, iters: int = 3, vectorized: bool = True, tol=None) -> np.ndarray:
    """Potential ``f`` for the sorted assignment problem.

    ``C`` is square with rows and columns in sorted order, so the identity
    is an optimal matching. Each pass applies
    ``f_i <- min_j C_ij - C_jj + f_j`` starting from ``f = 0``; the implied
    partner is ``g_j = C_jj - f_j``. The vectorized pass is a synchronous
    (Jacobi) update; the sequential pass sweeps coordinates in place in
    increasing index order and therefore depends on that order. With
    ``tol`` set, stops early once no entry moves by more than ``tol``.
    """
    C = C.values if isinstance(C, CostMatrix) else np.asarray(C, dtype=np.float64)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise ValueError(f"dualsort needs a square cost matrix, got {C.shape}")
    n = C.shape[0]
    D = C - np.diag(C)[None, :]
    f = np.zeros(n)
    for _ in range(iters):
        if vectorized:
            new = np.min(D + f[None, :], axis=1)
            delta = np.max(np.abs(new - f))
            f = new
        else:
            delta = 0.0
            for i in range(n):
                v = np.min(D[i] + f)
                delta = max(delta, abs(v - f[i]))
                f[i] = v
        if tol is not None and delta <= tol:
            break
    return f


def _sqdiff(x, y):
    return (x - y) ** 2


def dual_1d(x, y, a=None, b=None, cost=None, dualsort_iters=3, vectorized=True):
    """Potentials ``(f, g)`` of the unregularized 1D problem, input order.

    Uses :func:`dualsort` when ``n == m`` with uniform weights, otherwise
    the north-west corner plan and :func:`recover_duals`. Ties in the sort
    are broken by original index.
    """
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    n, m = x.size, y.size
    a = np.full(n, 1.0 / n) if a is None else np.asarray(a, dtype=np.float64)
    b = np.full(m, 1.0 / m) if b is None else np.asarray(b, dtype=np.float64)
    cost = _sqdiff if cost is None else cost
    sx = np.argsort(x, kind="stable")
    sy = np.argsort(y, kind="stable")
    Cs = cost(x[sx][:, None], y[sy][None, :])

    uniform = n == m and np.allclose(a, 1.0 / n, rtol=0, atol=1e-15) and np.allclose(
        b, 1.0 / m, rtol=0, atol=1e-15
    )
    if uniform:
        fs = dualsort(Cs, iters=dualsort_iters, vectorized=vectorized)
        gs = np.diag(Cs) - fs
    else:
        plan = northwest_corner(a[sx], b[sy])
        fs, gs = recover_duals(Cs, plan)
    f = np.empty(n)
    g = np.empty(m)
    f[sx] = fs
    g[sy] = gs
    return f, g


def init_1d(x, y, a=None, b=None, cost=None, dualsort_iters=3, vectorized=True) -> np.ndarray:
    """Sinkhorn warm start ``f^(0)`` from the 1D closed form, in input order."""
    f, _ = dual_1d(x, y, a, b, cost, dualsort_iters, vectorized)
    return f
