"""Normalized tree-matching similarity between canonical expression trees.

The score is |M(T1,T2)| / max(|T1|,|T2|) where |M| counts nodes of the largest
common subforest under an operator-preserving alignment: two nodes may match
only if their kinds and labels agree, children of commutative nodes (sum,
prod) pair via maximum-weight bipartite assignment, children of ordered nodes
(pow) pair positionally, and an unmatched node still lets its child subtrees
align through one-to-one channels.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment

from .expr import (
    KIND_CONST,
    KIND_FUNC,
    KIND_NUM,
    KIND_POW,
    KIND_SPACE,
    KIND_SUM,
    KIND_PROD,
    KIND_TIME,
    KIND_VAR,
    ExprTree,
    node_count,
)

COEFF_RTOL = 1e-9


def labels_agree(a: ExprTree, b: ExprTree) -> bool:
    """Kind and label equality; numeric literals compare with relative tolerance."""
    if a.kind != b.kind:
        return False
    if a.kind == KIND_NUM:
        return abs(a.value - b.value) <= COEFF_RTOL * max(1.0, abs(a.value), abs(b.value))
    if a.kind in (KIND_CONST, KIND_VAR, KIND_FUNC):
        return a.name == b.name
    if a.kind == KIND_TIME:
        return a.order == b.order
    if a.kind == KIND_SPACE:
        return a.name == b.name and a.order == b.order
    return True  # sum/prod/pow agree by kind alone


def _assignment_score(rows, cols, pair_score) -> int:
    """Max-weight one-to-one pairing between two forests.

    Tiny shapes are solved inline; larger ones go to the Hungarian solver.
    """
    m, n = len(rows), len(cols)
    if m == 0 or n == 0:
        return 0
    if m == 1:
        return max(pair_score(rows[0], c) for c in cols)
    if n == 1:
        return max(pair_score(r, cols[0]) for r in rows)
    w = [[pair_score(r, c) for c in cols] for r in rows]
    if m == 2 and n == 2:
        return max(w[0][0] + w[1][1], w[0][1] + w[1][0])
    if m <= 3 and n <= 3:
        if m > n:
            w = [[w[i][j] for i in range(m)] for j in range(n)]
            m, n = n, m
        best = 0
        for cols_pick in _injections(m, n):
            best = max(best, sum(w[i][cols_pick[i]] for i in range(m)))
        return best
    weights = np.array(w, dtype=np.int64)
    ri, cj = linear_sum_assignment(weights, maximize=True)
    return int(weights[ri, cj].sum())


def _injections(m: int, n: int):
    from itertools import permutations

    return permutations(range(n), m)


def match_count(t1: ExprTree, t2: ExprTree) -> int:
    """|M(T1,T2)|: size of the best operator-preserving alignment."""
    memo: dict[tuple[int, int], int] = {}

    def best(a: ExprTree, b: ExprTree) -> int:
        key = (id(a), id(b))
        cached = memo.get(key)
        if cached is not None:
            return cached
        value = 0
        a_children = a.children
        b_children = b.children
        if labels_agree(a, b):
            if a.kind == KIND_POW:
                rooted = 1 + best(a_children[0], b_children[0]) + best(a_children[1], b_children[1])
            else:
                rooted = 1 + _assignment_score(a_children, b_children, best)
            value = rooted
        for ca in a_children:
            s = best(ca, b)
            if s > value:
                value = s
        for cb in b_children:
            s = best(a, cb)
            if s > value:
                value = s
        if a_children and b_children:
            s = _assignment_score(a_children, b_children, best)
            if s > value:
                value = s
        memo[key] = value
        return value

    return best(t1, t2)


def tree_similarity(t1: ExprTree, t2: ExprTree) -> float:
    return match_count(t1, t2) / max(node_count(t1), node_count(t2))


def sym_score(e1, e2) -> float:
    """Symbolic equivalence between two canonical PDEs (their residual trees)."""
    return tree_similarity(e1.residual, e2.residual)
