"""Brute-force oracles used by the test suite.

The alignment oracle enumerates every operator-preserving alignment directly:
plain recursion, no cross-call memoization, and one-to-one child pairings
resolved by explicit permutation enumeration over a locally computed weight
matrix instead of an assignment solver.  Written before the production
matcher and kept independent of it (including its own label predicate).
"""

from itertools import permutations

from pinnforge.expr import (
    KIND_CONST,
    KIND_FUNC,
    KIND_NUM,
    KIND_POW,
    KIND_SPACE,
    KIND_TIME,
    KIND_VAR,
    ExprTree,
    node_count,
)

_RTOL = 1e-9


def _agree(a: ExprTree, b: ExprTree) -> bool:
    if a.kind != b.kind:
        return False
    if a.kind == KIND_NUM:
        return abs(a.value - b.value) <= _RTOL * max(1.0, abs(a.value), abs(b.value))
    if a.kind in (KIND_CONST, KIND_VAR, KIND_FUNC):
        return a.name == b.name
    if a.kind == KIND_TIME:
        return a.order == b.order
    if a.kind == KIND_SPACE:
        return (a.name, a.order) == (b.name, b.order)
    return True


def _pairing_max(rows, cols) -> int:
    m, n = len(rows), len(cols)
    if m == 0 or n == 0:
        return 0
    if m > n:
        rows, cols, m, n = cols, rows, n, m
    if m == 1:
        r = rows[0]
        return max(oracle_match_count(r, c) for c in cols)
    w = [[oracle_match_count(r, c) for c in cols] for r in rows]
    if m == 2:
        w0, w1 = w
        best = 0
        for j in range(n):
            a = w0[j]
            for k in range(n):
                if k != j:
                    t = a + w1[k]
                    if t > best:
                        best = t
        return best
    best = 0
    for pick in permutations(range(n), m):
        total = 0
        for i in range(m):
            total += w[i][pick[i]]
        if total > best:
            best = total
    return best


def oracle_match_count(a: ExprTree, b: ExprTree) -> int:
    """Best alignment size: roots matched, one root skipped, or both skipped."""
    best = 0
    if _agree(a, b):
        if a.kind == KIND_POW:
            rooted = 1 + sum(oracle_match_count(ca, cb) for ca, cb in zip(a.children, b.children))
            crossed = _pairing_max(a.children, b.children)
            best = max(rooted, crossed)
        else:
            best = 1 + _pairing_max(a.children, b.children)
    elif a.children and b.children:
        best = _pairing_max(a.children, b.children)
    for ca in a.children:
        s = oracle_match_count(ca, b)
        if s > best:
            best = s
    for cb in b.children:
        s = oracle_match_count(a, cb)
        if s > best:
            best = s
    return best


def oracle_similarity(a: ExprTree, b: ExprTree) -> float:
    return oracle_match_count(a, b) / max(node_count(a), node_count(b))
