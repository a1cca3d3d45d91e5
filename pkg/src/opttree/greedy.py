"""Top-down impurity-greedy trees, used to warm-start the exact search.

No optimality machinery here: recursive splitting on the best exact
impurity reduction, with deterministic tie-breaking (lowest feature index
wins) so runs are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .bitvec import BitVector
from .bounds import max_leaves_apriori
from .dataset import Dataset, EquivalenceIndex, build_equivalence_index
from .tree import Clause, Leaf, TreeState, make_leaf, sort_leaves


@dataclass(frozen=True)
class GreedyParams:
    max_depth: int
    min_leaf_samples: int = 1

    @classmethod
    def default(cls, lam: Fraction, ds: Dataset) -> "GreedyParams":
        """Depth just large enough to reach the a-priori leaf budget."""
        cap = max_leaves_apriori(lam, ds.n_features)
        depth = max(1, math.ceil(math.log2(cap))) if cap > 1 else 1
        return cls(max_depth=min(depth, ds.n_features))


def _gini(n_ones: int, n: int) -> Fraction:
    if n == 0:
        return Fraction(0)
    p = Fraction(n_ones, n)
    return 2 * p * (1 - p)


def greedy_fit(ds: Dataset, params: GreedyParams, lam: Fraction,
               eq: Optional[EquivalenceIndex] = None) -> TreeState:
    """Grow a tree greedily and return it as a terminal search state."""
    if eq is None:
        eq = build_equivalence_index(ds)

    def grow(capture: BitVector, clauses: tuple[Clause, ...],
             depth: int) -> list[Leaf]:
        n = capture.count_ones()
        ones = (capture & ds.labels).count_ones()
        used = {c.feature for c in clauses}
        best = None  # (reduction, feature, split captures)
        if depth < params.max_depth:
            for f in range(ds.n_features):
                if f in used:
                    continue
                right = capture & ds.columns[f]
                left = capture.and_not(ds.columns[f])
                nl, nr = left.count_ones(), right.count_ones()
                if nl < params.min_leaf_samples \
                        or nr < params.min_leaf_samples:
                    continue
                ol = (left & ds.labels).count_ones()
                weighted = (Fraction(nl, n) * _gini(ol, nl)
                            + Fraction(nr, n) * _gini(ones - ol, nr))
                reduction = _gini(ones, n) - weighted
                if reduction > 0 and (best is None or reduction > best[0]):
                    best = (reduction, f, left, right)
        if best is None:
            return [make_leaf(clauses, ds, eq, lam)]
        _, f, left, right = best
        return (grow(left, clauses + (Clause(f, False),), depth + 1)
                + grow(right, clauses + (Clause(f, True),), depth + 1))

    leaves = grow(BitVector.ones(ds.n_samples), (), 0)
    leaves_t, flags = sort_leaves(tuple(leaves),
                                  tuple(False for _ in leaves))
    h = 0 if len(leaves) == 1 else len(leaves)
    return TreeState(leaves=leaves_t, splittable=flags, h=h,
                     n_samples=ds.n_samples, lam=lam)
