"""Exhaustive reference optimizer for small instances.

Exact dynamic program over (captured samples, remaining features, leaf
budget): the optimal subtree under a node depends only on which samples it
captures and which features are still usable on the path.  It shares no
pruning logic with the search, so agreement between the two is meaningful
evidence, not a tautology.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .bitvec import BitVector
from .dataset import Dataset
from .tree import Clause, LeafKey, canonical_clauses


class OracleResourceError(RuntimeError):
    """Instance too large for exhaustive optimization."""


@dataclass(frozen=True)
class OracleLimits:
    max_leaves: int = 32
    max_features: int = 12
    max_states: int = 2_000_000


@dataclass(frozen=True)
class OracleResult:
    objective: Fraction
    leaf_keys: tuple[LeafKey, ...]
    mistakes: int
    n_leaves: int


def exhaustive_optimum(ds: Dataset, lam: Fraction,
                       limits: Optional[OracleLimits] = None) -> OracleResult:
    """Globally optimal objective and one witness leaf set."""
    if limits is None:
        limits = OracleLimits()
    if lam <= 0:
        raise ValueError("lam must be positive")
    m = ds.n_features
    if m > limits.max_features:
        raise OracleResourceError(
            f"{m} features exceeds oracle limit {limits.max_features}")
    # states are (capture, available) pairs; available is determined by the
    # path conjunction, so 3^m bounds the state count
    if 3 ** m > limits.max_states:
        raise OracleResourceError(
            f"3^{m} states exceed oracle limit {limits.max_states}")
    max_leaves = min(limits.max_leaves, 2 ** m)

    labels = ds.labels
    cols = ds.columns
    # memo[(capture, avail)] = {h: (mistakes, choice)}; choice is None for
    # a leaf or (feature, h_left, h_right) for a split
    memo: dict = {}

    def minority(capture: BitVector) -> int:
        ones = (capture & labels).count_ones()
        return min(ones, capture.count_ones() - ones)

    def solve(capture: BitVector, avail: frozenset[int]) -> dict:
        key = (capture, avail)
        hit = memo.get(key)
        if hit is not None:
            return hit
        h_cap = min(max_leaves, 2 ** len(avail))
        res: dict[int, tuple[int, object]] = {1: (minority(capture), None)}
        for f in sorted(avail):
            right = capture & cols[f]
            left = capture.and_not(cols[f])
            sub = avail - {f}
            lres = solve(left, sub)
            rres = solve(right, sub)
            for h1, (m1, _) in lres.items():
                for h2, (m2, _) in rres.items():
                    h = h1 + h2
                    if h > h_cap:
                        continue
                    mist = m1 + m2
                    if h not in res or mist < res[h][0]:
                        res[h] = (mist, (f, h1, h2))
        memo[key] = res
        return res

    root_capture = BitVector.ones(ds.n_samples)
    table = solve(root_capture, frozenset(range(m)))
    best_obj = None
    best_h = None
    for h, (mist, _) in sorted(table.items()):
        penalty = 0 if h == 1 else h
        obj = Fraction(mist, ds.n_samples) + lam * penalty
        if best_obj is None or obj < best_obj:
            best_obj = obj
            best_h = h

    leaves: list[LeafKey] = []

    def collect(capture: BitVector, avail: frozenset[int],
                clauses: tuple[Clause, ...], h: int) -> None:
        _, choice = memo[(capture, avail)][h]
        if choice is None:
            leaves.append(canonical_clauses(clauses))
            return
        f, h1, h2 = choice
        sub = avail - {f}
        collect(capture.and_not(cols[f]), sub,
                clauses + (Clause(f, False),), h1)
        collect(capture & cols[f], sub, clauses + (Clause(f, True),), h2)

    collect(root_capture, frozenset(range(m)), (), best_h)
    return OracleResult(objective=best_obj,
                        leaf_keys=tuple(sorted(leaves)),
                        mistakes=table[best_h][0],
                        n_leaves=best_h)
