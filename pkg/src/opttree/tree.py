"""Leaf and tree value types with exact objective arithmetic.

The objective of a tree is (misclassified fraction) + lam * (leaf count),
with the convention that the root-only tree has an effective leaf count of
zero, so its objective is just the minority-class fraction.  The lower
bound counts only the mistakes of unchanged leaves, which is valid for
every descendant because unchanged leaves are never split again.

All values are exact rationals (``fractions.Fraction``); the search keeps
integer-scaled copies so that pruning comparisons never touch floats.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Optional, Sequence

from .bitvec import BitVector
from .dataset import Dataset, EquivalenceIndex, literal_column


class Clause(NamedTuple):
    feature: int
    polarity: bool


LeafKey = tuple[Clause, ...]  # clauses sorted by feature index


def canonical_clauses(clauses: Sequence[Clause]) -> LeafKey:
    ordered = tuple(sorted(clauses, key=lambda c: c.feature))
    feats = [c.feature for c in ordered]
    if len(set(feats)) != len(feats):
        raise ValueError(f"duplicate feature in clauses: {feats}")
    return ordered


class Leaf:
    """A conjunction of feature literals with its capture statistics.

    Immutable except for ``dead_features``, which only accumulates features
    provably useless for splitting this leaf; the set is shared by every
    tree holding the leaf, which is sound because deadness depends only on
    the leaf, the data, and lam.
    """

    __slots__ = ("clauses", "capture", "n_captured", "n_correct",
                 "prediction", "mistakes", "b0_count", "dead",
                 "dead_features")

    def __init__(self, clauses: LeafKey, capture: BitVector, ds: Dataset,
                 eq: EquivalenceIndex, lam: Fraction,
                 dead_features: Optional[set[int]] = None):
        self.clauses = clauses
        self.capture = capture
        self.n_captured = capture.count_ones()
        ones = (capture & ds.labels).count_ones()
        zeros = self.n_captured - ones
        # tie -> predict 0; the mistake count is unaffected
        if ones > zeros:
            self.prediction = 1
            self.n_correct = ones
        else:
            self.prediction = 0
            self.n_correct = zeros
        self.mistakes = self.n_captured - self.n_correct
        self.b0_count = (capture & eq.z).count_ones()
        # support below 2*lam means this leaf may never be split
        self.dead = self.n_captured * lam.denominator \
            < 2 * lam.numerator * ds.n_samples
        self.dead_features = set() if dead_features is None else dead_features

    @property
    def key(self) -> LeafKey:
        return self.clauses

    def __repr__(self) -> str:
        lits = ",".join(f"{'' if c.polarity else '!'}f{c.feature}"
                        for c in self.clauses) or "root"
        return (f"<Leaf {lits} n={self.n_captured} "
                f"pred={self.prediction} err={self.mistakes}>")


def make_leaf(clauses: Sequence[Clause], ds: Dataset, eq: EquivalenceIndex,
              lam: Fraction) -> Leaf:
    """Build a leaf from scratch: capture is the AND of its literal columns."""
    key = canonical_clauses(list(clauses))
    capture = BitVector.ones(ds.n_samples)
    for c in key:
        capture = capture & literal_column(ds, c.feature, c.polarity)
    return Leaf(key, capture, ds, eq, lam)


def make_child_leaf(parent: Leaf, feature: int, polarity: bool, ds: Dataset,
                    eq: EquivalenceIndex, lam: Fraction) -> Leaf:
    """Extend a leaf by one literal, reusing the parent's capture vector."""
    if any(c.feature == feature for c in parent.clauses):
        raise ValueError(f"feature {feature} already in leaf clauses")
    key = canonical_clauses(list(parent.clauses) + [Clause(feature, polarity)])
    capture = parent.capture & literal_column(ds, feature, polarity)
    return Leaf(key, capture, ds, eq, lam,
                dead_features=set(parent.dead_features))


# A pair of sibling leaves produced by a gain-deficient split; retiring
# both unsplit is forbidden (at least one must be split further).
MustSplitPairs = frozenset  # of frozenset({LeafKey, LeafKey})


@dataclass
class TreeState:
    """A tree as a set of leaves partitioned into unchanged and splittable.

    ``h`` is the penalized leaf count: 0 for the root-only tree, the true
    leaf count for any split tree.
    """

    leaves: tuple[Leaf, ...]          # canonically ordered by leaf key
    splittable: tuple[bool, ...]
    h: int
    n_samples: int
    lam: Fraction
    must_split_pairs: MustSplitPairs = frozenset()
    generation: int = 0

    @property
    def n_unchanged(self) -> int:
        return sum(1 for s in self.splittable if not s)

    def err_unchanged(self) -> int:
        return sum(l.mistakes for l, s in zip(self.leaves, self.splittable)
                   if not s)

    def err_splittable(self) -> int:
        return sum(l.mistakes for l, s in zip(self.leaves, self.splittable)
                   if s)

    def b0_splittable(self) -> int:
        return sum(l.b0_count for l, s in zip(self.leaves, self.splittable)
                   if s)

    @property
    def lower_bound(self) -> Fraction:
        return Fraction(self.err_unchanged(), self.n_samples) \
            + self.lam * self.h

    @property
    def objective(self) -> Fraction:
        return self.lower_bound + Fraction(self.err_splittable(),
                                           self.n_samples)

    def unchanged_capture_count(self) -> int:
        return sum(l.n_captured for l, s in zip(self.leaves, self.splittable)
                   if not s)

    def is_terminal(self) -> bool:
        return not any(self.splittable)

    def check_partition(self) -> None:
        """Debug invariant: leaf captures partition the samples."""
        total = sum(l.n_captured for l in self.leaves)
        union = BitVector.zeros(self.n_samples)
        for l in self.leaves:
            union = union | l.capture
        if total != self.n_samples or union.count_ones() != self.n_samples:
            raise AssertionError("leaf captures do not partition the samples")


def sort_leaves(leaves: Sequence[Leaf],
                splittable: Sequence[bool]) -> tuple[tuple, tuple]:
    order = sorted(range(len(leaves)), key=lambda i: leaves[i].key)
    return (tuple(leaves[i] for i in order),
            tuple(splittable[i] for i in order))


def root_tree(ds: Dataset, lam: Fraction, eq: EquivalenceIndex) -> TreeState:
    """Single all-capturing splittable leaf; objective = minority fraction."""
    leaf = make_leaf([], ds, eq, lam)
    return TreeState(leaves=(leaf,), splittable=(True,), h=0,
                     n_samples=ds.n_samples, lam=lam)


def objective(tree: TreeState, lam: Fraction) -> Fraction:
    """From-scratch objective: all leaves' mistakes plus the leaf penalty."""
    err = sum(l.mistakes for l in tree.leaves)
    return Fraction(err, tree.n_samples) + lam * tree.h


def lower_bound(tree: TreeState, lam: Fraction) -> Fraction:
    """From-scratch lower bound: unchanged mistakes plus the leaf penalty."""
    return Fraction(tree.err_unchanged(), tree.n_samples) + lam * tree.h


def incremental_lower_bound(parent_b: Fraction,
                            newly_unchanged: Sequence[Leaf],
                            lam: Fraction, delta_h: int,
                            n_samples: int) -> Fraction:
    """Child lower bound from the parent's: add the penalty increase and the
    mistakes of leaves that moved into the unchanged set."""
    if delta_h < 0:
        raise ValueError("delta_h must be nonnegative")
    extra = sum(l.mistakes for l in newly_unchanged)
    return parent_b + lam * delta_h + Fraction(extra, n_samples)


def incremental_objective(child_b: Fraction, splittable: Sequence[Leaf],
                          n_samples: int) -> Fraction:
    """Child objective from its lower bound: add splittable-leaf mistakes."""
    extra = sum(l.mistakes for l in splittable)
    return child_b + Fraction(extra, n_samples)


def normalized_support(capture: BitVector, n_samples: int) -> Fraction:
    if n_samples <= 0:
        raise ValueError("n_samples must be positive")
    return Fraction(capture.count_ones(), n_samples)
