"""Branch-and-bound driver: child generation, pruning, certification.

One designated leaf (the canonically first splittable, non-dead one) is
split per expansion; a "retire" move reflags it unchanged instead.  Every
reachable leaf-set/partition state is produced by induction on these moves,
and the tree cache absorbs order duplicates.

All pruning comparisons run on integers: with lam = p/q over N samples,
a value e/N + lam*H scales to e*q + H*p*N.  This keeps the hot loop free
of rational normalization while staying exact.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .bounds import BoundToggles, cumulative_perm
from .caches import CacheLimitError, LeafCache, TreeCache, tree_key
from .dataset import Dataset, EquivalenceIndex, build_equivalence_index
from .scheduler import Policy, SearchQueue
from .tree import (Clause, Leaf, TreeState, make_child_leaf, make_leaf,
                   root_tree, sort_leaves)


@dataclass
class SearchConfig:
    lam: Fraction
    policy: Policy = Policy.CURIOSITY
    toggles: BoundToggles = field(default_factory=BoundToggles)
    warm_start: bool = True
    time_limit: Optional[float] = None
    max_trees: Optional[int] = None
    max_cache_entries: Optional[int] = None
    trace_interval: int = 1000

    def validate(self) -> None:
        if self.lam <= 0:
            raise ValueError(
                "lam must be positive: lam = 0 admits trees with up to 2^M "
                "leaves and the leaf-count bounds degenerate")
        if self.trace_interval < 1:
            raise ValueError("trace_interval must be >= 1")


@dataclass
class TraceRecord:
    elapsed_s: float
    trees_evaluated: int
    best_objective: Fraction
    min_queue_lower_bound: Optional[Fraction]
    queue_size: int
    log10_remaining_bound: Optional[int]
    remaining_bound: int = 0  # exact big-integer value behind the log10


@dataclass
class SearchStats:
    trees_evaluated: int = 0
    trees_to_optimum: int = 0
    time_to_optimum: float = 0.0
    total_time: float = 0.0
    max_queue_size: int = 0
    leaf_cache_size: int = 0
    leaf_cache_hits: int = 0
    tree_cache_size: int = 0
    tree_cache_purged: int = 0
    duplicates_skipped: int = 0
    similar_support_skips: int = 0
    limit_hit: Optional[str] = None


@dataclass
class SearchResult:
    best_tree: TreeState
    objective: Fraction
    certified: bool
    gap: Fraction
    stats: SearchStats
    trace: list[TraceRecord]


class _Run:
    """Mutable state of one branch-and-bound execution."""

    def __init__(self, ds: Dataset, config: SearchConfig,
                 eq: Optional[EquivalenceIndex] = None):
        config.validate()
        self.ds = ds
        self.config = config
        self.eq = eq if eq is not None else build_equivalence_index(ds)
        self.lam = config.lam
        self.n = ds.n_samples
        # integer scaling: value v = e/N + lam*H  <->  e*q + H*p*N
        self.q = self.lam.denominator
        self.lam_s = self.lam.numerator * self.n
        self.toggles = config.toggles
        self.leaf_cache = LeafCache(max_entries=config.max_cache_entries)
        self.tree_cache = TreeCache(max_entries=config.max_cache_entries)
        self.queue = SearchQueue(config.policy, ds)
        self.stats = SearchStats()
        self.trace: list[TraceRecord] = []
        self.generation = 0
        self.best_s = 0
        self.best_obj = Fraction(0)
        self.best_tree: Optional[TreeState] = None

    # -- scaled helpers -------------------------------------------------

    def _scale(self, value: Fraction) -> int:
        scaled = value * self.n * self.q
        assert scaled.denominator == 1
        return scaled.numerator

    def _tree_b_s(self, tree: TreeState) -> int:
        return self.q * tree.err_unchanged() + self.lam_s * tree.h

    def _push_gate(self, b_s: int, b0_s: int) -> bool:
        """True if a tree with these scaled bounds may still lead to an
        improvement and belongs in the queue."""
        if b_s >= self.best_s:
            return False
        margin = self.lam_s if self.toggles.lookahead else 0
        if self.toggles.lookahead and b_s + self.lam_s >= self.best_s:
            return False
        if self.toggles.equivalent_points and b_s + b0_s + margin >= self.best_s:
            return False
        return True

    def _is_live(self, tree: TreeState) -> bool:
        return self._push_gate(self._tree_b_s(tree),
                               self.q * tree.b0_splittable())

    def _expandable_index(self, tree: TreeState) -> Optional[int]:
        for i, (leaf, s) in enumerate(zip(tree.leaves, tree.splittable)):
            if s and (not self.toggles.node_support or not leaf.dead):
                return i
        return None

    def _next_gen(self) -> int:
        self.generation += 1
        return self.generation

    # -- best tracking ---------------------------------------------------

    def _consider_best(self, tree: TreeState, r_s: int) -> None:
        if r_s < self.best_s:
            self.best_s = r_s
            self.best_obj = Fraction(r_s, self.n * self.q)
            self.best_tree = tree
            self.stats.trees_to_optimum = self.stats.trees_evaluated
            self.stats.time_to_optimum = time.perf_counter() - self._t0
            margin = self.lam if self.toggles.lookahead else Fraction(0)
            self.stats.tree_cache_purged += \
                self.tree_cache.garbage_collect(self.best_obj, margin)

    # -- expansion --------------------------------------------------------

    def expand(self, tree: TreeState) -> list[TreeState]:
        """Generate, score, and filter the children of a popped tree.

        Returns the children to enqueue; updates the incumbent as a side
        effect (a child's objective can improve the best even when its
        descendants are pruned).
        """
        idx = self._expandable_index(tree)
        if idx is None:
            return []
        leaf = tree.leaves[idx]
        parent_b_s = self._tree_b_s(tree)
        out: list[TreeState] = []

        retire = self._make_retire_child(tree, idx, parent_b_s)
        if retire is not None:
            out.append(retire)

        others = tuple(l for i, l in enumerate(tree.leaves) if i != idx)
        other_flags = tuple(s for i, s in enumerate(tree.splittable)
                            if i != idx)
        err_split_others = sum(l.mistakes for l, s in
                               zip(others, other_flags) if s)
        delta_h = 2 if tree.h == 0 else 1
        child_h = tree.h + delta_h
        used = {c.feature for c in leaf.clauses}

        # similar-support memory: floors of feature splits already proven
        # hopeless, compared pairwise against new candidates via omega
        rejected_floors: list[tuple[int, object]] = []

        for f in range(self.ds.n_features):
            if f in used:
                continue
            if self.toggles.leaf_accuracy and f in leaf.dead_features:
                continue
            c1 = self.leaf_cache.intern(
                self._child_key(leaf, f, False),
                lambda: make_child_leaf(leaf, f, False, self.ds, self.eq,
                                        self.lam))
            c2 = self.leaf_cache.intern(
                self._child_key(leaf, f, True),
                lambda: make_child_leaf(leaf, f, True, self.ds, self.eq,
                                        self.lam))
            # a split capturing nothing (or everything) on one side can
            # never help; cache the rejection on the leaf
            if c1.n_captured == 0 or c2.n_captured == 0:
                leaf.dead_features.add(f)
                continue
            if self.toggles.leaf_accuracy and (
                    self.q * c1.n_correct < self.lam_s
                    or self.q * c2.n_correct < self.lam_s):
                leaf.dead_features.add(f)
                continue

            if self.toggles.similar_support and self._similar_skip(
                    c1, rejected_floors):
                self.stats.similar_support_skips += 1
                continue

            gain_s = self.q * (c1.n_correct + c2.n_correct - leaf.n_correct)
            must_split = (self.toggles.incremental_accuracy
                          and gain_s < self.lam_s)
            base_pairs = frozenset(
                p for p in tree.must_split_pairs if leaf.key not in p)
            if must_split:
                base_pairs = base_pairs | {frozenset((c1.key, c2.key))}

            emitted_any = False
            min_floor_s: Optional[int] = None
            for s1 in (False, True):
                if s1 and self.toggles.node_support and c1.dead:
                    continue
                for s2 in (False, True):
                    if s2 and self.toggles.node_support and c2.dead:
                        continue
                    if must_split and not s1 and not s2:
                        continue
                    child, b_s, r_s, b0_s = self._make_split_child(
                        tree, others, other_flags, err_split_others,
                        child_h, delta_h, parent_b_s, c1, c2, s1, s2,
                        base_pairs)
                    floor_s = b_s + b0_s
                    if min_floor_s is None or floor_s < min_floor_s:
                        min_floor_s = floor_s
                    if b_s >= self.best_s:
                        continue
                    if self.toggles.permutation_cache:
                        if self.tree_cache.seen_or_mark(
                                tree_key(child),
                                Fraction(b_s, self.n * self.q)):
                            self.stats.duplicates_skipped += 1
                            continue
                    emitted_any = True
                    self.stats.trees_evaluated += 1
                    self._consider_best(child, r_s)
                    if not self._push_gate(b_s, b0_s):
                        continue
                    if self._expandable_index(child) is None:
                        continue
                    out.append(child)
            if self.toggles.similar_support and not emitted_any \
                    and min_floor_s is not None:
                rejected_floors.append((min_floor_s, c1.capture))
        return out

    def _child_key(self, leaf: Leaf, f: int, polarity: bool):
        return tuple(sorted(list(leaf.clauses) + [Clause(f, polarity)],
                            key=lambda c: c.feature))

    def _similar_skip(self, c1: Leaf, rejected_floors) -> bool:
        """Prune a candidate split whose companion (same shape, different
        feature) is provably hopeless beyond the omega margin."""
        for floor_s, capture in rejected_floors:
            omega_s = self.q * (c1.capture ^ capture).count_ones()
            if floor_s >= self.best_s + omega_s:
                return True
        return False

    def _make_retire_child(self, tree: TreeState, idx: int,
                           parent_b_s: int) -> Optional[TreeState]:
        leaf = tree.leaves[idx]
        # a gain-deficient sibling pair may not end with both unchanged
        for pair in tree.must_split_pairs:
            if leaf.key in pair:
                (other_key,) = pair - {leaf.key}
                for l, s in zip(tree.leaves, tree.splittable):
                    if l.key == other_key and not s:
                        return None
        flags = tuple(s if i != idx else False
                      for i, s in enumerate(tree.splittable))
        b_s = parent_b_s + self.q * leaf.mistakes
        if b_s >= self.best_s:
            return None
        child = TreeState(leaves=tree.leaves, splittable=flags, h=tree.h,
                          n_samples=self.n, lam=self.lam,
                          must_split_pairs=tree.must_split_pairs,
                          generation=self._next_gen())
        if self.toggles.permutation_cache:
            if self.tree_cache.seen_or_mark(tree_key(child),
                                            Fraction(b_s, self.n * self.q)):
                self.stats.duplicates_skipped += 1
                return None
        self.stats.trees_evaluated += 1
        # same leaf set, same objective as the parent: no best update
        b0_s = self.q * child.b0_splittable()
        if not self._push_gate(b_s, b0_s):
            return None
        if self._expandable_index(child) is None:
            return None
        return child

    def _make_split_child(self, tree, others, other_flags, err_split_others,
                          child_h, delta_h, parent_b_s, c1, c2, s1, s2,
                          pairs):
        leaves = others + (c1, c2)
        flags = other_flags + (s1, s2)
        leaves, flags = sort_leaves(leaves, flags)
        new_unchanged_err = (0 if s1 else c1.mistakes) \
            + (0 if s2 else c2.mistakes)
        b_s = parent_b_s + self.lam_s * delta_h + self.q * new_unchanged_err
        err_split = err_split_others + (c1.mistakes if s1 else 0) \
            + (c2.mistakes if s2 else 0)
        r_s = b_s + self.q * err_split
        b0 = sum(l.b0_count for l, s in zip(others, other_flags) if s) \
            + (c1.b0_count if s1 else 0) + (c2.b0_count if s2 else 0)
        child = TreeState(leaves=leaves, splittable=flags, h=child_h,
                          n_samples=self.n, lam=self.lam,
                          must_split_pairs=pairs,
                          generation=self._next_gen())
        return child, b_s, r_s, self.q * b0

    # -- main loop ---------------------------------------------------------

    def run(self) -> SearchResult:
        self._t0 = time.perf_counter()
        root = root_tree(self.ds, self.lam, self.eq)
        root_leaf = self.leaf_cache.intern(root.leaves[0].key,
                                           lambda: root.leaves[0])
        root = TreeState(leaves=(root_leaf,), splittable=(True,), h=0,
                         n_samples=self.n, lam=self.lam,
                         generation=self._next_gen())
        self.best_tree = root
        self.best_obj = root.objective
        self.best_s = self._scale(self.best_obj)
        self.stats.trees_evaluated = 1

        if self.config.warm_start:
            from .greedy import GreedyParams, greedy_fit
            seed = greedy_fit(self.ds, GreedyParams.default(self.lam,
                                                            self.ds),
                              self.lam, eq=self.eq)
            seed_s = self._scale(seed.objective)
            if seed_s < self.best_s:
                self.best_s = seed_s
                self.best_obj = seed.objective
                self.best_tree = seed

        self.tree_cache.seen_or_mark(tree_key(root), root.lower_bound)
        if self._push_gate(self._tree_b_s(root),
                           self.q * root.b0_splittable()) \
                and self._expandable_index(root) is not None:
            self.queue.push(root)

        next_trace = self.config.trace_interval
        try:
            while True:
                tree = self.queue.pop(self._is_live)
                if tree is None:
                    break
                for child in self.expand(tree):
                    if self._push_gate(self._tree_b_s(child),
                                       self.q * child.b0_splittable()):
                        self.queue.push(child)
                if self.stats.trees_evaluated >= next_trace:
                    next_trace += self.config.trace_interval
                    self._record_trace()
                    if self._limit_tripped():
                        break
        except CacheLimitError as exc:
            self.stats.limit_hit = str(exc)

        self._record_trace()
        return self._finish()

    def _limit_tripped(self) -> bool:
        if self.config.time_limit is not None \
                and time.perf_counter() - self._t0 >= self.config.time_limit:
            self.stats.limit_hit = "time_limit"
            return True
        if self.config.max_trees is not None \
                and self.stats.trees_evaluated >= self.config.max_trees:
            self.stats.limit_hit = "max_trees"
            return True
        return False

    def _record_trace(self) -> None:
        # integer-scaled rendition of bounds.remaining_evaluations, cheap
        # enough to run at every trace interval on large queues
        pool = 3 ** self.ds.n_features
        min_b_s = None
        remaining = 0
        size = 0
        for tree in self.queue.trees():
            size += 1
            b_s = self._tree_b_s(tree)
            if min_b_s is None or b_s < min_b_s:
                min_b_s = b_s
            slots = pool - len(tree.leaves)
            f = 0
            if self.best_s > b_s:
                f = min((self.best_s - b_s) // self.lam_s, slots)
            remaining += cumulative_perm(slots, f)
        self.trace.append(TraceRecord(
            elapsed_s=time.perf_counter() - self._t0,
            trees_evaluated=self.stats.trees_evaluated,
            best_objective=self.best_obj,
            min_queue_lower_bound=None if min_b_s is None
            else Fraction(min_b_s, self.n * self.q),
            queue_size=size,
            log10_remaining_bound=None if remaining == 0
            else len(str(remaining)) - 1,
            remaining_bound=remaining,
        ))

    def _finish(self) -> SearchResult:
        min_live = self.queue.min_lower_bound(self._is_live)
        certified = min_live is None
        gap = Fraction(0) if certified else self.best_obj - min_live
        self.stats.total_time = time.perf_counter() - self._t0
        self.stats.max_queue_size = self.queue.max_size
        self.stats.leaf_cache_size = len(self.leaf_cache)
        self.stats.leaf_cache_hits = self.leaf_cache.hits
        self.stats.tree_cache_size = len(self.tree_cache)
        return SearchResult(best_tree=self.best_tree,
                            objective=self.best_obj,
                            certified=certified, gap=gap,
                            stats=self.stats, trace=self.trace)


def fit(ds: Dataset, config: SearchConfig,
        eq: Optional[EquivalenceIndex] = None) -> SearchResult:
    """Run branch-and-bound to a certified optimum or a resource limit."""
    return _Run(ds, config, eq).run()


def expand(tree: TreeState, ds: Dataset, eq: EquivalenceIndex,
           config: SearchConfig, best: Fraction) -> list[TreeState]:
    """Stateless child generation for one tree (testing surface)."""
    run = _Run(ds, config, eq)
    run._t0 = time.perf_counter()
    run.best_s = run._scale(best)
    run.best_obj = best
    return run.expand(tree)
