"""Symmetry-aware stores: leaf interning and permutation-bound tree dedup.

Leaves are identified by their canonically ordered clause set, trees by the
sorted multiset of (leaf key, splittable flag) pairs, so any permutation of
the same leaves maps to one cache entry.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .tree import Leaf, LeafKey, TreeState

TreeKey = tuple[tuple[LeafKey, bool], ...]


class CacheLimitError(RuntimeError):
    """Raised when a configured cache-entry ceiling is exceeded."""


def tree_key(tree: TreeState) -> TreeKey:
    return tuple(sorted((l.key, s)
                        for l, s in zip(tree.leaves, tree.splittable)))


@dataclass
class LeafCache:
    max_entries: int | None = None
    _store: dict[LeafKey, Leaf] = field(default_factory=dict)
    hits: int = 0
    misses: int = 0

    def intern(self, key: LeafKey, build: Callable[[], Leaf]) -> Leaf:
        leaf = self._store.get(key)
        if leaf is not None:
            self.hits += 1
            return leaf
        self.misses += 1
        leaf = build()
        if leaf.key != key:
            raise ValueError("built leaf does not match its key")
        self._store[key] = leaf
        if self.max_entries is not None and len(self._store) > self.max_entries:
            raise CacheLimitError(
                f"leaf cache exceeded {self.max_entries} entries")
        return leaf

    def __len__(self) -> int:
        return len(self._store)


@dataclass
class TreeCache:
    max_entries: int | None = None
    _store: dict[TreeKey, Fraction] = field(default_factory=dict)
    purged: int = 0

    def seen_or_mark(self, key: TreeKey, lower_bound: Fraction) -> bool:
        """True if the key was already evaluated; otherwise record it."""
        if key in self._store:
            return True
        self._store[key] = lower_bound
        if self.max_entries is not None and len(self._store) > self.max_entries:
            raise CacheLimitError(
                f"tree cache exceeded {self.max_entries} entries")
        return False

    def garbage_collect(self, best: Fraction, lam: Fraction) -> int:
        """Drop entries that can no longer produce an improvement
        (b + lam >= best).  Returns the number purged."""
        doomed = [k for k, b in self._store.items() if b + lam >= best]
        for k in doomed:
            del self._store[k]
        self.purged += len(doomed)
        return len(doomed)

    def __len__(self) -> int:
        return len(self._store)
