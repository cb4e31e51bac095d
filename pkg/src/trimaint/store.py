"""Multiplicity-annotated relations with constant-time indexed access.

Entries live in a hash map keyed by tuple. Every declared projection keeps,
per projection key, an insertion-ordered doubly-linked list of entry nodes
plus a counter, so slice iteration runs with constant delay and slice
cardinality is available in O(1). Entries hold back-pointers to their list
nodes, which makes deletion O(#indexes).
"""

from __future__ import annotations

from contextlib import contextmanager


class RejectedDelete(Exception):
    """A delete would drive some multiplicity negative."""


class MissingIndex(Exception):
    """No index was declared for the requested projection."""


class CostMeter:
    """Counts elementary operations, bucketed by maintenance phase.

    One unit is charged per map operation, per index-list step, and per
    arithmetic combine. Wall-clock time is never part of the contract;
    tests and the bench harness compare these counters instead.
    """

    __slots__ = ("total", "phases", "last_update", "_bucket")

    def __init__(self):
        self.total = 0
        self.phases = {"apply": 0, "major": 0, "minor": 0}
        self.last_update = 0
        self._bucket = "apply"

    def tick(self, n=1):
        self.total += n
        self.phases[self._bucket] += n

    @contextmanager
    def phase(self, name):
        assert name in self.phases
        prev, self._bucket = self._bucket, name
        try:
            yield
        finally:
            self._bucket = prev

    def snapshot(self):
        return {"total": self.total, **self.phases}


class _Node:
    __slots__ = ("entry", "prev", "nxt")

    def __init__(self, entry):
        self.entry = entry
        self.prev = None
        self.nxt = None


class _Entry:
    __slots__ = ("key", "mult", "nodes")

    def __init__(self, key, mult, n_indexes):
        self.key = key
        self.mult = mult
        self.nodes = [None] * n_indexes


class _KeyList:
    """Insertion-ordered doubly-linked list of the entries under one index key."""

    __slots__ = ("head", "tail", "count")

    def __init__(self):
        self.head = None
        self.tail = None
        self.count = 0

    def append(self, node):
        node.prev = self.tail
        node.nxt = None
        if self.tail is None:
            self.head = node
        else:
            self.tail.nxt = node
        self.tail = node
        self.count += 1

    def remove(self, node):
        if node.prev is None:
            self.head = node.nxt
        else:
            node.prev.nxt = node.nxt
        if node.nxt is None:
            self.tail = node.prev
        else:
            node.nxt.prev = node.prev
        node.prev = node.nxt = None
        self.count -= 1


def subkey(key, cols):
    # Single-column projections use the bare value as the index key.
    if len(cols) == 1:
        return key[cols[0]]
    return tuple(key[c] for c in cols)


class Relation:
    """A finite map from tuples to nonzero signed integer multiplicities.

    Indexes are fixed at construction: `index_cols` is a sequence of
    column-position tuples, one per projection that must support slicing.
    """

    __slots__ = ("name", "arity", "meter", "index_cols", "entries", "indexes",
                 "_by_cols")

    def __init__(self, name, arity, index_cols=(), meter=None):
        self.name = name
        self.arity = arity
        self.meter = meter if meter is not None else CostMeter()
        self.index_cols = tuple(tuple(c) for c in index_cols)
        for cols in self.index_cols:
            assert all(0 <= c < arity for c in cols), (name, cols)
        self.entries = {}
        self.indexes = [dict() for _ in self.index_cols]
        self._by_cols = {cols: i for i, cols in enumerate(self.index_cols)}

    def __len__(self):
        return len(self.entries)

    def lookup(self, key):
        self.meter.tick()
        e = self.entries.get(key)
        return e.mult if e is not None else 0

    def apply_delta(self, key, m):
        """Add m to the multiplicity of `key`; return the new multiplicity.

        Raises RejectedDelete, before any mutation, if the result would be
        negative. A result of exactly 0 removes the entry everywhere.
        """
        assert m != 0
        assert len(key) == self.arity, (self.name, key)
        e = self.entries.get(key)
        old = e.mult if e is not None else 0
        new = old + m
        if new < 0:
            raise RejectedDelete(f"{self.name}{key}: {old} {m:+d} < 0")
        self.meter.tick()
        if e is None:
            e = _Entry(key, new, len(self.index_cols))
            self.entries[key] = e
            for i, cols in enumerate(self.index_cols):
                self.meter.tick()
                sub = subkey(key, cols)
                lst = self.indexes[i].get(sub)
                if lst is None:
                    lst = self.indexes[i][sub] = _KeyList()
                node = _Node(e)
                e.nodes[i] = node
                lst.append(node)
        elif new == 0:
            del self.entries[key]
            for i, cols in enumerate(self.index_cols):
                self.meter.tick()
                sub = subkey(key, cols)
                lst = self.indexes[i][sub]
                lst.remove(e.nodes[i])
                e.nodes[i] = None
                if lst.count == 0:
                    del self.indexes[i][sub]
        else:
            e.mult = new
        return new

    def _index_id(self, cols):
        i = self._by_cols.get(cols)
        if i is None:
            raise MissingIndex(f"{self.name}: no index on columns {cols}")
        return i

    def slice_count(self, cols, sub):
        """|sigma_{cols=sub}K|: number of distinct tuples under the key, O(1)."""
        self.meter.tick()
        lst = self.indexes[self._index_id(cols)].get(sub)
        return lst.count if lst is not None else 0

    def contains(self, cols, sub):
        """Projection membership test, O(1)."""
        return self.slice_count(cols, sub) > 0

    def slice_items(self, cols, sub):
        """Yield (tuple, multiplicity) for each entry under the key, constant delay.

        The relation must not be mutated while the generator is live.
        """
        i = self._index_id(cols)
        self.meter.tick()
        lst = self.indexes[i].get(sub)
        node = lst.head if lst is not None else None
        while node is not None:
            self.meter.tick()
            e = node.entry
            yield e.key, e.mult
            node = node.nxt

    def slice_head(self, cols, sub):
        """First tuple in the slice's insertion order, or None if empty."""
        self.meter.tick()
        lst = self.indexes[self._index_id(cols)].get(sub)
        return lst.head.entry.key if lst is not None and lst.head else None

    def slice_next(self, cols, key):
        """Tuple following `key` inside its slice list, or None at the end.

        `key` must currently be stored.
        """
        self.meter.tick()
        i = self._index_id(cols)
        node = self.entries[key].nodes[i]
        return node.nxt.entry.key if node.nxt is not None else None

    def index_keys(self, cols):
        """Yield the distinct projection keys of an index (pi_{cols}K)."""
        for sub in self.indexes[self._index_id(cols)]:
            self.meter.tick()
            yield sub

    def items(self):
        """Yield all (tuple, multiplicity) pairs in insertion order."""
        for e in self.entries.values():
            self.meter.tick()
            yield e.key, e.mult

    def check_consistency(self):
        """Exhaustive index audit for tests; O(|K| * #indexes)."""
        for e in self.entries.values():
            assert e.mult != 0, e.key
        for i, cols in enumerate(self.index_cols):
            seen = 0
            for sub, lst in self.indexes[i].items():
                assert lst.count > 0, (self.name, cols, sub)
                n, node = 0, lst.head
                while node is not None:
                    e = node.entry
                    assert self.entries.get(e.key) is e
                    assert subkey(e.key, cols) == sub
                    assert e.nodes[i] is node
                    n += 1
                    node = node.nxt
                assert n == lst.count, (self.name, cols, sub)
                seen += n
            assert seen == len(self.entries), (self.name, cols)
