"""Shared engine plumbing: threshold, version counter, rebuild protocol."""

from __future__ import annotations

from trimaint.partition import Threshold
from trimaint.store import CostMeter, RejectedDelete
from trimaint.iterators import StaleIterator


class EngineBase:
    """Common state for the per-query maintenance engines.

    Subclasses provide `_build_partitions(rel_items)`, `_recompute_views()`,
    and `apply_update(rel, label, key, m)`. The driver owns threshold-base
    management and rebalancing; engines only apply updates and rebuild.
    """

    query = None

    def __init__(self, epsilon, meter=None):
        self.epsilon = epsilon
        self.meter = meter if meter is not None else CostMeter()
        self.threshold = Threshold(1, epsilon)
        self.version = 0
        self.parts = {}

    @classmethod
    def from_database(cls, rd, sd, td, epsilon, meter=None):
        """Build a state for an existing database: N = 2|D|+1, strict parts."""
        eng = cls(epsilon, meter)
        items = {
            "R": list(rd.items()),
            "S": list(sd.items()),
            "T": list(td.items()),
        }
        n = sum(len(v) for v in items.values())
        eng.rebuild(items, 2 * n + 1)
        return eng

    def rebuild(self, rel_items, N):
        """Strictly repartition from scratch and recompute every view."""
        self.threshold.rebase(N)
        self._build_partitions(rel_items)
        self._recompute_views()
        self.version += 1

    def db_size(self):
        return sum(p.size() for p in self.parts.values())

    def rel_items(self):
        return {name: list(p.items()) for name, p in self.parts.items()}

    def rel_dicts(self):
        return {name: dict(p.items()) for name, p in self.parts.items()}

    def guard(self):
        """Version check callable for enumeration iterators."""
        v = self.version

        def check():
            if self.version != v:
                raise StaleIterator(f"state advanced past version {v}")

        return check

    def precheck_delete(self, rel, label, key, m):
        """Raise RejectedDelete before any mutation if the part would go negative."""
        if m < 0 and self.parts[rel].part(label).lookup(key) + m < 0:
            raise RejectedDelete(f"{rel}^{label}{key} {m:+d}")

    # -- label-group access: several parts treated as one relation --------

    def _lookup_group(self, part, labels, key):
        return sum(part.part(lab).lookup(key) for lab in labels)

    def _slice_group(self, part, labels, cols, sub):
        for lab in labels:
            yield from part.part(lab).slice_items(cols, sub)

    def _count_group(self, part, labels, cols, sub):
        return sum(part.part(lab).slice_count(cols, sub) for lab in labels)

    def merged_group(self, name, labels, suffix="all"):
        """Copy the named parts into one indexed relation (init-time joins)."""
        from trimaint.store import Relation

        rel = Relation(f"{name}_{suffix}", 2, ((0,), (1,)), self.meter)
        for lab in labels:
            for key, m in self.parts[name].part(lab).items():
                rel.apply_delta(key, m)
        return rel
