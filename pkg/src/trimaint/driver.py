"""Update driver keeping engine partitions balanced across a stream.

Wraps one query engine. Each call to on_update applies a single-tuple
change through the engine, then restores the size invariant
floor(N/4) <= |D| < N by doubling or halving N with a full rebuild,
or restores the loose degree conditions by moving one value's tuples
between parts. Rebalancing cost lands in the meter's major and minor
phases so the amortized bounds can be checked from the outside.
"""

from trimaint.binary import BinaryEngine
from trimaint.nullary import NullaryDoubleEngine, NullaryEngine
from trimaint.partition import move_target
from trimaint.ternary import TernaryEngine
from trimaint.unary import UnaryEngine

ENGINES = {
    ("d0", False): NullaryEngine,
    ("d0", True): NullaryDoubleEngine,
    ("d1", False): UnaryEngine,
    ("d2", False): BinaryEngine,
    ("d3", False): TernaryEngine,
}


def make_engine(query, epsilon, double=False, meter=None, rd=None, sd=None, td=None):
    assert not double or query == "d0", "double partitioning applies to d0 only"
    cls = ENGINES[(query, double)]
    return cls.from_database(rd or {}, sd or {}, td or {}, epsilon, meter)


class Driver:
    """Applies updates to an engine and rebalances its partitions."""

    def __init__(self, engine):
        self.engine = engine
        self.observers = []
        self.updates = 0
        self.majors = 0
        self.minors = 0
        self.last_costs = {}

    @property
    def meter(self):
        return self.engine.meter

    def _notify(self, event):
        for obs in self.observers:
            obs(event, self)

    def on_update(self, rel, key, m):
        """Apply one update, then rebalance if any invariant broke.

        Raises RejectedDelete before touching anything if the delete
        would overshoot; the state is unchanged in that case.
        """
        assert m != 0
        eng = self.engine
        before = eng.meter.snapshot()
        with eng.meter.phase("apply"):
            label = eng.parts[rel].affected_label(key, eng.epsilon)
            eng.apply_update(rel, label, key, m)
        size = eng.db_size()
        n = eng.threshold.N
        if size == n:
            self._major(2 * n)
        elif size < n // 4:
            self._major(max(n // 2 - 1, 1))
        else:
            self._minor(rel, key)
        self.updates += 1
        after = eng.meter.snapshot()
        self.last_costs = {k: after[k] - before[k] for k in after}
        eng.meter.last_update = self.last_costs["total"]
        return self.last_costs

    def _major(self, new_n):
        eng = self.engine
        self._notify("major:before")
        self.majors += 1
        with eng.meter.phase("major"):
            eng.rebuild(eng.rel_items(), new_n)
        self._notify("major:after")

    def _minor(self, rel, key):
        eng = self.engine
        part = eng.parts[rel]
        theta = eng.threshold.theta
        moves = []
        if part.kind == "single":
            x = key[part.var]
            d = part.violation("X", x, theta)
            if d is not None:
                moves.append(("X", x, d))
        else:
            dx = part.violation("X", key[part.vx], theta)
            dy = part.violation("Y", key[part.vy], theta)
            if dx is not None:
                moves.append(("X", key[part.vx], dx))
            if dy is not None:
                moves.append(("Y", key[part.vy], dy))
            if dx is not None and dy is not None:
                # One update shifts each side's degree by one tuple, so
                # both sides can only break toward the same class.
                assert dx == dy
        if not moves:
            return
        self._notify("minor:before")
        self.minors += 1
        with eng.meter.phase("minor"):
            for side, value, direction in moves:
                self._move_value(rel, side, value, direction)
        self._notify("minor:after")

    def _move_value(self, rel, side, value, direction):
        part = self.engine.parts[rel]
        if part.kind == "single":
            srcs = ("H",) if direction == "to_light" else ("L",)
        else:
            _, heavy_labs, light_labs = part._side(side)
            srcs = heavy_labs if direction == "to_light" else light_labs
        for src in srcs:
            self.move_tuples(rel, side, value, src, move_target(src, side, direction))

    def move_tuples(self, rel, side, value, src, dst):
        """Move every tuple with this value from part src to part dst.

        Each tuple costs two engine applies: an insert into dst and a
        delete from src, so all views stay consistent throughout.
        """
        eng = self.engine
        part = eng.parts[rel]
        if part.kind == "single":
            var = part.var
        else:
            var = part.vx if side == "X" else part.vy
        moved = list(part.part(src).slice_items((var,), value))
        for key, m in moved:
            eng.apply_update(rel, dst, key, m)
            eng.apply_update(rel, src, key, -m)
        return len(moved)

    def check_invariants(self, deep=False):
        """Assert the size invariant and clean loose conditions.

        With deep=True also recompute every view and check the index
        structures; the meter keeps ticking during these reads, so cost
        measuring runs should not interleave with this.
        """
        eng = self.engine
        n = eng.threshold.N
        size = eng.db_size()
        assert n >= 1
        assert n // 4 <= size < n, f"size invariant broken: {size} vs N={n}"
        theta = eng.threshold.theta
        for part in eng.parts.values():
            bad = part.violations(theta)
            assert not bad, f"{part.name}: loose conditions violated at {bad}"
            part.check_disjoint()
            for lab in part.labels:
                r = part.part(lab)
                assert all(m != 0 for m in (e.mult for e in r.entries.values())), r.name
                if deep:
                    r.check_consistency()
        if deep:
            eng.verify_views()
