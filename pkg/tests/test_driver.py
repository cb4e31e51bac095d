import random

import pytest

from trimaint.driver import Driver, make_engine
from trimaint.oracle import oracle_triangle
from trimaint.store import RejectedDelete

GRID = [
    ("d0", False, 0.5),
    ("d0", True, 0.5),
    ("d1", False, 0.25),
    ("d2", False, 0.5),
    ("d3", False, 0.5),
]


def make_driver(query, eps, double=False, rd=None, sd=None, td=None):
    return Driver(make_engine(query, eps, double=double, rd=rd, sd=sd, td=td))


def mirror_update(rels, rel, key, m):
    d = rels[rel]
    new = d.get(key, 0) + m
    assert new >= 0
    if new == 0:
        d.pop(key, None)
    else:
        d[key] = new


def random_update(rng, rels, domain, delete_frac):
    live = [(rel, key) for rel, d in rels.items() for key in d]
    if live and rng.random() < delete_frac:
        rel, key = rng.choice(live)
        return rel, key, -rng.randint(1, rels[rel][key])
    rel = rng.choice(("R", "S", "T"))
    key = (rng.randrange(domain), rng.randrange(domain))
    return rel, key, rng.randint(1, 2)


def test_first_insert_on_empty_state():
    drv = make_driver("d0", 0.5)
    assert drv.engine.threshold.N == 1
    drv.on_update("R", (1, 2), 1)
    assert drv.majors == 1
    assert drv.engine.threshold.N == 2
    assert drv.engine.db_size() == 1
    drv.check_invariants(deep=True)


def test_growth_keeps_size_invariant():
    drv = make_driver("d0", 0.5)
    for i in range(40):
        drv.on_update("R", (i, i + 1), 1)
        drv.check_invariants()
    assert drv.engine.threshold.N == 64
    assert drv.majors == 6


def test_delete_run_halves_n():
    rd = {(i, i): 1 for i in range(8)}
    drv = make_driver("d0", 0.5, rd=rd)
    n0 = drv.engine.threshold.N
    assert n0 == 17
    for i in range(5):
        drv.on_update("R", (i, i), -1)
        drv.check_invariants()
    # sizes 7..3; the drop below floor(17/4) = 4 halves N to 7
    assert drv.majors == 1
    assert drv.engine.threshold.N == 7


def test_delete_to_empty_clamps_n():
    drv = make_driver("d0", 0.5)
    drv.on_update("R", (1, 1), 1)
    drv.on_update("R", (1, 1), -1)
    assert drv.engine.db_size() == 0
    assert drv.engine.threshold.N >= 1
    drv.check_invariants(deep=True)


def sixteen_state(query="d0", double=False, eps=0.5):
    # N pinned at 16 so theta = 4; six filler tuples keep the size
    # invariant clear of both rebuild triggers during the test
    drv = make_driver(query, eps, double=double)
    items = {
        "R": [((50 + i, 60 + i), 1) for i in range(4)],
        "S": [((70, 71), 1)],
        "T": [((72, 73), 1)],
    }
    drv.engine.rebuild(items, 16)
    assert drv.engine.threshold.theta == 4.0
    drv.check_invariants()
    return drv


def test_minor_promotion_at_degree_six():
    drv = sixteen_state()
    part = drv.engine.parts["R"]
    for b in range(5):
        drv.on_update("R", (1, b), 1)
        assert part.part("L").slice_count((0,), 1) == b + 1
        assert drv.minors == 0
    # degree 6 trips the loose condition 2d >= 3 * theta
    drv.on_update("R", (1, 5), 1)
    assert drv.minors == 1
    assert part.part("L").slice_count((0,), 1) == 0
    assert part.part("H").slice_count((0,), 1) == 6
    drv.check_invariants(deep=True)


def test_minor_demotion_below_half_theta():
    drv = make_driver("d0", 0.5)
    items = {
        "R": [((1, b), 1) for b in range(4)] + [((50 + i, 60 + i), 1) for i in range(4)],
        "S": [((70, 71), 1)],
        "T": [((72, 73), 1)],
    }
    drv.engine.rebuild(items, 16)
    part = drv.engine.parts["R"]
    assert part.part("H").slice_count((0,), 1) == 4
    drv.on_update("R", (1, 3), -1)
    drv.on_update("R", (1, 2), -1)
    assert drv.minors == 0
    # degree 1 trips 2d < theta
    drv.on_update("R", (1, 1), -1)
    assert drv.minors == 1
    assert part.part("H").slice_count((0,), 1) == 0
    assert part.part("L").slice_count((0,), 1) == 1
    drv.check_invariants(deep=True)


def test_double_partition_y_side_promotion():
    drv = sixteen_state(double=True)
    part = drv.engine.parts["S"]
    for b in range(6):
        drv.on_update("S", (80 + b, 9), 1)
    assert drv.minors == 1
    assert part.side_class("Y", 9) == "H"
    assert part.part("LH").slice_count((1,), 9) == 6
    drv.check_invariants(deep=True)


def test_move_tuples_two_applies_per_tuple():
    drv = sixteen_state()
    for b in range(3):
        drv.on_update("R", (1, b), 1)
    eng = drv.engine
    before = eng.query_result()
    calls = []
    real = eng.apply_update
    eng.apply_update = lambda *a: (calls.append(a), real(*a))[1]
    moved = drv.move_tuples("R", "X", 1, "L", "H")
    eng.apply_update = real
    assert moved == 3
    assert len(calls) == 6
    assert eng.parts["R"].part("H").slice_count((0,), 1) == 3
    assert eng.query_result() == before
    eng.verify_views()


def test_rejected_delete_leaves_state_unchanged():
    drv = make_driver("d3", 0.5, rd={(1, 2): 1}, sd={(2, 3): 1}, td={(3, 1): 1})
    n0 = drv.engine.threshold.N
    before = drv.engine.query_result()
    with pytest.raises(RejectedDelete):
        drv.on_update("S", (2, 3), -2)
    assert drv.engine.threshold.N == n0
    assert drv.updates == 0
    assert drv.engine.query_result() == before
    drv.check_invariants(deep=True)


@pytest.mark.parametrize("query,double,eps", GRID)
def test_rebalance_transparency(query, double, eps):
    drv = make_driver(query, eps, double=double)
    stack = []

    def obs(event, d):
        if event.endswith(":before"):
            stack.append(d.engine.query_result())
        else:
            assert d.engine.query_result() == stack.pop()

    drv.observers.append(obs)
    rng = random.Random(9000 + len(query))
    rels = {"R": {}, "S": {}, "T": {}}
    for _ in range(250):
        rel, key, m = random_update(rng, rels, 6, 0.3)
        drv.on_update(rel, key, m)
        mirror_update(rels, rel, key, m)
    assert not stack
    assert drv.majors > 0


@pytest.mark.parametrize("query,double,eps", GRID)
def test_random_stream_invariants_and_result(query, double, eps):
    k = {"d0": 0, "d1": 1, "d2": 2, "d3": 3}[query]
    drv = make_driver(query, eps, double=double)
    rng = random.Random(41 + k)
    rels = {"R": {}, "S": {}, "T": {}}
    for step in range(300):
        rel, key, m = random_update(rng, rels, 8, 0.3)
        drv.on_update(rel, key, m)
        mirror_update(rels, rel, key, m)
        drv.check_invariants()
        if step % 25 == 24:
            want = oracle_triangle(rels["R"], rels["S"], rels["T"], k)
            assert drv.engine.query_result() == want
    drv.check_invariants(deep=True)


def test_long_stream_invariants_every_step():
    drv = make_driver("d0", 0.5)
    rng = random.Random(7)
    rels = {"R": {}, "S": {}, "T": {}}
    for step in range(2000):
        rel, key, m = random_update(rng, rels, 12, 0.3)
        drv.on_update(rel, key, m)
        mirror_update(rels, rel, key, m)
        drv.check_invariants()
        if step % 250 == 249:
            drv.check_invariants(deep=True)
    assert drv.engine.query_result() == oracle_triangle(
        rels["R"], rels["S"], rels["T"], 0
    )


@pytest.mark.parametrize("eps", [0.0, 1.0])
def test_extreme_epsilon_never_minor_rebalances(eps):
    drv = make_driver("d3", eps)
    rng = random.Random(17)
    rels = {"R": {}, "S": {}, "T": {}}
    for _ in range(200):
        rel, key, m = random_update(rng, rels, 5, 0.25)
        drv.on_update(rel, key, m)
        mirror_update(rels, rel, key, m)
    assert drv.minors == 0
    drv.check_invariants(deep=True)
