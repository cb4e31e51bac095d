import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trimaint.joins import triangle_products
from trimaint.oracle import (
    DimensionMismatch,
    RefMaintainer,
    oracle_oumv,
    oracle_triangle,
)
from trimaint.store import CostMeter, Relation


def test_single_triangle_all_arities():
    rd, sd, td = {(1, 1): 1}, {(1, 1): 1}, {(1, 1): 1}
    assert oracle_triangle(rd, sd, td, 0) == 1
    assert oracle_triangle(rd, sd, td, 1) == {(1,): 1}
    assert oracle_triangle(rd, sd, td, 2) == {(1, 1): 1}
    assert oracle_triangle(rd, sd, td, 3) == {(1, 1, 1): 1}


def test_multiplicities_multiply():
    rd, sd, td = {(1, 1): 2}, {(1, 1): 3}, {(1, 1): 1}
    assert oracle_triangle(rd, sd, td, 1) == {(1,): 6}
    assert oracle_triangle(rd, sd, td, 0) == 6


def test_two_triangles_sharing_an_edge():
    rd = {(1, 2): 1}
    sd = {(2, 5): 1, (2, 6): 1}
    td = {(5, 1): 1, (6, 1): 1}
    assert oracle_triangle(rd, sd, td, 0) == 2
    assert oracle_triangle(rd, sd, td, 2) == {(1, 2): 2}
    assert oracle_triangle(rd, sd, td, 3) == {(1, 2, 5): 1, (1, 2, 6): 1}


def test_empty_database():
    assert oracle_triangle({}, {}, {}, 0) == 0
    assert oracle_triangle({}, {}, {}, 3) == {}


def test_oumv_basic_cases():
    assert oracle_oumv([[1, 0], [0, 0]], (1, 0), (1, 0)) == 1
    assert oracle_oumv([[1, 0], [0, 0]], (1, 0), (0, 1)) == 0
    ones = [[1] * 3 for _ in range(3)]
    assert oracle_oumv(ones, (1, 0, 0), (1, 0, 0)) == 1


def test_oumv_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        oracle_oumv([[1, 0], [0, 0]], (1, 0, 0), (1, 0))
    with pytest.raises(DimensionMismatch):
        oracle_oumv([[1, 0], [0]], (1, 0), (1, 0))


pairs = st.tuples(st.integers(0, 4), st.integers(0, 4))
rel_dicts = st.dictionaries(pairs, st.integers(1, 3), max_size=12)


@settings(max_examples=150)
@given(rel_dicts, rel_dicts, rel_dicts)
def test_rotation_symmetry_for_counts(rd, sd, td):
    assert oracle_triangle(rd, sd, td, 0) == oracle_triangle(sd, td, rd, 0)


@settings(max_examples=150)
@given(rel_dicts, rel_dicts, rel_dicts)
def test_nonnegative_for_positive_databases(rd, sd, td):
    assert oracle_triangle(rd, sd, td, 0) >= 0
    for k in (1, 2, 3):
        assert all(m > 0 for m in oracle_triangle(rd, sd, td, k).values())


steps = st.lists(
    st.tuples(
        st.sampled_from(["R", "S", "T"]),
        pairs,
        st.sampled_from([1, 1, 2, -1]),
    ),
    max_size=50,
)


@settings(max_examples=150)
@given(steps, st.sampled_from([0, 1, 2, 3]))
def test_ref_maintainer_matches_oracle(ops, k):
    ref = RefMaintainer(k)
    shadow = {"R": {}, "S": {}, "T": {}}
    for rel, t, m in ops:
        if shadow[rel].get(t, 0) + m < 0:
            continue
        ref.apply(rel, t, m)
        shadow[rel][t] = shadow[rel].get(t, 0) + m
        if shadow[rel][t] == 0:
            del shadow[rel][t]
        assert ref.result() == oracle_triangle(
            shadow["R"], shadow["S"], shadow["T"], k
        )
    assert ref.db_size() == sum(len(d) for d in shadow.values())


@settings(max_examples=150)
@given(rel_dicts, rel_dicts, rel_dicts)
def test_triangle_products_matches_oracle(rd, sd, td):
    m = CostMeter()
    rels = []
    for name, d in (("R", rd), ("S", sd), ("T", td)):
        rel = Relation(name, 2, index_cols=((0,), (1,)), meter=m)
        for t, mult in d.items():
            rel.apply_delta(t, mult)
        rels.append(rel)
    got = {}
    for a, b, c, prod in triangle_products(*rels):
        got[(a, b, c)] = got.get((a, b, c), 0) + prod
    assert got == oracle_triangle(rd, sd, td, 3)
