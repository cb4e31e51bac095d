"""Shared builders for enumeration tests."""

from trimaint.iterators import HopUnionIterator, ListCollection

# Per-bucket iteration orders and candidate-bucket map for the four-bucket
# union example used in both the unit suite and the acceptance suite.
WORKED_ORDERS = {
    "a1": [1, 2, 3],
    "a2": [4, 1, 5],
    "a3": [2, 5, 3],
    "a4": [6, 4],
}
WORKED_CANDIDATES = {
    1: ("a1", "a2"),
    2: ("a1", "a3"),
    3: ("a1", "a3"),
    4: ("a2", "a4"),
    5: ("a2", "a3"),
    6: ("a4",),
}


def build_worked_hop_example(meter=None):
    return HopUnionIterator(
        ["a1", "a2", "a3", "a4"],
        lambda k: ListCollection(WORKED_ORDERS[k]),
        lambda k: len(WORKED_ORDERS[k]),
        lambda t: WORKED_CANDIDATES[t],
        meter=meter,
    )
