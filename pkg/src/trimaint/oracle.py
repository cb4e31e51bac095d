"""Brute-force reference evaluation for triangle queries and OuMv.

Everything here works on plain dicts mapping tuples to multiplicities, with
no dependency on the engine's storage layer, so tests compare two fully
independent routes.
"""

from __future__ import annotations

from collections import Counter, defaultdict


class DimensionMismatch(Exception):
    pass


def oracle_triangle(rd, sd, td, k):
    """Reference triangle query over dict relations.

    R(A,B), S(B,C), T(C,A); the first k of (A,B,C) stay free. Returns a
    scalar for k=0, otherwise a dict from k-tuples to nonzero multiplicity.
    """
    assert k in (0, 1, 2, 3)
    s_by_b = defaultdict(list)
    for (b, c), m in sd.items():
        s_by_b[b].append((c, m))
    out = Counter()
    for (a, b), mr in rd.items():
        for c, ms in s_by_b.get(b, ()):
            mt = td.get((c, a), 0)
            if mt:
                out[(a, b, c)[:k]] += mr * ms * mt
    if k == 0:
        return out.get((), 0)
    return {key: m for key, m in out.items() if m != 0}


def oracle_oumv(matrix, u, v):
    """Boolean u^T M v by the cubic definition."""
    n = len(matrix)
    if len(u) != n or len(v) != n or any(len(row) != n for row in matrix):
        raise DimensionMismatch(f"n={n}, |u|={len(u)}, |v|={len(v)}")
    for i in range(n):
        if not u[i]:
            continue
        row = matrix[i]
        for j in range(n):
            if row[j] and v[j]:
                return 1
    return 0


class RefMaintainer:
    """Incrementally maintained reference result for one triangle query.

    Keeps the three relations as nested adjacency dicts and updates the
    result by the textbook delta rule, one slice scan per update. Used to
    check long streams where recomputing the oracle every step would be
    too slow.
    """

    def __init__(self, k):
        assert k in (0, 1, 2, 3)
        self.k = k
        self.rels = {"R": {}, "S": {}, "T": {}}
        # adjacency on the join variable needed by each delta rule
        self.s_by_b = defaultdict(dict)
        self.t_by_c = defaultdict(dict)
        self.r_by_a = defaultdict(dict)
        self.out = Counter()

    def db_size(self):
        return sum(len(d) for d in self.rels.values())

    def apply(self, rel, t, m):
        assert m != 0
        d = self.rels[rel]
        old = d.get(t, 0)
        assert old + m >= 0, (rel, t, old, m)
        if rel == "R":
            a, b = t
            for c, ms in self.s_by_b.get(b, {}).items():
                mt = self.rels["T"].get((c, a), 0)
                if mt:
                    self._add((a, b, c), m * ms * mt)
        elif rel == "S":
            b, c = t
            for a, mt in self.t_by_c.get(c, {}).items():
                mr = self.rels["R"].get((a, b), 0)
                if mr:
                    self._add((a, b, c), mr * m * mt)
        else:
            c, a = t
            for b, mr in self.r_by_a.get(a, {}).items():
                ms = self.rels["S"].get((b, c), 0)
                if ms:
                    self._add((a, b, c), mr * ms * m)
        new = old + m
        if new == 0:
            del d[t]
        else:
            d[t] = new
        adj, key, val = {
            "R": (self.r_by_a, t[0], t[1]),
            "S": (self.s_by_b, t[0], t[1]),
            "T": (self.t_by_c, t[0], t[1]),
        }[rel]
        if new == 0:
            del adj[key][val]
            if not adj[key]:
                del adj[key]
        else:
            adj[key][val] = new

    def _add(self, abc, delta):
        key = abc[: self.k]
        self.out[key] += delta
        if self.out[key] == 0:
            del self.out[key]

    def result(self):
        if self.k == 0:
            return self.out.get((), 0)
        return dict(self.out)
