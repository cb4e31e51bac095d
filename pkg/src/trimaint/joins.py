"""Join helpers shared by the engines' initialization and rebuild paths."""

from __future__ import annotations


def triangle_products(r, s, t):
    """Yield (a, b, c, product) for the triangle join of three binary parts.

    r, s, t are Relations with schemas R(A,B), S(B,C), T(C,A), each indexed
    on both columns. (A,B) pairs come from r's entries; the C-values are
    resolved through whichever of the two remaining slices is smaller, so
    the total work is sum over (a,b) of min(deg_S(b), deg_T(a)).
    """
    for (a, b), mr in r.items():
        if s.slice_count((0,), b) <= t.slice_count((1,), a):
            for (_, c), ms in s.slice_items((0,), b):
                mt = t.lookup((c, a))
                if mt:
                    yield a, b, c, mr * ms * mt
        else:
            for (c, _), mt in t.slice_items((1,), a):
                ms = s.lookup((b, c))
                if ms:
                    yield a, b, c, mr * ms * mt
