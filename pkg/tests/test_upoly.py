import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from secantfoci import linalg as la
from secantfoci import upoly as up
from secantfoci.errors import DegreeOverflow

P = 32003
polys = st.lists(st.integers(0, P - 1), min_size=1, max_size=7)


def brute_roots(f, p):
    return [x for x in range(p) if up.evaluate(f, x, p) == 0]


@given(polys, polys)
def test_divmod_identity(f, g):
    g = up.trim(g, P)
    if not g:
        return
    q, r = up.divmod_(f, g, P)
    assert up.add(up.mul(q, g, P), r, P) == up.trim(f, P)
    assert up.deg(r) < up.deg(g)


@given(polys, polys, polys)
def test_gcd_divides_and_is_maximal(a, b, c):
    f, g = up.mul(a, c, P), up.mul(b, c, P)
    if not up.trim(f, P) and not up.trim(g, P):
        return
    h = up.gcd(f, g, P)
    assert not up.rem(f, h, P) and not up.rem(g, h, P)
    assert not up.rem(h, up.monic(c, P), P)


@settings(max_examples=300)
@given(st.lists(st.integers(0, P - 1), min_size=2, max_size=5), st.lists(st.integers(0, P - 1), min_size=2, max_size=5))
def test_resultant_equals_sylvester_determinant(f, g):
    f, g = up.trim(f, P), up.trim(g, P)
    if up.deg(f) < 1 or up.deg(g) < 1:
        return
    assert up.resultant(f, g, P) == la.det(up.sylvester_matrix(f, g, P), P)


def test_resultant_vanishes_on_common_root():
    f = up.from_roots([3, 5], P)
    g = up.from_roots([5, 11, 17], P)
    assert up.resultant(f, g, P) == 0
    assert up.resultant(f, up.from_roots([4], P), P) != 0


@given(st.lists(st.integers(0, 40), min_size=1, max_size=6))
def test_roots_with_multiplicity(roots):
    f = up.from_roots(roots, P)
    expect = sorted((r, roots.count(r)) for r in set(roots))
    assert up.roots_in_fp(f, P) == expect
    assert up.splits_distinct(f, P) == (len(set(roots)) == len(roots))


def test_roots_small_prime_exhaustive():
    f = [1, 0, 1]  # x^2 + 1 over F_13 has roots 5, 8
    assert up.roots_in_fp(f, 13) == [(5, 1), (8, 1)]
    assert brute_roots(f, 13) == [5, 8]
    assert up.roots_in_fp([1, 0, 1], 7) == []


@settings(max_examples=200)
@given(st.lists(st.lists(st.integers(0, 30), min_size=3, max_size=3), min_size=1, max_size=6))
def test_batch_split_matches_scalar(rows):
    p = 31
    coeffs = np.array([r + [1] for r in rows])
    batch = up.batch_splits_distinct(coeffs, p)
    for row, flag in zip(coeffs, batch):
        roots = brute_roots(list(row), p)
        assert bool(flag) == (len(roots) == 3)


@given(st.lists(st.integers(0, P - 1), min_size=1, max_size=5))
def test_interpolation_recovers(f):
    f = up.trim(f, P)
    xs = list(range(1, len(f) + 3))
    ys = [up.evaluate(f, x, P) for x in xs]
    assert up.interpolate(xs, ys, max(up.deg(f), 0), P) == f


def test_interpolation_detects_overflow():
    xs = [1, 2, 3, 4]
    ys = [up.evaluate([0, 0, 0, 1], x, P) for x in xs]
    with pytest.raises(DegreeOverflow):
        up.interpolate(xs, ys, 2, P)


def test_form_gcd_tracks_infinity():
    # forms of degree 3: t(t-1) and t(t-2) as cubics both vanish at 0 and at infinity
    aff, inf = up.form_gcd([(up.from_roots([0, 1], P), 3), (up.from_roots([0, 2], P), 3)], P)
    assert aff == [0, 1] and inf == 1
    assert up.form_roots(aff, inf, P) == [(0, 1), (P, 1)]
    assert up.form_eval([1, 2], 2, P, P) == 0


def test_untrimmed_inputs():
    assert up.monic([2, 0], P) == [1]
    assert up.divmod_([0, 1], [1, 0], P) == ([0, 1], [])
