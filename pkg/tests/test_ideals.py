import math
import random

import numpy as np
import pytest

from secantfoci import linalg as la
from secantfoci.focal import hankel_tensor, rank_locus_ideal
from secantfoci.ideals import hilbert_function, macaulay_matrix, zero_dim_points
from secantfoci.poly import Poly, monomial_vector, monomials

P = 32003


def test_empty_ideal_counts_monomials():
    assert hilbert_function([], 4, P, 4) == [math.comb(t + 3, 3) for t in range(5)]


def test_twisted_cubic():
    H = hankel_tensor(2, 3, P)
    assert hilbert_function(rank_locus_ideal(H), 4, P, 5) == [3 * t + 1 for t in range(6)]


@pytest.mark.parametrize("k", [3, 4, 5])
def test_rational_normal_curve_of_degree_k(k):
    H = hankel_tensor(2, k, P)
    assert hilbert_function(rank_locus_ideal(H), k + 1, P, 4) == [k * t + 1 for t in range(5)]


def test_complete_intersection_of_two_quadrics():
    rng = random.Random(3)
    qs = [Poly(4, P, {m: rng.randrange(P) for m in monomials(4, 2)}) for _ in range(2)]
    # Koszul: HF(t) = C(t+3,3) - 2 C(t+1,3) + C(t-1,3)
    expect = [math.comb(t + 3, 3) - 2 * math.comb(t + 1, 3) + (math.comb(t - 1, 3) if t >= 1 else 0) for t in range(6)]
    assert hilbert_function(qs, 4, P, 5) == expect == [1, 4, 8, 12, 16, 20]


def test_macaulay_matrix_shape():
    q = Poly(3, P, {(2, 0, 0): 1, (0, 1, 1): 2})
    M = macaulay_matrix([q], 3)
    assert M.shape[1] == len(monomials(3, 3))
    assert la.rank(M, P) == 3


def _quadrics_through(points, nvars):
    E = np.array([monomial_vector(pt, 2, P) for pt in points])
    return [Poly.from_vector(nvars, 2, P, row) for row in la.right_kernel(E, P)]


@pytest.mark.parametrize("count,nvars", [(6, 5), (4, 3), (5, 4)])
def test_zero_dim_solver_recovers_planted_points(count, nvars):
    rng = random.Random(count * 10 + nvars)
    pts = [np.array([rng.randrange(P) for _ in range(nvars)]) for _ in range(count)]
    res = zero_dim_points(_quadrics_through(pts, nvars), nvars, P, rng)
    assert res.length == count and res.unexplained == 0
    assert all(m == 1 for _, m in res.points)
    found = [v for v, _ in res.points]
    assert len(found) == count
    for pt in pts:
        assert sum(la.proportional(pt, v, P) for v in found) == 1
