import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from secantfoci import linalg as la
from secantfoci.focal import (
    DIVISOR_ONLY,
    GENERIC_EXACT,
    GENERIC_SAMPLED,
    NOT_GENERIC,
    RNC,
    FocalTensor,
    all_rank_minors,
    divisor_containment,
    focal_matrix,
    hilbert_classify,
    motion_matrix,
    one_generic_test,
    rank_locus_ideal,
    rnc_injective_sample,
    tangent_space_S,
)
from secantfoci.ideals import zero_dim_points
from conftest import P, curve_for, secants_for

CASES = [(5, 4), (6, 5), (7, 5), (8, 6)]


def _tensor(g, d, index=0):
    sec = secants_for(g, d)[index]
    ts = tangent_space_S(sec, curve_for(g, d).params.rho)
    return sec, ts, focal_matrix(sec, ts.basis)


@pytest.mark.parametrize("g,d", CASES)
def test_tangent_space_contains_pencil_direction(g, d):
    sec, ts, _ = _tensor(g, d)
    rho = curve_for(g, d).params.rho
    assert ts.basis.shape == (rho + 1, d)
    assert not la.matmul(motion_matrix(sec), ts.pencil_c, P).any()
    assert np.array_equal(la.matmul(ts.pencil_coords, ts.basis, P), ts.pencil_c % P)


@pytest.mark.parametrize("g,d", CASES)
def test_divisor_points_are_rank_one(g, d):
    sec, _, tensor = _tensor(g, d)
    ok, ranks = divisor_containment(tensor, sec.lambda_coords())
    assert ok and len(ranks) == d
    rng = random.Random(0)
    assert all(la.rank(tensor.at([rng.randrange(P) for _ in range(d - 1)]), P) >= 2 for _ in range(10))


@pytest.mark.parametrize("g,d", CASES)
def test_curve_tensors_are_one_generic(g, d):
    _, _, tensor = _tensor(g, d)
    assert one_generic_test(tensor, random.Random(1)).verdict == GENERIC_EXACT


def _random_tensor(rng, n, k, m):
    return np.array([[[rng.randrange(P) for _ in range(m)] for _ in range(k)] for _ in range(n)], dtype=np.int64)


@pytest.mark.parametrize("n,k,m", [(2, 2, 4), (3, 3, 5), (2, 3, 4)])
def test_zero_column_is_not_generic(n, k, m):
    T = _random_tensor(random.Random(n + k + m), n, k, m)
    T[:, 1, :] = 0
    res = one_generic_test(FocalTensor(T, P), random.Random(2))
    assert res.verdict == NOT_GENERIC
    witness = np.array(res.witness)
    assert la.rank(FocalTensor(T, P).slice_at(witness), P) < n


def test_hidden_zero_column_after_change_of_basis():
    rng = random.Random(9)
    T = _random_tensor(rng, 3, 3, 5)
    T[:, 0, :] = 0
    G = np.array([[1, 2, 3], [0, 1, 4], [0, 0, 1]])
    mixed = np.einsum("abi,bc->aci", T, G) % P
    assert one_generic_test(FocalTensor(mixed, P), rng).verdict == NOT_GENERIC


@settings(max_examples=25)
@given(st.integers(0, 10**6))
def test_genericity_is_invariant_under_row_and_column_changes(seed):
    rng = random.Random(seed)
    T = _random_tensor(rng, 3, 3, 5)
    while True:
        A = np.array([[rng.randrange(P) for _ in range(3)] for _ in range(3)])
        B = np.array([[rng.randrange(P) for _ in range(3)] for _ in range(3)])
        if la.det(A, P) and la.det(B, P):
            break
    moved = np.einsum("ra,abi,bc->rci", A, T, B) % P
    v1 = one_generic_test(FocalTensor(T, P), random.Random(seed)).verdict
    v2 = one_generic_test(FocalTensor(moved, P), random.Random(seed + 1)).verdict
    assert v1 == v2


def test_large_rho_is_sampled():
    T = _random_tensor(random.Random(4), 2, 4, 6)
    res = one_generic_test(FocalTensor(T, P), random.Random(0), samples=200)
    assert res.verdict == GENERIC_SAMPLED and res.samples >= 200


def test_random_model_is_divisor_only():
    # a random 3 x 3 matrix of linear forms on P^4 drops to rank one at deg(P2 x P2) = 6 points
    rng = random.Random(11)
    tensor = FocalTensor(_random_tensor(rng, 3, 3, 5), P)
    minors = rank_locus_ideal(tensor)
    zd = zero_dim_points(minors, 5, P, rng)
    assert zd.length == 6
    report = hilbert_classify(tensor, minors, [v for v, _ in zd.points], 6, 5, rng)
    assert report.classification == DIVISOR_ONLY
    assert report.hilbert_values == [5, 6, 6, 6, 6]
    for v, _ in zd.points:
        assert la.rank(tensor.at(v), P) == 1


def test_minor_list_covers_all_pairs():
    _, _, tensor = _tensor(8, 6)
    assert len(all_rank_minors(tensor)) == 3 * 3
    assert len(rank_locus_ideal(tensor)) <= 9


@pytest.mark.parametrize("g,d", [(5, 4), (6, 5), (7, 5)])
def test_rnc_classification_and_parametrization(g, d):
    sec, _, tensor = _tensor(g, d)
    rng = random.Random(5)
    minors = rank_locus_ideal(tensor)
    report = hilbert_classify(tensor, minors, sec.lambda_coords(), d, 5, rng)
    assert report.classification == RNC
    assert report.hilbert_values == [(d - 2) * t + 1 for t in range(1, 6)]
    param = report.rnc_param
    assert param.degree == d - 2
    for t in [0, 1, 17, 4000, P]:
        y = param.at(t)
        assert all(Q.evaluate([int(v) for v in y]) == 0 for Q in minors)
    Y = sec.lambda_coords()
    for i, t in enumerate(param.divisor_params):
        assert t is not None and la.proportional(param.at(t), Y[i], P)
    assert rnc_injective_sample(param, rng)


def test_g8d6_classification_is_divisor_only():
    sec, _, tensor = _tensor(8, 6)
    minors = rank_locus_ideal(tensor)
    rng = random.Random(6)
    report = hilbert_classify(tensor, minors, sec.lambda_coords(), 6, 5, rng)
    assert report.classification == DIVISOR_ONLY
    assert report.hilbert_values == [5, 6, 6, 6, 6]
    zd = zero_dim_points(minors, 5, P, rng)
    found = [v for v, _ in zd.points]
    assert len(found) == 6
    for y in sec.lambda_coords():
        assert sum(la.proportional(y, v, P) for v in found) == 1
