import itertools

import numpy as np
import pytest

from secantfoci import linalg as la
from secantfoci.canonical import (
    cohomology_checks,
    h0_twisted,
    make_pencil,
    mu0_tangent,
    pencil_fiber,
    pencil_motion,
    riemann_roch_h0,
    scroll_vertex,
    sweep_pencil,
)
from secantfoci.errors import DegenerateLine, MultiplicityUnsupported
from secantfoci.field import inv
from conftest import P, curve_for, frame_for, leibniz_det, secants_for

CASES = [(5, 4), (6, 5), (7, 5), (8, 6)]


@pytest.mark.parametrize("g,d", CASES)
def test_adjoint_forms_vanish_on_nodes(g, d):
    curve, frame = curve_for(g, d), frame_for(g, d)
    assert frame.g == g and frame.degree == curve.e - 3
    for form in frame.forms():
        assert all(form.evaluate(q) == 0 for q in curve.nodes)
    assert la.rank(frame.coeffs, P) == g


def test_fiber_points_lie_on_curve_and_line():
    curve = curve_for(7, 5)
    pencil = make_pencil(curve)
    sweep = sweep_pencil(pencil)
    assert sweep.split
    fiber = pencil_fiber(pencil, sweep.split[0])
    assert len(set(fiber.points)) == curve.d
    q = np.array(curve.marked_node)
    line = [pencil.point(0, fiber.t), q]
    for pt in fiber.points:
        assert curve.F.evaluate(pt) == 0
        assert la.rank(np.stack(line + [np.array(pt)]), P) == 2


def test_sweep_agrees_with_scalar_fibers():
    pencil = make_pencil(curve_for(7, 5))
    ts = list(range(0, 400))
    sweep = sweep_pencil(pencil, ts)
    scalar = []
    for t in ts:
        try:
            if pencil_fiber(pencil, t) is not None:
                scalar.append(t)
        except DegenerateLine:
            pass
    assert sweep.split == scalar


def test_degenerate_lines_are_reported():
    pencil = make_pencil(curve_for(7, 5))
    degenerate = sweep_pencil(pencil).degenerate
    non_sqfree = []
    for t in range(P):
        f = pencil.residual(t)
        if len(f) == pencil.d + 1:
            from secantfoci import upoly as up

            if not up.is_squarefree(f, P):
                non_sqfree.append(t)
                if len(non_sqfree) == 1:
                    break
    for t in degenerate[:1] + non_sqfree[:1]:
        with pytest.raises(DegenerateLine):
            pencil_fiber(pencil, t)


def _cramer_kappa(sec):
    # choose d-1 independent rows of U and solve U kappa' = m_d by Cramer's rule
    d = sec.d
    U, m = sec.M[:, : d - 1], sec.M[:, d - 1]
    for rows in itertools.combinations(range(U.shape[0]), d - 1):
        sub = U[list(rows)]
        den = leibniz_det(sub, P)
        if den:
            out = []
            for i in range(d - 1):
                num = sub.copy()
                num[:, i] = m[list(rows)]
                out.append(leibniz_det(num, P) * inv(den, P) % P)
            return out
    raise AssertionError("U has no invertible minor")


@pytest.mark.parametrize("g,d", CASES)
def test_secant_span_structure(g, d):
    sec = secants_for(g, d)[0]
    assert la.rank(sec.M, P) == d - 1
    assert not la.matmul(sec.W, sec.M, P).any()
    assert sec.W.shape[0] == g - d + 1
    assert int(sec.kappa[-1]) == P - 1
    assert not la.matmul(sec.M, sec.kappa, P).any()
    assert [int(x) for x in sec.kappa[: d - 1]] == _cramer_kappa(sec)
    Y = sec.lambda_coords()
    for i in range(d):
        assert la.proportional(la.matmul(sec.U, Y[i], P), sec.M[:, i], P)


@pytest.mark.parametrize("g,d", CASES)
def test_cohomology_chain_is_exact(g, d):
    frame = frame_for(g, d)
    rho = curve_for(g, d).params.rho
    for sec in secants_for(g, d):
        c = cohomology_checks(frame, sec.fiber)
        assert c.h0_K_minus_D == g - d + 1
        assert c.h0_K_minus_2D == 0
        assert c.chain == [2 * d - i + 1 - g for i in range(1, rho + 2)] == c.expected_chain
        assert c.ok


def test_riemann_roch_gives_pencil():
    frame = frame_for(8, 6)
    sec = secants_for(8, 6)[0]
    assert riemann_roch_h0(frame, sec.fiber, [1] * 6) == 2


def test_multiplicity_three_unsupported():
    frame = frame_for(7, 5)
    fiber = secants_for(7, 5)[0].fiber
    with pytest.raises(MultiplicityUnsupported):
        h0_twisted(frame, [(fiber.points[0], fiber.tangents[0], 3)])


@pytest.mark.parametrize("g,d", CASES)
def test_tangent_space_and_vertex(g, d):
    frame = frame_for(g, d)
    rho = curve_for(g, d).params.rho
    secs = secants_for(g, d)
    mu = mu0_tangent(frame, secs[0], secs[1], rho)
    assert mu.dimension == rho
    vx = scroll_vertex(frame, list(secs[:3]), rho)
    assert vx.projective_dim == rho - 1
    assert vx.matches
    assert np.array_equal(la.canonical_subspace(vx.vertex, P), mu.tangent)
    # the vertex lies in every span of the pencil
    for sec in secs:
        assert la.rank(np.concatenate([sec.U, vx.vertex], axis=1), P) == d - 1


def test_pencil_motion_is_tangent():
    sec = secants_for(7, 5)[0]
    c = pencil_motion(sec.fiber)
    assert c.shape == (5,) and c.any()
