"""Canonical embedding by adjoints, split fibers of the node pencil, secant spans, and
the tangent space / vertex bookkeeping attached to the pencil."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg as la
from . import upoly as up
from .curves import NodalPlaneCurve, adjoint_condition_matrix, normalize_point
from .errors import (
    CanonicalDimMismatch,
    DegenerateLine,
    KappaZero,
    MultiplicityUnsupported,
    SpanRankUnexpected,
    TangentDimUnexpected,
    VertexDimUnexpected,
)
from .field import inv
from .poly import Poly, dual_monomial_vector, monomial_vector


@dataclass
class CanonicalFrame:
    """g adjoint forms of degree e-3; row j of ``coeffs`` is the j-th form over grlex monomials."""

    curve: NodalPlaneCurve
    coeffs: np.ndarray

    @property
    def p(self) -> int:
        return self.curve.p

    @property
    def g(self) -> int:
        return self.coeffs.shape[0]

    @property
    def degree(self) -> int:
        return self.curve.e - 3

    def evaluate(self, P) -> np.ndarray:
        return self.coeffs @ monomial_vector(P, self.degree, self.p) % self.p

    def jet(self, P, direction) -> tuple[np.ndarray, np.ndarray]:
        """Canonical image of P + ε·direction: (value, derivative)."""
        val, eps = dual_monomial_vector(P, direction, self.degree, self.p)
        return self.coeffs @ val % self.p, self.coeffs @ eps % self.p

    def forms(self) -> list[Poly]:
        return [Poly.from_vector(3, self.degree, self.p, row) for row in self.coeffs]


def adjoint_basis(curve: NodalPlaneCurve) -> CanonicalFrame:
    A = adjoint_condition_matrix(curve.nodes, curve.e, curve.p)
    K = la.right_kernel(A, curve.p)
    if K.shape[0] != curve.g:
        raise CanonicalDimMismatch(
            f"adjoint space has dimension {K.shape[0]}, expected g={curve.g}", dimension=int(K.shape[0])
        )
    return CanonicalFrame(curve, K)


# --- the pencil of lines through a node ----------------------------------------------------------


@dataclass
class Pencil:
    """Lines through node q, parametrized as {λ·q + R0 + t·R1}; t runs over F_p."""

    curve: NodalPlaneCurve
    node_index: int
    R0: tuple[int, int, int]
    R1: tuple[int, int, int]
    hk: list[list[int]]  # hk[k] = coefficients in t of the λ^k coefficient of F(λq + R0 + tR1)
    ht: list[list[int]] = field(init=False)

    def __post_init__(self):
        self.ht = [up.deriv(h, self.p) for h in self.hk]

    @property
    def p(self) -> int:
        return self.curve.p

    @property
    def q(self) -> tuple[int, int, int]:
        return self.curve.nodes[self.node_index]

    @property
    def d(self) -> int:
        return self.curve.d

    def residual(self, t: int) -> list[int]:
        return [up.evaluate(h, t, self.p) for h in self.hk]

    def residual_batch(self, ts: np.ndarray) -> np.ndarray:
        p = self.p
        ts = np.asarray(ts, dtype=np.int64) % p
        out = np.zeros((len(ts), self.d + 1), dtype=np.int64)
        for k, h in enumerate(self.hk):
            acc = np.zeros(len(ts), dtype=np.int64)
            for c in reversed(h):
                acc = (acc * ts + c) % p
            out[:, k] = acc
        return out

    def point(self, lam: int, t: int) -> np.ndarray:
        q = np.array(self.q, dtype=np.int64)
        return (lam * q + np.array(self.R0) + t * np.array(self.R1)) % self.p


def make_pencil(curve: NodalPlaneCurve, node_index: int | None = None) -> Pencil:
    p = curve.p
    idx = curve.marked_node_index if node_index is None else node_index
    q = curve.nodes[idx]
    c = next(i for i in (2, 1, 0) if q[i] % p)
    a, b = [i for i in range(3) if i != c]
    R0 = tuple(int(i == a) for i in range(3))
    R1 = tuple(int(i == b) for i in range(3))
    lam, t = Poly.var(2, p, 0), Poly.var(2, p, 1)
    one = Poly.const(2, p, 1)
    images = [lam * q[i] + one * R0[i] + t * R1[i] for i in range(3)]
    H = curve.F.substitute(images)
    e = curve.e
    hk = [[0] * (e + 1) for _ in range(e + 1)]
    for (i, j), coef in H.terms.items():
        hk[i][j] = coef
    if any(up.trim(hk[k], p) for k in (e - 1, e)):
        raise DegenerateLine("marked point is not a double point of the curve")
    return Pencil(curve, idx, R0, R1, [up.trim(h, p) for h in hk[: curve.d + 1]])


@dataclass
class PencilDivisor:
    """A split fiber: d rational points with tangent directions."""

    pencil: Pencil
    t: int
    residual: list[int]
    lambdas: list[int]
    points: list[tuple[int, int, int]]
    tangents: list[tuple[int, int, int]]

    @property
    def d(self) -> int:
        return len(self.points)


def chart_index(P) -> int:
    return next(i for i in (2, 1, 0) if P[i])


def tangent_direction(curve: NodalPlaneCurve, P) -> tuple[int, int, int]:
    """Rotated gradient in the affine chart where P has last nonzero coordinate 1."""
    p = curve.p
    k = chart_index(P)
    a, b = [i for i in range(3) if i != k]
    Fa = curve.gradient[a].evaluate(P)
    Fb = curve.gradient[b].evaluate(P)
    if Fa == 0 and Fb == 0:
        raise DegenerateLine(f"point {P} is singular on the curve")
    tau = [0, 0, 0]
    tau[a] = (-Fb) % p
    tau[b] = Fa % p
    return tuple(tau)


def pencil_fiber(pencil: Pencil, t: int) -> PencilDivisor | None:
    """The fiber over t, or None when the residual does not split over F_p."""
    p, d = pencil.p, pencil.d
    f = pencil.residual(t)
    if len(f) != d + 1:
        raise DegenerateLine(f"residual degree drops at t={t}", t=t)
    if not up.is_squarefree(f, p):
        raise DegenerateLine(f"residual is not squarefree at t={t}", t=t)
    if not up.splits_distinct(f, p):
        return None
    lambdas = [r for r, _ in up.roots_in_fp(f, p)]
    points, tangents = [], []
    for lam in lambdas:
        P = normalize_point(pencil.point(lam, t), p)
        points.append(P)
        tangents.append(tangent_direction(pencil.curve, P))
    return PencilDivisor(pencil, t, f, lambdas, points, tangents)


@dataclass
class SweepResult:
    split: list[int]
    degenerate: list[int]
    attempted: int


def sweep_pencil(pencil: Pencil, ts=None, chunk: int = 8192) -> SweepResult:
    """Parameters with a split squarefree residual, found by the batched x^p ≡ x test."""
    p = pencil.p
    ts = np.arange(p, dtype=np.int64) if ts is None else np.asarray(ts, dtype=np.int64)
    split, degenerate = [], []
    for start in range(0, len(ts), chunk):
        block = ts[start:start + chunk]
        C = pencil.residual_batch(block)
        lead_zero = C[:, -1] == 0
        degenerate.extend(int(t) for t in block[lead_zero])
        ok = up.batch_splits_distinct(C, p)
        split.extend(int(t) for t in block[ok])
    return SweepResult(split, degenerate, len(ts))


def pencil_motion(fiber: PencilDivisor) -> np.ndarray:
    """Coefficients c with d/dt(point_i) = c_i·tangent_i along the pencil."""
    pen = fiber.pencil
    p = pen.p
    q = np.array(pen.q, dtype=np.int64)
    R1 = np.array(pen.R1, dtype=np.int64)
    c = np.zeros(fiber.d, dtype=np.int64)
    for i, lam in enumerate(fiber.lambdas):
        Hl = up.evaluate(up.deriv(fiber.residual, p), lam, p)
        Ht = sum(up.evaluate(h, fiber.t, p) * pow(lam, k, p) for k, h in enumerate(pen.ht)) % p
        dlam = (-Ht) * inv(Hl, p) % p
        P = pen.point(lam, fiber.t)
        dP = (dlam * q + R1) % p
        k = chart_index(fiber.points[i])
        s = inv(int(P[k]), p)
        v = (dP * P[k] - P * dP[k]) % p * s % p * s % p
        tau = np.array(fiber.tangents[i], dtype=np.int64)
        j = int(np.flatnonzero(tau)[0])
        ci = int(v[j]) * inv(int(tau[j]), p) % p
        if np.any((ci * tau - v) % p):
            raise DegenerateLine("pencil motion is not tangent to the curve")
        c[i] = ci
    return c


# --- secant spans ----------------------------------------------------------------------------------


@dataclass
class SecantData:
    frame: CanonicalFrame
    fiber: PencilDivisor
    M: np.ndarray
    Mjet: np.ndarray
    U: np.ndarray
    kappa: np.ndarray
    W: np.ndarray  # rows span the left kernel of M

    @property
    def p(self) -> int:
        return self.frame.p

    @property
    def d(self) -> int:
        return self.M.shape[1]

    @property
    def n(self) -> int:
        return self.W.shape[0]

    def lambda_coords(self) -> np.ndarray:
        """d × (d-1): coordinates of each divisor point with respect to U."""
        d = self.d
        Y = np.zeros((d, d - 1), dtype=np.int64)
        Y[: d - 1] = np.eye(d - 1, dtype=np.int64)
        Y[d - 1] = self.kappa[: d - 1]
        return Y


def secant_span(frame: CanonicalFrame, fiber: PencilDivisor) -> SecantData:
    p, d = frame.p, fiber.d
    cols, jets = [], []
    for P, tau in zip(fiber.points, fiber.tangents):
        v, dv = frame.jet(P, tau)
        cols.append(v)
        jets.append(dv)
    M = np.stack(cols, axis=1)
    Mjet = np.stack(jets, axis=1)
    r = la.rank(M, p)
    if r != d - 1:
        raise SpanRankUnexpected(f"rank(M)={r}, expected {d - 1}", rank=r)
    K = la.right_kernel(M, p)
    kappa = K[0]
    if np.any(kappa == 0):
        raise KappaZero("divisor points are not in general position inside their span")
    kappa = kappa * ((-inv(int(kappa[-1]), p)) % p) % p
    W = la.left_kernel(M, p)
    return SecantData(frame, fiber, M, Mjet, M[:, : d - 1].copy(), kappa, W)


# --- twisted canonical systems --------------------------------------------------------------------


def h0_twisted(frame: CanonicalFrame, constraints, basis: np.ndarray | None = None) -> int:
    """Dimension of the forms in ``basis`` (default: the adjoints) vanishing on a divisor.

    ``constraints`` holds (point, tangent, multiplicity); multiplicity 2 means vanishing of
    the value and of the derivative along the curve at that point.
    """
    p = frame.p
    B = frame.coeffs if basis is None else np.asarray(basis, dtype=np.int64)
    rows = []
    for P, tau, mult in constraints:
        if mult not in (1, 2):
            raise MultiplicityUnsupported(f"multiplicity {mult} not supported", multiplicity=mult)
        val, eps = dual_monomial_vector(P, tau, frame.degree, p)
        rows.append(B @ val % p)
        if mult == 2:
            rows.append(B @ eps % p)
    if not rows:
        return B.shape[0]
    return B.shape[0] - la.rank(np.stack(rows, axis=1), p)


def fiber_constraints(fiber: PencilDivisor, mults) -> list:
    return [(P, tau, m) for P, tau, m in zip(fiber.points, fiber.tangents, mults) if m]


def riemann_roch_h0(frame: CanonicalFrame, fiber: PencilDivisor, mults) -> int:
    """h⁰ of the divisor Σ m_i·p_i by Riemann–Roch: deg - g + 1 + h⁰(K - D)."""
    return sum(mults) - frame.g + 1 + h0_twisted(frame, fiber_constraints(fiber, mults))


@dataclass
class CohomologyChecks:
    h0_K_minus_D: int
    h0_K_minus_2D: int
    chain: list[int]  # h⁰(L²(-p_1-…-p_i)) for i = 1..rho+1
    expected_chain: list[int]
    ok: bool

    def to_dict(self):
        return {
            "h0_K_minus_D": self.h0_K_minus_D,
            "h0_K_minus_2D": self.h0_K_minus_2D,
            "chain": list(self.chain),
            "expected_chain": list(self.expected_chain),
            "ok": self.ok,
        }


def cohomology_checks(frame: CanonicalFrame, fiber: PencilDivisor) -> CohomologyChecks:
    g, d = frame.g, fiber.d
    n = g - d + 1
    rho = g - 2 * n
    a = h0_twisted(frame, fiber_constraints(fiber, [1] * d))
    b = h0_twisted(frame, fiber_constraints(fiber, [2] * d))
    chain, expected = [], []
    for i in range(1, rho + 2):
        mults = [1] * i + [2] * (d - i)
        chain.append(riemann_roch_h0(frame, fiber, mults))
        expected.append(2 * d - i + 1 - g)
    ok = a == n and b == 0 and chain == expected
    return CohomologyChecks(a, b, chain, expected, ok)


# --- tangent space of W¹_d and the scroll vertex ---------------------------------------------------


@dataclass
class Mu0Result:
    image: np.ndarray  # rows: reduced basis of H⁰(K-D) + H⁰(K-D')
    tangent: np.ndarray  # columns: reduced basis of the annihilator in k^g
    dimension: int


def mu0_tangent(frame: CanonicalFrame, sec1: SecantData, sec2: SecantData, rho: int) -> Mu0Result:
    p = frame.p
    stacked = np.concatenate([sec1.W, sec2.W], axis=0)
    image, _ = la.rref(stacked, p)
    tangent = la.right_kernel(stacked, p).T
    dim = tangent.shape[1]
    if dim != rho:
        raise TangentDimUnexpected(f"tangent space dimension {dim}, expected {rho}", dimension=dim)
    return Mu0Result(image, la.canonical_subspace(tangent, p), dim)


@dataclass
class VertexResult:
    vertex: np.ndarray  # columns, canonical form
    annihilator: np.ndarray
    projective_dim: int
    matches: bool


def scroll_vertex(frame: CanonicalFrame, secants: list[SecantData], rho: int) -> VertexResult:
    if len(secants) < 3:
        raise ValueError("need at least three fibers of the pencil")
    p = frame.p
    V = secants[0].U
    for s in secants[1:]:
        V = la.span_intersection(V, s.U, p)
    V = la.canonical_subspace(V, p)
    if V.shape[1] != rho:
        raise VertexDimUnexpected(f"vertex has projective dimension {V.shape[1] - 1}, expected {rho - 1}")
    mu = mu0_tangent(frame, secants[0], secants[1], rho)
    matches = V.shape == mu.tangent.shape and np.array_equal(V, mu.tangent)
    return VertexResult(V, mu.tangent, V.shape[1] - 1, matches)
