"""Second-order foci: first-order motion of the rank-one rational normal curve along the
tangent directions of the parameter space, the matrix ψ on P¹, and its rank-one locus."""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field

import numpy as np

from . import linalg as la
from . import upoly as up
from .canonical import SecantData, chart_index
from .errors import DegreeMismatch, InconsistentSystem, LiftObstructed, NormalFormFailed
from .field import DualNumber
from .focal import FocalTensor, RncParam
from .linalg import DualMat
from .poly import derivative_matrices, dual_monomial_vector

INFINITE = math.inf


# --- deformation of the focal matrix over k[ε] ------------------------------------------------------


@dataclass
class DeformedFocal:
    c: np.ndarray
    M: DualMat
    Mjet: DualMat
    W: DualMat
    kappa: DualMat
    basis: DualMat
    T_val: np.ndarray
    T_eps: np.ndarray


def _dual_mul(a: DualMat, b: DualMat, p: int) -> DualMat:
    return a.mul(b, p)


def chi_deformed(sec: SecantData, c, rho: int) -> DeformedFocal:
    """Move point i to p_i + ε·c_i·τ_i and recompute span data and focal tensor over k[ε]."""
    frame, fiber, p = sec.frame, sec.fiber, sec.p
    curve = frame.curve
    c = np.asarray(c, dtype=np.int64) % p
    deg = frame.degree
    Ds = derivative_matrices(3, deg, p)
    dPhi = [frame.coeffs @ D % p for D in Ds]  # g × N_{deg-1}
    Mv, Me, Jv, Je = [], [], [], []
    for i, (P, tau) in enumerate(zip(fiber.points, fiber.tangents)):
        move = [int(c[i]) * x % p for x in tau]
        val, eps = dual_monomial_vector(P, move, deg, p)
        Mv.append(frame.coeffs @ val % p)
        Me.append(frame.coeffs @ eps % p)
        Pe = [DualNumber(a, b, p) for a, b in zip(P, move)]
        k = chart_index(P)
        a_, b_ = [j for j in range(3) if j != k]
        Fa = curve.gradient[a_].evaluate(Pe)
        Fb = curve.gradient[b_].evaluate(Pe)
        tv = [0, 0, 0]
        te = [0, 0, 0]
        tv[a_], te[a_] = (-Fb.value) % p, (-Fb.eps) % p
        tv[b_], te[b_] = Fa.value, Fa.eps
        gv, ge = dual_monomial_vector(P, move, deg - 1, p)
        jv = np.zeros(frame.g, dtype=np.int64)
        je = np.zeros(frame.g, dtype=np.int64)
        for j in range(3):
            dv = dPhi[j] @ gv % p
            de = dPhi[j] @ ge % p
            jv = (jv + tv[j] * dv) % p
            je = (je + tv[j] * de + te[j] * dv) % p
        Jv.append(jv)
        Je.append(je)
    M = DualMat(np.stack(Mv, axis=1), np.stack(Me, axis=1))
    Mjet = DualMat(np.stack(Jv, axis=1), np.stack(Je, axis=1))
    W = la.dual_left_kernel(M, p)
    K = la.dual_right_kernel(M, p)
    # normalize the last entry of κ to -1
    lv, le = int(K.val[0, -1]), int(K.eps[0, -1])
    s = DualNumber(lv, le, p).inverse() * DualNumber(p - 1, 0, p)
    kv = K.val[0] * s.value % p
    ke = (K.eps[0] * s.value + K.val[0] * s.eps) % p
    kappa = DualMat(kv, ke)
    WJ = _dual_mul(W, Mjet, p)
    Q = DualMat(WJ.val * kv[None, :] % p, (WJ.eps * kv[None, :] + WJ.val * ke[None, :]) % p)
    B = la.dual_right_kernel(Q, p)
    if B.shape[0] != rho + 1:
        raise InconsistentSystem("deformed tangent space has the wrong rank")
    d = sec.d
    Tv = (WJ.val[:, None, : d - 1] * B.val[None, :, : d - 1]) % p
    Te = (WJ.eps[:, None, : d - 1] * B.val[None, :, : d - 1] + WJ.val[:, None, : d - 1] * B.eps[None, :, : d - 1]) % p
    return DeformedFocal(c, M, Mjet, W, kappa, B, Tv, Te)


def pencil_fixes_vertex(deformed: DeformedFocal, vertex: np.ndarray, p: int) -> bool:
    """The deformed span still contains every vertex point to first order."""
    return not la.matmul(deformed.W.eps, vertex, p).any()


# --- ψ on the rational normal curve ------------------------------------------------------------------


def left_inverse(U: np.ndarray, p: int) -> np.ndarray:
    """Fixed (d-1) × g matrix L with L·U = I, supported on the first independent rows of U."""
    _, rows = la.rref(U.T, p)
    L = np.zeros((U.shape[1], U.shape[0]), dtype=np.int64)
    L[:, rows] = la.inverse(U[rows, :], p)
    return L


def apolar_second_derivative(zhat, t: int, p: int) -> np.ndarray:
    """Coefficients of D_t²f for f = Σ C(m,k) ẑ_k X^k Y^(m-k) and D_t = ∂_X - t·∂_Y."""
    m = len(zhat) - 1
    a = [math.comb(m, k) * int(zhat[k]) % p for k in range(m + 1)]
    out = np.zeros(m - 1, dtype=np.int64)
    for j in range(m - 1):
        v = a[j + 2] * (j + 2) * (j + 1)
        v -= 2 * t * a[j + 1] * (j + 1) * (m - j - 1)
        v += t * t % p * a[j] * (m - j) * (m - j - 1)
        out[j] = v % p
    return out


def _pair_minors(Tv, Te, y, p):
    """Values, ε-parts and gradients (in y) of every 2×2 minor of the deformed matrix at y."""
    n, k, _ = Tv.shape
    Ev = np.tensordot(Tv, y, axes=([2], [0])) % p
    Ee = np.tensordot(Te, y, axes=([2], [0])) % p
    rows_val, rows_eps, grads = [], [], []
    for a, a2 in itertools.combinations(range(n), 2):
        for b, b2 in itertools.combinations(range(k), 2):
            v = (Ev[a, b] * Ev[a2, b2] - Ev[a, b2] * Ev[a2, b]) % p
            e = (Ee[a, b] * Ev[a2, b2] + Ev[a, b] * Ee[a2, b2] - Ee[a, b2] * Ev[a2, b] - Ev[a, b2] * Ee[a2, b]) % p
            gr = (
                Tv[a, b] * Ev[a2, b2] + Ev[a, b] * Tv[a2, b2] - Tv[a, b2] * Ev[a2, b] - Ev[a, b2] * Tv[a2, b]
            ) % p
            rows_val.append(v)
            rows_eps.append(e)
            grads.append(gr)
    return np.array(rows_val), np.array(rows_eps), np.array(grads)


@dataclass
class PsiMatrix:
    A: np.ndarray  # n × (rho+1) × (d-1): coefficients in t, degree d-2
    B: np.ndarray  # (d-3) × (rho+1) × (d+1): coefficients in t, degree d
    samples: list[int]
    p: int
    substitution_identity: bool

    @property
    def d(self) -> int:
        return self.B.shape[2] - 1

    def at(self, t: int) -> np.ndarray:
        p = self.p
        Av = np.array([[up.form_eval(list(self.A[a, b]), self.d - 2, t, p) for b in range(self.A.shape[1])] for a in range(self.A.shape[0])])
        Bv = np.array([[up.form_eval(list(self.B[a, b]), self.d, t, p) for b in range(self.B.shape[1])] for a in range(self.B.shape[0])])
        return np.concatenate([Av.reshape(-1, self.A.shape[1]), Bv.reshape(-1, self.B.shape[1])], axis=0) % p


def substituted_block(tensor: FocalTensor, param: RncParam) -> np.ndarray:
    """Entry (a, b) of the focal matrix restricted to γ, as coefficient arrays in t."""
    return np.einsum("abi,ik->abk", tensor.T, param.coeffs) % tensor.p


def psi_assemble(sec: SecantData, tensor: FocalTensor, param: RncParam, rho: int, samples: list[int] | None = None) -> PsiMatrix:
    p, d = sec.p, sec.d
    m = d - 2
    ts = samples if samples is not None else list(range(1, 2 * d + 4))
    L = left_inverse(sec.U, p)
    Ginv = la.inverse(param.coeffs, p)
    deformations = [chi_deformed(sec, tensor.tangent_basis[b], rho) for b in range(rho + 1)]
    n = sec.n
    A_samples = np.zeros((n, rho + 1, len(ts)), dtype=np.int64)
    B_samples = np.zeros((m - 1, rho + 1, len(ts)), dtype=np.int64)
    for j, t in enumerate(ts):
        y0 = param.at(t)
        for b, df in enumerate(deformations):
            vals, eps, J = _pair_minors(df.T_val, df.T_eps, y0, p)
            if vals.any():
                raise LiftObstructed(f"γ({t}) is not on the rank-one locus")
            try:
                z = la.particular_solution(J, (-eps) % p, p)
            except InconsistentSystem:
                raise LiftObstructed(f"no first-order lift at t={t}", t=t)
            Uprime = df.M.eps[:, : d - 1]
            w = (la.matmul(sec.U, z, p) + la.matmul(Uprime, y0, p)) % p
            A_samples[:, b, j] = la.matmul(sec.W, w, p)
            zhat = la.matmul(Ginv, la.matmul(L, w, p), p)
            B_samples[:, b, j] = apolar_second_derivative(zhat, t, p)
    A = np.zeros((n, rho + 1, m + 1), dtype=np.int64)
    B = np.zeros((m - 1, rho + 1, d + 1), dtype=np.int64)
    try:
        for a in range(n):
            for b in range(rho + 1):
                c = up.interpolate(ts, list(A_samples[a, b]), m, p)
                A[a, b, : len(c)] = c
        for a in range(m - 1):
            for b in range(rho + 1):
                c = up.interpolate(ts, list(B_samples[a, b]), d, p)
                B[a, b, : len(c)] = c
    except Exception as exc:
        raise DegreeMismatch(f"ψ entry exceeds its expected degree: {exc}")
    identity = np.array_equal(A, substituted_block(tensor, param))
    return PsiMatrix(A, B, list(ts), p, identity)


def psi_rank_sample(psi: PsiMatrix, rng: random.Random, count: int = 5) -> list[int]:
    return [la.rank(psi.at(rng.randrange(psi.p)), psi.p) for _ in range(count)]


# --- the rank-one locus of ψ ---------------------------------------------------------------------


def _form_div(f, g, p):
    """Exact quotient of affine coefficient lists, or None."""
    q, r = up.divmod_(up.trim(f, p), up.trim(g, p), p)
    return q if not up.trim(r, p) else None


@dataclass
class SecondFociResult:
    roots: list[tuple[int, int]]  # rational roots on P¹ (p encodes ∞)
    total_degree: float  # degree of the gcd, INFINITE when every minor vanishes
    nonrational_degree: int
    divisor_roots: list[tuple[int, int]] = field(default_factory=list)
    vertex_roots: list[tuple[int, int]] = field(default_factory=list)
    vertex_nonrational_degree: int = 0
    unexplained: list[tuple[int, int]] = field(default_factory=list)
    unexplained_degree: int = 0
    coincident: list[int] = field(default_factory=list)  # divisor params that also lie on the vertex
    gcd_affine: list[int] = field(default_factory=list)
    gcd_inf: int = 0

    @property
    def degenerate(self) -> bool:
        return self.total_degree == INFINITE

    def to_dict(self):
        return {
            "total_degree": "inf" if self.degenerate else int(self.total_degree),
            "roots": [list(r) for r in self.roots],
            "nonrational_degree": self.nonrational_degree,
            "divisor_roots": [list(r) for r in self.divisor_roots],
            "vertex_roots": [list(r) for r in self.vertex_roots],
            "vertex_nonrational_degree": self.vertex_nonrational_degree,
            "unexplained": [list(r) for r in self.unexplained],
            "unexplained_degree": self.unexplained_degree,
            "coincident": list(self.coincident),
        }


def factor_rank_one_block(A: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Write A = u·r with u a column of forms without common zero and r a row of forms."""
    n, k, deg1 = A.shape
    deg = deg1 - 1
    nz = [a for a in range(n) if A[a].any()]
    if not nz:
        raise NormalFormFailed("restricted focal block is zero")
    row = A[nz[0]]
    aff, inf_mult = up.form_gcd([(list(row[b]), deg) for b in range(k)], p)
    rdeg = deg - (max(up.deg(aff), 0) + inf_mult)
    r = np.zeros((k, rdeg + 1), dtype=np.int64)
    for b in range(k):
        q = _form_div(list(row[b]), aff if aff else [1], p) if up.trim(list(row[b]), p) else []
        if q is None:
            raise NormalFormFailed("row gcd does not divide its entries")
        # a zero at ∞ only lowers the form degree, so the affine quotient is already r_b
        r[b, : len(q)] = q
    ref = next(b for b in range(k) if up.trim(list(r[b]), p))
    u = np.zeros((n, deg - rdeg + 1), dtype=np.int64)
    for a in range(n):
        q = _form_div(list(A[a, ref]), list(r[ref]), p) if up.trim(list(A[a, ref]), p) else []
        if q is None:
            raise NormalFormFailed("block does not factor through the generator row")
        u[a, : len(q)] = q
    recon = np.zeros_like(A)
    for a in range(n):
        for b in range(k):
            prod = up.mul(list(u[a]), list(r[b]), p)
            recon[a, b, : len(prod)] = prod
    if not np.array_equal(recon % p, A % p):
        raise NormalFormFailed("restricted focal block is not of rank one")
    uaff, uinf = up.form_gcd([(list(u[a]), deg - rdeg) for a in range(n)], p)
    if up.deg(uaff) > 0 or uinf:
        raise NormalFormFailed("the column factor has a common zero")
    return u, r


def _vertex_form(param: RncParam, vertex_lambda: np.ndarray, p: int):
    """Gcd of ℓ(γ(t)) over linear forms ℓ vanishing on the vertex (Λ-coordinates)."""
    ann = la.left_kernel(vertex_lambda, p)  # rows ℓ with ℓ·V = 0
    forms = [(list(la.matmul(row, param.coeffs, p)), param.degree) for row in ann]
    return up.form_gcd(forms, p)


def second_foci_locus(
    psi: PsiMatrix, rho: int, param: RncParam | None = None, vertex_lambda: np.ndarray | None = None
) -> SecondFociResult:
    p, d = psi.p, psi.d
    u, r = factor_rank_one_block(psi.A, p)
    k = r.shape[0]
    rdeg = r.shape[1] - 1
    if rdeg != rho:
        raise NormalFormFailed(f"generator row has degree {rdeg}, expected {rho}")
    R = r.T  # (rho+1) × (rho+1): column b holds the coefficients of r_b
    if la.rank(R, p) != k:
        raise NormalFormFailed("generator row entries are dependent")
    P = la.inverse(R, p)  # r·P = (1, t, …, t^ρ)
    rows = [(np.eye(k, dtype=np.int64), rho)]
    for a in range(psi.B.shape[0]):
        Bp = np.einsum("bk,bc->ck", psi.B[a], P) % p
        rows.append((Bp, d))
    forms = []
    for (X, dx), (Y, dy) in itertools.combinations(rows, 2):
        for b, b2 in itertools.combinations(range(k), 2):
            f = up.sub(up.mul(list(X[b]), list(Y[b2]), p), up.mul(list(X[b2]), list(Y[b]), p), p)
            forms.append((f, dx + dy))
    aff, inf_mult = up.form_gcd(forms, p)
    if not any(up.trim(f, p) for f, _ in forms):
        return SecondFociResult([], INFINITE, 0)
    total = max(up.deg(aff), 0) + inf_mult
    roots = up.form_roots(aff, inf_mult, p) if total else []
    nonrational = total - sum(m for _, m in roots)
    res = SecondFociResult(roots, total, nonrational, gcd_affine=aff, gcd_inf=inf_mult)
    if param is not None:
        classify_roots(res, param, vertex_lambda)
    return res


def classify_roots(res: SecondFociResult, param: RncParam, vertex_lambda: np.ndarray | None) -> None:
    p = param.p
    div = {t for t in param.divisor_params if t is not None}
    vaff, vinf = ([], 0)
    if vertex_lambda is not None:
        vaff, vinf = _vertex_form(param, vertex_lambda, p)
    vroots = dict(up.form_roots(vaff, vinf, p)) if (up.deg(vaff) > 0 or vinf) else {}
    res.divisor_roots, res.vertex_roots, res.unexplained = [], [], []
    res.coincident = sorted(t for t in div if t in vroots)
    for t, m in res.roots:
        if t in div:
            res.divisor_roots.append((t, m))
        elif t in vroots:
            res.vertex_roots.append((t, m))
        else:
            res.unexplained.append((t, m))
    # nonrational part of the gcd: explained when it divides the vertex form
    res.vertex_nonrational_degree = 0
    res.unexplained_degree = sum(m for _, m in res.unexplained)
    if res.nonrational_degree:
        rest = list(res.gcd_affine)
        for t, m in res.roots:
            if t != p:
                for _ in range(m):
                    rest = _form_div(rest, [(-t) % p, 1], p)
        common = up.gcd(rest, vaff, p) if up.trim(vaff, p) else [1]
        g = up.deg(common)
        res.vertex_nonrational_degree = g
        res.unexplained_degree += res.nonrational_degree - g


@dataclass
class PartitionVerdict:
    verdict: str
    divisor_count: int
    vertex_count: int
    total_degree: float
    diagnostics: dict

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "divisor_count": self.divisor_count,
            "vertex_count": self.vertex_count,
            "total_degree": "inf" if self.total_degree == INFINITE else int(self.total_degree),
            "diagnostics": self.diagnostics,
        }


def vertex_partition_check(res: SecondFociResult, param: RncParam, d: int, rho: int) -> PartitionVerdict:
    diag: dict = {}
    if res.degenerate:
        return PartitionVerdict("FAIL", 0, 0, INFINITE, {"reason": "every minor vanishes"})
    if res.coincident:
        # a divisor point on the vertex: multiplicities are not separable, logged instead of partitioned
        return PartitionVerdict("COINCIDENT", 0, 0, res.total_degree, {"coincident": list(res.coincident)})
    div_mults = dict(res.divisor_roots)
    missing = [t for t in param.divisor_params if t is None or t not in div_mults]
    bad_mult = [t for t, m in res.divisor_roots if m != 1]
    vcount = sum(m for _, m in res.vertex_roots) + res.vertex_nonrational_degree
    if missing:
        diag["missing_divisor_params"] = [t for t in missing]
    if bad_mult:
        diag["divisor_multiplicity"] = bad_mult
    if res.unexplained or res.unexplained_degree:
        diag["unexplained"] = [
            {"t": t, "gamma": [int(x) for x in param.at(t)], "multiplicity": m} for t, m in res.unexplained
        ]
        diag["unexplained_degree"] = res.unexplained_degree
    ok = (
        not missing
        and not bad_mult
        and res.unexplained_degree == 0
        and vcount == rho
        and res.total_degree == d + rho
    )
    if vcount != rho:
        diag["vertex_count"] = vcount
    return PartitionVerdict("PASS" if ok else "FAIL", len(div_mults), vcount, res.total_degree, diag)
