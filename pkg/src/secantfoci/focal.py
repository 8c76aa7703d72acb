"""First-order focal theory of the secant family: tangent space of the parameter space,
the focal matrix of linear forms, 1-genericity, and the rank-one locus."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

import numpy as np

from . import linalg as la
from . import upoly as up
from .canonical import SecantData, pencil_motion
from .errors import ClassifyAmbiguous, ParamRankDrop, TSDimUnexpected, UnsupportedShape
from .ideals import hilbert_function
from .poly import Poly, determinant

GENERIC_EXACT = "GENERIC_EXACT"
GENERIC_SAMPLED = "GENERIC_SAMPLED"
NOT_GENERIC = "NOT_GENERIC"

DIVISOR_ONLY = "DIVISOR_ONLY"
RNC = "RNC"
DEGENERATE = "DEGENERATE"


@dataclass
class TangentSpaceS:
    basis: np.ndarray  # (rho+1) × d, reduced echelon rows
    pencil_c: np.ndarray  # motion coefficients of the pencil direction
    pencil_coords: np.ndarray  # the same vector in terms of ``basis``


def motion_matrix(sec: SecantData) -> np.ndarray:
    """n × d matrix Q with Q·c = W·M′(c)·κ."""
    WJ = la.matmul(sec.W, sec.Mjet, sec.p)
    return WJ * sec.kappa[None, :] % sec.p


def tangent_space_S(sec: SecantData, rho: int) -> TangentSpaceS:
    p = sec.p
    B = la.right_kernel(motion_matrix(sec), p)
    if B.shape[0] != rho + 1:
        raise TSDimUnexpected(f"tangent space has dimension {B.shape[0]}, expected {rho + 1}", dimension=int(B.shape[0]))
    c = pencil_motion(sec.fiber)
    coords = la.particular_solution(B.T, c, p)
    return TangentSpaceS(B, c, coords)


@dataclass
class FocalTensor:
    """T[a, b, i]: coefficient of y_i in entry (a, b); rows a index the left kernel W."""

    T: np.ndarray
    p: int
    tangent_basis: np.ndarray | None = None
    secant: SecantData | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return self.T.shape[0]

    @property
    def cols(self) -> int:
        return self.T.shape[1]

    @property
    def nvars(self) -> int:
        return self.T.shape[2]

    def at(self, y) -> np.ndarray:
        """Scalar n × (rho+1) matrix at Λ-coordinates y."""
        return np.tensordot(self.T, np.asarray(y, dtype=np.int64), axes=([2], [0])) % self.p

    def slice_at(self, v) -> np.ndarray:
        """n × (d-1) scalar matrix Σ_b v_b·T[:, b, :]."""
        return np.tensordot(self.T, np.asarray(v, dtype=np.int64), axes=([1], [0])) % self.p

    def entry_forms(self) -> list[list[Poly]]:
        return [[Poly.linear(self.T[a, b], self.p) for b in range(self.cols)] for a in range(self.n)]


def focal_matrix(sec: SecantData, basis: np.ndarray) -> FocalTensor:
    p, d = sec.p, sec.d
    WJ = la.matmul(sec.W, sec.Mjet, p)[:, : d - 1]
    T = (WJ[:, None, :] * np.asarray(basis, dtype=np.int64)[None, :, : d - 1]) % p
    return FocalTensor(T, p, np.asarray(basis), sec)


def divisor_containment(tensor: FocalTensor, coords: np.ndarray) -> tuple[bool, list[int]]:
    ranks = [la.rank(tensor.at(y), tensor.p) for y in coords]
    return all(r <= 1 for r in ranks), ranks


# --- 1-genericity --------------------------------------------------------------------------------


@dataclass
class OneGenericResult:
    verdict: str
    witness: list[int] | None = None
    samples: int = 0
    note: str = ""

    def to_dict(self):
        return {"verdict": self.verdict, "witness": self.witness, "samples": self.samples, "note": self.note}


def _maximal_minors(tensor: FocalTensor) -> list[Poly]:
    """n × n minors of Σ_b v_b T[:, b, :] as forms in v."""
    p, n, m = tensor.p, tensor.n, tensor.nvars
    entries = [[Poly.linear(tensor.T[a, :, i], p) for i in range(m)] for a in range(n)]
    out = []
    for cols in itertools.combinations(range(m), n):
        D = determinant([[entries[a][i] for i in cols] for a in range(n)])
        if not D.is_zero():
            out.append(D)
    return out


def _binary_coeffs(F: Poly, degree: int) -> list[int]:
    """Coefficients in t of F(t, 1) for a form in two variables."""
    c = [0] * (degree + 1)
    for (a, _), v in F.terms.items():
        c[a] = v
    return c


def _witness_rank_drops(tensor: FocalTensor, v) -> bool:
    return la.rank(tensor.slice_at(v), tensor.p) < tensor.n


def _ternary_slice(F: Poly, w0: int, p: int) -> list[int]:
    """Coefficients in w2 of F(w0, 1, w2)."""
    deg = F.degree()
    c = [0] * (deg + 1)
    for (a, _, k), v in F.terms.items():
        c[k] = (c[k] + v * pow(w0, a, p)) % p
    return up.trim(c, p)


def _one_generic_rho1(tensor, minors) -> OneGenericResult:
    p, n = tensor.p, tensor.n
    if not minors:
        return OneGenericResult(NOT_GENERIC, [1, 0], note="all maximal minors vanish")
    affine, inf_mult = up.form_gcd([(_binary_coeffs(F, n), n) for F in minors], p)
    if up.deg(affine) <= 0 and inf_mult == 0:
        return OneGenericResult(GENERIC_EXACT)
    for t, _ in up.form_roots(affine, inf_mult, p):
        v = [1, 0] if t == p else [t, 1]
        if _witness_rank_drops(tensor, v):
            return OneGenericResult(NOT_GENERIC, v)
    return OneGenericResult(NOT_GENERIC, None, note="common zero of the minors over an extension field")


def _one_generic_rho2(tensor, minors, rng, attempts: int = 3) -> OneGenericResult:
    p, n = tensor.p, tensor.n
    if not minors:
        return OneGenericResult(NOT_GENERIC, [1, 0, 0], note="all maximal minors vanish")
    persistent = True
    for _ in range(attempts):
        while True:
            A = np.array([[rng.randrange(p) for _ in range(3)] for _ in range(3)], dtype=np.int64)
            if la.det(A, p):
                break
        w = [Poly.var(3, p, i) for i in range(3)]
        images = [w[0] * int(A[i, 0]) + w[1] * int(A[i, 1]) + w[2] * int(A[i, 2]) for i in range(3)]
        G = [F.substitute(images) for F in minors]
        while True:
            G1 = Poly(3, p)
            for F in G:
                G1 = G1 + F * rng.randrange(1, p)
            if G1.terms.get((0, 0, n), 0):
                break
        lead = G1.terms[(0, 0, n)]
        # common zeros on the line w1 = 0 are treated directly: forms in (w0, w2)
        line = [Poly(2, p, {(a, k): c for (a, b, k), c in F.terms.items() if b == 0}) for F in G]
        on_line = up.form_gcd([(_binary_coeffs(F, n), n) for F in line], p)
        xs = list(range(1, n * n + 4))
        res = []
        for Gk in G:
            vals = []
            for x in xs:
                a = _ternary_slice(G1, x, p)
                b = _ternary_slice(Gk, x, p)
                vals.append(up.resultant(a, b, p) * pow(lead, n - up.deg(b), p) % p if b else 0)
            res.append(up.interpolate(xs, vals, n * n, p))
        R = up.gcd_many([r for r in res if r], p)
        candidates = []
        for r_, _ in (up.roots_in_fp(R, p) if up.deg(R) > 0 else []):
            g = up.gcd_many([_ternary_slice(F, r_, p) for F in G], p)
            if up.deg(g) > 0:
                for z, _ in up.roots_in_fp(g, p):
                    candidates.append([r_, 1, z])
        rational_deg = sum(m for _, m in up.roots_in_fp(R, p)) if up.deg(R) > 0 else 0
        for t, _ in up.form_roots(*on_line, p) if (up.deg(on_line[0]) > 0 or on_line[1]) else []:
            candidates.append([1, 0, 0] if t == p else [t, 0, 1])
        for wv in candidates:
            v = [int(x) for x in la.matmul(A, np.array(wv), p)]
            if _witness_rank_drops(tensor, v):
                return OneGenericResult(NOT_GENERIC, v)
        nonrational = max(up.deg(R), 0) - rational_deg
        line_nonrational = up.deg(on_line[0]) > 0 and not up.roots_in_fp(on_line[0], p)
        if nonrational == 0 and not line_nonrational:
            return OneGenericResult(GENERIC_EXACT)
        persistent = persistent and True
    return OneGenericResult(NOT_GENERIC, None, note="resultant residue persists without rational common zero")


def _one_generic_sampled(tensor, rng, samples: int) -> OneGenericResult:
    p, n, k = tensor.p, tensor.n, tensor.cols
    basis = [list(np.eye(k, dtype=np.int64)[i]) for i in range(k)]
    for v in basis:
        if _witness_rank_drops(tensor, v):
            return OneGenericResult(NOT_GENERIC, [int(x) for x in v], samples=k)
    done = k
    nrng = np.random.default_rng(rng.randrange(2**63))
    batch = 4096
    while done < samples:
        V = nrng.integers(0, p, size=(batch, k), dtype=np.int64)
        H = np.einsum("abi,tb->tai", tensor.T, V) % p
        for j in range(batch):
            if not V[j].any():
                continue
            if la.rank(H[j], p) < n:
                return OneGenericResult(NOT_GENERIC, [int(x) for x in V[j]], samples=done + j + 1)
        done += batch
    return OneGenericResult(GENERIC_SAMPLED, samples=done)


def one_generic_test(tensor: FocalTensor, rng: random.Random | None = None, samples: int | None = None) -> OneGenericResult:
    rng = rng or random.Random(0)
    rho = tensor.cols - 1
    if rho >= 3:
        return _one_generic_sampled(tensor, rng, samples if samples is not None else 10 * tensor.p)
    minors = _maximal_minors(tensor)
    if rho == 1:
        return _one_generic_rho1(tensor, minors)
    if rho == 2:
        return _one_generic_rho2(tensor, minors, rng)
    # rho = 0: a single column, generic iff it has no zero... only the column itself
    return OneGenericResult(GENERIC_EXACT if not _witness_rank_drops(tensor, [1]) else NOT_GENERIC)


# --- rank-one locus --------------------------------------------------------------------------------


def rank_locus_ideal(tensor: FocalTensor) -> list[Poly]:
    E = tensor.entry_forms()
    out: list[Poly] = []
    seen = set()
    for a, a2 in itertools.combinations(range(tensor.n), 2):
        for b, b2 in itertools.combinations(range(tensor.cols), 2):
            Q = E[a][b] * E[a2][b2] - E[a][b2] * E[a2][b]
            if Q.is_zero():
                continue
            key = tuple(Q.sorted_terms())
            if key not in seen:
                seen.add(key)
                out.append(Q)
    return out


def all_rank_minors(tensor: FocalTensor) -> list[Poly]:
    """Every 2×2 minor in generation order, zeros included."""
    E = tensor.entry_forms()
    return [
        E[a][b] * E[a2][b2] - E[a][b2] * E[a2][b]
        for a, a2 in itertools.combinations(range(tensor.n), 2)
        for b, b2 in itertools.combinations(range(tensor.cols), 2)
    ]


def hankel_tensor(rows: int, cols: int, p: int) -> FocalTensor:
    """Catalecticant model: entry (a, b) = y_{a+b} in rows + cols - 1 variables."""
    m = rows + cols - 1
    T = np.zeros((rows, cols, m), dtype=np.int64)
    for a in range(rows):
        for b in range(cols):
            T[a, b, a + b] = 1
    return FocalTensor(T, p)


_REFERENCE: dict = {}


def rnc_reference(rows: int, cols: int, p: int, tmax: int) -> list[int]:
    key = (rows, cols, p, tmax)
    if key not in _REFERENCE:
        H = hankel_tensor(rows, cols, p)
        _REFERENCE[key] = hilbert_function(rank_locus_ideal(H), H.nvars, p, tmax)
    return _REFERENCE[key]


@dataclass
class RncParam:
    coeffs: np.ndarray  # (d-1) × (d-1): coordinate i of γ is Σ_k coeffs[i, k] t^k
    degree: int
    p: int
    divisor_params: list[int | None]
    orientation: str

    def at(self, t: int) -> np.ndarray:
        return np.array([up.form_eval(list(r), self.degree, t, self.p) for r in self.coeffs], dtype=np.int64)

    def to_dict(self):
        return {
            "degree": self.degree,
            "coeffs": self.coeffs.tolist(),
            "divisor_params": list(self.divisor_params),
            "orientation": self.orientation,
        }


@dataclass
class RankLocusReport:
    minors: list[Poly]
    divisor_contained: bool
    hilbert_values: list[int]  # HF(t), t = 1..tmax
    reference: list[int]
    classification: str
    rnc_param: RncParam | None = None
    witnesses: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "minors": len(self.minors),
            "divisor_contained": self.divisor_contained,
            "hilbert_values": list(self.hilbert_values),
            "reference": list(self.reference),
            "classification": self.classification,
            "rnc_param": None if self.rnc_param is None else self.rnc_param.to_dict(),
            "witnesses": self.witnesses,
        }


def _moving_matrix(tensor: FocalTensor, t: int) -> np.ndarray:
    """The linear system in y whose kernel is γ(t), for the side of length 2."""
    p = tensor.p
    t0, t1 = (1, 0) if t == p else (t, 1)
    if tensor.cols == 2:
        return (t1 * tensor.T[:, 0, :] - t0 * tensor.T[:, 1, :]) % p
    return (t1 * tensor.T[0, :, :] - t0 * tensor.T[1, :, :]) % p


def rnc_parametrize(tensor: FocalTensor, minors: list[Poly], divisor_coords, rng: random.Random | None = None) -> RncParam:
    rng = rng or random.Random(0)
    p, m = tensor.p, tensor.nvars
    if tensor.cols == 2:
        orientation = "columns"
    elif tensor.n == 2:
        orientation = "rows"
    else:
        raise UnsupportedShape(f"no side of length 2 in a {tensor.n}×{tensor.cols} matrix")
    deg = m - 1
    if _moving_matrix(tensor, 0).shape[0] != deg:
        raise UnsupportedShape("moving system is not square minus one")
    xs = list(range(deg + 3))
    vals = []
    for x in xs:
        C = _moving_matrix(tensor, x)
        vals.append([(-1) ** i * la.det(np.delete(C, i, axis=1), p) % p for i in range(m)])
    coeffs = np.zeros((m, deg + 1), dtype=np.int64)
    for i in range(m):
        c = up.interpolate(xs, [v[i] for v in vals], deg, p)
        coeffs[i, : len(c)] = c
    param = RncParam(coeffs, deg, p, [], orientation)
    # corank exactly 1 at sampled parameters
    drops = 0
    for _ in range(5):
        t = rng.randrange(p)
        if la.rank(_moving_matrix(tensor, t), p) != deg or not param.at(t).any():
            drops += 1
    if drops >= 3 or not coeffs.any():
        raise ParamRankDrop("moving system does not have corank one")
    # every minor vanishes identically on γ: degree 2·deg, so 2·deg+1 points decide
    for t in range(2 * deg + 1):
        y = param.at(t)
        for Q in minors:
            if Q.evaluate(list(y)) != 0:
                raise ParamRankDrop(f"a minor does not vanish on the parametrization at t={t}")
    params = []
    for y in divisor_coords:
        forms = []
        for i, j in itertools.combinations(range(m), 2):
            f = (coeffs[i] * int(y[j]) - coeffs[j] * int(y[i])) % p
            forms.append((list(f), deg))
        aff, inf_mult = up.form_gcd(forms, p)
        roots = up.form_roots(aff, inf_mult, p) if (up.deg(aff) > 0 or inf_mult) else []
        params.append(roots[0][0] if len(roots) == 1 and roots[0][1] == 1 else None)
    param.divisor_params = params
    return param


def rnc_injective_sample(param: RncParam, rng: random.Random, count: int = 40) -> bool:
    ts = rng.sample(range(param.p + 1), count)
    pts = [param.at(t) for t in ts]
    for i, j in itertools.combinations(range(count), 2):
        if la.proportional(pts[i], pts[j], param.p):
            return False
    return True


def hilbert_classify(
    tensor: FocalTensor, minors: list[Poly], divisor_coords, d: int, tmax: int = 5, rng: random.Random | None = None
) -> RankLocusReport:
    p, m = tensor.p, tensor.nvars
    contained = all(all(Q.evaluate([int(v) for v in y]) == 0 for Q in minors) for y in divisor_coords)
    hf = hilbert_function(minors, m, p, tmax)[1:]
    ref = rnc_reference(min(tensor.n, tensor.cols), max(tensor.n, tensor.cols), p, tmax)[1:]
    if (d - 2) * tmax + 1 <= d:
        raise ClassifyAmbiguous("tmax too small to separate the signatures")
    is_rnc = hf == ref and tensor.n + tensor.cols - 1 == m
    diffs = [hf[0] - 1] + [hf[i] - hf[i - 1] for i in range(1, len(hf))]
    is_div = all(diffs[i + 1] <= diffs[i] for i in range(len(diffs) - 1)) and diffs[-1] == 0 and hf[-1] <= d
    if is_rnc and is_div:
        raise ClassifyAmbiguous("both signatures match")
    report = RankLocusReport(minors, contained, hf, ref, DEGENERATE)
    if is_rnc:
        report.classification = RNC
        report.rnc_param = rnc_parametrize(tensor, minors, divisor_coords, rng)
    elif is_div and contained:
        report.classification = DIVISOR_ONLY
    return report
