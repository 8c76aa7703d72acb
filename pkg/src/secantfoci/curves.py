"""Random nodal plane models of curves with a pencil, their validation, and the curve file format."""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import linalg as la
from . import upoly as up
from .errors import GenerationExhausted, Infeasible, RangeViolation, SchemaError
from .field import DEFAULT_PRIME, inv, is_prime
from .poly import Poly, derivative_matrices, monomial_vector, monomials

MONOMIAL_ORDER = "grlex-xyz"


@dataclass(frozen=True)
class CaseParams:
    g: int
    d: int
    e: int
    delta: int
    rho: int
    n: int
    feasible: bool

    @property
    def case(self) -> str:
        return f"g{self.g}d{self.d}"


def feasibility_params(g: int, d: int) -> CaseParams:
    if g < 5:
        raise RangeViolation(f"genus {g} < 5")
    lo = math.ceil((g + 3) / 2)
    if not lo <= d <= g - 1:
        raise RangeViolation(f"d={d} outside [{lo}, {g - 1}] for g={g}")
    rho = g - 2 * (g - d + 1)
    if rho < 1:
        raise RangeViolation(f"rho={rho} < 1")
    e = d + 2
    delta = d * (d + 1) // 2 - g
    assert (e - 1) * (e - 2) // 2 - delta == g
    feasible = 3 * delta <= e * (e + 3) // 2
    return CaseParams(g=g, d=d, e=e, delta=delta, rho=rho, n=g - d + 1, feasible=feasible)


def normalize_point(P, p: int) -> tuple[int, ...]:
    """Projective representative whose last nonzero coordinate is 1."""
    P = [int(x) % p for x in P]
    for x in reversed(P):
        if x:
            s = inv(x, p)
            return tuple(c * s % p for c in P)
    raise ValueError("zero vector is not a projective point")


@dataclass
class NodalPlaneCurve:
    p: int
    e: int
    g: int
    d: int
    F: Poly
    nodes: list[tuple[int, int, int]]
    marked_node_index: int = 0
    seed: int | None = None
    gradient: list[Poly] = field(init=False, repr=False)

    def __post_init__(self):
        self.nodes = [normalize_point(P, self.p) for P in self.nodes]
        self.gradient = self.F.gradient()

    @property
    def params(self) -> CaseParams:
        return feasibility_params(self.g, self.d)

    @property
    def delta(self) -> int:
        return len(self.nodes)

    @property
    def marked_node(self) -> tuple[int, int, int]:
        return self.nodes[self.marked_node_index]

    def coefficient_vector(self) -> np.ndarray:
        return self.F.to_vector(self.e)

    def with_marked(self, index: int) -> NodalPlaneCurve:
        return NodalPlaneCurve(self.p, self.e, self.g, self.d, self.F, list(self.nodes), index, self.seed)


# --- linear conditions -------------------------------------------------------------------


def singular_condition_matrix(points, e: int, p: int) -> np.ndarray:
    """Rows: the three partials at each point, as functionals on degree-e coefficient vectors."""
    Ds = derivative_matrices(3, e, p)
    rows = []
    for P in points:
        mv = monomial_vector(P, e - 1, p)
        for D in Ds:
            rows.append(D @ mv % p)
    return np.array(rows, dtype=np.int64)


def singular_forms_basis(points, e: int, p: int) -> np.ndarray:
    """Basis (rows) of degree-e forms singular at every given point."""
    return la.right_kernel(singular_condition_matrix(points, e, p), p)


def adjoint_condition_matrix(nodes, e: int, p: int) -> np.ndarray:
    """Rows: evaluation at each node on degree-(e-3) forms."""
    return np.array([monomial_vector(P, e - 3, p) for P in nodes], dtype=np.int64)


# --- validation ---------------------------------------------------------------------------


@dataclass
class ValidationReport:
    checks: dict[str, bool]
    details: dict[str, object]

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    @property
    def failed(self) -> list[str]:
        return [k for k, v in self.checks.items() if not v]

    def to_dict(self):
        return {"ok": self.ok, "checks": dict(self.checks), "failed": self.failed}


def hessian_at(curve: NodalPlaneCurve, P) -> np.ndarray:
    p = curve.p
    return np.array([[h.evaluate(P) for h in gi.gradient()] for gi in curve.gradient], dtype=np.int64) % p


def _det3(a, b, c, p):
    return la.det(np.array([a, b, c]), p)


def _bivariate_chart(F: Poly, T: np.ndarray, p: int) -> Poly:
    """F(T·(x, y, 1)) as a polynomial in x, y."""
    x, y = Poly.var(2, p, 0), Poly.var(2, p, 1)
    one = Poly.const(2, p, 1)
    images = [x * int(T[i, 0]) + y * int(T[i, 1]) + one * int(T[i, 2]) for i in range(3)]
    return F.substitute(images)


def _specialize_x(f: Poly, x0: int, p: int) -> list[int]:
    out = [0] * (f.degree() + 1)
    for (a, b), c in f.terms.items():
        out[b] = (out[b] + c * pow(x0, a, p)) % p
    return up.trim(out, p)


def _y_degree(f: Poly) -> int:
    return max((m[1] for m in f.terms), default=-1)


def singular_locus_probe(curve: NodalPlaneCurve, rng: random.Random) -> tuple[bool, dict]:
    """Resultant probe: affine singular x-coordinates in a random chart must all be node images,
    and no singular point may sit on the chart's line at infinity."""
    p, e = curve.p, curve.e
    for _ in range(20):
        T = np.array([[rng.randrange(p) for _ in range(3)] for _ in range(3)], dtype=np.int64)
        if la.det(T, p) == 0:
            continue
        Tinv = la.inverse(T, p)
        new_nodes = [Tinv @ np.array(P) % p for P in curve.nodes]
        if any(N[2] == 0 for N in new_nodes):
            continue
        xs = [int(N[0]) * inv(int(N[2]), p) % p for N in new_nodes]
        if len(set(xs)) != len(xs):
            continue
        f = _bivariate_chart(curve.F, T, p)
        if _y_degree(f) != e or f.terms.get((0, e), 0) == 0:
            continue
        break
    else:
        return False, {"reason": "no admissible chart"}
    fx, fy = f.diff(0), f.diff(1)
    c1, c2 = rng.randrange(1, p), rng.randrange(1, p)
    partners = [fy, fx + fy * c1, fx + fy * c2]
    bound = e * (e - 1)
    nodes_x = list(range(1, bound + 4))
    lead = f.terms[(0, e)]
    resultants = []
    for h in partners:
        hy = _y_degree(h)
        vals = []
        for x0 in nodes_x:
            a = _specialize_x(f, x0, p)
            b = _specialize_x(h, x0, p)
            if not b:
                vals.append(0)
                continue
            r = up.resultant(a, b, p) * pow(lead, hy - up.deg(b), p) % p
            vals.append(r)
        resultants.append(up.interpolate(nodes_x, vals, bound, p))
    if any(not r for r in resultants):
        return False, {"reason": "resultant vanishes identically (multiple component)"}
    G = up.gcd_many(resultants, p)
    for x0 in xs:
        while up.deg(G) > 0 and up.evaluate(G, x0, p) == 0:
            G, _ = up.divmod_(G, [(-x0) % p, 1], p)
    affine_ok = up.deg(G) == 0
    # line at infinity of the chart: common zeros of F and its partials restricted to z = 0
    x, y = Poly.var(2, p, 0), Poly.var(2, p, 1)
    images = [x * int(T[i, 0]) + y * int(T[i, 1]) for i in range(3)]
    at_inf = [curve.F.substitute(images)] + [gi.substitute(images) for gi in curve.gradient]
    forms = []
    for h in at_inf:
        coeffs = [0] * (h.degree() + 1 if not h.is_zero() else 1)
        for (a, b), c in h.terms.items():
            coeffs[a] = c
        forms.append((coeffs, max(h.degree(), 0)))
    aff, infm = up.form_gcd(forms, p)
    inf_ok = (up.deg(aff) <= 0 and infm == 0) and any(up.trim(c, p) for c, _ in forms)
    return affine_ok and inf_ok, {"extra_singular_degree": max(up.deg(G), 0), "infinity_ok": inf_ok}


def validate_curve(curve: NodalPlaneCurve, seed: int | None = None) -> ValidationReport:
    p = curve.p
    rng = random.Random(f"validate:{curve.seed if seed is None else seed}")
    checks: dict[str, bool] = {}
    details: dict[str, object] = {}

    double = True
    for P in curve.nodes:
        if curve.F.evaluate(P) != 0 or any(gi.evaluate(P) != 0 for gi in curve.gradient):
            double = False
    checks["double_points"] = double

    ranks = [la.rank(hessian_at(curve, P), p) for P in curve.nodes]
    details["hessian_ranks"] = ranks
    checks["ordinary_nodes"] = all(r == 2 for r in ranks)

    q = curve.marked_node
    others = [P for i, P in enumerate(curve.nodes) if i != curve.marked_node_index]
    collinear = [
        (i, j)
        for i in range(len(others))
        for j in range(i + 1, len(others))
        if _det3(q, others[i], others[j], p) == 0
    ]
    checks["no_collinear_with_marked"] = not collinear
    details["collinear_pairs"] = collinear

    H = hessian_at(curve, q)
    good = 0
    trials = 100
    for _ in range(trials):
        R = np.array([rng.randrange(p) for _ in range(3)], dtype=np.int64)
        if int(R @ H % p @ R % p) % p:
            good += 1
    checks["projection_degree"] = good >= 0.99 * trials

    if double and checks["ordinary_nodes"]:
        smooth, info = singular_locus_probe(curve, rng)
        details["singular_probe"] = info
    else:
        smooth = False
    checks["smooth_off_nodes"] = smooth

    A = adjoint_condition_matrix(curve.nodes, curve.e, p)
    adj_dim = len(monomials(3, curve.e - 3)) - la.rank(A, p)
    details["adjoint_dimension"] = adj_dim
    checks["adjoint_dimension"] = adj_dim == curve.g
    return ValidationReport(checks, details)


def random_nodal_curve(
    params: CaseParams, seed: int, p: int = DEFAULT_PRIME, retries: int = 50
) -> NodalPlaneCurve:
    if not params.feasible:
        raise Infeasible(
            f"{params.case}: 3*delta={3 * params.delta} exceeds {params.e * (params.e + 3) // 2}; import a curve instead"
        )
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    rng = random.Random(f"curve:{params.g}:{params.d}:{p}:{seed}")
    e = params.e
    for attempt in range(retries):
        nodes = [(rng.randrange(p), rng.randrange(p), 1) for _ in range(params.delta)]
        K = singular_forms_basis(nodes, e, p)
        if K.shape[0] != len(monomials(3, e)) - 3 * params.delta:
            continue
        coeffs = np.zeros(K.shape[1], dtype=np.int64)
        for row in K:
            coeffs = (coeffs + rng.randrange(1, p) * row) % p
        F = Poly.from_vector(3, e, p, coeffs)
        curve = NodalPlaneCurve(p, e, params.g, params.d, F, nodes, 0, seed)
        if validate_curve(curve).ok:
            return curve
    raise GenerationExhausted(f"no valid {params.case} curve after {retries} attempts", retries=retries)


# --- curve files -----------------------------------------------------------------------------


def curve_to_dict(curve: NodalPlaneCurve) -> dict:
    coeffs = [[m[0], m[1], m[2], c] for m, c in curve.F.sorted_terms()]
    doc = {
        "p": curve.p,
        "e": curve.e,
        "g": curve.g,
        "d": curve.d,
        "monomial_order": MONOMIAL_ORDER,
        "coeffs": coeffs,
        "nodes": [list(P) for P in curve.nodes],
        "marked_node_index": curve.marked_node_index,
    }
    if curve.seed is not None:
        doc["seed"] = curve.seed
    return doc


def _require(cond, msg, **details):
    if not cond:
        raise SchemaError(msg, **details)


def curve_from_dict(doc: dict, verify: bool = True) -> NodalPlaneCurve:
    _require(isinstance(doc, dict), "curve document must be a JSON object")
    for key in ("p", "e", "g", "d", "monomial_order", "coeffs", "nodes", "marked_node_index"):
        _require(key in doc, f"missing field {key!r}", field=key)
    p, e, g, d = doc["p"], doc["e"], doc["g"], doc["d"]
    for key in ("p", "e", "g", "d", "marked_node_index"):
        _require(isinstance(doc[key], int) and not isinstance(doc[key], bool), f"field {key!r} must be an integer")
    _require(is_prime(p) and p > 2, f"p={p} is not an odd prime")
    _require(doc["monomial_order"] == MONOMIAL_ORDER, f"unsupported monomial_order {doc['monomial_order']!r}")
    _require(e == d + 2, f"e={e} must equal d+2={d + 2}")
    terms = {}
    for i, entry in enumerate(doc["coeffs"]):
        _require(
            isinstance(entry, list) and len(entry) == 4 and all(isinstance(v, int) for v in entry),
            f"coeffs[{i}] must be [i, j, k, c]",
            index=i,
        )
        a, b, c, val = entry
        _require(min(a, b, c) >= 0 and a + b + c == e, f"coeffs[{i}] is not a degree-{e} monomial", index=i)
        _require(0 <= val < p, f"coeffs[{i}] coefficient is not a residue", index=i)
        terms[(a, b, c)] = val
    nodes = []
    for i, P in enumerate(doc["nodes"]):
        _require(
            isinstance(P, list) and len(P) == 3 and all(isinstance(v, int) and 0 <= v < p for v in P) and any(P),
            f"nodes[{i}] is not a projective point [x, y, z] of residues",
            index=i,
        )
        nodes.append(tuple(P))
    delta = len(nodes)
    _require((e - 1) * (e - 2) // 2 - delta == g, f"genus formula fails: ({e}-1)({e}-2)/2 - {delta} != {g}")
    _require(0 <= doc["marked_node_index"] < delta, "marked_node_index out of range")
    feasibility_params(g, d)
    curve = NodalPlaneCurve(p, e, g, d, Poly(3, p, terms), nodes, doc["marked_node_index"], doc.get("seed"))
    if verify:
        report = validate_curve(curve)
        _require(report.ok, f"curve invariants fail on load: {report.failed}", failed=report.failed)
    return curve


def dumps_curve(curve: NodalPlaneCurve) -> str:
    return json.dumps(curve_to_dict(curve), indent=1) + "\n"


def loads_curve(text: str, verify: bool = True) -> NodalPlaneCurve:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}", line=exc.lineno)
    return curve_from_dict(doc, verify=verify)


def save_curve(curve: NodalPlaneCurve, path) -> None:
    Path(path).write_text(dumps_curve(curve))


def load_curve(path, verify: bool = True) -> NodalPlaneCurve:
    return loads_curve(Path(path).read_text(), verify=verify)
