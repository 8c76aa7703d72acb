"""Per-fiber pipeline, the fiber-RNC and reconstruction experiments, presets, and run reports."""

from __future__ import annotations

import hashlib
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import linalg as la
from .canonical import (
    CanonicalFrame,
    adjoint_basis,
    cohomology_checks,
    make_pencil,
    mu0_tangent,
    pencil_fiber,
    scroll_vertex,
    secant_span,
    sweep_pencil,
)
from .curves import NodalPlaneCurve, curve_from_dict, curve_to_dict, dumps_curve, feasibility_params, random_nodal_curve
from .errors import FociError, NotSplit, ReferenceOverlap
from .field import DEFAULT_PRIME
from . import __version__
from .focal import (
    DIVISOR_ONLY,
    RNC,
    divisor_containment,
    focal_matrix,
    hilbert_classify,
    one_generic_test,
    rank_locus_ideal,
    rnc_injective_sample,
    tangent_space_S,
)
from .ideals import zero_dim_points
from .poly import monomial_vector
from .second_order import (
    chi_deformed,
    left_inverse,
    pencil_fixes_vertex,
    psi_assemble,
    psi_rank_sample,
    second_foci_locus,
    vertex_partition_check,
)

SCHEMA_VERSION = "1.0"


def derive_seed(*parts) -> int:
    text = ":".join(str(x) for x in parts)
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big")


@dataclass
class ExperimentConfig:
    name: str
    g: int
    d: int
    p: int = DEFAULT_PRIME
    master_seed: int = 42
    curves: int = 3
    fibers_per_curve: int = 20
    second_pencil_fibers: int = 10
    conic_fibers: int = 30
    tmax: int = 5
    retries: int = 50
    threads: int = 1
    second_order: bool = True

    def __post_init__(self):
        feasibility_params(self.g, self.d)
        if self.fibers_per_curve < 10:
            raise ValueError("fibers_per_curve must be at least 10")

    def echo(self) -> dict:
        out = asdict(self)
        out.pop("threads")
        return out


PRESETS = {
    "g5d4": dict(g=5, d=4),
    "g6d5": dict(g=6, d=5),
    "g7d5": dict(g=7, d=5),
    "g8d6": dict(g=8, d=6, curves=5, second_order=False),
    "paper-g8-conic": dict(g=8, d=6, curves=5, fibers_per_curve=10, second_pencil_fibers=10, second_order=False),
}


def preset_config(name: str, seed: int = 42, **overrides) -> ExperimentConfig:
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; known: {sorted(PRESETS)}")
    kw = dict(PRESETS[name])
    kw.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(name=name, master_seed=seed, **kw)


# --- worker-side state ------------------------------------------------------------------------------

_STATE: dict = {}


def _curve_state(curve_json: str):
    if curve_json not in _STATE:
        import json

        curve = curve_from_dict(json.loads(curve_json), verify=False)
        _STATE.clear()
        _STATE[curve_json] = {"curve": curve, "frame": adjoint_basis(curve), "pencils": {}, "secants": {}}
    return _STATE[curve_json]


def _pencil(state, node):
    if node not in state["pencils"]:
        state["pencils"][node] = make_pencil(state["curve"], node)
    return state["pencils"][node]


def _secant(state, node, t):
    key = (node, t)
    if key not in state["secants"]:
        fiber = pencil_fiber(_pencil(state, node), t)
        if fiber is None:
            raise NotSplit(f"fiber over t={t} does not split over the ground field", t=t)
        state["secants"][key] = secant_span(state["frame"], fiber)
    return state["secants"][key]


@dataclass
class FiberTask:
    curve_json: str
    node: int
    t: int
    ref_t: int
    vertex: list | None
    tmax: int
    second_order: bool
    seed_tag: str


def _ints(a):
    return [int(x) for x in np.asarray(a).reshape(-1)]


def _point_matches(x, M, p) -> int | None:
    for i in range(M.shape[1]):
        if la.proportional(x, M[:, i], p):
            return i
    return None


def _in_subspace(x, V, p) -> bool:
    if V is None or V.shape[1] == 0:
        return False
    return la.rank(np.concatenate([V, np.asarray(x).reshape(-1, 1)], axis=1), p) == V.shape[1]


def analyze_fiber(task: FiberTask) -> dict:
    """The full per-fiber pipeline; failures become skip records with their error code."""
    rec: dict = {"t": task.t, "pencil": task.node, "status": "ACCEPTED", "classification": None}
    stage = "setup"
    try:
        state = _curve_state(task.curve_json)
        curve: NodalPlaneCurve = state["curve"]
        frame: CanonicalFrame = state["frame"]
        params = curve.params
        p, d, rho = curve.p, curve.d, params.rho
        rng = random.Random(task.seed_tag)
        stage = "secant_span"
        sec = _secant(state, task.node, task.t)
        rec["span_rank"] = d - 1
        stage = "cohomology"
        rec["cohomology"] = cohomology_checks(frame, sec.fiber).to_dict()
        stage = "tangent_space_S"
        ts = tangent_space_S(sec, rho)
        rec["ts_dim"] = int(ts.basis.shape[0])
        rec["pencil_direction"] = _ints(ts.pencil_coords)
        stage = "mu0_tangent"
        ref = _secant(state, task.node, task.ref_t)
        mu = mu0_tangent(frame, sec, ref, rho)
        rec["tangent_dim"] = mu.dimension
        V = None if task.vertex is None else np.array(task.vertex, dtype=np.int64)
        rec["vertex_in_span"] = None if V is None else bool(la.rank(np.concatenate([sec.U, V], axis=1), p) == d - 1)
        rec["vertex_is_annihilator"] = None if V is None else bool(np.array_equal(la.canonical_subspace(V, p), mu.tangent))
        stage = "focal_matrix"
        tensor = focal_matrix(sec, ts.basis)
        Y = sec.lambda_coords()
        contained, ranks = divisor_containment(tensor, Y)
        rec["divisor_contained"] = contained
        rec["ranks_at_divisor"] = ranks
        probe = [la.rank(tensor.at([rng.randrange(p) for _ in range(d - 1)]), p) for _ in range(20)]
        rec["random_point_ranks_ge2"] = sum(r >= 2 for r in probe)
        stage = "one_generic"
        og = one_generic_test(tensor, rng)
        if og.witness is not None:
            og.note = (og.note + " witness re-verified").strip() if la.rank(tensor.slice_at(og.witness), p) < tensor.n else "witness failed re-verification"
        rec["one_generic"] = og.to_dict()
        stage = "rank_locus"
        minors = rank_locus_ideal(tensor)
        report = hilbert_classify(tensor, minors, Y, d, task.tmax, rng)
        rec["classification"] = report.classification
        rec["hilbert_values"] = report.hilbert_values
        rec["rnc_reference"] = report.reference
        if report.classification not in (RNC, DIVISOR_ONLY):
            rec["status"] = "SKIPPED"
            rec["skip_reason"] = "DEGENERATE_CLASSIFICATION"
            return rec
        L = left_inverse(sec.U, p)
        VL = None if V is None else la.matmul(L, V, p)
        recon: dict = {"points": [], "matched": [], "vertex_points": 0, "extraneous": 0, "unexplained_degree": 0}
        if report.classification == RNC:
            param = report.rnc_param
            rec["rnc"] = {
                "degree": param.degree,
                "divisor_on_curve": all(t is not None for t in param.divisor_params),
                "injective_sample": rnc_injective_sample(param, rng),
            }
            if task.second_order:
                stage = "second_order"
                psi = psi_assemble(sec, tensor, param, rho)
                res = second_foci_locus(psi, rho, param, VL)
                verdict = vertex_partition_check(res, param, d, rho)
                psi_ranks = psi_rank_sample(psi, rng)
                pen_def = chi_deformed(sec, ts.pencil_c, rho)
                so = {
                    "a_block_identity": psi.substitution_identity,
                    "psi_ranks": psi_ranks,
                    "total_degree": res.to_dict()["total_degree"],
                    "bound_ok": (not res.degenerate) and res.total_degree <= d + rho,
                    "result": res.to_dict(),
                    "partition": verdict.to_dict(),
                    "pencil_fixes_vertex": None if V is None else pencil_fixes_vertex(pen_def, V, p),
                    "value_part_consistent": bool(np.array_equal(pen_def.T_val, tensor.T)),
                }
                rec["second_order"] = so
                for t, _ in res.divisor_roots:
                    x = la.matmul(sec.U, param.at(t), p)
                    recon["points"].append(_ints(x))
                for t, m in res.vertex_roots:
                    x = la.matmul(sec.U, param.at(t), p)
                    if _in_subspace(x, V, p):
                        recon["vertex_points"] += m
                    else:
                        recon["extraneous"] += m
                for t, m in res.unexplained:
                    recon["extraneous"] += m
                recon["unexplained_degree"] = res.unexplained_degree
                recon["vertex_points"] += res.vertex_nonrational_degree
        else:
            stage = "rank_one_points"
            zd = zero_dim_points(minors, d - 1, p, rng)
            rec["rank_one_points"] = {"length": zd.length, "count": len(zd.points), "unexplained": zd.unexplained}
            for y, m in zd.points:
                recon["points"].append(_ints(la.matmul(sec.U, y, p)))
            recon["unexplained_degree"] = zd.unexplained
        for x in recon["points"]:
            recon["matched"].append(_point_matches(np.array(x), sec.M, p))
        recon["divisor"] = [_ints(sec.M[:, i]) for i in range(d)]
        rec["reconstruction"] = recon
        return rec
    except FociError as exc:
        rec["status"] = "SKIPPED"
        rec["skip_reason"] = exc.code
        rec["skip_stage"] = stage
        rec["skip_detail"] = str(exc)
        return rec


# --- fiber-RNC experiment ---------------------------------------------------------------------------


def veronese_rank(points, p) -> int:
    return la.rank(np.array([monomial_vector(P, 2, p) for P in points]), p)


def on_common_rnc(points, p) -> bool | None:
    """Do the points of P^{n-1} lie on one rational normal curve? None when undetermined."""
    pts = [np.asarray(P, dtype=np.int64) % p for P in points]
    n = len(pts[0])
    if n == 2:
        return True
    if n == 3:
        return veronese_rank(pts, p) < 6 if len(pts) >= 6 else None
    if len(pts) <= n + 2:
        return None
    base = np.stack(pts[:n], axis=1)
    if la.rank(base, p) < n:
        return None
    # coordinates with the first n points as the standard basis, point n+1 as (1,…,1)
    Binv = la.inverse(base, p)
    u = la.matmul(Binv, pts[n], p)
    if np.any(u == 0):
        return None
    S = la.matmul(np.diag([pow(int(x), p - 2, p) for x in u]), Binv, p)
    q = la.matmul(S, pts[n + 1], p)
    if np.any(q == 0) or len(set(_ints(q))) < n:
        return None
    a = np.array([(-pow(int(x), p - 2, p)) % p for x in q], dtype=np.int64)
    ones = np.ones(n, dtype=np.int64)
    for P in pts[n + 2:]:
        z = la.matmul(S, P, p)
        if np.any(z == 0):
            nz = np.flatnonzero(z)
            if len(nz) != 1:
                return False
            continue
        zi = np.array([pow(int(x), p - 2, p) for x in z], dtype=np.int64)
        if la.rank(np.stack([zi, ones, a]), p) > 2:
            return False
    return True


def fiber_image_points(frame: CanonicalFrame, reference, fiber) -> list[np.ndarray]:
    """Images of the fiber's points under the forms vanishing on the reference fiber."""
    ref_pts = set(reference.fiber.points)
    if any(P in ref_pts for P in fiber.fiber.points):
        raise ReferenceOverlap("tested fiber shares a point with the reference fiber")
    W0 = reference.W
    return [la.matmul(W0, fiber.M[:, i], frame.p) for i in range(fiber.d)]


def planted_control(n: int, count: int, p: int, rng: random.Random) -> bool | None:
    """Points on a random rational normal curve of P^{n-1}: the detector must say yes."""
    A = np.array([[rng.randrange(p) for _ in range(n)] for _ in range(n)], dtype=np.int64)
    ts = rng.sample(range(1, p), count)
    pts = [la.matmul(A, np.array([pow(t, k, p) for k in range(n)]), p) for t in ts]
    return on_common_rnc(pts, p)


def fiber_rnc_experiment(curve: NodalPlaneCurve, frame: CanonicalFrame, sweeps: dict, target: int, seed: int) -> dict:
    params = curve.params
    n, d, p = params.n, params.d, curve.p
    rng = random.Random(seed)
    out: dict = {"n": n, "d": d, "decisive": d > n + 2, "vacuous": n == 2, "fibers": []}
    if n == 2:
        out.update(tested=0, on_rnc=0, positive_control=None)
        return out
    tested = on = 0
    for node in sorted(sweeps):
        split = sweeps[node]
        if len(split) < 2:
            continue
        pen = make_pencil(curve, node)
        ref = None
        for t in split:
            if tested >= target:
                break
            try:
                sec = secant_span(frame, pencil_fiber(pen, t))
            except FociError as exc:
                out["fibers"].append({"pencil": node, "t": t, "skipped": exc.code})
                continue
            if ref is None:
                ref = sec
                out.setdefault("references", []).append({"pencil": node, "t": t})
                continue
            try:
                pts = fiber_image_points(frame, ref, sec)
            except ReferenceOverlap as exc:
                out["fibers"].append({"pencil": node, "t": t, "skipped": exc.code})
                continue
            verdict = on_common_rnc(pts, p)
            row = {"pencil": node, "t": t, "on_rnc": verdict}
            if n == 3:
                row["veronese_rank"] = veronese_rank(pts, p)
            out["fibers"].append(row)
            tested += 1
            on += bool(verdict)
        if tested >= target:
            break
    out["tested"] = tested
    out["on_rnc"] = on
    out["positive_control"] = planted_control(n, max(d, n + 3), p, rng)
    return out


# --- reconstruction ---------------------------------------------------------------------------------


def torelli_reconstruct(records: list[dict]) -> dict:
    """Aggregate per-fiber reconstructions: every point must be a divisor point, every
    divisor point must be recovered, and anything else must lie in the vertex."""
    used = [r for r in records if r.get("status") == "ACCEPTED" and "reconstruction" in r]
    expected = matched = extraneous = 0
    mismatches = []
    pencils = sorted({r["pencil"] for r in used})
    for r in used:
        rec = r["reconstruction"]
        d = len(rec["divisor"])
        expected += d
        hit = {i for i in rec["matched"] if i is not None}
        matched += len(hit)
        for x, i in zip(rec["points"], rec["matched"]):
            if i is None:
                mismatches.append({"pencil": r["pencil"], "t": r["t"], "point": x})
        extraneous += rec["extraneous"] + rec["unexplained_degree"]
    coverage = matched / expected if expected else 0.0
    ok = bool(used) and not mismatches and matched == expected and extraneous == 0
    return {
        "fibers_used": len(used),
        "pencils": pencils,
        "points_expected": expected,
        "points_recovered": matched,
        "coverage": coverage,
        "extraneous_nonvertex": extraneous + len(mismatches),
        "mismatches": mismatches,
        "verdict": "PASS" if ok else "FAIL",
    }


# --- orchestration ----------------------------------------------------------------------------------


def select_fibers(split: list[int], count: int, exclude: set, rng: random.Random) -> list[int]:
    pool = [t for t in split if t not in exclude]
    if len(pool) <= count:
        return pool
    return sorted(rng.sample(pool, count))


def pencil_summary(curve, frame, node, sweep, rho) -> dict:
    info = {"node": node, "split": len(sweep.split), "degenerate": len(sweep.degenerate), "attempted": sweep.attempted}
    pen = make_pencil(curve, node)
    secs = []
    for t in sweep.split:
        try:
            secs.append(secant_span(frame, pencil_fiber(pen, t)))
        except FociError:
            continue
        if len(secs) == 4:
            break
    info["vertex_fibers"] = [s.fiber.t for s in secs]
    try:
        vx = scroll_vertex(frame, secs, rho)
        info["vertex"] = vx.vertex.tolist()
        info["vertex_projective_dim"] = vx.projective_dim
        info["vertex_matches_annihilator"] = vx.matches
    except (FociError, ValueError) as exc:
        info["vertex"] = None
        info["vertex_error"] = getattr(exc, "code", str(exc))
    supports = [set(s.fiber.points) for s in secs]
    info["disjoint_supports"] = all(not (a & b) for i, a in enumerate(supports) for b in supports[i + 1:])
    return info


def run_tasks(tasks, threads):
    if threads <= 1:
        return [analyze_fiber(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(analyze_fiber, tasks, chunksize=4))


def census(records: list[dict]) -> dict:
    skipped: dict = {}
    for r in records:
        if r["status"] != "ACCEPTED":
            skipped[r["skip_reason"]] = skipped.get(r["skip_reason"], 0) + 1
    accepted = sum(r["status"] == "ACCEPTED" for r in records)
    return {
        "attempted": len(records),
        "accepted": accepted,
        "skipped": len(records) - accepted,
        "skip_reasons": dict(sorted(skipped.items())),
    }


def classification_summary(records: list[dict]) -> dict:
    out: dict = {}
    for r in records:
        if r["status"] != "ACCEPTED":
            continue
        key = str(r["pencil"])
        out.setdefault(key, {})
        out[key][r["classification"]] = out[key].get(r["classification"], 0) + 1
    verdicts = {max(v, key=v.get) for v in out.values()}
    return {"by_pencil": out, "pencils_agree": len(verdicts) <= 1}


def generate_curves(config: ExperimentConfig) -> list[NodalPlaneCurve]:
    params = feasibility_params(config.g, config.d)
    return [
        random_nodal_curve(params, derive_seed(config.master_seed, config.name, "curve", i), config.p, config.retries)
        for i in range(config.curves)
    ]


def run_curve_experiments(config: ExperimentConfig, curve: NodalPlaneCurve, index: int, threads: int) -> dict:
    params = curve.params
    frame = adjoint_basis(curve)
    curve_json = dumps_curve(curve)
    rng = random.Random(derive_seed(config.master_seed, config.name, "select", index))
    nodes = [curve.marked_node_index] + [i for i in range(curve.delta) if i != curve.marked_node_index]
    sweeps: dict = {}
    pencils = []
    tasks = []
    plan = [(nodes[0], config.fibers_per_curve)]
    if config.second_pencil_fibers and len(nodes) > 1:
        plan.append((nodes[1], config.second_pencil_fibers))
    for node, count in plan:
        sw = sweep_pencil(make_pencil(curve, node))
        sweeps[node] = sw.split
        info = pencil_summary(curve, frame, node, sw, params.rho)
        pencils.append(info)
        vfib = info["vertex_fibers"]
        if len(vfib) < 2:
            continue
        chosen = select_fibers(sw.split, count, set(vfib[:1]), rng)
        for t in chosen:
            tasks.append(
                FiberTask(
                    curve_json,
                    node,
                    t,
                    vfib[0],
                    info["vertex"],
                    config.tmax,
                    config.second_order,
                    f"{config.master_seed}:{config.name}:{index}:{node}:{t}",
                )
            )
    records = run_tasks(tasks, threads)
    # top up the fiber-RNC experiment from further pencils when the first ones are short
    conic_nodes = dict(sweeps)
    total_split = sum(max(len(v) - 1, 0) for v in conic_nodes.values())
    for node in nodes[len(plan):]:
        if total_split >= config.conic_fibers or params.n == 2:
            break
        conic_nodes[node] = sweep_pencil(make_pencil(curve, node)).split
        total_split += max(len(conic_nodes[node]) - 1, 0)
    fiber_rnc = fiber_rnc_experiment(
        curve, frame, conic_nodes, config.conic_fibers, derive_seed(config.master_seed, config.name, "control", index)
    )
    return {
        "curve_ref": {
            "index": index,
            "seed": curve.seed,
            "case": params.case,
            "sha256": hashlib.sha256(curve_json.encode()).hexdigest(),
        },
        "curve": curve_to_dict(curve),
        "pencils": pencils,
        "census": census(records),
        "classification": classification_summary(records),
        "fibers": records,
        "experiments": {"fiber_rnc": fiber_rnc, "torelli": torelli_reconstruct(records)},
    }


def run_experiment(config: ExperimentConfig, threads: int | None = None, timing: bool = False) -> dict:
    threads = config.threads if threads is None else threads
    start = time.perf_counter()
    curves = generate_curves(config)
    results = [run_curve_experiments(config, c, i, threads) for i, c in enumerate(curves)]
    report = {
        "schema_version": SCHEMA_VERSION,
        "versions": {"package": __version__},
        "config": config.echo(),
        "curves": results,
        "timing": None,
    }
    if timing:
        report["timing"] = {"seconds": round(time.perf_counter() - start, 3), "threads": threads}
    return report


def run_preset(name: str, seed: int = 42, threads: int = 1, timing: bool = False, **overrides) -> dict:
    return run_experiment(preset_config(name, seed, **overrides), threads=threads, timing=timing)
