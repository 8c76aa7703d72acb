"""One test per acceptance criterion; each prints a PASS/FAIL line (collected in the summary)."""

import json
import random

import numpy as np

from secantfoci import linalg as la
from secantfoci.curves import dumps_curve, loads_curve
from secantfoci.report import dumps_report, loads_report, validate_report
from conftest import leibniz_det, minor_rank, preset_report, record_criterion

RHO = {"g5d4": 1, "g6d5": 2, "g7d5": 1, "g8d6": 2, "paper-g8-conic": 2}
ALL_PRESETS = ["g5d4", "g6d5", "g7d5", "g8d6", "paper-g8-conic"]


def accepted(name):
    return [f for c in preset_report(name)["curves"] for f in c["fibers"] if f["status"] == "ACCEPTED"]


def share(items, pred):
    items = list(items)
    return sum(bool(pred(x)) for x in items) / len(items) if items else 0.0


def test_criterion_01_fiber_conics():
    report = preset_report("g8d6")
    curves = report["curves"]
    rows = [c["experiments"]["fiber_rnc"] for c in curves]
    tested = [r["tested"] for r in rows]
    conics = sum(r["on_rnc"] for r in rows)
    controls = all(r["positive_control"] is True for r in rows)
    ok = len(curves) >= 5 and min(tested) >= 30 and conics == 0 and controls and all(r["decisive"] for r in rows)
    conic_preset = sum(c["experiments"]["fiber_rnc"]["on_rnc"] for c in preset_report("paper-g8-conic")["curves"])
    ok = ok and conic_preset == 0
    assert record_criterion(1, ok, f"g8d6 curves={len(curves)} fibers/curve>={min(tested)} conics={conics} controls={controls}; paper-g8-conic conics={conic_preset}")


def test_criterion_02_rho_one_rnc():
    details, ok = [], True
    for name in ["g5d4", "g7d5"]:
        d = preset_report(name)["config"]["d"]
        fibers = accepted(name)
        frac = share(fibers, lambda f: f["classification"] == "RNC")
        rnc = [f for f in fibers if f["classification"] == "RNC"]
        every = all(
            f["rnc"]["degree"] == d - 2
            and f["rnc"]["divisor_on_curve"]
            and f["hilbert_values"][:4] == [(d - 2) * t + 1 for t in range(1, 5)]
            for f in rnc
        )
        ok = ok and frac >= 0.9 and every
        details.append(f"{name} RNC={frac:.0%} structure={'ok' if every else 'bad'}")
    assert record_criterion(2, ok, "; ".join(details))


def test_criterion_03_d_equals_g_minus_one():
    report = preset_report("g6d5")
    frac = share(accepted("g6d5"), lambda f: f["classification"] == "RNC")
    disjoint = all(p["disjoint_supports"] for c in report["curves"] for p in c["pencils"])
    ok = frac >= 0.9 and disjoint
    assert record_criterion(3, ok, f"g6d5 RNC={frac:.0%} disjoint fibers={disjoint}")


def test_criterion_04_divisor_containment():
    total, good = 0, 0
    for name in ALL_PRESETS:
        d = preset_report(name)["config"]["d"]
        for f in accepted(name):
            total += 1
            good += f["divisor_contained"] and len(f["ranks_at_divisor"]) == d and max(f["ranks_at_divisor"]) <= 1
    assert record_criterion(4, total > 0 and good == total, f"{good}/{total} accepted fibers rank<=1 at every divisor point")


def test_criterion_05_one_genericity():
    details, ok = [], True
    for name in ["g5d4", "g6d5", "g7d5", "g8d6"]:
        fibers = accepted(name)
        frac = share(fibers, lambda f: f["one_generic"]["verdict"] == "GENERIC_EXACT")
        witnesses = [f for f in fibers if f["one_generic"]["verdict"] == "NOT_GENERIC"]
        verified = all("re-verified" in f["one_generic"]["note"] for f in witnesses)
        ok = ok and frac >= 0.95 and verified
        details.append(f"{name} exact={frac:.0%} witnesses={len(witnesses)}")
    assert record_criterion(5, ok, "; ".join(details))


def test_criterion_06_cohomology():
    ok, details = True, []
    for name in ALL_PRESETS:
        report = preset_report(name)
        g, d = report["config"]["g"], report["config"]["d"]
        rho = RHO[name]
        for c in report["curves"]:
            fibers = [f for f in c["fibers"] if f["status"] == "ACCEPTED"]
            exact = all(
                f["cohomology"]["h0_K_minus_D"] == g - d + 1
                and f["cohomology"]["h0_K_minus_2D"] == 0
                and f["cohomology"]["chain"] == [2 * d - i + 1 - g for i in range(1, rho + 2)]
                for f in fibers
            )
            ok = ok and exact and len(fibers) >= 10
        details.append(name)
    assert record_criterion(6, ok, f"exact on every accepted fiber (>=10 per curve) of {', '.join(details)}")


def test_criterion_07_tangent_and_vertex():
    ok, details = True, []
    for name in ALL_PRESETS:
        rho = RHO[name]
        fibers = accepted(name)
        tdim = share(fibers, lambda f: f["tangent_dim"] == rho and f["ts_dim"] == rho + 1)
        fiber_vertex = all(f["vertex_is_annihilator"] and f["vertex_in_span"] for f in fibers)
        pencils = [p for c in preset_report(name)["curves"] for p in c["pencils"]]
        vertex = all(p["vertex_matches_annihilator"] and p["vertex_projective_dim"] == rho - 1 for p in pencils)
        ok = ok and tdim >= 0.95 and fiber_vertex and vertex
        details.append(f"{name} dims={tdim:.0%} vertex={'ok' if vertex and fiber_vertex else 'bad'}")
    assert record_criterion(7, ok, "; ".join(details))


def test_criterion_08_second_order_foci():
    ok, details = True, []
    for name in ["g5d4", "g6d5", "g7d5"]:
        so = [f["second_order"] for f in accepted(name)]
        bound = share(so, lambda s: s["bound_ok"])
        partition = share(so, lambda s: s["partition"]["verdict"] == "PASS")
        ranks = [r for s in so for r in s["psi_ranks"]]
        psi = share(ranks, lambda r: r >= 2)
        ident = share(so, lambda s: s["a_block_identity"])
        part_ok = bound == 1.0 and partition >= 0.9 and psi >= 0.9 and ident == 1.0
        ok = ok and part_ok and len(so) > 0
        vertex_counts = sorted({s["partition"]["vertex_count"] for s in so})
        details.append(
            f"{name} bound={bound:.0%} partition={partition:.0%} (vertex points seen {vertex_counts}) psi>=2={psi:.0%} A-identity={ident:.0%}"
        )
    assert record_criterion(8, ok, "; ".join(details))


def test_criterion_09_torelli():
    ok, details = True, []
    for name in ALL_PRESETS:
        summaries = [c["experiments"]["torelli"] for c in preset_report(name)["curves"]]
        good = all(
            s["verdict"] == "PASS"
            and s["fibers_used"] >= 20
            and s["coverage"] == 1.0
            and s["extraneous_nonvertex"] == 0
            and len(s["pencils"]) >= 2
            for s in summaries
        )
        ok = ok and good
        details.append(f"{name} {'PASS' if good else 'FAIL'} ({sum(s['fibers_used'] for s in summaries)} fibers)")
    assert record_criterion(9, ok, "; ".join(details))


def _property_suite(instances=1000):
    rng = random.Random(2024)
    failures = 0
    for k in range(instances):
        p = [2, 3, 7, 32003][k % 4]
        rows, cols = rng.randint(1, 4), rng.randint(1, 4)
        A = np.array([[rng.randrange(p) for _ in range(cols)] for _ in range(rows)], dtype=np.int64)
        if rows > 1 and k % 3 == 0:
            A[-1] = A[0] * rng.randrange(p) % p
        r = la.rank(A, p)
        K, L = la.right_kernel(A, p), la.left_kernel(A, p)
        checks = [
            r == minor_rank(A, p),
            r + K.shape[0] == cols,
            r + L.shape[0] == rows,
            not la.matmul(A, K.T, p).any(),
            not la.matmul(L, A, p).any(),
        ]
        S = A[:, :rows] if cols >= rows else A[:cols, :]
        checks.append(la.det(S, p) == leibniz_det(S, p))
        x = np.array([rng.randrange(p) for _ in range(cols)])
        b = la.matmul(A, x, p)
        checks.append(np.array_equal(la.matmul(A, la.particular_solution(A, b, p), p), b))
        E = np.array([[rng.randrange(p) for _ in range(cols)] for _ in range(rows)], dtype=np.int64)
        try:
            D = la.dual_right_kernel(la.DualMat.of(A, E, p), p)
            prod = la.DualMat.of(A, E, p).mul(D.T, p)
            checks.append(np.array_equal(D.val, K) and not prod.val.any() and not prod.eps.any())
        except Exception as exc:
            checks.append(type(exc).__name__ == "SingularValuePart")
        failures += not all(checks)
    return failures


def test_criterion_10_infrastructure():
    single = dumps_report(preset_report("g5d4", 1))
    multi = dumps_report(preset_report("g5d4", 3))
    same = single == multi
    report_rt = dumps_report(loads_report(single)) == single
    validate_report(json.loads(single))
    curve_doc = preset_report("g8d6")["curves"][0]["curve"]
    text = json.dumps(curve_doc, indent=1) + "\n"
    curve_rt = dumps_curve(loads_curve(text)) == text
    failures = _property_suite(1000)
    ok = same and report_rt and curve_rt and failures == 0
    assert record_criterion(
        10, ok, f"threads 1 vs 3 identical={same} report round-trip={report_rt} curve round-trip={curve_rt} property failures={failures}/1000"
    )
