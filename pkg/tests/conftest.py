import functools
import itertools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from secantfoci.canonical import adjoint_basis, make_pencil, pencil_fiber, secant_span, sweep_pencil
from secantfoci.curves import feasibility_params, random_nodal_curve

settings.register_profile("default", deadline=None, derandomize=True, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

P = 32003


def leibniz_det(M, p):
    """Determinant by the permutation expansion; an oracle independent of elimination."""
    n = len(M)
    total = 0
    for perm in itertools.permutations(range(n)):
        inversions = sum(perm[i] > perm[j] for i in range(n) for j in range(i + 1, n))
        term = -1 if inversions % 2 else 1
        for i in range(n):
            term = term * int(M[i][perm[i]]) % p
        total += term
    return total % p


def minor_rank(M, p):
    """Largest k with a nonzero k x k minor."""
    M = np.asarray(M)
    rows, cols = M.shape
    for k in range(min(rows, cols), 0, -1):
        for r in itertools.combinations(range(rows), k):
            for c in itertools.combinations(range(cols), k):
                if leibniz_det(M[np.ix_(r, c)], p):
                    return k
    return 0


@functools.lru_cache(maxsize=None)
def curve_for(g, d, seed=0):
    return random_nodal_curve(feasibility_params(g, d), seed, P)


@functools.lru_cache(maxsize=None)
def frame_for(g, d, seed=0):
    return adjoint_basis(curve_for(g, d, seed))


@functools.lru_cache(maxsize=None)
def secants_for(g, d, seed=0, node=0, count=4):
    curve = curve_for(g, d, seed)
    pencil = make_pencil(curve, node)
    split = sweep_pencil(pencil).split
    return tuple(secant_span(frame_for(g, d, seed), pencil_fiber(pencil, t)) for t in split[:count])


@pytest.fixture
def rng():
    import random

    return random.Random(1234)


@functools.lru_cache(maxsize=None)
def preset_report(name, threads=1):
    from secantfoci.experiments import run_preset

    return run_preset(name, 42, threads=threads)


@functools.lru_cache(maxsize=None)
def small_report(threads=1):
    from secantfoci.experiments import ExperimentConfig, run_experiment

    config = ExperimentConfig(name="small", g=7, d=5, curves=1, fibers_per_curve=10, second_pencil_fibers=10, conic_fibers=10)
    return run_experiment(config, threads=threads)


CRITERIA: dict = {}


def record_criterion(number, ok, detail):
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    CRITERIA[number] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for number in sorted(CRITERIA):
            terminalreporter.write_line(CRITERIA[number])
