"""Graded pieces of ideals generated by forms: Hilbert functions and point extraction
for zero-dimensional loci, using only linear algebra on Macaulay matrices."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import linalg as la
from . import upoly as up
from .poly import Poly, monomial_index, monomials


@lru_cache(maxsize=None)
def _product_table(nvars: int, a: int, b: int) -> np.ndarray:
    """idx[i, j] = position of (monomial_i of degree a)·(monomial_j of degree b) in degree a+b."""
    target = monomial_index(nvars, a + b)
    A, B = monomials(nvars, a), monomials(nvars, b)
    out = np.empty((len(A), len(B)), dtype=np.int64)
    for i, m in enumerate(A):
        for j, k in enumerate(B):
            out[i, j] = target[tuple(x + y for x, y in zip(m, k))]
    return out


def macaulay_matrix(forms: list[Poly], degree: int) -> np.ndarray:
    """Rows: monomial multiples of each form, landing in the given degree."""
    if not forms:
        return np.zeros((0, len(monomials(1, 0))), dtype=np.int64)
    nvars, p = forms[0].nvars, forms[0].p
    ncols = len(monomials(nvars, degree))
    rows = []
    for F in forms:
        fd = F.degree()
        if fd > degree:
            continue
        vec = F.to_vector(fd)
        table = _product_table(nvars, degree - fd, fd)
        block = np.zeros((table.shape[0], ncols), dtype=np.int64)
        for i in range(table.shape[0]):
            block[i, table[i]] = vec
        rows.append(block)
    if not rows:
        return np.zeros((0, ncols), dtype=np.int64)
    return np.concatenate(rows, axis=0) % p


@dataclass
class GradedPiece:
    degree: int
    rref: np.ndarray
    pivots: list[int]
    ncols: int

    @property
    def hilbert_value(self) -> int:
        return self.ncols - len(self.pivots)

    @property
    def standard(self) -> list[int]:
        piv = set(self.pivots)
        return [c for c in range(self.ncols) if c not in piv]


def graded_piece(forms: list[Poly], degree: int, nvars: int, p: int) -> GradedPiece:
    ncols = len(monomials(nvars, degree))
    A = macaulay_matrix(forms, degree) if forms else np.zeros((0, ncols), dtype=np.int64)
    if A.shape[0] == 0:
        return GradedPiece(degree, A, [], ncols)
    R, piv = la.rref(A, p)
    return GradedPiece(degree, R, piv, ncols)


def hilbert_function(forms: list[Poly], nvars: int, p: int, tmax: int) -> list[int]:
    """[HF(0), HF(1), …, HF(tmax)] of S/(forms)."""
    return [graded_piece(forms, t, nvars, p).hilbert_value for t in range(tmax + 1)]


def _normal_form_matrix(piece: GradedPiece, p: int) -> np.ndarray:
    """ncols × r matrix sending a monomial to its coordinates on the standard monomials."""
    std = piece.standard
    N = np.zeros((piece.ncols, len(std)), dtype=np.int64)
    pos = {c: k for k, c in enumerate(std)}
    for c in std:
        N[c, pos[c]] = 1
    for i, c in enumerate(piece.pivots):
        # monomial c ≡ -(rest of its rref row), restricted to standard monomials
        N[c] = (-piece.rref[i, std]) % p
    return N


@dataclass
class ZeroDimPoints:
    points: list[tuple[np.ndarray, int]]  # (projective point, multiplicity)
    length: int  # Hilbert polynomial value used
    unexplained: int  # degree of the characteristic polynomial not split over F_p
    degree: int | None  # the degree t at which the quotient was read off


def zero_dim_points(forms: list[Poly], nvars: int, p: int, rng, tmax: int = 8) -> ZeroDimPoints:
    """Rational points (with multiplicity) of a zero-dimensional projective scheme.

    Finds the first t with HF(t) = HF(t+1), then reads multiplication operators
    S_t/I_t → S_{t+1}/I_{t+1} by a random linear form and by each variable.
    """
    pieces = {}

    def piece(t):
        if t not in pieces:
            pieces[t] = graded_piece(forms, t, nvars, p)
        return pieces[t]

    t = 1
    while t <= tmax and piece(t).hilbert_value != piece(t + 1).hilbert_value:
        t += 1
    if t > tmax:
        return ZeroDimPoints([], -1, -1, None)
    Pt, Pn = piece(t), piece(t + 1)
    r = Pt.hilbert_value
    if r == 0:
        return ZeroDimPoints([], 0, 0, t)
    Nn = _normal_form_matrix(Pn, p)
    table = _product_table(nvars, t, 1)
    std = Pt.standard

    def mult_matrix(lin):
        Mx = np.zeros((r, r), dtype=np.int64)
        for k, c in enumerate(std):
            col = np.zeros(r, dtype=np.int64)
            for j in range(nvars):
                if lin[j]:
                    col = (col + lin[j] * Nn[table[c, j]]) % p
            Mx[:, k] = col
        return Mx

    for _ in range(10):
        l0 = [rng.randrange(p) for _ in range(nvars)]
        M0 = mult_matrix(l0)
        if la.rank(M0, p) == r:
            break
    else:
        return ZeroDimPoints([], r, r, t)
    M0inv = la.inverse(M0, p)
    Ts = []
    for j in range(nvars):
        e = [int(i == j) for i in range(nvars)]
        Ts.append(la.matmul(M0inv, mult_matrix(e), p))
    coeffs = [rng.randrange(p) for _ in range(nvars)]
    T = sum(c * Tj for c, Tj in zip(coeffs, Ts)) % p
    charpoly = _charpoly(T, p)
    roots = up.roots_in_fp(charpoly, p)
    explained = sum(m for _, m in roots)
    points = []
    I = np.eye(r, dtype=np.int64)
    for sigma, m in roots:
        A = (T - sigma * I) % p
        Am = I.copy()
        for _ in range(m):
            Am = la.matmul(Am, A, p)
        K = la.right_kernel(Am, p).T  # r × m generalized eigenspace
        if K.shape[1] != m:
            explained -= m
            continue
        coords = []
        for Tj in Ts:
            X = np.stack([la.particular_solution(K, la.matmul(Tj, K[:, k], p), p) for k in range(m)], axis=1)
            coords.append(int(np.trace(X)) % p * pow(m, p - 2, p) % p)
        points.append((np.array(coords, dtype=np.int64), m))
    return ZeroDimPoints(points, r, r - explained, t)


def _charpoly(T: np.ndarray, p: int) -> list[int]:
    r = T.shape[0]
    xs = list(range(r + 3))
    I = np.eye(r, dtype=np.int64)
    ys = [la.det((x * I - T) % p, p) for x in xs]
    return up.interpolate(xs, ys, r, p)
