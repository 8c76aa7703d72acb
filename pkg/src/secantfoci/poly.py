"""Sparse multivariate polynomials over F_p (1-5 variables) and graded monomial bases.

Monomials are exponent tuples. The canonical order is graded lexicographic with
x0 > x1 > ...; ``monomials(n, t)`` lists degree-t monomials in that order,
which is also the column order of every coefficient matrix in the package.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Iterable, Mapping

import numpy as np

from .field import DualNumber

Monomial = tuple[int, ...]


@lru_cache(maxsize=None)
def monomials(nvars: int, degree: int) -> tuple[Monomial, ...]:
    out = []
    for combo in combinations_with_replacement(range(nvars), degree):
        e = [0] * nvars
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    return tuple(sorted(out, reverse=True))


@lru_cache(maxsize=None)
def monomial_index(nvars: int, degree: int) -> dict[Monomial, int]:
    return {m: i for i, m in enumerate(monomials(nvars, degree))}


def grlex_key(m: Monomial):
    return (sum(m), m)


def monomial_vector(point, degree: int, p: int) -> np.ndarray:
    """Values of all degree-``degree`` monomials at ``point`` (a sequence of residues)."""
    pt = [int(x) % p for x in point]
    n = len(pt)
    mons = monomials(n, degree)
    pw = [[1] * (degree + 1) for _ in range(n)]
    for i in range(n):
        for k in range(1, degree + 1):
            pw[i][k] = pw[i][k - 1] * pt[i] % p
    out = np.empty(len(mons), dtype=np.int64)
    for j, m in enumerate(mons):
        v = 1
        for i, a in enumerate(m):
            if a:
                v = v * pw[i][a] % p
        out[j] = v
    return out


def dual_monomial_vector(point, direction, degree: int, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Value and ε-part of all degree-``degree`` monomials at ``point + ε·direction``."""
    n = len(point)
    pts = [DualNumber(int(a), int(b), p) for a, b in zip(point, direction)]
    mons = monomials(n, degree)
    pw = [[DualNumber(1, 0, p)] for _ in range(n)]
    for i in range(n):
        for k in range(1, degree + 1):
            pw[i].append(pw[i][-1] * pts[i])
    val = np.empty(len(mons), dtype=np.int64)
    eps = np.empty(len(mons), dtype=np.int64)
    for j, m in enumerate(mons):
        v = DualNumber(1, 0, p)
        for i, a in enumerate(m):
            if a:
                v = v * pw[i][a]
        val[j], eps[j] = v.value, v.eps
    return val, eps


def derivative_matrices(nvars: int, degree: int, p: int) -> list[np.ndarray]:
    """D_k with (coeffs over degree-t monomials) @ D_k = coeffs of the k-th partial."""
    src = monomials(nvars, degree)
    if degree == 0:
        return [np.zeros((1, 0), dtype=np.int64) for _ in range(nvars)]
    dst = monomial_index(nvars, degree - 1)
    mats = []
    for k in range(nvars):
        D = np.zeros((len(src), len(dst)), dtype=np.int64)
        for i, m in enumerate(src):
            if m[k]:
                mm = list(m)
                mm[k] -= 1
                D[i, dst[tuple(mm)]] = m[k] % p
        mats.append(D)
    return mats


class Poly:
    """Polynomial in ``nvars`` variables with residue coefficients; zero terms are never stored."""

    __slots__ = ("nvars", "p", "terms")

    def __init__(self, nvars: int, p: int, terms: Mapping[Monomial, int] | None = None):
        self.nvars = nvars
        self.p = p
        self.terms: dict[Monomial, int] = {}
        if terms:
            for m, c in terms.items():
                c = int(c) % p
                if c:
                    self.terms[tuple(m)] = c

    @classmethod
    def const(cls, nvars, p, c):
        return cls(nvars, p, {(0,) * nvars: c})

    @classmethod
    def var(cls, nvars, p, i):
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, p, {tuple(e): 1})

    @classmethod
    def linear(cls, coeffs: Iterable[int], p: int):
        coeffs = list(coeffs)
        n = len(coeffs)
        return cls(n, p, {tuple(int(i == j) for j in range(n)): c for i, c in enumerate(coeffs)})

    @classmethod
    def from_vector(cls, nvars, degree, p, vec):
        return cls(nvars, p, dict(zip(monomials(nvars, degree), (int(c) for c in vec))))

    def to_vector(self, degree: int) -> np.ndarray:
        idx = monomial_index(self.nvars, degree)
        v = np.zeros(len(idx), dtype=np.int64)
        for m, c in self.terms.items():
            if sum(m) != degree:
                raise ValueError("polynomial is not homogeneous of degree %d" % degree)
            v[idx[m]] = c
        return v

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((sum(m) for m in self.terms), default=-1)

    def is_homogeneous(self) -> bool:
        return len({sum(m) for m in self.terms}) <= 1

    def sorted_terms(self) -> list[tuple[Monomial, int]]:
        return sorted(self.terms.items(), key=lambda mc: grlex_key(mc[0]), reverse=True)

    def _check(self, other):
        if not isinstance(other, Poly):
            return Poly.const(self.nvars, self.p, other)
        if other.nvars != self.nvars or other.p != self.p:
            raise ValueError("incompatible polynomials")
        return other

    def __add__(self, other):
        other = self._check(other)
        t = dict(self.terms)
        for m, c in other.terms.items():
            t[m] = t.get(m, 0) + c
        return Poly(self.nvars, self.p, t)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.nvars, self.p, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return self._check(other) - self

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return Poly(self.nvars, self.p, {m: c * other for m, c in self.terms.items()})
        other = self._check(other)
        t: dict[Monomial, int] = {}
        p = self.p
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                t[m] = (t.get(m, 0) + c1 * c2) % p
        return Poly(self.nvars, p, t)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = Poly.const(self.nvars, self.p, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, int):
            other = Poly.const(self.nvars, self.p, other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.nvars == other.nvars and self.p == other.p and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, self.p, frozenset(self.terms.items())))

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.sorted_terms():
            mon = "*".join(f"x{i}^{a}" if a > 1 else f"x{i}" for i, a in enumerate(m) if a)
            parts.append(f"{c}*{mon}" if mon else str(c))
        return " + ".join(parts)

    def diff(self, i: int) -> Poly:
        t = {}
        for m, c in self.terms.items():
            if m[i]:
                mm = list(m)
                mm[i] -= 1
                t[tuple(mm)] = c * m[i]
        return Poly(self.nvars, self.p, t)

    def gradient(self) -> list[Poly]:
        return [self.diff(i) for i in range(self.nvars)]

    def __call__(self, point):
        return self.evaluate(point)

    def evaluate(self, point):
        """Evaluate at a point whose coordinates are ints, FieldElements or DualNumbers."""
        if len(point) != self.nvars:
            raise ValueError("point has wrong dimension")
        point = [int(x) if isinstance(x, np.integer) else x for x in point]
        total = 0
        for m, c in self.terms.items():
            v = c
            for x, a in zip(point, m):
                if a:
                    v = v * x**a
            total = total + v
        if isinstance(total, int):
            return total % self.p
        return total

    def substitute(self, images: list[Poly]) -> Poly:
        """Compose with polynomial images of the variables (all in a common ring)."""
        if len(images) != self.nvars:
            raise ValueError("need one image per variable")
        target = images[0]
        cache: dict[tuple[int, int], Poly] = {}

        def power(i, a):
            key = (i, a)
            if key not in cache:
                cache[key] = Poly.const(target.nvars, self.p, 1) if a == 0 else power(i, a - 1) * images[i]
            return cache[key]

        out = Poly(target.nvars, self.p)
        for m, c in self.terms.items():
            term = Poly.const(target.nvars, self.p, c)
            for i, a in enumerate(m):
                if a:
                    term = term * power(i, a)
            out = out + term
        return out


def jet_eval(F: Poly, point, direction, order: int = 1):
    """``(F(point), ∇F(point)·direction)`` exactly; order 0 returns the value only."""
    if order not in (0, 1):
        raise ValueError("order must be 0 or 1")
    p = F.p
    value = F.evaluate([int(x) % p for x in point])
    if order == 0:
        return value
    der = 0
    for i, g in enumerate(F.gradient()):
        if direction[i] % p:
            der += g.evaluate([int(x) % p for x in point]) * int(direction[i])
    return value, der % p


def determinant(matrix: list[list[Poly]]) -> Poly:
    """Laplace expansion along the first row; meant for the small (n ≤ 4) minors used here."""
    n = len(matrix)
    if n == 1:
        return matrix[0][0]
    if n == 2:
        return matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0]
    out = None
    for j in range(n):
        if matrix[0][j].is_zero():
            continue
        sub = [row[:j] + row[j + 1:] for row in matrix[1:]]
        term = matrix[0][j] * determinant(sub)
        if j % 2:
            term = -term
        out = term if out is None else out + term
    if out is None:
        ref = matrix[0][0]
        return Poly(ref.nvars, ref.p)
    return out
