"""Univariate polynomials over F_p as coefficient lists, lowest degree first.

The zero polynomial is ``[]``; every other list has a nonzero last entry.
Binary forms of degree m are stored the same way, ``f(t, s) = sum c_k t^k s^(m-k)``,
together with their degree; the point at infinity (s = 0) of P^1(F_p) is
encoded as the integer ``p``.
"""

from __future__ import annotations

import random
from typing import Sequence

import numpy as np

from .errors import DegreeOverflow
from .field import inv

UPoly = list


def trim(f: Sequence[int], p: int) -> UPoly:
    out = [int(c) % p for c in f]
    while out and out[-1] == 0:
        out.pop()
    return out


def deg(f: UPoly) -> int:
    return len(f) - 1


def add(f, g, p):
    n = max(len(f), len(g))
    return trim([(f[i] if i < len(f) else 0) + (g[i] if i < len(g) else 0) for i in range(n)], p)


def sub(f, g, p):
    n = max(len(f), len(g))
    return trim([(f[i] if i < len(f) else 0) - (g[i] if i < len(g) else 0) for i in range(n)], p)


def scale(f, c, p):
    return trim([a * c for a in f], p)


def mul(f, g, p):
    if not f or not g:
        return []
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] += a * b
    return trim(out, p)


def divmod_(f, g, p):
    g = trim(g, p)
    if not g:
        raise ZeroDivisionError("division by the zero polynomial")
    f = trim(f, p)
    if len(f) < len(g):
        return [], f
    q = [0] * (len(f) - len(g) + 1)
    r = list(f)
    lc = inv(g[-1], p)
    for k in range(len(f) - len(g), -1, -1):
        c = r[k + len(g) - 1] * lc % p
        q[k] = c
        if c:
            for j, b in enumerate(g):
                r[k + j] = (r[k + j] - c * b) % p
    return trim(q, p), trim(r[: len(g) - 1], p)


def rem(f, g, p):
    return divmod_(f, g, p)[1]


def monic(f, p):
    f = trim(f, p)
    if not f:
        return []
    return scale(f, inv(f[-1], p), p)


def gcd(f, g, p):
    """Monic gcd (``[]`` when both are zero)."""
    f, g = trim(f, p), trim(g, p)
    while g:
        f, g = g, rem(f, g, p)
    return monic(f, p)


def gcd_many(polys, p):
    out: UPoly = []
    for f in polys:
        out = gcd(out, f, p)
        if out == [1]:
            break
    return out


def deriv(f, p):
    return trim([i * f[i] for i in range(1, len(f))], p)


def evaluate(f, x, p):
    v = 0
    for c in reversed(f):
        v = (v * x + c) % p
    return v


def powmod(base, e, mod, p):
    result = [1]
    base = rem(base, mod, p)
    while e:
        if e & 1:
            result = rem(mul(result, base, p), mod, p)
        base = rem(mul(base, base, p), mod, p)
        e >>= 1
    return result


def is_squarefree(f, p) -> bool:
    f = trim(f, p)
    return deg(gcd(f, deriv(f, p), p)) <= 0


def from_roots(roots, p):
    out = [1]
    for r in roots:
        out = mul(out, [(-r) % p, 1], p)
    return out


def _split_distinct(f, p, rng):
    """Roots of a monic squarefree f that splits into distinct linear factors over F_p."""
    if deg(f) == 0:
        return []
    if deg(f) == 1:
        return [(-f[0] * inv(f[1], p)) % p]
    while True:
        a = rng.randrange(p)
        h = sub(powmod([a, 1], (p - 1) // 2, f, p), [1], p)
        g = gcd(f, h, p)
        if 0 < deg(g) < deg(f):
            q, _ = divmod_(f, g, p)
            return _split_distinct(g, p, rng) + _split_distinct(monic(q, p), p, rng)


def distinct_root_part(f, p):
    """gcd(f, x^p - x): the product of the distinct linear factors of f."""
    f = trim(f, p)
    xp = powmod([0, 1], p, f, p)
    return gcd(f, sub(xp, [0, 1], p), p)


def roots_in_fp(f, p, exhaustive_below: int = 512) -> list[tuple[int, int]]:
    """All roots in F_p with multiplicities, sorted by root."""
    f = trim(f, p)
    if not f:
        raise ValueError("the zero polynomial has every element as a root")
    if deg(f) <= 0:
        return []
    if p < exhaustive_below:
        candidates = [x for x in range(p) if evaluate(f, x, p) == 0]
    else:
        g = distinct_root_part(f, p)
        if p == 2:
            candidates = [x for x in range(2) if evaluate(f, x, p) == 0]
        else:
            candidates = _split_distinct(g, p, random.Random(deg(f) * 7919 + f[0]))
    out = []
    for r in sorted(candidates):
        m = 0
        h = f
        while True:
            q, rr = divmod_(h, [(-r) % p, 1], p)
            if rr:
                break
            m += 1
            h = q
        out.append((r, m))
    return out


def splits_distinct(f, p) -> bool:
    """True iff f (deg >= 1) is a product of distinct monic linear factors times a unit."""
    f = trim(f, p)
    if deg(f) < 1:
        return False
    return deg(distinct_root_part(f, p)) == deg(f)


def resultant(f, g, p) -> int:
    """Res(f, g) = lc(f)^deg g · prod g(roots of f); equals det of the Sylvester matrix."""
    f, g = trim(f, p), trim(g, p)
    if not f or not g:
        return 0
    sign_scale = 1
    while True:
        df, dg = deg(f), deg(g)
        if dg == 0:
            return sign_scale * pow(g[0], df, p) % p
        if df == 0:
            return sign_scale * pow(f[0], dg, p) % p
        r = rem(f, g, p)
        if not r:
            return 0
        dr = deg(r)
        if (df * dg) % 2:
            sign_scale = -sign_scale
        sign_scale = sign_scale * pow(g[-1], df - dr, p) % p
        f, g = g, r


def sylvester_matrix(f, g, p) -> np.ndarray:
    f, g = trim(f, p), trim(g, p)
    m, n = deg(f), deg(g)
    S = np.zeros((m + n, m + n), dtype=np.int64)
    for i in range(n):
        for j, c in enumerate(reversed(f)):
            S[i, i + j] = c
    for i in range(m):
        for j, c in enumerate(reversed(g)):
            S[n + i, i + j] = c
    return S


def interpolate(xs, ys, max_degree: int, p: int) -> UPoly:
    """Unique polynomial of degree <= max_degree through the nodes; extra nodes are checked."""
    xs = [int(x) % p for x in xs]
    ys = [int(y) % p for y in ys]
    if len(set(xs)) != len(xs):
        raise ValueError("interpolation nodes must be distinct")
    if len(xs) <= max_degree:
        raise ValueError("need more than max_degree nodes")
    k = max_degree + 1
    # Newton divided differences on the first k nodes
    coef = list(ys[:k])
    for j in range(1, k):
        for i in range(k - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) * inv(xs[i] - xs[i - j], p) % p
    poly: UPoly = []
    for i in range(k - 1, -1, -1):
        poly = add(mul(poly, [(-xs[i]) % p, 1], p), [coef[i]], p)
    for x, y in zip(xs[k:], ys[k:]):
        if evaluate(poly, x, p) != y:
            raise DegreeOverflow(f"no polynomial of degree <= {max_degree} fits all {len(xs)} nodes")
    return poly


# --- binary forms --------------------------------------------------------------------------


def form_eval(coeffs, degree, t, p):
    """Evaluate a binary form at a point of P^1(F_p) encoded as 0..p (p = infinity)."""
    if t == p:
        return coeffs[degree] % p if len(coeffs) > degree else 0
    return evaluate(coeffs, t, p)


def form_gcd(forms, p) -> tuple[UPoly, int]:
    """Gcd of binary forms given as (coeffs, degree): (affine part, multiplicity at infinity).

    Returns ``([], 0)`` when every form vanishes identically.
    """
    affine: UPoly = []
    inf_mult = None
    for coeffs, d in forms:
        c = trim(coeffs, p)
        if not c:
            continue
        affine = gcd(affine, c, p)
        deficit = d - deg(c)
        inf_mult = deficit if inf_mult is None else min(inf_mult, deficit)
    if inf_mult is None:
        return [], 0
    return affine, inf_mult


def form_roots(affine, inf_mult, p) -> list[tuple[int, int]]:
    out = roots_in_fp(affine, p) if deg(affine) > 0 else []
    if inf_mult:
        out.append((p, inf_mult))
    return out


# --- batched split detection ---------------------------------------------------------------


def _batch_mulmod(a, b, f, p):
    """(a*b) mod f for batches: a, b of shape (T, n) (degree < n), f monic of shape (T, n+1)."""
    T, n = a.shape
    prod = np.zeros((T, 2 * n - 1), dtype=np.int64)
    for i in range(n):
        prod[:, i:i + n] = (prod[:, i:i + n] + a[:, i:i + 1] * b) % p
    for k in range(2 * n - 2, n - 1, -1):
        c = prod[:, k:k + 1]
        prod[:, k - n:k] = (prod[:, k - n:k] - c * f[:, :n]) % p
    return prod[:, :n]


def batch_modinv(a, p):
    """Elementwise inverse of a nonzero int64 array via Fermat exponentiation."""
    result = np.ones_like(a)
    base = a % p
    e = p - 2
    while e:
        if e & 1:
            result = result * base % p
        base = base * base % p
        e >>= 1
    return result


def batch_splits_distinct(coeffs, p) -> np.ndarray:
    """For a (T, d+1) array of polynomials of exact degree d, test x^p ≡ x mod f row-wise."""
    coeffs = np.asarray(coeffs, dtype=np.int64) % p
    T, d1 = coeffs.shape
    d = d1 - 1
    lead = coeffs[:, d]
    ok = lead != 0
    f = coeffs.copy()
    f[ok] = f[ok] * batch_modinv(lead[ok], p)[:, None] % p
    if d == 1:
        return ok
    x = np.zeros((T, d), dtype=np.int64)
    x[:, 1] = 1
    result = np.zeros((T, d), dtype=np.int64)
    result[:, 0] = 1
    base = x.copy()
    e = p
    while e:
        if e & 1:
            result = _batch_mulmod(result, base, f, p)
        e >>= 1
        if e:
            base = _batch_mulmod(base, base, f, p)
    return ok & np.all(result == x, axis=1)
