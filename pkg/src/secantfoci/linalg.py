"""Dense linear algebra modulo a prime, plus the dual-number (k[ε]/ε²) variants.

Matrices are ``numpy.int64`` arrays holding residues in ``[0, p)``. With
p < 2**31 every product fits, and row updates never overflow as long as
matrices have fewer than ~10**9 columns, which is never the case here.

Elimination is deterministic: the leftmost available pivot is taken, rows are
scanned top to bottom, and kernel bases are returned in reduced echelon form.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import InconsistentSystem, SingularValuePart
from .field import inv


def as_mat(A, p: int) -> np.ndarray:
    M = np.array(A, dtype=np.int64)
    if M.ndim == 1:
        M = M.reshape(1, -1)
    return M % p


def matmul(A, B, p: int) -> np.ndarray:
    return (np.asarray(A, dtype=np.int64) @ np.asarray(B, dtype=np.int64)) % p


def rref(A, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form. Returns the nonzero rows and the pivot columns."""
    M = as_mat(A, p).copy()
    rows, cols = M.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(M[r:, c])
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            M[[r, i]] = M[[i, r]]
        M[r, c:] = M[r, c:] * inv(int(M[r, c]), p) % p
        col = M[:, c].copy()
        col[r] = 0
        hit = np.flatnonzero(col)
        if hit.size:
            M[hit, c:] = (M[hit, c:] - np.outer(col[hit], M[r, c:])) % p
        pivots.append(c)
        r += 1
    return M[:r], pivots


def rank(A, p: int) -> int:
    A = np.asarray(A)
    if A.size == 0:
        return 0
    return len(rref(A, p)[1])


def _kernel_from_rref(R: np.ndarray, pivots: list[int], cols: int, p: int) -> np.ndarray:
    free = [c for c in range(cols) if c not in set(pivots)]
    K = np.zeros((len(free), cols), dtype=np.int64)
    for k, f in enumerate(free):
        K[k, f] = 1
        for i, c in enumerate(pivots):
            K[k, c] = (-R[i, f]) % p
    return K


def right_kernel(A, p: int) -> np.ndarray:
    """Basis of {x : A x = 0}, one vector per row, in reduced echelon form."""
    A = as_mat(A, p)
    R, piv = rref(A, p)
    K = _kernel_from_rref(R, piv, A.shape[1], p)
    if K.shape[0] == 0:
        return K
    return rref(K, p)[0]


def left_kernel(A, p: int) -> np.ndarray:
    """Basis of {w : w A = 0}, one vector per row, in reduced echelon form."""
    return right_kernel(as_mat(A, p).T, p)


def particular_solution(A, b, p: int) -> np.ndarray:
    A = as_mat(A, p)
    b = np.asarray(b, dtype=np.int64).reshape(-1) % p
    aug = np.concatenate([A, b.reshape(-1, 1)], axis=1)
    R, piv = rref(aug, p)
    n = A.shape[1]
    if piv and piv[-1] == n:
        raise InconsistentSystem("right-hand side is not in the column space")
    x = np.zeros(n, dtype=np.int64)
    for i, c in enumerate(piv):
        x[c] = R[i, n]
    return x


def linsolve(A, mode: str, p: int, b=None):
    """Dispatch over the supported solve modes."""
    if mode == "rank":
        return rank(A, p)
    if mode == "right_kernel_basis":
        return right_kernel(A, p)
    if mode == "left_kernel_basis":
        return left_kernel(A, p)
    if mode == "rref":
        return rref(A, p)
    if mode == "particular_solution":
        return particular_solution(A, b, p)
    raise ValueError(f"unknown mode {mode!r}")


def det(A, p: int) -> int:
    M = as_mat(A, p).copy()
    n, m = M.shape
    if n != m:
        raise ValueError("determinant of a non-square matrix")
    result = 1
    for c in range(n):
        nz = np.flatnonzero(M[c:, c])
        if nz.size == 0:
            return 0
        i = c + int(nz[0])
        if i != c:
            M[[c, i]] = M[[i, c]]
            result = -result
        piv = int(M[c, c])
        result = result * piv % p
        below = M[c + 1:, c]
        hit = np.flatnonzero(below)
        if hit.size:
            f = below[hit] * inv(piv, p) % p
            M[c + 1 + hit, c:] = (M[c + 1 + hit, c:] - np.outer(f, M[c, c:])) % p
    return result % p


def inverse(A, p: int) -> np.ndarray:
    A = as_mat(A, p)
    n = A.shape[0]
    R, piv = rref(np.concatenate([A, np.eye(n, dtype=np.int64)], axis=1), p)
    if piv[:n] != list(range(n)) or len(piv) != n or R.shape[0] != n:
        raise ZeroDivisionError("matrix is singular")
    return R[:, n:]


def column_basis(A, p: int) -> np.ndarray:
    """Columns of ``A`` at pivot positions: a basis of the column space (as columns)."""
    A = as_mat(A, p)
    _, piv = rref(A, p)
    return A[:, piv]


def span_intersection(A, B, p: int) -> np.ndarray:
    """Basis (as columns, reduced) of col(A) ∩ col(B) by solving A x = B y."""
    A = column_basis(A, p)
    B = column_basis(B, p)
    K = right_kernel(np.concatenate([A, (-B) % p], axis=1), p)
    if K.shape[0] == 0:
        return np.zeros((A.shape[0], 0), dtype=np.int64)
    vecs = matmul(A, K[:, : A.shape[1]].T, p)
    return canonical_subspace(vecs, p)


def canonical_subspace(cols, p: int) -> np.ndarray:
    """Unique representative of a subspace given by spanning columns: rref rows, transposed."""
    cols = np.asarray(cols, dtype=np.int64)
    if cols.size == 0:
        return np.zeros((cols.shape[0], 0), dtype=np.int64)
    R, _ = rref(cols.T, p)
    return R.T


def proportional(u, v, p: int) -> bool:
    """Projective equality of two nonzero vectors."""
    u = np.asarray(u, dtype=np.int64) % p
    v = np.asarray(v, dtype=np.int64) % p
    if not u.any() or not v.any():
        return False
    return rank(np.stack([u, v]), p) == 1


# --- dual numbers -------------------------------------------------------------------------


class DualMat(NamedTuple):
    """A matrix over k[ε]/ε² stored as value part and ε part."""

    val: np.ndarray
    eps: np.ndarray

    @classmethod
    def of(cls, val, eps=None, p: int | None = None):
        val = np.array(val, dtype=np.int64)
        eps = np.zeros_like(val) if eps is None else np.array(eps, dtype=np.int64)
        if p is not None:
            val, eps = val % p, eps % p
        return cls(val, eps)

    @property
    def shape(self):
        return self.val.shape

    @property
    def T(self):
        return DualMat(self.val.T, self.eps.T)

    def mul(self, other: DualMat, p: int) -> DualMat:
        v = matmul(self.val, other.val, p)
        e = (matmul(self.val, other.eps, p) + matmul(self.eps, other.val, p)) % p
        return DualMat(v, e)


def dual_rref(A: DualMat, p: int, require_flat: bool = True):
    """Row reduction over k[ε] with pivots restricted to entries whose value part is a unit.

    The value part of the result is exactly ``rref(A.val)``. If rows remain that
    could not receive a pivot but still carry ε-terms, the module is not free of
    the expected rank and ``SingularValuePart`` is raised (unless
    ``require_flat`` is false, in which case those rows are returned too).
    """
    V = np.array(A.val, dtype=np.int64) % p
    E = np.array(A.eps, dtype=np.int64) % p
    rows, cols = V.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(V[r:, c])
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            V[[r, i]] = V[[i, r]]
            E[[r, i]] = E[[i, r]]
        a0 = inv(int(V[r, c]), p)
        a1 = (-int(E[r, c]) * a0 * a0) % p
        V[r], E[r] = V[r] * a0 % p, (E[r] * a0 + V[r] * a1) % p
        f0 = V[:, c].copy()
        f1 = E[:, c].copy()
        f0[r] = 0
        f1[r] = 0
        hit = np.flatnonzero(f0 | f1)
        if hit.size:
            E[hit] = (E[hit] - np.outer(f0[hit], E[r]) - np.outer(f1[hit], V[r])) % p
            V[hit] = (V[hit] - np.outer(f0[hit], V[r])) % p
        pivots.append(c)
        r += 1
    if require_flat and (V[r:].any() or E[r:].any()):
        raise SingularValuePart("rank over k[eps] differs from the rank of the value part")
    if require_flat:
        return DualMat(V[:r], E[:r]), pivots
    return DualMat(V, E), pivots


def dual_right_kernel(A: DualMat, p: int) -> DualMat:
    """Free basis of the right kernel over k[ε]; value part equals ``right_kernel(A.val)``."""
    R, piv = dual_rref(A, p)
    cols = A.shape[1]
    free = [c for c in range(cols) if c not in set(piv)]
    KV = np.zeros((len(free), cols), dtype=np.int64)
    KE = np.zeros((len(free), cols), dtype=np.int64)
    for k, f in enumerate(free):
        KV[k, f] = 1
        for i, c in enumerate(piv):
            KV[k, c] = (-R.val[i, f]) % p
            KE[k, c] = (-R.eps[i, f]) % p
    if not free:
        return DualMat(KV, KE)
    K, _ = dual_rref(DualMat(KV, KE), p)
    return K


def dual_left_kernel(A: DualMat, p: int) -> DualMat:
    return dual_right_kernel(A.T, p)


def dual_linsolve(A: DualMat, b: DualMat, p: int) -> DualMat:
    """Solve A x = b over k[ε] for A whose value part has full column rank."""
    bv = np.asarray(b.val, dtype=np.int64).reshape(-1, 1)
    be = np.asarray(b.eps, dtype=np.int64).reshape(-1, 1)
    aug = DualMat(np.concatenate([A.val, bv], axis=1), np.concatenate([A.eps, be], axis=1))
    n = A.shape[1]
    R, piv = dual_rref(aug, p, require_flat=False)
    a_piv = [c for c in piv if c < n]
    if len(a_piv) < n:
        missing = sorted(set(range(n)) - set(a_piv))
        raise SingularValuePart(f"no invertible pivot in column {missing[0]}", column=missing[0])
    if n in piv or R.val[len(piv):].any() or R.eps[len(piv):].any():
        raise InconsistentSystem("right-hand side not in the column space over k[eps]")
    return DualMat(R.val[:n, n].copy(), R.eps[:n, n].copy())
