"""Scalar types: residues modulo a prime and dual numbers over them."""

from __future__ import annotations

from dataclasses import dataclass

DEFAULT_PRIME = 32003


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def inv(a: int, p: int) -> int:
    a %= p
    if a == 0:
        raise ZeroDivisionError("zero has no inverse mod %d" % p)
    return pow(a, p - 2, p)


@dataclass(frozen=True)
class FieldElement:
    """A residue modulo ``p``. Plain ints are used internally; this is the user-facing wrapper."""

    residue: int
    p: int = DEFAULT_PRIME

    def __post_init__(self):
        object.__setattr__(self, "residue", self.residue % self.p)

    def _coerce(self, other):
        if isinstance(other, FieldElement):
            if other.p != self.p:
                raise ValueError("moduli differ")
            return other.residue
        return other % self.p

    def __add__(self, other):
        return FieldElement(self.residue + self._coerce(other), self.p)

    __radd__ = __add__

    def __sub__(self, other):
        return FieldElement(self.residue - self._coerce(other), self.p)

    def __rsub__(self, other):
        return FieldElement(self._coerce(other) - self.residue, self.p)

    def __mul__(self, other):
        return FieldElement(self.residue * self._coerce(other), self.p)

    __rmul__ = __mul__

    def __neg__(self):
        return FieldElement(-self.residue, self.p)

    def inverse(self) -> FieldElement:
        return FieldElement(inv(self.residue, self.p), self.p)

    def __truediv__(self, other):
        return self * FieldElement(self._coerce(other), self.p).inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        return FieldElement(pow(self.residue, k, self.p), self.p)

    def __int__(self):
        return self.residue

    def __bool__(self):
        return self.residue != 0

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.p == other.p and self.residue == other.residue
        if isinstance(other, int):
            return self.residue == other % self.p
        return NotImplemented

    def __hash__(self):
        return hash((self.residue, self.p))

    def __repr__(self):
        return f"{self.residue} (mod {self.p})"


@dataclass(frozen=True)
class DualNumber:
    """``value + eps * ε`` with ε² = 0, coefficients residues mod ``p``."""

    value: int
    eps: int = 0
    p: int = DEFAULT_PRIME

    def __post_init__(self):
        object.__setattr__(self, "value", int(self.value) % self.p)
        object.__setattr__(self, "eps", int(self.eps) % self.p)

    def _parts(self, other):
        if isinstance(other, DualNumber):
            return other.value, other.eps
        if isinstance(other, FieldElement):
            return other.residue, 0
        return other, 0

    def __add__(self, other):
        a, b = self._parts(other)
        return DualNumber(self.value + a, self.eps + b, self.p)

    __radd__ = __add__

    def __sub__(self, other):
        a, b = self._parts(other)
        return DualNumber(self.value - a, self.eps - b, self.p)

    def __rsub__(self, other):
        a, b = self._parts(other)
        return DualNumber(a - self.value, b - self.eps, self.p)

    def __mul__(self, other):
        a, b = self._parts(other)
        return DualNumber(self.value * a, self.value * b + self.eps * a, self.p)

    __rmul__ = __mul__

    def __neg__(self):
        return DualNumber(-self.value, -self.eps, self.p)

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        if k == 0:
            return DualNumber(1, 0, self.p)
        # (a + bε)^k = a^k + k a^(k-1) b ε
        return DualNumber(pow(self.value, k, self.p), k * pow(self.value, k - 1, self.p) * self.eps, self.p)

    def is_unit(self) -> bool:
        return self.value != 0

    def inverse(self) -> DualNumber:
        a = inv(self.value, self.p)
        return DualNumber(a, -self.eps * a * a, self.p)

    def __truediv__(self, other):
        if not isinstance(other, DualNumber):
            other = DualNumber(*self._parts(other), self.p)
        return self * other.inverse()

    def __eq__(self, other):
        if isinstance(other, DualNumber):
            return (self.value, self.eps, self.p) == (other.value, other.eps, other.p)
        if isinstance(other, int):
            return self.eps == 0 and self.value == other % self.p
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.eps, self.p))

    def __repr__(self):
        return f"{self.value} + {self.eps}ε (mod {self.p})"
