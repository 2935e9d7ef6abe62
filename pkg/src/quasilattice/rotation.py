"""Rotation numbers with exact arithmetic in real quadratic fields.

Values of the form ``p + q*sqrt(D)`` with rational ``p, q`` are compared
exactly, which is what makes half-open interval membership of ``{n*phi}``
decidable.  Decimal rotation numbers are carried as exact rationals plus a
declared precision; decisions closer than the guard band raise
:class:`AmbiguityError`.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from fractions import Fraction

import numpy as np

from .errors import AmbiguityError, DomainError, ParseError, RationalityError

GUARD_BAND = Fraction(1, 10**12)


def _is_square(n: int) -> bool:
    return n >= 0 and math.isqrt(n) ** 2 == n


@dataclass(frozen=True)
class QuadNumber:
    """The real number ``p + q*sqrt(D)``; ``D == 0`` marks a rational."""

    p: Fraction
    q: Fraction = Fraction(0)
    D: int = 0

    @classmethod
    def rational(cls, x) -> "QuadNumber":
        return cls(Fraction(x))

    def _coerce(self, other) -> "QuadNumber":
        if isinstance(other, QuadNumber):
            if other.D and self.D and other.D != self.D:
                raise DomainError("cannot mix quadratic fields with different radicands")
            return other
        return QuadNumber(Fraction(other), Fraction(0), self.D)

    def _field(self, other: "QuadNumber") -> int:
        return self.D or other.D

    def __add__(self, other):
        o = self._coerce(other)
        return QuadNumber(self.p + o.p, self.q + o.q, self._field(o))

    __radd__ = __add__

    def __neg__(self):
        return QuadNumber(-self.p, -self.q, self.D)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        D = self._field(o)
        return QuadNumber(self.p * o.p + self.q * o.q * D, self.p * o.q + self.q * o.p, D)

    __rmul__ = __mul__

    def sign(self) -> int:
        p, q = self.p, self.q
        if q == 0 or self.D == 0:
            return (p > 0) - (p < 0)
        sp, sq = (p > 0) - (p < 0), (q > 0) - (q < 0)
        if sp == 0 or sp == sq:
            return sq
        # opposite signs: compare p^2 with q^2 D
        diff = p * p - q * q * self.D
        return sp if diff > 0 else -sp

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    def __eq__(self, other):
        if not isinstance(other, (QuadNumber, int, Fraction)):
            return NotImplemented
        return (self - other).sign() == 0

    def __hash__(self):
        if self.q == 0:
            return hash(self.p)
        return hash((self.p, self.q, self.D))

    def __float__(self):
        return float(self.p) + float(self.q) * math.sqrt(self.D)

    def floor(self) -> int:
        if self.q == 0 or self.D == 0:
            return math.floor(self.p)
        f = math.floor(float(self))
        while self < f:
            f -= 1
        while self >= f + 1:
            f += 1
        return f

    def frac(self) -> "QuadNumber":
        return self - self.floor()

    def inverse(self) -> "QuadNumber":
        # 1/(p + q r) = (p - q r) / (p^2 - q^2 D)
        if self.sign() == 0:
            raise ZeroDivisionError("inverse of zero")
        if self.q == 0 or self.D == 0:
            return QuadNumber(1 / self.p, Fraction(0), self.D)
        norm = self.p * self.p - self.q * self.q * self.D
        return QuadNumber(self.p / norm, -self.q / norm, self.D)

    @property
    def is_rational(self) -> bool:
        return self.q == 0 or self.D == 0


_QUAD_RE = re.compile(
    r"^quad:\(\s*([+-]?\d+)\s*([+-])\s*(\d+)\s*\*\s*sqrt\s*(\d+)\s*\)\s*/\s*(\d+)$"
)
_DEC_RE = re.compile(r"^dec:([0-9]*\.?[0-9]+):(\d+)$")


@dataclass(frozen=True)
class RotationNumber:
    """An irrational rotation number phi in (0, 1).

    ``kind`` is ``"quad"`` for ``(a + b*sqrt(D))/c`` (exact) or ``"dec"``
    for a decimal with ``precision`` significant digits.
    """

    value: QuadNumber
    kind: str
    text: str
    precision: int | None = None

    @classmethod
    def quadratic(cls, a: int, b: int, D: int, c: int) -> "RotationNumber":
        if c <= 0:
            raise DomainError("denominator c must be positive")
        if b == 0 or _is_square(D):
            raise RationalityError(f"(a+b*sqrt{D})/c is rational")
        value = QuadNumber(Fraction(a, c), Fraction(b, c), D)
        if not (0 < value < 1):
            raise DomainError(f"rotation number {float(value)} outside (0,1)")
        sign = "+" if b >= 0 else "-"
        return cls(value, "quad", f"quad:({a}{sign}{abs(b)}*sqrt{D})/{c}")

    @classmethod
    def decimal(cls, digits: str, precision: int) -> "RotationNumber":
        try:
            dec = Decimal(digits)
        except InvalidOperation as exc:
            raise ParseError(f"bad decimal {digits!r}") from exc
        if precision < 1:
            raise DomainError("precision must be >= 1")
        value = QuadNumber(Fraction(dec))
        if not (0 < value < 1):
            raise DomainError(f"rotation number {digits} outside (0,1)")
        return cls(value, "dec", f"dec:{digits}:{precision}", precision)

    @classmethod
    def parse(cls, text: str) -> "RotationNumber":
        text = text.strip()
        m = _QUAD_RE.match(text)
        if m:
            a, sign, b, D, c = m.groups()
            b = int(b) if sign == "+" else -int(b)
            return cls.quadratic(int(a), b, int(D), int(c))
        m = _DEC_RE.match(text)
        if m:
            return cls.decimal(m.group(1), int(m.group(2)))
        raise ParseError(
            f"cannot parse rotation number {text!r}; expected "
            "'quad:(a+b*sqrtD)/c' or 'dec:<value>:<digits>'"
        )

    @classmethod
    def golden(cls) -> "RotationNumber":
        """(sqrt5 - 1)/2 = 2/(1 + sqrt5), the Fibonacci rotation."""
        return cls.quadratic(-1, 1, 5, 2)

    @property
    def exact(self) -> bool:
        return self.kind == "quad"

    def __float__(self):
        return float(self.value)

    def __str__(self):
        return self.text

    def error_bound(self, n: int = 1) -> Fraction:
        """Uncertainty of ``n*phi`` implied by the declared precision."""
        if self.exact:
            return Fraction(0)
        return abs(n) * Fraction(1, 10**self.precision)

    def membership_guard(self, n: int) -> Fraction:
        if self.exact:
            return Fraction(0)
        return GUARD_BAND + self.error_bound(n)


def sturmian_bit(phi: RotationNumber, n: int) -> int:
    """0 if ``{n*phi}`` lies in ``[0, phi)``, else 1."""
    x = (phi.value * n).frac()
    if not phi.exact:
        # {n phi} - phi = (n-1) phi - k, so its uncertainty scales with n-1
        d_phi = x - phi.value
        near_phi = n != 1 and abs(d_phi.p) < phi.membership_guard(n - 1)
        near_zero = n != 0 and min(x, 1 - x).p < phi.membership_guard(n)
        if near_phi or near_zero:
            guard = phi.membership_guard(n)
            raise AmbiguityError(
                f"{{{n}*phi}} is within {float(guard):.1e} of an interval endpoint; "
                "raise the precision or use the quadratic form"
            )
    return 0 if x < phi.value else 1


def sturmian_bits(phi: RotationNumber, start: int, length: int) -> np.ndarray:
    """Vectorised :func:`sturmian_bit` over ``start .. start+length-1``.

    Float64 decides every site whose fractional part is clear of the
    endpoints by a wide margin; the remaining sites go through the exact path.
    """
    n = np.arange(start, start + length, dtype=np.int64)
    if length == 0:
        return n.astype(np.int8)
    f = float(phi.value)
    x = np.mod(n.astype(np.float64) * f, 1.0)
    out = (x >= f).astype(np.int8)
    tol = 1e-15 * np.abs(n).astype(np.float64) + 1e-9
    risky = (np.abs(x - f) < tol) | (x < tol) | (x > 1.0 - tol)
    for k in np.flatnonzero(risky):
        out[k] = sturmian_bit(phi, int(n[k]))
    return out
