"""Substitution words, rotation words and their exact combinatorics."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .core import (
    BINARY,
    PLUS_MINUS,
    ConfigurationSource,
    Patch,
    Window,
    count_patch,
    window_of,
)
from .errors import AmbiguityError, ContractError, DomainError, RationalityError
from .rotation import QuadNumber, RotationNumber, sturmian_bit


@dataclass(frozen=True)
class SubstitutionRule:
    images: Mapping[int, tuple[int, ...]]
    alphabet: tuple[str, ...]

    def __post_init__(self):
        for s in range(len(self.alphabet)):
            if not self.images.get(s):
                raise ContractError(f"symbol {self.alphabet[s]!r} has no image")

    def apply(self, word: Sequence[int]) -> list[int]:
        out: list[int] = []
        for s in word:
            out.extend(self.images[s])
        return out


THUE_MORSE_RULE = SubstitutionRule({0: (0, 1), 1: (1, 0)}, PLUS_MINUS)
FIBONACCI_RULE = SubstitutionRule({0: (0, 1), 1: (0,)}, BINARY)


def thue_morse_symbol(i: int) -> int:
    """Parity of the binary digit sum of ``i``, reflected for ``i < 0``."""
    if i < 0:
        i = -i - 1
    return bin(i).count("1") & 1


def substitution_prefix(rule: SubstitutionRule, seed: int, iterations: int) -> Window:
    if rule.images[seed][0] != seed:
        raise ContractError(
            f"image of {rule.alphabet[seed]!r} does not start with it; no fixed point from this seed"
        )
    word = [seed]
    for _ in range(iterations):
        word = rule.apply(word)
    return Window(0, np.asarray(word, dtype=np.int8), rule.alphabet)


def substitution_word(rule: SubstitutionRule, seed: int, length: int) -> np.ndarray:
    """Prefix of the fixed point of ``rule`` from ``seed`` with exactly ``length`` symbols."""
    if rule.images[seed][0] != seed:
        raise ContractError("seed does not generate a fixed point")
    word = [seed]
    while len(word) < length:
        nxt = rule.apply(word)
        if len(nxt) == len(word):
            raise ContractError("substitution does not grow from this seed")
        word = nxt
    return np.asarray(word[:length], dtype=np.int8)


def sturmian_symbol(phi: RotationNumber, i: int) -> int:
    return sturmian_bit(phi, i)


def _cf_exact(x: QuadNumber, depth: int) -> list[int]:
    quotients = []
    for _ in range(depth):
        x = x.frac()
        if x.sign() == 0:
            raise RationalityError(
                f"continued fraction terminates after {len(quotients)} quotients"
            )
        x = x.inverse()
        quotients.append(x.floor())
    return quotients


def _cf_fraction(x: Fraction, depth: int) -> list[int]:
    out = []
    for _ in range(depth):
        x -= x.numerator // x.denominator
        if x == 0:
            break
        x = 1 / x
        out.append(x.numerator // x.denominator)
    return out


def continued_fraction(phi: RotationNumber, depth: int) -> list[int]:
    """Partial quotients ``a_1 .. a_depth`` of ``phi = [0; a_1, a_2, ...]``.

    Decimal inputs only report quotients that are identical for every real
    number within the declared precision.
    """
    if depth < 1:
        raise ContractError("depth must be >= 1")
    if phi.exact:
        return _cf_exact(phi.value, depth)
    v = phi.value.p
    nominal = _cf_fraction(v, depth)
    if len(nominal) < depth:
        raise RationalityError(
            f"continued fraction of {phi.text} terminates after {len(nominal)} quotients"
        )
    eps = phi.error_bound()
    lo, hi = _cf_fraction(v - eps, depth + 1), _cf_fraction(v + eps, depth + 1)
    reliable = 0
    # the last quotient of a bracketing expansion may differ by one, so
    # agreement must extend one step beyond the reported depth
    for a, b, c in zip(nominal, lo, hi):
        if a == b == c:
            reliable += 1
        else:
            break
    if reliable < depth or len(lo) <= depth or len(hi) <= depth or lo[depth] != hi[depth]:
        raise AmbiguityError(
            f"precision of {phi.text} determines only {reliable} partial quotients; "
            "raise the precision or use the quadratic form"
        )
    return nominal


def is_badly_approximable_heuristic(phi: RotationNumber, depth: int, bound: int) -> bool:
    """True when the first ``depth`` partial quotients are all ``<= bound``.

    A depth-limited certificate, not a proof.
    """
    return all(a <= bound for a in continued_fraction(phi, depth))


# -- circle arcs ------------------------------------------------------------

Pieces = list[tuple[QuadNumber, QuadNumber]]


def arc(left, length) -> Pieces:
    """Half-open arc ``[left, left+length)`` on R/Z as linear pieces in [0,1)."""
    if not isinstance(left, QuadNumber):
        left = QuadNumber.rational(left)
    if not isinstance(length, QuadNumber):
        length = QuadNumber.rational(length)
    if length.sign() <= 0:
        return []
    if length >= 1:
        return [(QuadNumber.rational(0), QuadNumber.rational(1))]
    a = left.frac()
    b = a + length
    if b <= 1:
        return [(a, b)]
    return [(a, QuadNumber.rational(1)), (QuadNumber.rational(0), b - 1)]


def intersect(x: Pieces, y: Pieces) -> Pieces:
    out = []
    for a1, b1 in x:
        for a2, b2 in y:
            a = a1 if a1 >= a2 else a2
            b = b1 if b1 <= b2 else b2
            if a < b:
                out.append((a, b))
    return out


def measure(pieces: Pieces) -> QuadNumber:
    total = QuadNumber.rational(0)
    for a, b in pieces:
        total = total + (b - a)
    return total


def symbol_arc(phi: RotationNumber, symbol: int) -> Pieces:
    if symbol == 0:
        return arc(0, phi.value)
    return arc(phi.value, 1 - phi.value)


def cylinder(phi: RotationNumber, patch: Patch) -> Pieces:
    """Set of ``{n*phi}`` for which the patch is seen at anchor ``n``."""
    region = arc(0, 1)
    for off, sym in patch.cells:
        if sym not in (0, 1):
            raise DomainError("Sturmian patches use the alphabet {0, 1}")
        moved: Pieces = []
        for a, b in symbol_arc(phi, sym):
            moved.extend(arc(a - phi.value * off, b - a))
        region = intersect(region, moved)
        if not region:
            break
    return region


def sturmian_patch_frequency_exact(phi: RotationNumber, patch: Patch) -> QuadNumber:
    return measure(cylinder(phi, patch))


def sturmian_patch_frequency(phi: RotationNumber, patch: Patch) -> float:
    return float(sturmian_patch_frequency_exact(phi, patch))


@dataclass(frozen=True)
class ForbiddenSet:
    m: int
    distances: tuple[int, ...]
    k_max: int

    def __post_init__(self):
        if self.m < 2:
            raise ContractError("m must be >= 2")
        if any(not 1 <= d <= self.k_max for d in self.distances):
            raise ContractError("forbidden distances must lie in [1, k_max]")


def max_zero_run(phi: RotationNumber, limit: int = 10_000) -> int:
    """Longest run of 0s in the Sturmian word of ``phi``."""
    zero = symbol_arc(phi, 0)
    region = zero
    for length in range(2, limit + 1):
        step: Pieces = []
        for a, b in zero:
            step.extend(arc(a - phi.value * (length - 1), b - a))
        region = intersect(region, step)
        if not region:
            return length - 1
    raise ContractError(f"zero runs longer than {limit}; phi too close to 1")


def forbidden_distances(phi: RotationNumber, k_max: int = 64) -> ForbiddenSet:
    """Distances at which two 1s never occur, plus the shortest absent 0-run."""
    if not (Fraction(1, 2) < phi.value < 1):
        raise DomainError("forbidden distances need phi in (1/2, 1)")
    one = symbol_arc(phi, 1)
    forbidden = []
    for d in range(1, k_max + 1):
        moved: Pieces = []
        for a, b in one:
            moved.extend(arc(a - phi.value * d, b - a))
        if not intersect(one, moved):
            forbidden.append(d)
    return ForbiddenSet(max_zero_run(phi) + 1, tuple(forbidden), k_max)


def empirical_frequency(source: ConfigurationSource, patch: Patch, L: int) -> float:
    """Occurrences of ``patch`` in ``[0, L)`` per fully contained placement."""
    if L < patch.diameter + 1:
        raise ContractError("L must exceed the patch diameter")
    return count_patch(window_of(source, 0, L), patch) / (L - patch.diameter)
