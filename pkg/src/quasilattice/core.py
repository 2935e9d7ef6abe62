"""Configurations on Z, finite windows, patches and local excitations.

Symbols are small integer indices into an alphabet; the alphabet's text
labels (``'+'``, ``'-'``, ``'0'``, ``'1'`` ...) are only used for parsing
and printing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import ContractError, DomainError, ParseError
from .rotation import RotationNumber, sturmian_bit, sturmian_bits

PLUS_MINUS = ("+", "-")
BINARY = ("0", "1")


def encode(text: str, alphabet: tuple[str, ...]) -> np.ndarray:
    """Map a string of single-character labels to symbol indices."""
    lookup = {label: k for k, label in enumerate(alphabet)}
    try:
        return np.array([lookup[ch] for ch in text], dtype=np.int8)
    except KeyError as exc:
        raise DomainError(f"symbol {exc.args[0]!r} not in alphabet {alphabet}") from None


def decode(symbols, alphabet: tuple[str, ...]) -> str:
    return "".join(alphabet[int(s)] for s in symbols)


def _popcount_parity(n: np.ndarray) -> np.ndarray:
    return (np.bitwise_count(n.astype(np.uint64)) & 1).astype(np.int8)


class ConfigurationSource:
    """A total, deterministic rule assigning a symbol to every site of Z."""

    alphabet: tuple[str, ...]

    def values(self, start: int, length: int) -> np.ndarray:
        raise NotImplementedError

    def at(self, i: int) -> int:
        return int(self.values(i, 1)[0])

    def describe(self) -> str:
        return type(self).__name__


@dataclass(frozen=True)
class ThueMorse(ConfigurationSource):
    """Two-sided Thue-Morse word; ``+`` is symbol 0 (spin +1).

    For ``i >= 0`` the symbol is the parity of the binary digit sum of ``i``;
    negative sites are reflected, ``X(i) = X(-i-1)``.
    """

    alphabet: tuple[str, ...] = PLUS_MINUS

    def values(self, start, length):
        n = np.arange(start, start + length, dtype=np.int64)
        n = np.where(n < 0, -n - 1, n)
        return _popcount_parity(n)

    def at(self, i):
        if i < 0:
            i = -i - 1
        return bin(i).count("1") & 1

    def describe(self):
        return "thue-morse"


@dataclass(frozen=True)
class Sturmian(ConfigurationSource):
    """Rotation coding: ``X_n = 0`` iff ``{n*phi}`` lies in ``[0, phi)``."""

    phi: RotationNumber
    alphabet: tuple[str, ...] = BINARY

    def values(self, start, length):
        return sturmian_bits(self.phi, start, length)

    def at(self, i):
        return sturmian_bit(self.phi, i)

    def describe(self):
        return f"sturmian {self.phi}"


@dataclass(frozen=True)
class Periodic(ConfigurationSource):
    """Periodic repetition of ``word`` with ``word[0]`` at site 0."""

    word: tuple[int, ...]
    alphabet: tuple[str, ...] = BINARY

    def __post_init__(self):
        if len(self.word) < 1:
            raise DomainError("periodic word must be non-empty")
        _check_symbols(self.word, self.alphabet)

    @classmethod
    def from_text(cls, text: str, alphabet=None) -> "Periodic":
        alphabet = alphabet or _infer_alphabet(text)
        return cls(tuple(int(s) for s in encode(text, alphabet)), alphabet)

    @property
    def period(self) -> int:
        return len(self.word)

    def values(self, start, length):
        w = np.asarray(self.word, dtype=np.int8)
        return w[np.arange(start, start + length) % len(w)]

    def describe(self):
        return f"periodic {decode(self.word, self.alphabet)}"


@dataclass(frozen=True)
class Explicit(ConfigurationSource):
    """A finite window of explicit symbols padded by ``default`` elsewhere."""

    start: int
    symbols: tuple[int, ...]
    default: int = 0
    alphabet: tuple[str, ...] = BINARY

    def __post_init__(self):
        _check_symbols(self.symbols + (self.default,), self.alphabet)

    def values(self, start, length):
        out = np.full(length, self.default, dtype=np.int8)
        lo = max(start, self.start)
        hi = min(start + length, self.start + len(self.symbols))
        if lo < hi:
            out[lo - start : hi - start] = self.symbols[lo - self.start : hi - self.start]
        return out

    def describe(self):
        return f"explicit@{self.start} {decode(self.symbols, self.alphabet)}"


def _infer_alphabet(text: str) -> tuple[str, ...]:
    chars = set(text)
    if chars <= set(PLUS_MINUS):
        return PLUS_MINUS
    if chars <= set(BINARY):
        return BINARY
    return tuple(sorted(chars))


def _check_symbols(symbols, alphabet):
    if not alphabet:
        raise DomainError("alphabet must be non-empty")
    for s in symbols:
        if not 0 <= int(s) < len(alphabet):
            raise DomainError(f"symbol {s} outside alphabet of size {len(alphabet)}")


@dataclass(frozen=True, eq=False)
class Window:
    """Symbols ``X_start .. X_{start+len-1}`` of some configuration."""

    start: int
    symbols: np.ndarray
    alphabet: tuple[str, ...]

    def __len__(self):
        return len(self.symbols)

    @property
    def text(self) -> str:
        return decode(self.symbols, self.alphabet)

    def __str__(self):
        return self.text


def window_of(source: ConfigurationSource, start: int, length: int) -> Window:
    if length < 0:
        raise ContractError("window length must be >= 0")
    return Window(start, source.values(start, length), source.alphabet)


@dataclass(frozen=True)
class Patch:
    """A finite non-empty set of ``(offset, symbol)`` cells.

    Offsets are ints (1D) or ``(x, y)`` pairs (2D) and are normalised so the
    minimal offset (per coordinate in 2D) is 0.
    """

    cells: tuple

    def __post_init__(self):
        if not self.cells:
            raise ContractError("a patch needs at least one cell")
        offsets = [o for o, _ in self.cells]
        if len(set(offsets)) != len(offsets):
            raise ContractError("patch offsets must be distinct")

    @classmethod
    def from_cells(cls, cells) -> "Patch":
        cells = list(cells)
        if not cells:
            raise ContractError("a patch needs at least one cell")
        if isinstance(cells[0][0], tuple):
            mx = min(o[0] for o, _ in cells)
            my = min(o[1] for o, _ in cells)
            norm = [((o[0] - mx, o[1] - my), int(s)) for o, s in cells]
        else:
            lo = min(o for o, _ in cells)
            norm = [(int(o) - lo, int(s)) for o, s in cells]
        return cls(tuple(sorted(norm)))

    @classmethod
    def word(cls, symbols) -> "Patch":
        return cls.from_cells(enumerate(symbols))

    @classmethod
    def parse(cls, text: str, alphabet: tuple[str, ...]) -> "Patch":
        """``"++"`` (contiguous from offset 0) or ``"0:+,2:+"``."""
        text = text.strip()
        if ":" not in text:
            return cls.word(encode(text, alphabet))
        cells = []
        for item in text.split(","):
            try:
                off, label = item.split(":")
                cells.append((int(off), int(encode(label.strip(), alphabet)[0])))
            except (ValueError, IndexError):
                raise ParseError(f"bad patch cell {item!r}") from None
        return cls.from_cells(cells)

    @property
    def dim(self) -> int:
        return 2 if isinstance(self.cells[0][0], tuple) else 1

    @property
    def offsets(self) -> tuple:
        return tuple(o for o, _ in self.cells)

    @property
    def symbols(self) -> tuple[int, ...]:
        return tuple(s for _, s in self.cells)

    @property
    def diameter(self) -> int:
        if self.dim != 1:
            raise ContractError("diameter is defined for 1D patches")
        return max(self.offsets)

    def format(self, alphabet: tuple[str, ...]) -> str:
        offs = self.offsets
        if self.dim == 1 and offs == tuple(range(len(offs))):
            return decode(self.symbols, alphabet)
        return ",".join(f"{o}:{alphabet[s]}" for o, s in self.cells)


def patch_matches(symbols: np.ndarray, patch: Patch) -> np.ndarray:
    """Boolean array over anchors ``a`` whose translate lies fully inside."""
    n_place = len(symbols) - patch.diameter
    if n_place <= 0:
        return np.zeros(0, dtype=bool)
    hit = np.ones(n_place, dtype=bool)
    for off, sym in patch.cells:
        hit &= symbols[off : off + n_place] == sym
    return hit


def count_patch(window: Window, patch: Patch) -> int:
    """Number of fully contained translates of ``patch`` matching ``window``."""
    return int(patch_matches(window.symbols, patch).sum())


@dataclass(frozen=True)
class Excitation(ConfigurationSource):
    """A configuration differing from ``base`` on finitely many sites."""

    base: ConfigurationSource
    overrides: Mapping[int, int] = field(default_factory=dict)

    @property
    def alphabet(self):
        return self.base.alphabet

    @property
    def sites(self) -> tuple[int, ...]:
        return tuple(sorted(self.overrides))

    def __len__(self):
        return len(self.overrides)

    def values(self, start, length):
        out = self.base.values(start, length).copy()
        for site, sym in self.overrides.items():
            if start <= site < start + length:
                out[site - start] = sym
        return out

    def at(self, i):
        if i in self.overrides:
            return self.overrides[i]
        return self.base.at(i)

    def __hash__(self):
        return hash((id(self.base), tuple(sorted(self.overrides.items()))))

    def key(self) -> tuple:
        return tuple(sorted(self.overrides.items()))

    def describe(self):
        body = ",".join(f"{i}:{self.alphabet[s]}" for i, s in self.key())
        return f"{self.base.describe()} with {{{body}}}"


def apply_excitation(base: ConfigurationSource, overrides: Mapping) -> Excitation:
    """Build ``Y ~ X``; overrides equal to the base value are dropped.

    Symbols may be given as indices or alphabet labels.
    """
    lookup = {label: k for k, label in enumerate(base.alphabet)}
    clean = {}
    for site, sym in overrides.items():
        if isinstance(sym, str):
            if sym not in lookup:
                raise DomainError(f"symbol {sym!r} not in alphabet {base.alphabet}")
            sym = lookup[sym]
        sym = int(sym)
        if not 0 <= sym < len(base.alphabet):
            raise DomainError(f"symbol {sym} outside alphabet of size {len(base.alphabet)}")
        if base.at(int(site)) != sym:
            clean[int(site)] = sym
    return Excitation(base, clean)


def diff_count(excitation: Excitation, patch: Patch, margin: int) -> int:
    """Occurrences of ``patch`` in Y minus occurrences in X.

    Only translates meeting the override sites can change, so counting on the
    override span widened by ``margin`` on each side is exact.
    """
    if margin < patch.diameter:
        raise ContractError(f"margin {margin} < patch diameter {patch.diameter}")
    if not excitation.overrides:
        return 0
    sites = excitation.sites
    lo, hi = sites[0] - margin, sites[-1] + margin + 1
    y = excitation.values(lo, hi - lo)
    x = excitation.base.values(lo, hi - lo)
    return int(patch_matches(y, patch).sum()) - int(patch_matches(x, patch).sum())
