"""Strict Boundary Condition diagnostics: window discrepancy, excitation
ratios, rectangular-region deviations and balance."""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import ConfigurationSource, Excitation, Patch, Sturmian, diff_count, patch_matches
from .errors import ContractError, DomainError
from .hamiltonian import HamiltonianSpec, bond_changes
from .symbolic import empirical_frequency, sturmian_patch_frequency
from .wang import TilingGrid, count_patch_2d


@dataclass
class DiscrepancyReport:
    patch: Patch
    omega: float
    prefix: int
    rows: list = field(default_factory=list)
    policy: str = "exhaustive"

    def D(self, L: int) -> float:
        for row in self.rows:
            if row[0] == L:
                return row[1]
        raise KeyError(L)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["L", "D", "argmax_start"])
        for L, D, start in self.rows:
            writer.writerow([L, f"{D:.12g}", start])
        return buf.getvalue()

    def to_dict(self, alphabet) -> dict:
        return {
            "patch": self.patch.format(alphabet),
            "omega": self.omega,
            "prefix": self.prefix,
            "policy": self.policy,
            "rows": [{"L": L, "D": D, "argmax_start": s} for L, D, s in self.rows],
        }


def _profile_row(prefix_sums: np.ndarray, L: int, diameter: int, omega: float):
    places = L - diameter
    if places <= 0:
        return L, 0.0, 0
    # the window starting at s holds the placements anchored at s .. s+places-1
    counts = prefix_sums[places:] - prefix_sums[:-places]
    dev = np.abs(counts - omega * places)
    k = int(np.argmax(dev))
    return L, float(dev[k]), k


def discrepancy_profile(
    source: ConfigurationSource,
    patch: Patch,
    omega: float,
    lengths,
    prefix: int,
    threads: int = 1,
) -> DiscrepancyReport:
    """``D(L) = max_s |count(window s..s+L-1) - omega*(L - diameter)|`` over ``[0, prefix)``."""
    lengths = sorted(int(L) for L in lengths)
    if not lengths:
        raise DomainError("no window lengths given")
    if lengths[-1] > prefix:
        raise DomainError(f"window length {lengths[-1]} exceeds prefix {prefix}")
    if lengths[0] < 1:
        raise DomainError("window lengths must be positive")
    values = source.values(0, prefix)
    hits = patch_matches(values, patch)
    sums = np.concatenate([[0], np.cumsum(hits, dtype=np.int64)])
    diam = patch.diameter

    def row(L):
        return _profile_row(sums, L, diam, omega)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            rows = list(pool.map(row, lengths))
    else:
        rows = [row(L) for L in lengths]
    return DiscrepancyReport(patch, float(omega), prefix, rows)


def default_omega(source: ConfigurationSource, patch: Patch, prefix: int) -> float:
    """Exact cylinder measure for Sturmian sources, else the empirical frequency on the prefix."""
    if isinstance(source, Sturmian):
        return sturmian_patch_frequency(source.phi, patch)
    return empirical_frequency(source, patch, prefix)


@dataclass(frozen=True)
class ExcitationRatio:
    gain: int
    broken: int

    @property
    def ratio(self) -> float:
        return float("inf") if self.broken == 0 else abs(self.gain) / self.broken


def sbc_excitation_ratio(spec: HamiltonianSpec, excitation: Excitation, patch: Patch) -> ExcitationRatio:
    """``|n_patch(Y|X)|`` against the number of broken bonds ``B(Y)``."""
    if not excitation.overrides:
        raise ContractError("the excitation must change at least one site")
    n = diff_count(excitation, patch, patch.diameter)
    broken, _, _ = bond_changes(spec, excitation)
    return ExcitationRatio(abs(n), broken)


@dataclass(frozen=True)
class TilingDeviation:
    count: int
    expected: float
    perimeter: int

    @property
    def deviation(self) -> float:
        return abs(self.count - self.expected)

    @property
    def ratio(self) -> float:
        return self.deviation / self.perimeter

    def to_dict(self):
        return {
            "count": self.count,
            "expected": self.expected,
            "deviation": self.deviation,
            "perimeter": self.perimeter,
            "ratio": self.ratio,
        }


def tiling_discrepancy(grid: TilingGrid, patch: Patch, omega: float) -> TilingDeviation:
    """Patch count in a rectangular region against ``omega`` times the placements."""
    px = max(o[0] for o in patch.offsets)
    py = max(o[1] for o in patch.offsets)
    places = max(0, grid.width - px) * max(0, grid.height - py)
    return TilingDeviation(count_patch_2d(grid, patch), omega * places, 2 * (grid.width + grid.height))


def balanced_check(source: ConfigurationSource, symbol: int, L_max: int) -> int:
    """Largest difference in ``symbol`` counts between equal-length windows.

    Windows have lengths ``1 .. L_max`` and lie in a prefix of ``4 * L_max`` sites.
    """
    if len(source.alphabet) != 2:
        raise DomainError("balance is defined for binary alphabets")
    values = source.values(0, 4 * L_max)
    sums = np.concatenate([[0], np.cumsum(values == symbol, dtype=np.int64)])
    worst = 0
    for L in range(1, L_max + 1):
        counts = sums[L:] - sums[:-L]
        worst = max(worst, int(counts.max() - counts.min()))
    return worst
