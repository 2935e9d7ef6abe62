"""Vectorised energies of all assignments on a finite set of free sites.

A :class:`LocalProblem` freezes the base configuration outside the free
sites and compiles every term placement that meets them into index arrays,
so the relative energy of a whole batch of assignments is one gather plus
one table lookup.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from ._io import csv_table
from .core import ConfigurationSource, Excitation, Patch, apply_excitation
from .errors import BudgetError, ContractError
from .hamiltonian import EnergyBreakdown, HamiltonianSpec, InteractionTerm, relative_energy

DEFAULT_BUDGET = 2**24
TIE_ATOL = 1e-9


@dataclass
class CompiledTerms:
    """Placements summed into one lookup table per set of free sites they read.

    ``groups[g]`` is ``(free_positions, table)``; ``table`` is indexed by
    ``sum(assign[free_positions[j]] * q**j)``.  ``const`` collects placements
    that read no free site.
    """

    groups: list
    const: float
    q: int

    def __len__(self):
        return len(self.groups)

    def energies(self, assign: np.ndarray) -> np.ndarray:
        """Summed energy of all placements for each row of ``assign`` (A, n_free)."""
        out = np.full(assign.shape[0], self.const)
        for free, table in self.groups:
            code = np.zeros(assign.shape[0], dtype=np.int64)
            for j, k in enumerate(free):
                code += assign[:, k].astype(np.int64) * self.q**j
            out += table[code]
        return out

    def flat(self):
        """Arrays for compiled kernels: per-group offsets into flat index/table storage."""
        sizes = np.array([len(f) for f, _ in self.groups], dtype=np.int64)
        free_ptr = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
        free_idx = np.array([k for f, _ in self.groups for k in f], dtype=np.int64)
        tsizes = np.array([len(t) for _, t in self.groups], dtype=np.int64)
        table_ptr = np.concatenate([[0], np.cumsum(tsizes)]).astype(np.int64)
        tables = np.concatenate([t for _, t in self.groups]) if self.groups else np.zeros(0)
        return free_ptr, free_idx, table_ptr, tables


def compile_placements(terms_and_anchors, free_sites, base_values, lo, q) -> CompiledTerms:
    """Compile ``[(term, anchors)]`` against free sites and a frozen base window.

    ``base_values[k]`` is the base symbol at site ``lo + k``.
    """
    position = {s: k for k, s in enumerate(free_sites)}
    grouped: dict[tuple, np.ndarray] = {}
    const = 0.0
    for term, anchors in terms_and_anchors:
        for a in anchors:
            free_j, fixed_code = [], 0
            for j, off in enumerate(term.offsets):
                site = int(a) + off
                if site in position:
                    free_j.append((position[site], j))
                else:
                    fixed_code += int(base_values[site - lo]) * q**j
            if not free_j:
                const += float(term.table[fixed_code])
                continue
            free_j.sort()
            key = tuple(k for k, _ in free_j)
            n = len(key)
            local = np.arange(q**n)
            code = np.full(q**n, fixed_code, dtype=np.int64)
            for i, (_, j) in enumerate(free_j):
                code += ((local // q**i) % q) * q**j
            values = term.table[code]
            if key in grouped:
                grouped[key] = grouped[key] + values
            else:
                grouped[key] = values.astype(np.float64)
    groups = [(key, grouped[key]) for key in sorted(grouped, key=lambda k: (len(k), k))]
    return CompiledTerms(groups, const, q)


class LocalProblem:
    """Relative energies ``H(Y|X)`` for every ``Y`` that differs from ``X`` only on ``sites``."""

    def __init__(self, spec: HamiltonianSpec, base: ConfigurationSource, sites):
        self.spec = spec
        self.base = base
        self.sites = [int(s) for s in sites]
        if not self.sites:
            raise ContractError("a local problem needs at least one free site")
        reach = spec.reach
        self.lo = min(self.sites) - reach
        hi = max(self.sites) + reach + 1
        self.base_values = base.values(self.lo, hi - self.lo)
        self.base_assignment = np.array(
            [self.base_values[s - self.lo] for s in self.sites], dtype=np.int8
        )
        site_arr = np.asarray(self.sites, dtype=np.int64)
        placements = []
        for term in spec.terms:
            anchors = np.unique((site_arr[:, None] - np.asarray(term.offsets)[None, :]).ravel())
            placements.append((term, anchors))
        self.compiled = compile_placements(placements, self.sites, self.base_values, self.lo, spec.q)
        self.base_energy = float(self.compiled.energies(self.base_assignment[None])[0])

    @property
    def q(self) -> int:
        return self.spec.q

    def energies(self, assign: np.ndarray) -> np.ndarray:
        return self.compiled.energies(assign) - self.base_energy

    def excitation(self, assignment) -> Excitation:
        return apply_excitation(self.base, dict(zip(self.sites, (int(s) for s in assignment))))

    def observable(self, patch: Patch) -> CompiledTerms:
        """Indicator placements of ``patch`` anchored at the free sites."""
        q = self.q
        table = np.zeros(q ** len(patch.cells))
        table[sum(s * q**j for j, s in enumerate(patch.symbols))] = 1.0
        term = InteractionTerm("obs", patch.offsets, table)
        lo = min(self.sites)
        hi = max(self.sites) + patch.diameter + 1
        vals = self.base.values(lo, hi - lo)
        return compile_placements([(term, np.asarray(self.sites))], self.sites, vals, lo, q)


def enumerate_assignments(n: int, q: int, start: int, stop: int) -> np.ndarray:
    """Rows ``start .. stop-1`` of the lexicographic list of ``q**n`` assignments."""
    k = np.arange(start, stop, dtype=np.int64)
    digits = q ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((k[:, None] // digits[None, :]) % q).astype(np.int8)


def _hamming_ball(base: np.ndarray, q: int, radius: int):
    """Assignments within Hamming distance ``radius`` of ``base`` with their lexicographic ranks."""
    from itertools import combinations, product

    n = len(base)
    rows = [base.copy()]
    for k in range(1, radius + 1):
        for where in combinations(range(n), k):
            choices = [[s for s in range(q) if s != base[w]] for w in where]
            for syms in product(*choices):
                row = base.copy()
                row[list(where)] = syms
                rows.append(row)
    arr = np.asarray(rows, dtype=np.int8)
    ranks = (arr.astype(np.int64) * (q ** np.arange(n - 1, -1, -1, dtype=np.int64))).sum(1)
    return arr, ranks


@dataclass(frozen=True)
class SearchResult:
    start: int
    width: int
    assignment: tuple
    excitation: Excitation
    energy: EnergyBreakdown
    minimum: float
    evaluated: int

    def to_dict(self, alphabet):
        return {
            "start": self.start,
            "width": self.width,
            "assignment": "".join(alphabet[s] for s in self.assignment),
            "overrides": {str(k): alphabet[v] for k, v in self.excitation.key()},
            "minimum": self.minimum,
            "energy": self.energy.to_dict(),
            "evaluated": self.evaluated,
        }

    def to_csv(self, alphabet) -> str:
        return csv_table(
            ["start", "width", "assignment", "minimum", "tail_bound", "evaluated", "witness"],
            [
                (
                    self.start,
                    self.width,
                    "".join(alphabet[s] for s in self.assignment),
                    self.minimum,
                    self.energy.tail_bound,
                    self.evaluated,
                    self.excitation.describe(),
                )
            ],
        )


def exhaustive_search(
    spec: HamiltonianSpec,
    source: ConfigurationSource,
    start: int,
    width: int,
    max_flips: int | None = None,
    budget: int = DEFAULT_BUDGET,
) -> SearchResult:
    """Exact minimiser of ``H(Y|X)`` over all ``Y`` supported on ``[start, start+width)``.

    Ties within ``TIE_ATOL`` go to the lexicographically smallest assignment.
    The reported energy is recomputed with :func:`relative_energy`.
    """
    if width < 1:
        raise ContractError("window width must be >= 1")
    q = spec.q
    radius = width if max_flips is None else min(max_flips, width)
    size = sum(comb(width, k) * (q - 1) ** k for k in range(radius + 1))
    if size > budget:
        raise BudgetError(f"{size} assignments exceed the enumeration budget {budget}")
    problem = LocalProblem(spec, source, range(start, start + width))

    if radius >= width:
        energies = np.empty(size)
        step = 2**18
        for s in range(0, size, step):
            stop = min(size, s + step)
            energies[s:stop] = problem.energies(enumerate_assignments(width, q, s, stop))
        ties = np.flatnonzero(energies <= energies.min() + TIE_ATOL)
        best_row = enumerate_assignments(width, q, int(ties[0]), int(ties[0]) + 1)[0]
    else:
        rows, ranks = _hamming_ball(problem.base_assignment, q, radius)
        energies = problem.energies(rows)
        ties = np.flatnonzero(energies <= energies.min() + TIE_ATOL)
        best_row = rows[ties[np.argmin(ranks[ties])]]

    witness = problem.excitation(best_row)
    energy = relative_energy(spec, witness)
    return SearchResult(start, width, tuple(int(s) for s in best_row), witness, energy, energy.total, size)
