"""Interaction families, relative energies and ground-state diagnostics.

Every Hamiltonian is a list of translation-invariant :class:`InteractionTerm`
types; a term type placed at anchor ``i`` reads the symbols at
``i + offsets`` and looks its energy up in a table indexed by
``sum(s_j * |S|**j)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.special import zeta

from ._io import csv_table
from .core import (
    BINARY,
    PLUS_MINUS,
    ConfigurationSource,
    Excitation,
    Patch,
    Sturmian,
    ThueMorse,
)
from .errors import ContractError, DomainError, ParseError
from .rotation import RotationNumber
from .symbolic import ForbiddenSet, forbidden_distances

FAMILY = "family"
CHEMICAL = "chemical"


@dataclass(frozen=True, eq=False)
class InteractionTerm:
    """One interaction type ``Phi_Lambda`` repeated at every anchor of Z."""

    label: str
    offsets: tuple[int, ...]
    table: np.ndarray
    coupling: float = 1.0
    kind: str = FAMILY

    def __post_init__(self):
        if not self.offsets or self.offsets[0] != 0 or list(self.offsets) != sorted(set(self.offsets)):
            raise ContractError(f"term {self.label}: offsets must be sorted, distinct, start at 0")

    @property
    def arity(self) -> int:
        return len(self.offsets)

    @property
    def reach(self) -> int:
        return self.offsets[-1]

    @property
    def minimum(self) -> float:
        return float(self.table.min())

    def code(self, symbols: Sequence[int], q: int) -> int:
        return sum(int(s) * q**j for j, s in enumerate(symbols))

    def normalized_table(self) -> np.ndarray:
        """0 where the term is minimal, 1 elsewhere; needs a two-valued table."""
        values = np.unique(self.table)
        if len(values) > 2:
            raise ContractError(f"term {self.label} takes {len(values)} values; not normalizable to {{0,1}}")
        return (self.table != values[0]).astype(np.float64)


def _table(q: int, arity: int, energy) -> np.ndarray:
    out = np.empty(q**arity, dtype=np.float64)
    for symbols in itertools.product(range(q), repeat=arity):
        out[sum(s * q**j for j, s in enumerate(symbols))] = energy(symbols)
    return out


def tm_term(lam: float, r: int, p: int) -> InteractionTerm:
    """``J (s_0 + s_{2^r})^2 (s_{(2p+1)2^r} + s_{(2p+2)2^r})^2`` with ``J = lam^(r+p)``."""
    step = 2**r
    raw = (0, step, (2 * p + 1) * step, (2 * p + 2) * step)
    offsets = tuple(sorted(set(raw)))
    where = [offsets.index(o) for o in raw]
    J = lam ** (r + p)

    def energy(symbols):
        s = [1 - 2 * symbols[k] for k in where]
        return J * (s[0] + s[1]) ** 2 * (s[2] + s[3]) ** 2

    return InteractionTerm(f"tm r={r} p={p}", offsets, _table(2, len(offsets), energy), J)


def pair_term(d: int, coupling: float) -> InteractionTerm:
    table = np.zeros(4)
    table[3] = coupling
    return InteractionTerm(f"pair d={d}", (0, d), table, coupling)


def zero_run_term(m: int) -> InteractionTerm:
    table = np.zeros(2**m)
    table[0] = 1.0
    return InteractionTerm(f"zero-run m={m}", tuple(range(m)), table, 1.0)


def chemical_term(patch: Patch, eps: float, alphabet: tuple[str, ...]) -> InteractionTerm:
    """``-eps`` per occurrence of ``patch``."""
    q = len(alphabet)
    table = np.zeros(q ** len(patch.cells))
    code = sum(s * q**j for j, s in enumerate(patch.symbols))
    table[code] = -eps
    return InteractionTerm(f"chem {patch.format(alphabet)}", patch.offsets, table, abs(eps), CHEMICAL)


@dataclass(frozen=True)
class ThueMorseFamily:
    lam: float = 0.25
    r_max: int = 8
    p_max: int = 8
    alphabet: tuple[str, ...] = PLUS_MINUS

    def terms(self):
        return [tm_term(self.lam, r, p) for r in range(self.r_max + 1) for p in range(self.p_max + 1)]

    def tail_per_site(self) -> float:
        # every dropped (r, p) meets a given site at <= 4 anchors, each worth <= 16 J
        full = 1.0 / (1.0 - self.lam) ** 2
        kept = sum(self.lam**r for r in range(self.r_max + 1)) * sum(
            self.lam**p for p in range(self.p_max + 1)
        )
        return 64.0 * max(full - kept, 0.0)

    def default_source(self):
        return ThueMorse()


@dataclass(frozen=True)
class SturmianFamily:
    phi: RotationNumber
    alpha: float
    k_max: int
    forbidden: ForbiddenSet
    alphabet: tuple[str, ...] = BINARY

    def terms(self):
        out = [pair_term(d, float(d) ** -self.alpha) for d in self.forbidden.distances]
        out.append(zero_run_term(self.forbidden.m))
        return out

    def tail_per_site(self) -> float:
        # pair couplings beyond k_max, each pair meeting a site at two anchors
        return 2.0 * float(zeta(self.alpha, self.k_max + 1))

    def default_source(self):
        return Sturmian(self.phi)


@dataclass(frozen=True)
class FiniteRangeFamily:
    term_list: tuple[InteractionTerm, ...]
    alphabet: tuple[str, ...] = BINARY
    tail: float = 0.0

    def terms(self):
        return list(self.term_list)

    def tail_per_site(self) -> float:
        return self.tail

    def default_source(self):
        return None


@dataclass(frozen=True)
class EnergyBreakdown:
    total: float
    per_term: dict
    tail_bound: float

    def to_dict(self):
        return {"total": self.total, "per_term": dict(self.per_term), "tail_bound": self.tail_bound}

    def to_csv(self) -> str:
        rows = [(label, e) for label, e in sorted(self.per_term.items())]
        rows += [("total", self.total), ("tail_bound", self.tail_bound)]
        return csv_table(["term", "energy"], rows)


@dataclass(frozen=True, eq=False)
class HamiltonianSpec:
    family: object
    chemical: tuple = ()

    @property
    def alphabet(self) -> tuple[str, ...]:
        return self.family.alphabet

    @property
    def q(self) -> int:
        return len(self.alphabet)

    @cached_property
    def terms(self) -> list[InteractionTerm]:
        out = self.family.terms()
        out.extend(chemical_term(p, eps, self.alphabet) for p, eps in self.chemical)
        return out

    @property
    def family_terms(self) -> list[InteractionTerm]:
        return [t for t in self.terms if t.kind == FAMILY]

    @property
    def reach(self) -> int:
        return max((t.reach for t in self.terms), default=0)

    def tail_per_site(self) -> float:
        return self.family.tail_per_site()

    def default_source(self):
        return self.family.default_source()

    def unperturbed(self) -> "HamiltonianSpec":
        """The same spec without chemical-potential terms."""
        if isinstance(self.family, FiniteRangeFamily):
            fam = replace(self.family, term_list=tuple(t for t in self.family.term_list if t.kind == FAMILY))
            return HamiltonianSpec(fam)
        return HamiltonianSpec(self.family)

    def normalized(self) -> "HamiltonianSpec":
        """Family terms rescaled to energies in {0, 1}; chemical terms dropped."""
        terms = tuple(
            InteractionTerm(t.label, t.offsets, t.normalized_table(), 1.0) for t in self.family_terms
        )
        return HamiltonianSpec(FiniteRangeFamily(terms, self.alphabet))

    def __add__(self, other: "HamiltonianSpec") -> "HamiltonianSpec":
        if self.alphabet != other.alphabet:
            raise DomainError("cannot add Hamiltonians over different alphabets")
        terms = tuple(self.terms) + tuple(other.terms)
        fam = FiniteRangeFamily(terms, self.alphabet, self.tail_per_site() + other.tail_per_site())
        return HamiltonianSpec(fam)


def build_tm_hamiltonian(lam: float = 0.25, r_max: int = 8, p_max: int = 8) -> HamiltonianSpec:
    if not 0 < lam < 1:
        raise DomainError(f"lambda={lam} must lie in (0,1) for summability")
    if r_max < 0 or p_max < 0:
        raise DomainError("cutoffs must be non-negative")
    return HamiltonianSpec(ThueMorseFamily(float(lam), int(r_max), int(p_max)))


def build_sturmian_hamiltonian(phi: RotationNumber, alpha: float = 4.0, k_max: int = 64) -> HamiltonianSpec:
    if not alpha > 3:
        raise DomainError(f"alpha={alpha} must exceed 3")
    if k_max < 0:
        raise DomainError("k_max must be non-negative")
    forbidden = forbidden_distances(phi, k_max)
    return HamiltonianSpec(SturmianFamily(phi, float(alpha), int(k_max), forbidden))


def finite_range_hamiltonian(terms, alphabet=BINARY) -> HamiltonianSpec:
    return HamiltonianSpec(FiniteRangeFamily(tuple(terms), tuple(alphabet)))


def add_chemical_potential(spec: HamiltonianSpec, patch: Patch, eps: float) -> HamiltonianSpec:
    """New spec with ``-eps`` per occurrence of ``patch`` (eps > 0 favours it)."""
    if patch.dim != 1:
        raise DomainError("chemical potentials on Z need 1D patches")
    if max(patch.symbols) >= spec.q:
        raise DomainError("patch symbol outside the alphabet")
    return replace(spec, chemical=spec.chemical + ((patch, float(eps)),))


# -- evaluation -------------------------------------------------------------


def _span(excitation: Excitation, reach: int) -> tuple[int, int]:
    sites = excitation.sites
    return sites[0] - reach, sites[-1] + reach + 1


def _touching_anchors(term: InteractionTerm, sites: np.ndarray) -> np.ndarray:
    return np.unique((sites[:, None] - np.asarray(term.offsets)[None, :]).ravel())


def _codes(values: np.ndarray, lo: int, anchors: np.ndarray, term: InteractionTerm, q: int) -> np.ndarray:
    code = np.zeros(len(anchors), dtype=np.int64)
    for j, off in enumerate(term.offsets):
        code += values[anchors + off - lo].astype(np.int64) * q**j
    return code


def _touching(spec: HamiltonianSpec, excitation: Excitation, terms):
    """Yield ``(term, codes on Y, codes on X)`` for anchors meeting the overrides."""
    lo, hi = _span(excitation, spec.reach)
    y = excitation.values(lo, hi - lo)
    x = excitation.base.values(lo, hi - lo)
    sites = np.asarray(excitation.sites, dtype=np.int64)
    for term in terms:
        anchors = _touching_anchors(term, sites)
        yield term, _codes(y, lo, anchors, term, spec.q), _codes(x, lo, anchors, term, spec.q)


def relative_energy(spec: HamiltonianSpec, excitation: Excitation) -> EnergyBreakdown:
    """``H(Y|X)``, summed over the term placements that meet the overrides."""
    if not excitation.overrides:
        return EnergyBreakdown(0.0, {}, 0.0)
    per_term = {}
    for term, cy, cx in _touching(spec, excitation, spec.terms):
        delta = float(np.sum(term.table[cy] - term.table[cx]))
        if delta != 0.0:
            per_term[term.label] = per_term.get(term.label, 0.0) + delta
    total = 0.0
    for v in per_term.values():
        total += v
    tail = spec.tail_per_site() * len(excitation.overrides)
    return EnergyBreakdown(total, per_term, tail)


def bond_changes(spec: HamiltonianSpec, excitation: Excitation) -> tuple[int, int, int]:
    """``(broken on Y, created, healed)`` over family-term placements meeting the overrides.

    Chemical-potential terms are perturbations and never count as bonds.
    """
    if not excitation.overrides:
        return 0, 0, 0
    tables = {t.label: t.normalized_table() for t in spec.family_terms}
    broken = created = healed = 0
    for term, cy, cx in _touching(spec, excitation, spec.family_terms):
        by = tables[term.label][cy] > 0
        bx = tables[term.label][cx] > 0
        broken += int(by.sum())
        created += int((by & ~bx).sum())
        healed += int((bx & ~by).sum())
    return broken, created, healed


def broken_bonds(spec: HamiltonianSpec, excitation: Excitation) -> int:
    return bond_changes(spec, excitation)[0]


def term_energies_on(spec: HamiltonianSpec, term: InteractionTerm, values: np.ndarray) -> np.ndarray:
    """Energy of ``term`` at every anchor whose placement fits inside ``values``."""
    n = len(values) - term.reach
    if n <= 0:
        return np.zeros(0)
    anchors = np.arange(n)
    return term.table[_codes(values, 0, anchors, term, spec.q)]


def window_energy(spec: HamiltonianSpec, source: ConfigurationSource, start: int, length: int) -> EnergyBreakdown:
    """Energy of the placements lying entirely inside ``[start, start + length)``."""
    values = source.values(start, length)
    per_term = {}
    for term in spec.terms:
        e = float(term_energies_on(spec, term, values).sum())
        if e != 0.0:
            per_term[term.label] = per_term.get(term.label, 0.0) + e
    return EnergyBreakdown(sum(per_term.values()), per_term, spec.tail_per_site() * length)


def per_site_energy(spec: HamiltonianSpec, source: ConfigurationSource, start: int, length: int) -> EnergyBreakdown:
    """Average energy of the placements anchored in ``[start, start + length)``.

    Placements may read sites past the right end.  For a periodic source and
    ``length`` a multiple of the period this is the exact energy per site.
    """
    if length < 1:
        raise ContractError("need at least one anchor")
    per_term = {}
    for term in spec.terms:
        # one read per offset: long-range terms would make a single window huge
        code = np.zeros(length, dtype=np.int64)
        for j, off in enumerate(term.offsets):
            code += source.values(start + off, length).astype(np.int64) * spec.q**j
        e = float(term.table[code].sum()) / length
        if e != 0.0:
            per_term[term.label] = per_term.get(term.label, 0.0) + e
    return EnergyBreakdown(sum(per_term.values()), per_term, spec.tail_per_site())


def non_frustration_check(spec: HamiltonianSpec, source: ConfigurationSource, start: int, stop: int) -> bool:
    """True iff every family term fully inside ``[start, stop)`` sits at its minimum."""
    values = source.values(start, stop - start)
    for term in spec.family_terms:
        e = term_energies_on(spec, term, values)
        if e.size and not np.all(e == term.minimum):
            return False
    return True


@dataclass(frozen=True)
class GroundCheck:
    locally_ground: bool
    minimum: float
    tail_bound: float
    witness: Excitation
    energy: EnergyBreakdown
    evaluated: int

    def to_dict(self) -> dict:
        return {
            "locally_ground": self.locally_ground,
            "minimum": self.minimum,
            "tail_bound": self.tail_bound,
            "witness": self.witness.describe(),
            "evaluated": self.evaluated,
            "energy": self.energy.to_dict(),
        }

    def to_csv(self) -> str:
        return csv_table(
            ["locally_ground", "minimum", "tail_bound", "evaluated", "witness"],
            [(self.locally_ground, self.minimum, self.tail_bound, self.evaluated, self.witness.describe())],
        )


def is_local_ground_state(
    spec: HamiltonianSpec,
    source: ConfigurationSource,
    window_width: int,
    max_flips: int | None = None,
    start: int = 0,
    budget: int = 2**24,
) -> GroundCheck:
    from .local import exhaustive_search

    res = exhaustive_search(spec, source, start, window_width, max_flips=max_flips, budget=budget)
    tail = spec.tail_per_site() * window_width
    ok = res.minimum >= -tail
    return GroundCheck(ok, res.minimum, tail, res.excitation, res.energy, res.evaluated)


# -- declarative text format ------------------------------------------------


def dump_spec(spec: HamiltonianSpec) -> str:
    fam = spec.family
    lines = []
    if isinstance(fam, ThueMorseFamily):
        lines += ["family thue-morse", f"lambda {fam.lam!r}", f"r_max {fam.r_max}", f"p_max {fam.p_max}"]
    elif isinstance(fam, SturmianFamily):
        lines += ["family sturmian", f"phi {fam.phi.text}", f"alpha {fam.alpha!r}", f"k_max {fam.k_max}"]
    else:
        lines += ["family finite-range", "alphabet " + " ".join(fam.alphabet)]
        if fam.tail:
            lines.append(f"tail {fam.tail!r}")
        for t in fam.term_list:
            offs = ",".join(map(str, t.offsets))
            table = ",".join(repr(float(v)) for v in t.table)
            lines.append(f"term {t.kind} {t.coupling!r} {offs} {table} {t.label}")
    for patch, eps in spec.chemical:
        lines.append(f"chem {patch.format(spec.alphabet)} {eps!r}")
    return "\n".join(lines) + "\n"


def load_spec(text: str) -> HamiltonianSpec:
    fields: dict = {}
    terms = []
    chem = []
    family = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, rest = line.partition(" ")
        rest = rest.strip()
        try:
            if key == "family":
                family = rest
            elif key == "term":
                kind, coupling, offs, table, label = rest.split(" ", 4)
                terms.append(
                    InteractionTerm(
                        label,
                        tuple(int(o) for o in offs.split(",")),
                        np.array([float(v) for v in table.split(",")]),
                        float(coupling),
                        kind,
                    )
                )
            elif key == "chem":
                patch_text, eps = rest.rsplit(" ", 1)
                chem.append((patch_text, float(eps), lineno))
            elif key in ("lambda", "r_max", "p_max", "phi", "alpha", "k_max", "alphabet", "tail"):
                fields[key] = (rest, lineno)
            else:
                raise ParseError(f"unknown key {key!r}", lineno)
        except ParseError:
            raise
        except (ValueError, ContractError) as exc:
            raise ParseError(str(exc), lineno) from None
    def field(key, cast, default):
        if key not in fields:
            return default
        text, lineno = fields[key]
        try:
            return cast(text)
        except ValueError:
            raise ParseError(f"bad value {text!r} for {key}", lineno) from None

    if family == "thue-morse":
        spec = build_tm_hamiltonian(field("lambda", float, 0.25), field("r_max", int, 8), field("p_max", int, 8))
    elif family == "sturmian":
        if "phi" not in fields:
            raise ParseError("sturmian spec needs a 'phi' line")
        spec = build_sturmian_hamiltonian(
            field("phi", RotationNumber.parse, None), field("alpha", float, 4.0), field("k_max", int, 64)
        )
    elif family == "finite-range":
        alphabet = field("alphabet", lambda t: tuple(t.split()), BINARY)
        spec = HamiltonianSpec(FiniteRangeFamily(tuple(terms), alphabet, field("tail", float, 0.0)))
    else:
        raise ParseError(f"unknown or missing family {family!r}")
    for patch_text, eps, lineno in chem:
        try:
            patch = Patch.parse(patch_text, spec.alphabet)
        except (DomainError, ContractError) as exc:
            raise ParseError(str(exc), lineno) from None
        spec = add_chemical_potential(spec, patch, eps)
    return spec
