"""Zero-temperature stability scans over finite excitation families."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

from .core import ConfigurationSource, Excitation, Patch, apply_excitation, diff_count
from .errors import DomainError
from .hamiltonian import HamiltonianSpec, relative_energy
from .local import SearchResult, exhaustive_search


def _flip(base: ConfigurationSource, lo: int, hi: int) -> Excitation:
    q = len(base.alphabet)
    vals = base.values(lo, hi - lo)
    return apply_excitation(base, {lo + k: (int(v) + 1) % q for k, v in enumerate(vals)})


@dataclass
class ExcitationFamily:
    """Finite list of ``(size, member_id, excitation)``; empty excitations are dropped."""

    kind: str
    base: ConfigurationSource
    members: list = field(default_factory=list)

    def __post_init__(self):
        self.members = [m for m in self.members if m[2].overrides]

    def __len__(self):
        return len(self.members)

    @classmethod
    def single_flips(cls, base, sites) -> "ExcitationFamily":
        return cls("single-flip", base, [(1, f"flip@{s}", _flip(base, s, s + 1)) for s in sites])

    @classmethod
    def block_flips(cls, base, widths, starts) -> "ExcitationFamily":
        """Flip every symbol of ``[s, s + w)`` for each width and start."""
        members = [
            (w, f"block@{s}+{w}", _flip(base, s, s + w)) for w in sorted(widths) for s in starts
        ]
        return cls("contiguous-block-flip", base, members)

    @classmethod
    def hierarchical_flips(cls, base, scales, blocks) -> "ExcitationFamily":
        """Flip dyadic blocks ``[a 2^k, (a+1) 2^k)`` for ``k`` in ``scales``, ``a`` in ``blocks``."""
        members = [
            (2**k, f"dyadic k={k} a={a}", _flip(base, a * 2**k, (a + 1) * 2**k))
            for k in sorted(scales)
            for a in blocks
        ]
        return cls("hierarchical-block-flip", base, members)

    @classmethod
    def custom(cls, base, items) -> "ExcitationFamily":
        """``items`` are ``(size, overrides)`` pairs."""
        members = [(size, f"custom#{k}", apply_excitation(base, ov)) for k, (size, ov) in enumerate(items)]
        return cls("custom", base, members)


@dataclass(frozen=True)
class CurveRow:
    size: int
    member: str | None
    energy: float | None
    gain: int | None
    epsilon_star: float | None
    epsilon_star_at_size: float | None
    tail_bound: float | None = None


@dataclass
class StabilityCurve:
    rows: list

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["size", "member", "energy", "gain", "epsilon_star", "epsilon_star_at_size", "tail_bound"])

        def fmt(v):
            return "" if v is None else (f"{v:.12g}" if isinstance(v, float) else v)

        for r in self.rows:
            w.writerow(
                [
                    r.size,
                    fmt(r.member),
                    fmt(r.energy),
                    fmt(r.gain),
                    fmt(r.epsilon_star),
                    fmt(r.epsilon_star_at_size),
                    fmt(r.tail_bound),
                ]
            )
        return buf.getvalue()

    def epsilon_stars(self) -> list:
        return [r.epsilon_star for r in self.rows if r.epsilon_star is not None]


def patch_gain(excitation: Excitation, patches) -> int:
    return sum(diff_count(excitation, p, p.diameter) for p in patches)


def stability_scan(spec: HamiltonianSpec, favored: list[Patch], family: ExcitationFamily) -> StabilityCurve:
    """Threshold ``eps*`` at which some member gains energy from the favoured patches.

    For each member, ``eps = H(Y|X) / n`` with ``H`` the unperturbed energy
    (chemical terms of ``spec`` are ignored) and ``n`` the total gain in favoured
    patches (members with ``n <= 0`` give no threshold).  ``epsilon_star`` at a
    size is the minimum over all members of that size or smaller, so it is
    non-increasing along the family; ``epsilon_star_at_size`` uses members of
    exactly that size.  ``tail_bound`` bounds the truncation error of the
    chosen member's energy; thresholds below ``tail_bound / gain`` are not
    resolved by the truncated Hamiltonian.
    """
    if not family.members:
        raise DomainError("excitation family is empty")
    spec = spec.unperturbed()
    evaluated = []
    for size, mid, exc in family.members:
        energy = relative_energy(spec, exc)
        h = energy.total
        n = patch_gain(exc, favored)
        evaluated.append((size, mid, h, n, h / n if n > 0 else None, energy.tail_bound))

    rows = []
    best = None
    for size in sorted({e[0] for e in evaluated}):
        at_size = [e for e in evaluated if e[0] == size and e[4] is not None]
        local = min(at_size, key=lambda e: e[4]) if at_size else None
        if local is not None and (best is None or local[4] < best[4]):
            best = local
        if best is None:
            rows.append(CurveRow(size, None, None, None, None, None))
        else:
            rows.append(
                CurveRow(size, best[1], best[2], best[3], best[4], local[4] if local else None, best[5])
            )
    return StabilityCurve(rows)


def exhaustive_excitation_search(
    spec: HamiltonianSpec, source: ConfigurationSource, start: int, width: int, **kwargs
) -> SearchResult:
    return exhaustive_search(spec, source, start, width, **kwargs)
