import numpy as np
import pytest

from quasilattice import (
    PLUS_MINUS,
    DomainError,
    ExcitationFamily,
    Patch,
    add_chemical_potential,
    relative_energy,
    stability_scan,
)
from quasilattice.stability import exhaustive_excitation_search, patch_gain

PAIRS = [Patch.parse("++", PLUS_MINUS), Patch.parse("--", PLUS_MINUS)]


def test_empty_family_rejected(tm, tm_spec):
    fam = ExcitationFamily.custom(tm, [(1, {0: "+"})])  # a no-op override
    assert len(fam) == 0
    with pytest.raises(DomainError):
        stability_scan(tm_spec, PAIRS, fam)


def test_block_family_sizes(tm):
    fam = ExcitationFamily.block_flips(tm, [3, 1], [0, 5])
    assert [m[0] for m in fam.members] == [1, 1, 3, 3]
    assert fam.members[0][2].sites == (0,)


def test_tm_hierarchical_curve_non_increasing(tm, tm_spec):
    fam = ExcitationFamily.hierarchical_flips(tm, range(2, 9), range(8))
    curve = stability_scan(tm_spec, PAIRS, fam)
    stars = curve.epsilon_stars()
    assert stars and all(b <= a for a, b in zip(stars, stars[1:]))


def test_curve_rows_are_exact_minima(tm, tm_spec):
    fam = ExcitationFamily.block_flips(tm, [2, 4], range(6))
    curve = stability_scan(tm_spec, PAIRS, fam)
    by_size = {}
    for size, _, exc in fam.members:
        n = patch_gain(exc, PAIRS)
        if n > 0:
            eps = relative_energy(tm_spec, exc).total / n
            by_size[size] = min(by_size.get(size, np.inf), eps)
    row = {r.size: r for r in curve.rows}
    assert row[2].epsilon_star_at_size == pytest.approx(by_size[2])
    assert row[4].epsilon_star == pytest.approx(min(by_size.values()))


def test_chemical_terms_do_not_shift_threshold(tm, tm_spec):
    fam = ExcitationFamily.hierarchical_flips(tm, [4, 6], range(4))
    plain = stability_scan(tm_spec, PAIRS, fam)
    perturbed = tm_spec
    for p in PAIRS:
        perturbed = add_chemical_potential(perturbed, p, 1.0)
    assert stability_scan(perturbed, PAIRS, fam).to_csv() == plain.to_csv()


def test_sturmian_block_curve(golden_word, sturmian_spec):
    fam = ExcitationFamily.block_flips(golden_word, range(1, 17), range(8))
    curve = stability_scan(sturmian_spec, [Patch.word([1])], fam)
    stars = curve.epsilon_stars()
    assert all(b <= a for a, b in zip(stars, stars[1:]))
    header = curve.to_csv().splitlines()[0]
    assert header == "size,member,energy,gain,epsilon_star,epsilon_star_at_size,tail_bound"


def test_exhaustive_excitation_search_is_ground(golden_word, sturmian_spec):
    res = exhaustive_excitation_search(sturmian_spec, golden_word, 0, 12)
    assert res.minimum >= -res.energy.tail_bound
    assert res.minimum == 0.0
