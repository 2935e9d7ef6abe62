import itertools

import numpy as np
import pytest

from quasilattice import (
    PLUS_MINUS,
    ContractError,
    DomainError,
    Patch,
    Periodic,
    TilingGrid,
    apply_excitation,
    balanced_check,
    build_sturmian_hamiltonian,
    build_tm_hamiltonian,
    discrepancy_profile,
    sbc_excitation_ratio,
    sturmian_patch_frequency,
    tiling_discrepancy,
)
from quasilattice.core import patch_matches
from quasilattice.sbc import default_omega
from quasilattice.stability import ExcitationFamily
from quasilattice.wang import parse_patch_2d

from conftest import checker_cells


def naive_D(values, patch, omega, L):
    hits = patch_matches(values, patch)
    places = L - patch.diameter
    return max(abs(hits[s : s + places].sum() - omega * places) for s in range(len(values) - L + 1))


class TestDiscrepancy:
    def test_against_naive(self, golden_word):
        vals = golden_word.values(0, 600)
        patch = Patch.word([1, 0])
        rep = discrepancy_profile(golden_word, patch, 0.3, [5, 17, 100], 600)
        for L in (5, 17, 100):
            assert rep.D(L) == pytest.approx(naive_D(vals, patch, 0.3, L))

    def test_sturmian_single_letter(self, golden, golden_word):
        one = Patch.word([1])
        rep = discrepancy_profile(golden_word, one, 1 - float(golden), [10, 100, 1000, 10_000], 200_000)
        assert all(D <= 1 for _, D, _ in rep.rows)

    def test_tm_single_plus_even_lengths(self, tm):
        rep = discrepancy_profile(tm, Patch.parse("+", PLUS_MINUS), 0.5, range(2, 2001, 2), 100_000)
        assert max(D for _, D, _ in rep.rows) <= 1

    def test_periodic_is_bounded(self):
        src = Periodic.from_text("01")
        rep = discrepancy_profile(src, Patch.word([0]), 0.5, [9, 10, 99, 100, 999, 1000, 9999], 20_000)
        assert max(D for _, D, _ in rep.rows) <= 0.5

    def test_sturmian_patches_bounded(self, golden, golden_word):
        worst = 0.0
        for n in range(1, 6):
            for word in itertools.product((0, 1), repeat=n):
                patch = Patch.word(word)
                omega = sturmian_patch_frequency(golden, patch)
                if omega > 0:
                    rep = discrepancy_profile(golden_word, patch, omega, [10, 100, 1000, 10_000], 100_000)
                    worst = max(worst, max(D for _, D, _ in rep.rows))
        assert worst < 2

    def test_threads_do_not_change_rows(self, tm):
        lengths = list(range(3, 300, 7))
        one = discrepancy_profile(tm, Patch.parse("++", PLUS_MINUS), 1 / 6, lengths, 5000)
        four = discrepancy_profile(tm, Patch.parse("++", PLUS_MINUS), 1 / 6, lengths, 5000, threads=4)
        assert one.rows == four.rows

    def test_length_beyond_prefix(self, tm):
        with pytest.raises(DomainError):
            discrepancy_profile(tm, Patch.word([0]), 0.5, [100], 50)

    def test_csv(self, tm):
        rep = discrepancy_profile(tm, Patch.word([0]), 0.5, [3, 2], 64)
        lines = rep.to_csv().splitlines()
        assert lines[0] == "L,D,argmax_start"
        assert [ln.split(",")[0] for ln in lines[1:]] == ["2", "3"]

    def test_default_omega(self, golden, golden_word, tm):
        assert default_omega(golden_word, Patch.word([0]), 10) == pytest.approx(float(golden))
        assert default_omega(tm, Patch.word([0]), 1024) == 0.5


class TestExcitationRatio:
    def test_empty_rejected(self, golden_word, sturmian_spec):
        with pytest.raises(ContractError):
            sbc_excitation_ratio(sturmian_spec, apply_excitation(golden_word, {}), Patch.word([1]))

    def test_one_inserted_pair(self, golden, golden_word):
        spec = build_sturmian_hamiltonian(golden).normalized()
        r = sbc_excitation_ratio(spec, apply_excitation(golden_word, {0: 1}), Patch.word([1]))
        assert (r.gain, r.broken, r.ratio) == (1, 1, 1.0)

    def test_tm_dyadic_flips_gain_one_pair(self, tm):
        # a dyadic block flip swaps '++' and '--' inside the block, so the net
        # change in '++' comes only from the two seams
        spec = build_tm_hamiltonian().normalized()
        pp = Patch.parse("++", PLUS_MINUS)
        family = ExcitationFamily.hierarchical_flips(tm, range(1, 9), [3])
        gains = [sbc_excitation_ratio(spec, exc, pp).gain for _, _, exc in family.members]
        assert max(gains) <= 1


class TestTilingDeviation:
    def test_single_tile(self, single):
        grid = TilingGrid.filled(single, 10, 10)
        dev = tiling_discrepancy(grid, parse_patch_2d("1", single), 1.0)
        assert dev.deviation == 0 and dev.perimeter == 40

    @pytest.mark.parametrize("L", [1, 5, 12])
    def test_square_perimeter(self, single, L):
        grid = TilingGrid.filled(single, L, L)
        assert tiling_discrepancy(grid, parse_patch_2d("1", single), 1.0).perimeter == 4 * L

    def test_checkerboard(self, checker):
        grid = TilingGrid(checker, 0, 0, checker_cells(7, 7))
        dev = tiling_discrepancy(grid, parse_patch_2d("A", checker), 0.5)
        assert dev.count == 25 and dev.deviation == 0.5
        assert dev.deviation <= dev.perimeter / 4


class TestBalance:
    def test_sturmian(self, golden_word):
        assert balanced_check(golden_word, 1, 1000) == 1

    @pytest.mark.parametrize("L_max", [1, 7, 50])
    def test_periodic(self, L_max):
        assert balanced_check(Periodic.from_text("01"), 1, L_max) == 1

    def test_tm_near_balanced(self, tm):
        assert balanced_check(tm, 0, 1000) <= 2

    def test_binary_only(self):
        with pytest.raises(DomainError):
            balanced_check(Periodic(tuple(np.array([0, 1, 2])), ("a", "b", "c")), 0, 3)
