import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quasilattice import (
    BINARY,
    FIBONACCI_RULE,
    PLUS_MINUS,
    THUE_MORSE_RULE,
    AmbiguityError,
    ContractError,
    DomainError,
    ParseError,
    Patch,
    Periodic,
    RationalityError,
    RotationNumber,
    Sturmian,
    continued_fraction,
    forbidden_distances,
    sturmian_patch_frequency,
    substitution_prefix,
    substitution_word,
    window_of,
)
from quasilattice.rotation import QuadNumber, sturmian_bit, sturmian_bits
from quasilattice.symbolic import (
    SubstitutionRule,
    empirical_frequency,
    is_badly_approximable_heuristic,
    max_zero_run,
    sturmian_patch_frequency_exact,
    thue_morse_symbol,
)

SQRT2_MINUS_1 = RotationNumber.quadratic(-1, 1, 2, 1)
E_MINUS_2 = RotationNumber.decimal("0.718281828459045235360287", 24)


def naive_sturmian(phi: float, n: int) -> int:
    return 0 if (n * phi) % 1.0 < phi else 1


class TestRotationNumber:
    def test_parse_round_trip(self, golden):
        again = RotationNumber.parse(golden.text)
        assert again.value == golden.value and again.text == golden.text

    def test_golden_value(self, golden):
        assert float(golden) == pytest.approx((5**0.5 - 1) / 2, abs=1e-15)

    @pytest.mark.parametrize("text", ["0.6", "quad:(1+sqrt5)/2", "dec:0.6", "quad:(-1+1*sqrt5)/0"])
    def test_malformed(self, text):
        with pytest.raises((ParseError, DomainError)):
            RotationNumber.parse(text)

    def test_rational_quadratic_rejected(self):
        with pytest.raises(RationalityError):
            RotationNumber.quadratic(1, 1, 9, 5)

    def test_outside_unit_interval(self):
        with pytest.raises(DomainError):
            RotationNumber.quadratic(1, 1, 5, 2)


class TestQuadNumber:
    @given(st.integers(-50, 50), st.integers(-50, 50), st.integers(1, 20))
    def test_sign_matches_float(self, a, b, c):
        x = QuadNumber(Fraction(a, c), Fraction(b, c), 5)
        f = a / c + b / c * 5**0.5
        if abs(f) > 1e-9:
            assert x.sign() == (1 if f > 0 else -1)

    def test_inverse(self):
        x = QuadNumber(Fraction(-1, 2), Fraction(1, 2), 5)
        assert x * x.inverse() == 1

    def test_floor_frac(self):
        x = QuadNumber(Fraction(3), Fraction(1), 2)  # 3 + sqrt2
        assert x.floor() == 4
        assert float(x.frac()) == pytest.approx(2**0.5 - 1)


class TestSturmianBits:
    def test_first_two(self, golden):
        assert sturmian_bit(golden, 0) == 0
        assert sturmian_bit(golden, 1) == 1

    def test_vectorised_equals_exact(self, golden):
        fast = sturmian_bits(golden, -500, 1500)
        assert fast.tolist() == [sturmian_bit(golden, n) for n in range(-500, 1000)]

    def test_matches_float_rule_far_from_endpoints(self, golden):
        phi = float(golden)
        for n in range(2000):
            x = (n * phi) % 1.0
            if min(abs(x - phi), x, 1 - x) > 1e-9:
                assert sturmian_bit(golden, n) == naive_sturmian(phi, n)

    def test_decimal_near_endpoint_is_ambiguous(self):
        phi = RotationNumber.decimal("0.618", 3)
        with pytest.raises(AmbiguityError):
            sturmian_bit(phi, 34)  # {34 * 0.618} = 0.012 < 34e-3

    def test_decimal_far_from_endpoint(self):
        phi = RotationNumber.decimal("0.61803398874989484820", 20)
        assert sturmian_bit(phi, 1) == 1


class TestSubstitution:
    def test_tm_twice(self):
        assert substitution_prefix(THUE_MORSE_RULE, 0, 2).text == "+--+"

    def test_fibonacci_three(self):
        assert substitution_prefix(FIBONACCI_RULE, 0, 3).text == "01001"

    def test_zero_iterations(self):
        assert substitution_prefix(FIBONACCI_RULE, 0, 0).text == "0"

    def test_bad_seed(self):
        with pytest.raises(ContractError):
            substitution_prefix(FIBONACCI_RULE, 1, 2)

    def test_missing_image(self):
        with pytest.raises(ContractError):
            SubstitutionRule({0: (0, 1)}, BINARY)

    def test_tm_closed_form_against_substitution(self):
        word = substitution_word(THUE_MORSE_RULE, 0, 2**12)
        assert [thue_morse_symbol(i) for i in range(2**12)] == word.tolist()
        assert thue_morse_symbol(-1) == 0 and thue_morse_symbol(1) == 1


class TestContinuedFraction:
    def test_golden(self, golden):
        assert continued_fraction(golden, 6) == [1] * 6

    def test_sqrt2(self):
        assert continued_fraction(SQRT2_MINUS_1, 4) == [2, 2, 2, 2]

    def test_e_minus_2(self):
        assert continued_fraction(E_MINUS_2, 12) == [1, 2, 1, 1, 4, 1, 1, 6, 1, 1, 8, 1]

    def test_rational_decimal(self):
        with pytest.raises(RationalityError):
            continued_fraction(RotationNumber.decimal("0.5", 10), 3)

    def test_imprecise_decimal(self):
        with pytest.raises(AmbiguityError):
            continued_fraction(RotationNumber.decimal("0.618034", 6), 20)

    @pytest.mark.parametrize(
        "phi, bound, expected",
        [(RotationNumber.golden(), 5, True), (E_MINUS_2, 5, False), (RotationNumber.golden(), 0, False)],
    )
    def test_badly_approximable(self, phi, bound, expected):
        depth = 20 if phi.exact else 12
        assert is_badly_approximable_heuristic(phi, depth, bound) is expected


class TestForbiddenDistances:
    def test_golden_small(self, golden):
        fs = forbidden_distances(golden, 10)
        assert fs.distances == (1, 4, 9) and fs.m == 3

    def test_golden_default(self, golden):
        assert forbidden_distances(golden).distances == (
            1, 4, 9, 12, 17, 22, 25, 30, 33, 38, 43, 46, 51, 56, 59, 64,
        )

    def test_domain(self):
        with pytest.raises(DomainError):
            forbidden_distances(SQRT2_MINUS_1, 10)

    def test_against_scan(self, golden):
        w = Sturmian(golden).values(0, 20_000)
        present = {d for d in range(1, 41) if np.any((w[:-d] == 1) & (w[d:] == 1))}
        fs = forbidden_distances(golden, 40)
        assert present == set(range(1, 41)) - set(fs.distances)
        runs = max(len(list(g)) for k, g in itertools.groupby(w.tolist()) if k == 0)
        assert runs == max_zero_run(golden) == fs.m - 1


class TestFrequencies:
    def test_single_zero_is_phi(self, golden):
        assert sturmian_patch_frequency_exact(golden, Patch.word([0])) == golden.value

    def test_forbidden_pair_has_zero_frequency(self, golden):
        assert sturmian_patch_frequency(golden, Patch.word([1, 1])) == 0.0

    @pytest.mark.parametrize("offsets", [(0, 1), (0, 2), (0, 1, 3)])
    def test_partition_sums_to_one(self, golden, offsets):
        total = 0
        for syms in itertools.product((0, 1), repeat=len(offsets)):
            total = sturmian_patch_frequency_exact(golden, Patch.from_cells(zip(offsets, syms))) + total
        assert total == 1

    @settings(max_examples=25, deadline=None)
    @given(st.lists(st.integers(0, 1), min_size=1, max_size=6))
    def test_exact_matches_empirical(self, word):
        golden = RotationNumber.golden()
        patch = Patch.word(word)
        exact = sturmian_patch_frequency(golden, patch)
        emp = empirical_frequency(Sturmian(golden), patch, 200_000)
        assert abs(exact - emp) < 1e-3

    @pytest.mark.parametrize("k", range(1, 14))
    def test_tm_plus_exactly_half(self, tm, k):
        assert empirical_frequency(tm, Patch.parse("+", PLUS_MINUS), 2**k) == 0.5

    def test_periodic(self):
        assert empirical_frequency(Periodic.from_text("01"), Patch.word([0]), 1000) == 0.5

    def test_golden_million(self, golden, golden_word):
        assert empirical_frequency(golden_word, Patch.word([0]), 10**6) == pytest.approx(float(golden), abs=1e-3)


def test_orbit_equivalence_small(golden):
    rot = Sturmian(golden).values(0, 3000)
    fib = substitution_word(FIBONACCI_RULE, 0, 3000)
    factors = lambda w: {w[i : i + 8].tobytes() for i in range(len(w) - 8)}  # noqa: E731
    assert factors(rot) == factors(fib)
    assert window_of(Sturmian(golden), 0, 7).text == "0101001"
