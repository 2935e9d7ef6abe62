import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quasilattice import (
    BudgetError,
    ContractError,
    Periodic,
    apply_excitation,
    exhaustive_search,
    relative_energy,
)
from quasilattice.hamiltonian import InteractionTerm, finite_range_hamiltonian
from quasilattice.local import LocalProblem, enumerate_assignments


def test_enumeration_is_lexicographic():
    rows = enumerate_assignments(3, 2, 0, 8)
    assert [tuple(r) for r in rows] == list(itertools.product((0, 1), repeat=3))
    assert enumerate_assignments(2, 3, 4, 6).tolist() == [[1, 1], [1, 2]]


@pytest.mark.parametrize("which", ["tm", "sturmian"])
def test_compiled_energies_match_relative_energy(which, tm, tm_spec, golden_word, sturmian_spec):
    spec, src = (tm_spec, tm) if which == "tm" else (sturmian_spec, golden_word)
    sites = range(37, 43)
    problem = LocalProblem(spec, src, sites)
    rng = np.random.default_rng(7)
    assign = rng.integers(0, 2, size=(40, len(sites))).astype(np.int8)
    fast = problem.energies(assign)
    for row, e in zip(assign, fast):
        slow = relative_energy(spec, problem.excitation(row)).total
        assert e == pytest.approx(slow, abs=1e-9)


def test_base_assignment_has_zero_energy(tm, tm_spec):
    problem = LocalProblem(tm_spec, tm, range(-5, 5))
    assert problem.energies(problem.base_assignment[None])[0] == 0.0


def test_empty_sites_rejected(tm, tm_spec):
    with pytest.raises(ContractError):
        LocalProblem(tm_spec, tm, [])


class TestSearch:
    def test_ground_state_witness_is_identity(self, tm, tm_spec):
        res = exhaustive_search(tm_spec, tm, 0, 10)
        assert res.minimum == 0.0 and res.excitation.overrides == {}
        assert res.evaluated == 2**10

    def test_budget(self, tm, tm_spec):
        with pytest.raises(BudgetError):
            exhaustive_search(tm_spec, tm, 0, 12, budget=1000)

    def test_hamming_ball_size(self, tm, tm_spec):
        res = exhaustive_search(tm_spec, tm, 0, 10, max_flips=2)
        assert res.evaluated == 1 + 10 + 45

    def test_bad_width(self, tm, tm_spec):
        with pytest.raises(ContractError):
            exhaustive_search(tm_spec, tm, 0, 0)

    def test_tie_break_is_lexicographic(self):
        # h = -1 on every '1': all-ones is the unique minimum
        field = InteractionTerm("h", (0,), np.array([0.0, -1.0]))
        spec = finite_range_hamiltonian([field])
        res = exhaustive_search(spec, Periodic.from_text("0"), 0, 4)
        assert res.assignment == (1, 1, 1, 1) and res.minimum == -4.0
        # a flat Hamiltonian: every assignment ties and the smallest wins
        flat = finite_range_hamiltonian([InteractionTerm("z", (0,), np.zeros(2))])
        res = exhaustive_search(flat, Periodic.from_text("1"), 0, 3)
        assert res.assignment == (0, 0, 0)

    def test_reported_energy_is_recomputed(self, tm, tm_spec):
        res = exhaustive_search(tm_spec, tm, 3, 8)
        assert res.energy.total == relative_energy(tm_spec, res.excitation).total == res.minimum


@settings(max_examples=15, deadline=None)
@given(
    st.lists(st.floats(-2, 2, allow_nan=False), min_size=4, max_size=4),
    st.integers(1, 3),
    st.text("01", min_size=1, max_size=5),
)
def test_search_against_itertools(table, d, word):
    """The minimum over all 2^w excitations equals a plain loop over relative_energy."""
    spec = finite_range_hamiltonian([InteractionTerm("pair", (0, d), np.array(table))])
    base = Periodic.from_text(word)
    res = exhaustive_search(spec, base, 0, 5)
    best = min(
        relative_energy(spec, apply_excitation(base, dict(enumerate(a)))).total
        for a in itertools.product((0, 1), repeat=5)
    )
    assert res.minimum == pytest.approx(best, abs=1e-9)
