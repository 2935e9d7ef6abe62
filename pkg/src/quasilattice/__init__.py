"""Lattice-gas models of one-dimensional quasicrystals: Thue-Morse and
Sturmian ground states, their stability under perturbations, and a small
Wang-tile engine."""

__version__ = "0.1.0"

from .core import (
    BINARY,
    PLUS_MINUS,
    Excitation,
    Explicit,
    Patch,
    Periodic,
    Sturmian,
    ThueMorse,
    Window,
    apply_excitation,
    count_patch,
    diff_count,
    window_of,
)
from .errors import (
    AmbiguityError,
    BudgetError,
    ContractError,
    DomainError,
    ParseError,
    QuasilatticeError,
    RationalityError,
)
from .gibbs import GibbsEstimate, GibbsProblem, anneal_profile, exact_gibbs, metropolis_sample
from .hamiltonian import (
    EnergyBreakdown,
    HamiltonianSpec,
    InteractionTerm,
    add_chemical_potential,
    broken_bonds,
    build_sturmian_hamiltonian,
    build_tm_hamiltonian,
    dump_spec,
    is_local_ground_state,
    load_spec,
    non_frustration_check,
    per_site_energy,
    relative_energy,
    window_energy,
)
from .local import exhaustive_search
from .rotation import RotationNumber
from .sbc import balanced_check, discrepancy_profile, sbc_excitation_ratio, tiling_discrepancy
from .stability import ExcitationFamily, stability_scan
from .symbolic import (
    FIBONACCI_RULE,
    THUE_MORSE_RULE,
    continued_fraction,
    forbidden_distances,
    sturmian_patch_frequency,
    substitution_prefix,
    substitution_word,
)
from .wang import TilingGrid, Tileset, complete_region, count_patch_2d, load_grid, load_tileset, verify_tiling
