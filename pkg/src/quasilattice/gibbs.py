"""Finite-volume Gibbs states with the outside of the volume frozen.

Energies are relative to the boundary configuration, ``H(Y|X)`` over all
term placements meeting the volume; placements entirely outside are
constant and drop out of the Boltzmann weights.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy.special import logsumexp

from ._io import csv_table
from .core import ConfigurationSource, Patch
from .errors import BudgetError, ContractError, DomainError
from .hamiltonian import HamiltonianSpec
from .local import DEFAULT_BUDGET, LocalProblem, enumerate_assignments

RNG_NAME = "numpy PCG64"
N_BATCHES = 32
_STEP_BLOCK = 1 << 20


@dataclass(frozen=True, eq=False)
class GibbsProblem:
    spec: HamiltonianSpec
    start: int
    size: int
    boundary: ConfigurationSource
    beta: float

    def __post_init__(self):
        if self.size < 1:
            raise ContractError("the volume needs at least one site")
        if self.beta < 0:
            raise DomainError("beta must be non-negative")

    @property
    def sites(self) -> range:
        return range(self.start, self.start + self.size)

    def with_beta(self, beta: float) -> "GibbsProblem":
        return GibbsProblem(self.spec, self.start, self.size, self.boundary, beta)

    def local(self) -> LocalProblem:
        return LocalProblem(self.spec, self.boundary, self.sites)


@dataclass
class GibbsEstimate:
    beta: float
    method: str
    energy: tuple
    observables: dict
    sweeps: int | None = None
    burn_in: int | None = None
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "beta": self.beta,
            "method": self.method,
            "sweeps": self.sweeps,
            "seed": self.seed,
            "energy": {"mean": self.energy[0], "se": self.energy[1]},
            "observables": [{"patch": k, "mean": m, "se": se} for k, (m, se) in self.observables.items()],
        }
        if self.method == "metropolis":
            out["burn_in"] = self.burn_in
            out["rng"] = RNG_NAME
        out.update(self.meta)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def rows(self):
        yield self.beta, "energy", self.energy[0], self.energy[1]
        for patch, (mean, se) in self.observables.items():
            yield self.beta, patch, mean, se

    def to_csv(self) -> str:
        return csv_table(["beta", "quantity", "mean", "se"], self.rows())


@dataclass(frozen=True)
class ExactDistribution:
    assignments: np.ndarray
    energies: np.ndarray
    probabilities: np.ndarray
    log_z: float


def exact_distribution(problem: GibbsProblem, budget: int = DEFAULT_BUDGET) -> ExactDistribution:
    q = problem.spec.q
    total = q**problem.size
    if total > budget:
        raise BudgetError(f"{total} configurations exceed the enumeration budget {budget}")
    local = problem.local()
    assign = enumerate_assignments(problem.size, q, 0, total)
    energies = local.energies(assign)
    logw = -problem.beta * energies
    log_z = float(logsumexp(logw))
    return ExactDistribution(assign, energies, np.exp(logw - log_z), log_z)


def exact_gibbs(problem: GibbsProblem, observables: list[Patch], budget: int = DEFAULT_BUDGET) -> GibbsEstimate:
    """Boltzmann expectations by full enumeration of the volume."""
    dist = exact_distribution(problem, budget)
    local = problem.local()
    alphabet = problem.spec.alphabet
    obs = {}
    for patch in observables:
        density = local.observable(patch).energies(dist.assignments) / problem.size
        obs[patch.format(alphabet)] = (float(dist.probabilities @ density), 0.0)
    energy = float(dist.probabilities @ dist.energies)
    return GibbsEstimate(problem.beta, "exact", (energy, 0.0), obs, meta={"log_z": dist.log_z})


@numba.njit(cache=True)
def _group_energy(state, g, free_ptr, free_idx, table_ptr, tables, q):
    code = 0
    mult = 1
    for i in range(free_ptr[g], free_ptr[g + 1]):
        code += state[free_idx[i]] * mult
        mult *= q
    return tables[table_ptr[g] + code]


@numba.njit(cache=True)
def _run_block(
    state, energy, sites, shifts, uniforms, beta, q, n_sites,
    free_ptr, free_idx, table_ptr, tables, site_ptr, site_groups,
    obs_free_ptr, obs_free_idx, obs_table_ptr, obs_tables, obs_ptr, obs_const,
    step0, burn_steps, measured_sweeps, batch_sums, batch_counts, accepted,
):
    n_obs = len(obs_ptr) - 1
    for k in range(len(sites)):
        j = sites[k]
        old = state[j]
        new = (old + shifts[k]) % q
        delta = 0.0
        for t in range(site_ptr[j], site_ptr[j + 1]):
            g = site_groups[t]
            delta -= _group_energy(state, g, free_ptr, free_idx, table_ptr, tables, q)
        state[j] = new
        for t in range(site_ptr[j], site_ptr[j + 1]):
            g = site_groups[t]
            delta += _group_energy(state, g, free_ptr, free_idx, table_ptr, tables, q)
        if delta <= 0.0 or uniforms[k] < np.exp(-beta * delta):
            energy += delta
            accepted[0] += 1
        else:
            state[j] = old
        step = step0 + k + 1
        if step > burn_steps and (step - burn_steps) % n_sites == 0:
            m = (step - burn_steps) // n_sites - 1
            b = (m * batch_counts.shape[0]) // measured_sweeps
            batch_counts[b] += 1
            batch_sums[b, 0] += energy
            for o in range(n_obs):
                val = obs_const[o]
                for g in range(obs_ptr[o], obs_ptr[o + 1]):
                    val += _group_energy(state, g, obs_free_ptr, obs_free_idx, obs_table_ptr, obs_tables, q)
                batch_sums[b, 1 + o] += val / n_sites
    return energy


def _site_adjacency(compiled, n_sites):
    per_site = [[] for _ in range(n_sites)]
    for g, (free, _) in enumerate(compiled.groups):
        for k in free:
            per_site[k].append(g)
    ptr = np.zeros(n_sites + 1, dtype=np.int64)
    ptr[1:] = np.cumsum([len(p) for p in per_site])
    flat = np.array([g for p in per_site for g in p], dtype=np.int64)
    return ptr, flat


def metropolis_sample(
    problem: GibbsProblem,
    sweeps: int,
    burn_in: int,
    seed: int,
    observables: list[Patch],
) -> GibbsEstimate:
    """Single-site Metropolis chain started from the boundary configuration.

    A sweep is ``size`` proposals (uniform site, uniform different symbol);
    measurements are taken after every sweep past ``burn_in`` and reduced to
    standard errors by batch means over 32 batches.
    """
    if not sweeps > burn_in >= 0:
        raise ContractError("need sweeps > burn_in >= 0")
    q = problem.spec.q
    n = problem.size
    local = problem.local()
    compiled = local.compiled
    free_ptr, free_idx, table_ptr, tables = compiled.flat()
    site_ptr, site_groups = _site_adjacency(compiled, n)

    obs_parts = [local.observable(p) for p in observables]
    obs_groups = [g for c in obs_parts for g in c.groups]
    obs_ptr = np.zeros(len(obs_parts) + 1, dtype=np.int64)
    obs_ptr[1:] = np.cumsum([len(c.groups) for c in obs_parts])
    obs_const = np.array([c.const for c in obs_parts], dtype=np.float64)
    if obs_groups:
        from .local import CompiledTerms

        o_free_ptr, o_free_idx, o_table_ptr, o_tables = CompiledTerms(obs_groups, 0.0, q).flat()
    else:
        o_free_ptr = np.zeros(1, dtype=np.int64)
        o_free_idx = np.zeros(0, dtype=np.int64)
        o_table_ptr = np.zeros(1, dtype=np.int64)
        o_tables = np.zeros(0)

    measured = sweeps - burn_in
    n_batches = min(N_BATCHES, measured)
    batch_sums = np.zeros((n_batches, 1 + len(observables)))
    batch_counts = np.zeros(n_batches, dtype=np.int64)
    accepted = np.zeros(1, dtype=np.int64)

    state = local.base_assignment.astype(np.int64).copy()
    energy = 0.0
    rng = np.random.Generator(np.random.PCG64(seed))
    total_steps = sweeps * n
    burn_steps = burn_in * n
    for step0 in range(0, total_steps, _STEP_BLOCK):
        m = min(_STEP_BLOCK, total_steps - step0)
        sites = rng.integers(0, n, size=m)
        shifts = rng.integers(1, q, size=m) if q > 1 else np.zeros(m, dtype=np.int64)
        uniforms = rng.random(m)
        energy = _run_block(
            state, energy, sites, shifts, uniforms, float(problem.beta), q, n,
            free_ptr, free_idx, table_ptr, tables, site_ptr, site_groups,
            o_free_ptr, o_free_idx, o_table_ptr, o_tables, obs_ptr, obs_const,
            step0, burn_steps, measured, batch_sums, batch_counts, accepted,
        )

    means = batch_sums / batch_counts[:, None]
    overall = batch_sums.sum(0) / batch_counts.sum()
    if n_batches > 1:
        se = means.std(0, ddof=1) / np.sqrt(n_batches)
    else:
        se = np.full(overall.shape, np.nan)
    alphabet = problem.spec.alphabet
    obs = {p.format(alphabet): (float(overall[1 + k]), float(se[1 + k])) for k, p in enumerate(observables)}
    return GibbsEstimate(
        problem.beta,
        "metropolis",
        (float(overall[0]), float(se[0])),
        obs,
        sweeps=sweeps,
        burn_in=burn_in,
        seed=seed,
        meta={"acceptance": float(accepted[0]) / total_steps},
    )


@dataclass
class AnnealProfile:
    estimates: list

    def monotone_energy(self, n_se: float = 3.0) -> bool:
        """Mean energy non-increasing in beta within ``n_se`` combined standard errors."""
        for a, b in zip(self.estimates, self.estimates[1:]):
            slack = n_se * float(np.hypot(a.energy[1], b.energy[1]))
            if b.energy[0] > a.energy[0] + slack:
                return False
        return True

    def to_csv(self) -> str:
        return csv_table(["beta", "quantity", "mean", "se"], (r for e in self.estimates for r in e.rows()))

    def to_dict(self) -> dict:
        return {"estimates": [e.to_dict() for e in self.estimates], "monotone_energy": self.monotone_energy()}


def anneal_profile(
    problem: GibbsProblem,
    betas,
    observables: list[Patch],
    method: str = "metropolis",
    sweeps: int = 10_000,
    burn_in: int = 1_000,
    seed: int = 0,
) -> AnnealProfile:
    """Independent estimates along an ascending list of betas.

    The k-th chain uses seed ``seed + k``, so a one-element list reproduces a
    single :func:`metropolis_sample` call.
    """
    betas = [float(b) for b in betas]
    if not betas:
        raise DomainError("beta list is empty")
    if any(b2 < b1 for b1, b2 in zip(betas, betas[1:])):
        raise DomainError("beta list must be ascending")
    estimates = []
    for k, beta in enumerate(betas):
        p = problem.with_beta(beta)
        if method == "exact":
            estimates.append(exact_gibbs(p, observables))
        elif method == "metropolis":
            estimates.append(metropolis_sample(p, sweeps, burn_in, (seed + k) % 2**64, observables))
        else:
            raise DomainError(f"unknown method {method!r}")
    return AnnealProfile(estimates)
