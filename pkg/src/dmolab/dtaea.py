"""Dynamic two-archive evolutionary algorithm.

Two populations of equal capacity N co-evolve. The convergence archive (CA)
is refreshed by non-dominated sorting followed by density-driven trimming;
the diversity archive (DA) is refreshed by filling subspaces the CA leaves
under-populated. Offspring come from a mating step that draws the second
parent from the DA more often when the CA covers few subspaces. When the
objective count changes, both archives are rebuilt from the previous CA.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .core import (
    ContractError,
    ObjectiveBounds,
    Population,
    estimate_bounds,
    non_dominated_mask,
    non_dominated_sort,
)
from .decomposition import (
    WeightSet,
    associate,
    weights_for_population,
    occupation_rate,
    tchebycheff,
)
from .problems import DynamicProblem
from .variation import (
    VariationParams,
    binary_tournament_by_density,
    lhs_sample,
    polynomial_mutation,
    polynomial_mutation_batch,
    sbx_batch,
)

log = logging.getLogger(__name__)

VARIANTS = ("full", "v1", "v2", "v3")


@dataclass(frozen=True)
class DtaeaConfig:
    """``v1`` drops restricted mating, ``v2`` drops reconstruction, ``v3`` both."""

    n_pop: int = 300
    variant: str = "full"
    variation: VariationParams = field(default_factory=VariationParams)

    def __post_init__(self) -> None:
        if self.n_pop < 2:
            raise ContractError("population size must be at least 2")
        if self.variant not in VARIANTS:
            raise ContractError(f"unknown variant {self.variant!r}")

    @property
    def restricted_mating(self) -> bool:
        return self.variant in ("full", "v2")

    @property
    def reconstructs(self) -> bool:
        return self.variant in ("full", "v1")


@dataclass
class ArchivePair:
    ca: Population
    da: Population
    weights: WeightSet


def _evaluated(problem: DynamicProblem, X: np.ndarray, m: int, tau: int, env_id: int):
    return Population(X, problem.evaluate(X, m, tau), env_id)


# -- archive updates ---------------------------------------------------------


def select_ca(
    F: np.ndarray, weights: WeightSet, bounds: ObjectiveBounds, n: int
) -> np.ndarray:
    """Indices (ascending) of the ``n`` rows of ``F`` that form the next CA.

    Whole non-domination levels are taken until at least ``n`` rows are
    collected. Any surplus is trimmed one row at a time: the most crowded
    subspace (lowest index on ties) loses its member with the largest
    Tchebycheff value (lowest row index on ties).
    """
    chosen: list[np.ndarray] = []
    size = 0
    for front in non_dominated_sort(F):
        chosen.append(front)
        size += front.size
        if size >= n:
            break
    S = np.sort(np.concatenate(chosen)) if chosen else np.zeros(0, dtype=int)
    if S.size <= n:
        return S
    labels = associate(F[S], weights, bounds).subspace_of
    W = weights.vectors
    tch = tchebycheff(F[S], W[labels], bounds.ideal)
    counts = np.bincount(labels, minlength=len(W))
    alive = np.ones(S.size, dtype=bool)
    for _ in range(S.size - n):
        crowded = int(np.argmax(counts))
        cand = np.where(alive & (labels == crowded), tch, -np.inf)
        worst = int(np.argmax(cand))
        alive[worst] = False
        counts[crowded] -= 1
    return S[alive]


def update_ca(
    ca: Population,
    offspring: Population,
    weights: WeightSet,
    bounds: ObjectiveBounds,
    n: int | None = None,
) -> Population:
    n = len(ca) if n is None else n
    R = ca.concat(offspring)
    return R.take(select_ca(R.F, weights, bounds, n))


def select_da(
    F_R: np.ndarray,
    F_ca: np.ndarray,
    weights: WeightSet,
    bounds: ObjectiveBounds,
    n: int,
) -> np.ndarray:
    """Indices (in pick order) of the ``n`` rows of ``F_R`` forming the next DA.

    Sweeps subspaces in index order with a rising quota ``itr``; a subspace
    contributes in a sweep only while the CA holds fewer than ``itr`` of its
    members. Each contribution is the non-dominated remaining member with
    the lowest Tchebycheff value for that subspace's weight.
    """
    W = weights.vectors
    labels = associate(F_R, weights, bounds).subspace_of
    ca_counts = associate(F_ca, weights, bounds).counts
    pools: dict[int, list[int]] = {}
    for idx, k in enumerate(labels):
        pools.setdefault(int(k), []).append(idx)
    active = sorted(pools)
    picked: list[int] = []
    if F_R.shape[0] < n:
        raise ContractError(f"need at least {n} candidates, got {F_R.shape[0]}")
    itr = 1
    while len(picked) < n:
        active = [k for k in active if pools[k]]
        if not active:
            break
        floor = min(ca_counts[k] for k in active)
        if floor >= itr:
            # no subspace is eligible before quota floor + 1
            itr = int(floor) + 1
        for k in active:
            if ca_counts[k] >= itr or not pools[k]:
                continue
            if len(pools[k]) == 1:
                best = pools[k][0]
            else:
                members = np.asarray(pools[k])
                nd = members[non_dominated_mask(F_R[members])]
                vals = tchebycheff(F_R[nd], W[k], bounds.ideal)
                best = int(nd[int(np.argmin(np.atleast_1d(vals)))])
            pools[k].remove(best)
            picked.append(best)
            if len(picked) == n:
                break
        itr += 1
    return np.asarray(picked, dtype=int)


def update_da(
    ca_new: Population,
    da: Population,
    offspring: Population,
    weights: WeightSet,
    bounds: ObjectiveBounds,
    n: int | None = None,
) -> Population:
    n = len(da) if n is None else n
    R = da.concat(offspring)
    return R.take(select_da(R.F, ca_new.F, weights, bounds, n))


# -- reconstruction ----------------------------------------------------------


def reconstruct_increase(
    prev_ca: Population,
    problem: DynamicProblem,
    m: int,
    tau: int,
    rng: np.random.Generator,
    n: int | None = None,
    env_id: int | None = None,
) -> ArchivePair:
    """Keep the CA's decision vectors, draw a fresh Latin-hypercube DA."""
    n = len(prev_ca) if n is None else n
    env = prev_ca.env_id + 1 if env_id is None else env_id
    ca = _evaluated(problem, prev_ca.X.copy(), m, tau, env)
    da = _evaluated(problem, lhs_sample(n, problem.n, rng), m, tau, env)
    return ArchivePair(ca, da, weights_for_population(m, n))


def reconstruct_decrease(
    prev_ca: Population,
    problem: DynamicProblem,
    m: int,
    tau: int,
    rng: np.random.Generator,
    n: int | None = None,
    params: VariationParams | None = None,
    env_id: int | None = None,
) -> ArchivePair:
    """Split the re-evaluated CA into non-dominated (CA) and dominated (DA) parts.

    The CA is topped up with polynomial mutants of tournament-selected
    members from sparse subspaces; the DA is topped up with Latin-hypercube
    samples.
    """
    n = len(prev_ca) if n is None else n
    params = params or VariationParams()
    env = prev_ca.env_id + 1 if env_id is None else env_id
    weights = weights_for_population(m, n)
    full = _evaluated(problem, prev_ca.X.copy(), m, tau, env)
    nd = non_dominated_mask(full.F)
    ca = full.take(np.flatnonzero(nd))
    da = full.take(np.flatnonzero(~nd))

    if len(ca) > n:
        ca = ca.take(select_ca(ca.F, weights, estimate_bounds(ca.F), n))

    if len(ca) < n:
        bounds = estimate_bounds(ca.F)
        labels = list(associate(ca.F, weights, bounds).subspace_of)
        counts = np.bincount(labels, minlength=len(weights))
        X = [row for row in ca.X]
        F = [row for row in ca.F]
        while len(X) < n:
            density = counts[labels]
            parent = binary_tournament_by_density(len(X), density, rng)
            child = polynomial_mutation(X[parent], params, rng)
            f = problem.evaluate(child, m, tau)
            k = int(associate(f[None], weights, bounds).subspace_of[0])
            X.append(child)
            F.append(f)
            labels.append(k)
            counts[k] += 1
        ca = Population(np.asarray(X), np.asarray(F), env)

    if len(da) < n:
        fill = _evaluated(problem, lhs_sample(n - len(da), problem.n, rng), m, tau, env)
        da = da.concat(fill)
    elif len(da) > n:
        da = da.take(np.arange(n))
    return ArchivePair(ca, da, weights)


# -- mating ------------------------------------------------------------------


def mating_indices(
    n_ca: int,
    n_da: int,
    occupation: float,
    k: int,
    rng: np.random.Generator,
    restricted: bool = True,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Draw ``k`` parent pairs.

    Returns ``(p1, p2, p2_from_da)``: ``p1`` indexes the CA; ``p2`` indexes
    the DA where ``p2_from_da`` is set and the CA otherwise. Without
    restriction the second parent always comes from the DA.
    """
    if n_ca < 1 or n_da < 1:
        raise ContractError("both archives must be non-empty")
    p1 = rng.integers(0, n_ca, size=k)
    rnd = rng.random(k)
    from_da = ~(rnd < occupation) if restricted else np.ones(k, dtype=bool)
    p2 = np.where(from_da, rng.integers(0, n_da, size=k), rng.integers(0, n_ca, size=k))
    return p1, p2, from_da


def restricted_mating(
    ca: Population, da: Population, occupation: float, rng: np.random.Generator
):
    p1, p2, from_da = mating_indices(len(ca), len(da), occupation, 1, rng)
    second = da[int(p2[0])] if from_da[0] else ca[int(p2[0])]
    return ca[int(p1[0])], second


# -- driver ------------------------------------------------------------------


class DTAEA:
    """Stateful driver; the harness calls ``initialize``, ``step`` and the hooks."""

    name = "dtaea"

    def __init__(
        self,
        problem: DynamicProblem,
        config: DtaeaConfig | None = None,
        rng: np.random.Generator | None = None,
    ) -> None:
        self.problem = problem
        self.config = config or DtaeaConfig()
        self.rng = rng if rng is not None else np.random.default_rng()
        self.state: ArchivePair | None = None
        self.m = 0
        self.env_id = 0
        self.da_parent_share: list[float] = []

    @property
    def n(self) -> int:
        return self.config.n_pop

    @property
    def population(self) -> Population:
        return self.state.ca

    def initialize(self, m: int, tau: int = 0) -> None:
        self.m = m
        X_ca = self.rng.random((self.n, self.problem.n))
        X_da = lhs_sample(self.n, self.problem.n, self.rng)
        self.state = ArchivePair(
            _evaluated(self.problem, X_ca, m, tau, self.env_id),
            _evaluated(self.problem, X_da, m, tau, self.env_id),
            weights_for_population(m, self.n),
        )

    def reevaluate(self, tau: int) -> None:
        self.env_id += 1
        s = self.state
        s.ca = _evaluated(self.problem, s.ca.X, self.m, tau, self.env_id)
        s.da = _evaluated(self.problem, s.da.X, self.m, tau, self.env_id)

    def on_drift(self, tau: int) -> None:
        self.reevaluate(tau)

    def on_change(self, m: int, tau: int) -> None:
        old = self.m
        self.m = m
        if not self.config.reconstructs:
            self.reevaluate(tau)
            self.state.weights = weights_for_population(m, self.n)
            return
        self.env_id += 1
        if m > old:
            self.state = reconstruct_increase(
                self.state.ca, self.problem, m, tau, self.rng, self.n, self.env_id
            )
        else:
            self.state = reconstruct_decrease(
                self.state.ca,
                self.problem,
                m,
                tau,
                self.rng,
                self.n,
                self.config.variation,
                self.env_id,
            )

    def make_offspring(self, tau: int) -> Population:
        s = self.state
        params = self.config.variation
        bounds = estimate_bounds(np.vstack([s.ca.F, s.da.F]))
        occ = occupation_rate(associate(s.ca.F, s.weights, bounds))
        p1, p2, from_da = mating_indices(
            len(s.ca),
            len(s.da),
            occ,
            self.n,
            self.rng,
            restricted=self.config.restricted_mating,
        )
        self.da_parent_share.append(float(from_da.mean()))
        P1 = s.ca.X[p1]
        P2 = np.empty_like(P1)
        P2[from_da] = s.da.X[p2[from_da]]
        P2[~from_da] = s.ca.X[p2[~from_da]]
        C1, C2 = sbx_batch(P1, P2, params, self.rng)
        keep_first = self.rng.random(self.n) < 0.5
        C = np.where(keep_first[:, None], C1, C2)
        C = polynomial_mutation_batch(C, params, self.rng)
        return _evaluated(self.problem, C, self.m, tau, self.env_id)

    def step(self, tau: int) -> None:
        s = self.state
        Q = self.make_offspring(tau)
        bounds = estimate_bounds(np.vstack([s.ca.F, s.da.F, Q.F]))
        ca_new = update_ca(s.ca, Q, s.weights, bounds, self.n)
        da_new = update_da(ca_new, s.da, Q, s.weights, bounds, self.n)
        s.ca, s.da = ca_new, da_new
