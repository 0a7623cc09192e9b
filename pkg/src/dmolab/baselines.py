"""Reference algorithms: NSGA-II, DNSGA-II (random injection) and MOEA/D-DE.

They share the driver interface of :class:`dmolab.dtaea.DTAEA`:
``initialize(m, tau)``, ``step(tau)``, ``on_change(m, tau)``,
``on_drift(tau)`` and the ``population`` property.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import ContractError, Population, non_dominated_sort
from .decomposition import WeightSet, tchebycheff, weights_for_population
from .problems import DynamicProblem
from .variation import (
    VariationParams,
    apply_polynomial_mutation,
    polynomial_mutation_batch,
    sbx_batch,
)

ALGORITHMS = ("nsga2", "dnsga2", "moead")


@dataclass(frozen=True)
class BaselineConfig:
    algo: str = "nsga2"
    n_pop: int = 300
    injection_fraction: float = 0.2
    neighborhood: int = 20
    replace_cap: int = 2
    variation: VariationParams = field(default_factory=VariationParams)

    def __post_init__(self) -> None:
        if self.algo not in ALGORITHMS:
            raise ContractError(f"unknown baseline {self.algo!r}")
        if not 0.0 < self.injection_fraction <= 1.0:
            raise ContractError("injection_fraction must be in (0, 1]")
        if self.neighborhood < 2:
            raise ContractError("neighborhood size must be at least 2")
        if self.n_pop < 2:
            raise ContractError("population size must be at least 2")


# -- NSGA-II primitives -------------------------------------------------------


def crowding_distance(F: np.ndarray) -> np.ndarray:
    """Crowding distance within one front; boundary points get ``inf``."""
    F = np.asarray(F, dtype=float)
    k, m = F.shape
    dist = np.zeros(k)
    if k <= 2:
        dist[:] = np.inf
        return dist
    for j in range(m):
        order = np.argsort(F[:, j], kind="stable")
        col = F[order, j]
        span = col[-1] - col[0]
        dist[order[0]] = np.inf
        dist[order[-1]] = np.inf
        if span <= 0:
            continue
        dist[order[1:-1]] += (col[2:] - col[:-2]) / span
    return dist


def rank_and_crowding(F: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    rank = np.empty(F.shape[0], dtype=int)
    crowd = np.empty(F.shape[0])
    for r, front in enumerate(non_dominated_sort(F)):
        rank[front] = r
        crowd[front] = crowding_distance(F[front])
    return rank, crowd


def nsga2_survival(F: np.ndarray, n: int) -> np.ndarray:
    """Indices of the ``n`` survivors, ordered by (rank, -crowding, index)."""
    rank, crowd = rank_and_crowding(F)
    order = np.lexsort((np.arange(F.shape[0]), -crowd, rank))
    return order[:n]


def tournament(rank, crowd, k: int, rng: np.random.Generator) -> np.ndarray:
    """``k`` binary tournaments: lower rank wins, then larger crowding, then a coin."""
    a = rng.integers(0, rank.size, size=k)
    b = rng.integers(0, rank.size, size=k)
    coin = rng.random(k) < 0.5
    a_better = (rank[a] < rank[b]) | ((rank[a] == rank[b]) & (crowd[a] > crowd[b]))
    b_better = (rank[b] < rank[a]) | ((rank[a] == rank[b]) & (crowd[b] > crowd[a]))
    return np.where(a_better, a, np.where(b_better, b, np.where(coin, a, b)))


class NSGA2:
    name = "nsga2"

    def __init__(
        self,
        problem: DynamicProblem,
        config: BaselineConfig | None = None,
        rng: np.random.Generator | None = None,
    ) -> None:
        self.problem = problem
        self.config = config or BaselineConfig(algo=self.name)
        self.rng = rng if rng is not None else np.random.default_rng()
        self.pop: Population | None = None
        self.m = 0
        self.env_id = 0

    @property
    def n(self) -> int:
        return self.config.n_pop

    @property
    def population(self) -> Population:
        return self.pop

    def _eval(self, X: np.ndarray, tau: int) -> Population:
        return Population(X, self.problem.evaluate(X, self.m, tau), self.env_id)

    def initialize(self, m: int, tau: int = 0) -> None:
        self.m = m
        self.pop = self._eval(self.rng.random((self.n, self.problem.n)), tau)

    def reevaluate(self, tau: int) -> None:
        self.env_id += 1
        self.pop = self._eval(self.pop.X, tau)

    def on_change(self, m: int, tau: int) -> None:
        self.m = m
        self.reevaluate(tau)

    def on_drift(self, tau: int) -> None:
        self.reevaluate(tau)

    def step(self, tau: int) -> None:
        self.pop = nsga2_generation(
            self.pop, self.problem, self.m, tau, self.rng, self.config.variation
        )


def nsga2_generation(
    pop: Population,
    problem: DynamicProblem,
    m: int,
    tau: int,
    rng: np.random.Generator,
    params: VariationParams | None = None,
) -> Population:
    """One elitist NSGA-II generation producing ``len(pop)`` offspring."""
    params = params or VariationParams()
    n = len(pop)
    rank, crowd = rank_and_crowding(pop.F)
    n_pairs = (n + 1) // 2
    mates = tournament(rank, crowd, 2 * n_pairs, rng)
    C1, C2 = sbx_batch(pop.X[mates[:n_pairs]], pop.X[mates[n_pairs:]], params, rng)
    C = np.vstack([C1, C2])[:n]
    C = polynomial_mutation_batch(C, params, rng)
    Q = Population(C, problem.evaluate(C, m, tau), pop.env_id)
    R = pop.concat(Q)
    return R.take(np.sort(nsga2_survival(R.F, n)))


class DNSGA2(NSGA2):
    """NSGA-II that replaces a random share of the population on each change."""

    name = "dnsga2"

    def on_change(self, m: int, tau: int) -> None:
        self.m = m
        self.pop = dnsga2_on_change(
            self.pop, self.problem, m, tau, self.rng,
            self.config.injection_fraction, self.env_id + 1,
        )
        self.env_id += 1

    def on_drift(self, tau: int) -> None:
        self.on_change(self.m, tau)


def dnsga2_on_change(
    pop: Population,
    problem: DynamicProblem,
    m: int,
    tau: int,
    rng: np.random.Generator,
    fraction: float = 0.2,
    env_id: int | None = None,
) -> Population:
    """Re-evaluate ``pop`` after swapping ``ceil(fraction * N)`` members for random ones."""
    n = len(pop)
    # tolerance keeps e.g. 0.1 * 30 from rounding up to 4
    k = min(n, math.ceil(fraction * n - 1e-9))
    X = pop.X.copy()
    slots = rng.choice(n, size=k, replace=False)
    X[slots] = rng.random((k, problem.n))
    env = pop.env_id + 1 if env_id is None else env_id
    return Population(X, problem.evaluate(X, m, tau), env)


# -- MOEA/D ---------------------------------------------------------------------


def neighborhoods(weights: WeightSet | np.ndarray, T: int) -> np.ndarray:
    """``T`` nearest weight vectors (Euclidean, self included) per weight."""
    W = weights.vectors if isinstance(weights, WeightSet) else np.asarray(weights)
    T = min(T, W.shape[0])
    d = np.linalg.norm(W[:, None, :] - W[None, :, :], axis=2)
    return np.argsort(d, axis=1, kind="stable")[:, :T]


def moead_generation(
    pop: Population,
    weights: WeightSet,
    B: np.ndarray,
    ideal: np.ndarray,
    problem: DynamicProblem,
    m: int,
    tau: int,
    rng: np.random.Generator,
    params: VariationParams | None = None,
    replace_cap: int = 2,
) -> tuple[Population, np.ndarray]:
    """One sweep over all subproblems; returns the new population and ideal.

    Subproblem i mates its own solution with three distinct neighbours
    (DE/rand/1/bin, then polynomial mutation) and the trial replaces at most
    ``replace_cap`` neighbours, visited in random order, whose Tchebycheff
    value it improves. Random numbers for the sweep are drawn up front; the
    updates themselves stay sequential.
    """
    params = params or VariationParams()
    K = len(weights)
    if len(pop) != K:
        raise ContractError("MOEA/D population must match the weight count")
    X = pop.X.copy()
    F = pop.F.copy()
    ideal = np.asarray(ideal, dtype=float).copy()
    W = weights.vectors
    T = B.shape[1]
    n = X.shape[1]
    # neighbour picks, DE crossover masks, mutation draws, visiting orders
    picks = np.argsort(rng.random((K, T)), axis=1)[:, :3] if T >= 3 else rng.integers(0, T, (K, 3))
    cross = rng.random((K, n)) < params.de_cr
    cross[np.arange(K), rng.integers(0, n, size=K)] = True
    pm_mask = rng.random((K, n)) < params.mutation_rate(n)
    pm_u = rng.random((K, n))
    orders = np.argsort(rng.random((K, T)), axis=1)
    for i in range(K):
        r = B[i, picks[i]]
        v = X[r[0]] + params.de_f * (X[r[1]] - X[r[2]])
        trial = np.clip(np.where(cross[i], v, X[i]), 0.0, 1.0)
        trial = apply_polynomial_mutation(trial[None], pm_mask[i : i + 1], pm_u[i : i + 1], params.eta_m)[0]
        f = problem.evaluate(trial, m, tau)
        np.minimum(ideal, f, out=ideal)
        nb = B[i, orders[i]]
        better = tchebycheff(f[None], W[nb], ideal) < tchebycheff(F[nb], W[nb], ideal)
        for j in nb[better][:replace_cap]:
            X[j] = trial
            F[j] = f
    return Population(X, F, pop.env_id), ideal


def assign_to_weights(F: np.ndarray, W: np.ndarray, ideal: np.ndarray) -> np.ndarray:
    """Greedy map of existing members to subproblems by Tchebycheff value.

    Weight i takes the best still-unused member; once every member is used,
    the best member overall is reused.
    """
    tch = tchebycheff(F[None, :, :], W[:, None, :], ideal)  # (|W|, N)
    used = np.zeros(F.shape[0], dtype=bool)
    out = np.empty(W.shape[0], dtype=int)
    for i in range(W.shape[0]):
        row = np.where(used, np.inf, tch[i]) if not used.all() else tch[i]
        j = int(np.argmin(row))
        out[i] = j
        used[j] = True
    return out


class MOEAD:
    name = "moead"

    def __init__(
        self,
        problem: DynamicProblem,
        config: BaselineConfig | None = None,
        rng: np.random.Generator | None = None,
    ) -> None:
        self.problem = problem
        self.config = config or BaselineConfig(algo="moead")
        self.rng = rng if rng is not None else np.random.default_rng()
        self.pop: Population | None = None
        self.weights: WeightSet | None = None
        self.B: np.ndarray | None = None
        self.ideal: np.ndarray | None = None
        self.m = 0
        self.env_id = 0

    @property
    def population(self) -> Population:
        return self.pop

    def _set_weights(self, m: int) -> None:
        self.weights = weights_for_population(m, self.config.n_pop)
        self.B = neighborhoods(self.weights, self.config.neighborhood)

    def initialize(self, m: int, tau: int = 0) -> None:
        self.m = m
        self._set_weights(m)
        X = self.rng.random((len(self.weights), self.problem.n))
        F = self.problem.evaluate(X, m, tau)
        self.pop = Population(X, F, self.env_id)
        self.ideal = F.min(axis=0)

    def reevaluate(self, tau: int) -> None:
        self.env_id += 1
        F = self.problem.evaluate(self.pop.X, self.m, tau)
        self.pop = Population(self.pop.X, F, self.env_id)
        self.ideal = F.min(axis=0)

    def on_change(self, m: int, tau: int) -> None:
        self.m = m
        self.reevaluate(tau)
        self._set_weights(m)
        keep = assign_to_weights(self.pop.F, self.weights.vectors, self.ideal)
        self.pop = self.pop.take(keep)

    def on_drift(self, tau: int) -> None:
        self.reevaluate(tau)

    def step(self, tau: int) -> None:
        self.pop, self.ideal = moead_generation(
            self.pop, self.weights, self.B, self.ideal, self.problem, self.m, tau,
            self.rng, self.config.variation, self.config.replace_cap,
        )


def baseline_on_change(algo, m: int, tau: int) -> None:
    """Uniform change hook for any driver object."""
    algo.on_change(m, tau)
