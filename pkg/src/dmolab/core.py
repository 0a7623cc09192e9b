"""Solutions, Pareto dominance and non-dominated sorting.

Populations are stored as a pair of arrays (decision matrix ``X`` of shape
``(N, n)`` and objective matrix ``F`` of shape ``(N, m)``) tagged with the
environment they were evaluated in. Everything here is pure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

BOUND_GUARD = 1e-6


class ContractError(ValueError):
    """Raised when an operation is called outside its documented domain."""


@dataclass(frozen=True)
class Solution:
    """A decision vector with the objective vector it was evaluated to."""

    x: np.ndarray
    f: np.ndarray
    env_id: int = 0


@dataclass
class Population:
    """A batch of solutions evaluated in the same environment."""

    X: np.ndarray
    F: np.ndarray
    env_id: int = 0

    def __post_init__(self) -> None:
        self.X = np.atleast_2d(np.asarray(self.X, dtype=float))
        self.F = np.atleast_2d(np.asarray(self.F, dtype=float))
        if self.X.shape[0] != self.F.shape[0]:
            raise ContractError(
                f"X has {self.X.shape[0]} rows but F has {self.F.shape[0]}"
            )

    def __len__(self) -> int:
        return self.X.shape[0]

    def __getitem__(self, i: int) -> Solution:
        return Solution(self.X[i].copy(), self.F[i].copy(), self.env_id)

    @property
    def m(self) -> int:
        return self.F.shape[1]

    def take(self, idx) -> Population:
        idx = np.asarray(idx, dtype=int)
        return Population(self.X[idx].copy(), self.F[idx].copy(), self.env_id)

    def concat(self, other: Population) -> Population:
        if other.env_id != self.env_id:
            raise ContractError("cannot merge populations from different environments")
        if len(other) == 0:
            return self.take(np.arange(len(self)))
        if len(self) == 0:
            return other.take(np.arange(len(other)))
        return Population(
            np.vstack([self.X, other.X]), np.vstack([self.F, other.F]), self.env_id
        )

    @classmethod
    def empty(cls, n: int, m: int, env_id: int = 0) -> Population:
        return cls(np.empty((0, n)), np.empty((0, m)), env_id)


@dataclass(frozen=True)
class ObjectiveBounds:
    ideal: np.ndarray
    nadir: np.ndarray


def dominates(a: Solution | np.ndarray, b: Solution | np.ndarray) -> bool:
    """Return True iff ``a`` Pareto-dominates ``b`` (minimization).

    Accepts either :class:`Solution` instances or raw objective vectors.
    Solutions from different environments are not comparable.
    """
    if isinstance(a, Solution) and isinstance(b, Solution):
        if a.env_id != b.env_id:
            raise ContractError("solutions evaluated in different environments")
    fa = np.asarray(a.f if isinstance(a, Solution) else a, dtype=float)
    fb = np.asarray(b.f if isinstance(b, Solution) else b, dtype=float)
    if fa.shape != fb.shape:
        raise ContractError(f"objective lengths differ: {fa.shape} vs {fb.shape}")
    return bool(np.all(fa <= fb) and np.any(fa < fb))


def dominance_matrix(F: np.ndarray) -> np.ndarray:
    """Boolean matrix ``D`` with ``D[i, j]`` true iff row i dominates row j."""
    F = np.asarray(F, dtype=float)
    n = F.shape[0]
    if n <= 64:
        a = F[:, None, :]
        b = F[None, :, :]
        return (a <= b).all(axis=2) & (a < b).any(axis=2)
    le = np.ones((n, n), dtype=bool)
    lt = np.zeros((n, n), dtype=bool)
    # one column at a time avoids an (n, n, m) temporary
    for col in F.T:
        le &= col[:, None] <= col[None, :]
        lt |= col[:, None] < col[None, :]
    return le & lt


def non_dominated_sort(F: np.ndarray) -> list[np.ndarray]:
    """Split a population into non-domination levels.

    Args:
        F: Objective matrix, shape ``(N, m)``.

    Returns:
        List of index arrays, first level first. Indices within a level are
        ascending. Every index appears exactly once.
    """
    F = np.asarray(F, dtype=float)
    n = F.shape[0]
    if n == 0:
        return []
    dom = dominance_matrix(F)
    counts = dom.sum(axis=0)
    assigned = np.zeros(n, dtype=bool)
    fronts = []
    current = np.flatnonzero(counts == 0)
    while current.size:
        fronts.append(current)
        assigned[current] = True
        counts = counts - dom[current].sum(axis=0)
        current = np.flatnonzero((counts == 0) & ~assigned)
    return fronts


def non_dominated_mask(F: np.ndarray) -> np.ndarray:
    F = np.asarray(F, dtype=float)
    if F.shape[0] == 0:
        return np.zeros(0, dtype=bool)
    return ~dominance_matrix(F).any(axis=0)


def estimate_bounds(F: np.ndarray, guard: float = BOUND_GUARD) -> ObjectiveBounds:
    """Estimate ideal and nadir points from an evaluated population.

    The ideal point is the componentwise minimum over every row; the nadir is
    the componentwise maximum over the first non-domination level. A nadir
    component closer than ``guard`` to the ideal is pushed out to
    ``ideal + guard``.
    """
    F = np.asarray(F, dtype=float)
    if F.ndim != 2 or F.shape[0] == 0:
        raise ContractError("cannot estimate bounds of an empty population")
    ideal = F.min(axis=0)
    nadir = F[non_dominated_mask(F)].max(axis=0)
    nadir = np.where(nadir - ideal < guard, ideal + guard, nadir)
    return ObjectiveBounds(ideal, nadir)
