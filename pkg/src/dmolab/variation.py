"""Variation and sampling operators on the unit box.

All operators take an explicit ``numpy.random.Generator`` and clip their
output to [0, 1]. Batched forms (leading axis = individuals) are used by the
algorithms; the single-vector forms are thin wrappers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ContractError


@dataclass(frozen=True)
class VariationParams:
    eta_c: float = 20.0
    eta_m: float = 20.0
    p_c: float = 1.0
    p_m: float | None = None  # None -> 1/n
    de_cr: float = 0.5
    de_f: float = 0.5

    def __post_init__(self) -> None:
        for name in ("p_c", "de_cr"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ContractError(f"{name}={v} is not a probability")
        if self.p_m is not None and not 0.0 <= self.p_m <= 1.0:
            raise ContractError(f"p_m={self.p_m} is not a probability")
        if self.eta_c <= 0 or self.eta_m <= 0:
            raise ContractError("distribution indices must be positive")

    def mutation_rate(self, n: int) -> float:
        return 1.0 / n if self.p_m is None else self.p_m


def sbx_batch(
    P1: np.ndarray, P2: np.ndarray, params: VariationParams, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Simulated binary crossover applied row-wise.

    Each pair is crossed with probability ``p_c``; within a crossed pair each
    gene is recombined with probability 0.5. The children are symmetric
    around the parents' midpoint before clipping.
    """
    P1 = np.atleast_2d(np.asarray(P1, dtype=float))
    P2 = np.atleast_2d(np.asarray(P2, dtype=float))
    if P1.shape != P2.shape:
        raise ContractError("parents must have equal shape")
    k, n = P1.shape
    do_pair = rng.random(k) < params.p_c
    do_gene = rng.random((k, n)) < 0.5
    u = rng.random((k, n))
    e = 1.0 / (params.eta_c + 1.0)
    beta = np.where(u <= 0.5, (2.0 * u) ** e, (1.0 / (2.0 * (1.0 - u))) ** e)
    beta = np.where(do_pair[:, None] & do_gene, beta, 1.0)
    mid = 0.5 * (P1 + P2)
    half = 0.5 * (P1 - P2)
    C1 = mid + beta * half
    C2 = mid - beta * half
    return np.clip(C1, 0.0, 1.0), np.clip(C2, 0.0, 1.0)


def sbx(p1, p2, params: VariationParams, rng: np.random.Generator):
    c1, c2 = sbx_batch(np.asarray(p1)[None], np.asarray(p2)[None], params, rng)
    return c1[0], c2[0]


def polynomial_mutation_batch(
    X: np.ndarray, params: VariationParams, rng: np.random.Generator
) -> np.ndarray:
    """Bounded polynomial mutation, each gene with probability ``p_m``."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    k, n = X.shape
    pm = params.mutation_rate(n)
    mask = rng.random((k, n)) < pm
    u = rng.random((k, n))
    return apply_polynomial_mutation(X, mask, u, params.eta_m)


def apply_polynomial_mutation(
    X: np.ndarray, mask: np.ndarray, u: np.ndarray, eta: float
) -> np.ndarray:
    """Polynomial mutation with pre-drawn gene mask and uniforms."""
    e = 1.0 / (eta + 1.0)
    d1 = X  # distance to lower bound (box is [0, 1])
    d2 = 1.0 - X
    with np.errstate(over="ignore", invalid="ignore"):
        lo = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1) ** (eta + 1.0)
        hi = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2) ** (eta + 1.0)
        dq = np.where(u < 0.5, lo**e - 1.0, 1.0 - hi**e)
    Y = np.where(mask, X + dq, X)
    return np.clip(Y, 0.0, 1.0)


def polynomial_mutation(x, params: VariationParams, rng: np.random.Generator):
    return polynomial_mutation_batch(np.asarray(x)[None], params, rng)[0]


def de_rand_1_bin_batch(
    T: np.ndarray,
    R1: np.ndarray,
    R2: np.ndarray,
    R3: np.ndarray,
    params: VariationParams,
    rng: np.random.Generator,
) -> np.ndarray:
    """DE/rand/1/bin trial vectors, clipped to the box."""
    T = np.atleast_2d(np.asarray(T, dtype=float))
    k, n = T.shape
    V = np.asarray(R1) + params.de_f * (np.asarray(R2) - np.asarray(R3))
    cross = rng.random((k, n)) < params.de_cr
    jrand = rng.integers(0, n, size=k)
    cross[np.arange(k), jrand] = True
    return np.clip(np.where(cross, V, T), 0.0, 1.0)


def de_rand_1_bin(target, r1, r2, r3, params: VariationParams, rng):
    args = [np.asarray(v, dtype=float)[None] for v in (target, r1, r2, r3)]
    return de_rand_1_bin_batch(*args, params, rng)[0]


def lhs_sample(count: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    """Latin hypercube sample of ``count`` points in [0, 1]^dim.

    Column j holds exactly one point in each stratum ``[k/count, (k+1)/count)``;
    each point is uniform inside its stratum.
    """
    if count < 1 or dim < 1:
        raise ContractError("count and dim must be at least 1")
    strata = np.argsort(rng.random((count, dim)), axis=0)
    return (strata + rng.random((count, dim))) / count


def binary_tournament_by_density(
    pool_size: int, density: np.ndarray, rng: np.random.Generator
) -> int:
    """Pick two pool members at random and return the one in a sparser subspace.

    Args:
        pool_size: Number of candidates; candidates are ``0..pool_size-1``.
        density: ``density[i]`` is the occupancy of candidate i's subspace.

    Returns:
        Index of the winner. Equal densities are decided by a fair coin.
    """
    if pool_size < 1:
        raise ContractError("tournament pool is empty")
    a, b = rng.integers(0, pool_size, size=2)
    da, db = density[a], density[b]
    if da < db:
        return int(a)
    if da > db:
        return int(b)
    return int(a) if rng.random() < 0.5 else int(b)
