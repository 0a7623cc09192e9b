"""Quality indicators for front approximations and their time averages."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .core import ContractError, non_dominated_mask

MC_SAMPLES = 1_000_000
WORST_COORD = 2.0


@dataclass(frozen=True)
class MetricRecord:
    time_step: int
    m: int
    igd: float
    hv_norm: float


def igd(reference: np.ndarray, approx: np.ndarray, chunk: int = 2048) -> float:
    """Mean distance from each reference point to its nearest approximation point."""
    R = np.atleast_2d(np.asarray(reference, dtype=float))
    A = np.atleast_2d(np.asarray(approx, dtype=float))
    if R.size == 0 or A.size == 0:
        raise ContractError("IGD needs non-empty reference and approximation sets")
    if R.shape[1] != A.shape[1]:
        raise ContractError("reference and approximation dimensions differ")
    a2 = np.sum(A * A, axis=1)
    total = 0.0
    for s in range(0, R.shape[0], chunk):
        block = R[s : s + chunk]
        d2 = np.sum(block * block, axis=1)[:, None] + a2[None, :] - 2.0 * block @ A.T
        total += float(np.sqrt(np.maximum(d2.min(axis=1), 0.0)).sum())
    return total / R.shape[0]


def _hv2(P: np.ndarray, worst: np.ndarray) -> float:
    P = P[np.lexsort((P[:, 1], P[:, 0]))]
    hv = 0.0
    prev = worst[1]
    for x, y in P:
        if y < prev:
            hv += (worst[0] - x) * (prev - y)
            prev = y
    return hv


def _hv3(P: np.ndarray, worst: np.ndarray) -> float:
    P = P[np.argsort(P[:, 2], kind="stable")]
    hv = 0.0
    for i in range(P.shape[0]):
        top = P[i + 1, 2] if i + 1 < P.shape[0] else worst[2]
        depth = top - P[i, 2]
        if depth > 0:
            hv += depth * _hv2(P[: i + 1, :2], worst[:2])
    return hv


def _hv_monte_carlo(
    P: np.ndarray, worst: np.ndarray, samples: int, seed: int, chunk: int = 250_000
) -> float:
    rng = np.random.default_rng(seed)
    lower = P.min(axis=0)
    box = float(np.prod(worst - lower))
    # most dominating points first, so later points test few uncovered samples
    P = P[np.argsort(np.prod(worst - P, axis=1))[::-1]]
    hit = 0
    done = 0
    while done < samples:
        k = min(chunk, samples - done)
        S = lower + rng.random((k, P.shape[1])) * (worst - lower)
        for p in P:
            if S.shape[0] == 0:
                break
            S = S[~np.all(S >= p, axis=1)]
        hit += k - S.shape[0]
        done += k
    return box * hit / samples


def hypervolume(
    approx: np.ndarray,
    worst: np.ndarray,
    samples: int = MC_SAMPLES,
    seed: int = 0,
    exact_max_m: int = 3,
) -> float:
    """Volume dominated by ``approx`` and bounded by ``worst``.

    Exact for two and three objectives; seeded Monte Carlo otherwise.
    Points that do not strictly dominate ``worst`` are dropped.
    """
    P = np.atleast_2d(np.asarray(approx, dtype=float))
    worst = np.asarray(worst, dtype=float)
    if P.size == 0:
        raise ContractError("hypervolume of an empty set")
    if P.shape[1] != worst.size:
        raise ContractError("point and reference dimensions differ")
    P = P[np.all(P < worst, axis=1)]
    if P.shape[0] == 0:
        return 0.0
    P = np.unique(P[non_dominated_mask(P)], axis=0)
    m = P.shape[1]
    if m == 1:
        return float(worst[0] - P[:, 0].min())
    if m == 2:
        return _hv2(P, worst)
    if m == 3 and exact_max_m >= 3:
        return _hv3(P, worst)
    return _hv_monte_carlo(P, worst, samples, seed)


def hv_normalized(approx: np.ndarray, samples: int = MC_SAMPLES, seed: int = 0) -> float:
    """Hypervolume against the worst point (2, ..., 2), divided by 2**m."""
    m = np.atleast_2d(approx).shape[1]
    worst = np.full(m, WORST_COORD)
    return hypervolume(approx, worst, samples, seed) / float(np.prod(worst))


def migd(records: list[MetricRecord]) -> float:
    if not records:
        raise ContractError("no time steps to average")
    return float(np.mean([r.igd for r in records]))


def mhv(records: list[MetricRecord]) -> float:
    if not records:
        raise ContractError("no time steps to average")
    return float(np.mean([r.hv_norm for r in records]))


def rank_algorithms(
    per_step_scores: dict[str, list[float]], lower_is_better: bool = True
) -> dict[str, float]:
    """Average per-step rank of each algorithm (rank 1 = best, ties averaged)."""
    names = list(per_step_scores)
    if not names:
        return {}
    if len({len(per_step_scores[k]) for k in names}) != 1:
        raise ContractError("score lists must have equal length")
    table = np.asarray([per_step_scores[k] for k in names], dtype=float)
    signed = table if lower_is_better else -table
    ranks = np.apply_along_axis(rankdata, 0, signed)
    return {k: float(r) for k, r in zip(names, ranks.mean(axis=1))}
