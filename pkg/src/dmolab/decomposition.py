"""Weight vectors and the subspace machinery built on them.

Weight vectors split normalized objective space into subspaces; a solution
belongs to the subspace whose reference ray is closest in perpendicular
distance. Density of a subspace is its member count.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np

from .core import ContractError, ObjectiveBounds

TCH_GUARD = 1e-6

# objective count -> (H,) or (H_boundary, H_inner)
LAYER_SPEC: dict[int, tuple[int, ...]] = {
    2: (299,),
    3: (23,),
    4: (10,),
    5: (6, 4),
    6: (5, 2),
    7: (4, 3),
}


def simplex_lattice(m: int, H: int) -> np.ndarray:
    """All vectors with entries in {0, 1/H, ..., 1} summing to 1.

    Stars-and-bars enumeration; ``C(H + m - 1, m - 1)`` rows.
    """
    rows = []
    for bars in combinations(range(H + m - 1), m - 1):
        prev = -1
        parts = []
        for b in bars:
            parts.append(b - prev - 1)
            prev = b
        parts.append(H + m - 1 - prev - 1)
        rows.append(parts)
    return np.asarray(rows, dtype=float) / H


@dataclass(frozen=True)
class WeightSet:
    vectors: np.ndarray
    m: int
    layer_spec: tuple[int, ...]

    def __len__(self) -> int:
        return self.vectors.shape[0]


def expected_weight_count(m: int, layer_spec: tuple[int, ...]) -> int:
    return sum(comb(H + m - 1, m - 1) for H in layer_spec)


def generate_weights(m: int, layer_spec: tuple[int, ...] | None = None) -> WeightSet:
    """Uniform weight vectors for ``m`` objectives.

    One layer for m <= 4; for m >= 5 a boundary layer plus an inner layer
    shrunk halfway towards the simplex centroid.
    """
    if layer_spec is None:
        if m not in LAYER_SPEC:
            raise ContractError(f"no weight layout for m={m}; supported 2..7")
        layer_spec = LAYER_SPEC[m]
    if m < 2:
        raise ContractError("need at least two objectives")
    layers = [simplex_lattice(m, layer_spec[0])]
    for H in layer_spec[1:]:
        inner = simplex_lattice(m, H)
        layers.append(0.5 * inner + 0.5 / m)
    W = np.vstack(layers)
    return WeightSet(W, m, tuple(layer_spec))


def fitted_layer_spec(m: int, n_max: int) -> tuple[int, ...]:
    """Largest lattice layout with at most ``n_max`` vectors.

    Single layer below five objectives, boundary + inner layer from five up.
    Ties in count prefer the finer boundary layer.
    """
    if m < 5:
        H = 1
        while expected_weight_count(m, (H + 1,)) <= n_max:
            H += 1
        return (H,)
    best: tuple[int, ...] = (1, 1)
    best_count = expected_weight_count(m, best)
    H1 = 1
    while expected_weight_count(m, (H1,)) < n_max:
        for H2 in range(1, H1 + 1):
            c = expected_weight_count(m, (H1, H2))
            if c <= n_max and (c, H1) > (best_count, best[0]):
                best, best_count = (H1, H2), c
        H1 += 1
    return best


def weights_for_population(m: int, n_pop: int) -> WeightSet:
    """The standard layout for ``m`` unless it has more vectors than ``n_pop``.

    Subspace density assumes no more subspaces than archive slots; smaller
    populations fall back to :func:`fitted_layer_spec`.
    """
    if m in LAYER_SPEC and expected_weight_count(m, LAYER_SPEC[m]) <= n_pop:
        return generate_weights(m)
    return generate_weights(m, fitted_layer_spec(m, n_pop))


def normalize(F: np.ndarray, bounds: ObjectiveBounds) -> np.ndarray:
    span = np.maximum(bounds.nadir - bounds.ideal, TCH_GUARD)
    return (np.asarray(F, dtype=float) - bounds.ideal) / span


def perpendicular_distance(fbar: np.ndarray, w: np.ndarray) -> float:
    """Distance from ``fbar`` to the ray spanned by ``w``."""
    fbar = np.asarray(fbar, dtype=float)
    w = np.asarray(w, dtype=float)
    if fbar.shape != w.shape:
        raise ContractError("point and weight lengths differ")
    ww = float(w @ w)
    if ww == 0.0:
        raise ContractError("zero weight vector has no direction")
    proj = (fbar @ w) / ww
    return float(np.linalg.norm(fbar - proj * w))


def perpendicular_distances(Fbar: np.ndarray, W: np.ndarray) -> np.ndarray:
    """Pairwise point-to-ray distances, shape ``(len(Fbar), len(W))``."""
    Fbar = np.atleast_2d(Fbar)
    Wn = W / np.linalg.norm(W, axis=1, keepdims=True)
    dots = Fbar @ Wn.T
    sq = np.sum(Fbar * Fbar, axis=1)[:, None] - dots * dots
    return np.sqrt(np.maximum(sq, 0.0))


@dataclass(frozen=True)
class Association:
    """Subspace label per solution plus the inverse mapping."""

    subspace_of: np.ndarray
    n_subspaces: int

    @property
    def counts(self) -> np.ndarray:
        return np.bincount(self.subspace_of, minlength=self.n_subspaces)

    @property
    def members(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for i, k in enumerate(self.subspace_of):
            out.setdefault(int(k), []).append(i)
        return out


def associate(
    F: np.ndarray, weights: WeightSet | np.ndarray, bounds: ObjectiveBounds | None
) -> Association:
    """Attach each row of ``F`` to its nearest weight ray (lowest index on ties).

    ``F`` is normalized with ``bounds`` first; pass ``bounds=None`` if it is
    already normalized.
    """
    W = weights.vectors if isinstance(weights, WeightSet) else np.asarray(weights)
    F = np.asarray(F, dtype=float)
    if F.shape[0] == 0:
        return Association(np.zeros(0, dtype=int), W.shape[0])
    Fbar = F if bounds is None else normalize(F, bounds)
    labels = np.argmin(perpendicular_distances(Fbar, W), axis=1)
    return Association(labels.astype(int), W.shape[0])


def tchebycheff(F: np.ndarray, w: np.ndarray, ideal: np.ndarray) -> np.ndarray | float:
    """Weighted Chebyshev distance to the ideal point; lower is better.

    Broadcasts over rows of ``F`` and/or ``w``.
    """
    F = np.asarray(F, dtype=float)
    w = np.maximum(np.asarray(w, dtype=float), TCH_GUARD)
    val = np.max(np.abs(F - ideal) / w, axis=-1)
    return float(val) if np.ndim(val) == 0 else val


def occupation_rate(assoc: Association, n_weights: int | None = None) -> float:
    """Fraction of subspaces holding at least one member."""
    total = assoc.n_subspaces if n_weights is None else n_weights
    if total == 0:
        return 0.0
    return float(np.count_nonzero(assoc.counts)) / total
