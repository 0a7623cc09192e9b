"""Benchmark problems whose objective count changes with time.

F1 is DTLZ1-like (linear front, multimodal g), F2 is DTLZ2-like (spherical
front), F3 combines the F2 shape with the multimodal g, F4 biases the position
variables with ``x**alpha``. F5 and F6 additionally move the optimal position
of the distance variables with a drift clock ``tbar`` that ticks every
``tau_bar`` generations.

Objective count ``m`` is an argument of every evaluation; the decision
dimension ``n`` is fixed per problem. The distance group is ``x[m-1:]``.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import ContractError

M_MIN, M_MAX = 2, 7
PROBLEM_IDS = ("F1", "F2", "F3", "F4", "F5", "F6")


def _rastrigin_g(xm: np.ndarray) -> np.ndarray:
    k = xm.shape[1]
    z = xm - 0.5
    return 100.0 * (k + np.sum(z * z - np.cos(20.0 * np.pi * z), axis=1))


def linear_front(xp: np.ndarray, g: np.ndarray, m: int) -> np.ndarray:
    """DTLZ1 mapping: ``f`` on the simplex ``sum(f) = 0.5 (1 + g)``."""
    N = xp.shape[0]
    F = np.empty((N, m))
    ones = np.ones((N, 1))
    # cumulative products x_1, x_1 x_2, ... prefixed by 1
    prods = np.hstack([ones, np.cumprod(xp, axis=1)])
    for j in range(m):
        # objective j (0-based) uses the first m-1-j position variables
        f = prods[:, m - 1 - j].copy()
        if j > 0:
            f *= 1.0 - xp[:, m - 1 - j]
        F[:, j] = f
    return 0.5 * (1.0 + g)[:, None] * F


def spherical_front(
    xp: np.ndarray, g: np.ndarray, m: int, verbatim: bool = False
) -> np.ndarray:
    """DTLZ2 mapping: ``f`` on the sphere of radius ``1 + g``.

    With ``verbatim`` the first ``m - 1`` objectives carry an extra 0.5
    factor, as printed in the original table of problem definitions.
    """
    N = xp.shape[0]
    theta = 0.5 * np.pi * xp
    c = np.cos(theta)
    s = np.sin(theta)
    prods = np.hstack([np.ones((N, 1)), np.cumprod(c, axis=1)])
    F = np.empty((N, m))
    for j in range(m):
        f = prods[:, m - 1 - j].copy()
        if j > 0:
            f *= s[:, m - 1 - j]
        F[:, j] = f
    if verbatim:
        F[:, : m - 1] *= 0.5
    return (1.0 + g)[:, None] * F


@dataclass(frozen=True)
class DynamicProblem:
    """One of the six benchmark problems.

    ``alpha`` is the F4 bias exponent; ``tau_bar``/``n_bar`` set the F5/F6
    drift frequency and severity.
    """

    id: str
    n: int
    alpha: float = 100.0
    tau_bar: int = 5
    n_bar: int = 10
    verbatim: bool = False

    def __post_init__(self) -> None:
        if self.id not in PROBLEM_IDS:
            raise ContractError(f"unknown problem {self.id!r}")
        if self.n < M_MAX + 1:
            raise ContractError(f"n={self.n} too small for m up to {M_MAX}")
        if self.alpha <= 0:
            raise ContractError("alpha must be positive")

    @property
    def drifts(self) -> bool:
        return self.id in ("F5", "F6")

    def tbar(self, tau: int) -> float:
        return (1.0 / self.n_bar) * math.floor(tau / self.tau_bar)

    def drift_G(self, tau: int) -> float:
        return abs(math.sin(0.5 * math.pi * self.tbar(tau)))

    def drift_exponent(self, tau: int) -> float:
        return 1.0 + 100.0 * math.sin(0.5 * math.pi * self.tbar(tau)) ** 4

    def evaluate(self, X: np.ndarray, m: int, tau: int = 0) -> np.ndarray:
        """Evaluate decision vectors under ``m`` objectives at generation ``tau``.

        Args:
            X: Shape ``(N, n)`` or ``(n,)``, every entry in [0, 1].
            m: Current objective count, 2..7.
            tau: Global generation counter (only F5/F6 depend on it).

        Returns:
            Objective matrix ``(N, m)`` (or a vector for 1-D input).
        """
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        X = np.atleast_2d(X)
        if X.shape[1] != self.n:
            raise ContractError(f"expected {self.n} variables, got {X.shape[1]}")
        if not (M_MIN <= m <= M_MAX):
            raise ContractError(f"m={m} outside [{M_MIN}, {M_MAX}]")
        if np.any(X < 0.0) or np.any(X > 1.0):
            raise ContractError("decision vector outside [0, 1]^n")
        xp = X[:, : m - 1]
        xm = X[:, m - 1 :]
        pid = self.id
        if pid == "F1":
            F = linear_front(xp, _rastrigin_g(xm), m)
        elif pid == "F2":
            F = spherical_front(xp, np.sum((xm - 0.5) ** 2, axis=1), m, self.verbatim)
        elif pid == "F3":
            F = spherical_front(xp, _rastrigin_g(xm), m, self.verbatim)
        elif pid == "F4":
            F = spherical_front(
                xp**self.alpha, np.sum((xm - 0.5) ** 2, axis=1), m, self.verbatim
            )
        elif pid == "F5":
            G = self.drift_G(tau)
            F = spherical_front(xp, np.sum((xm - G) ** 2, axis=1), m, self.verbatim)
        else:
            G = self.drift_G(tau)
            g = G + np.sum((xm - G) ** 2, axis=1)
            F = spherical_front(xp ** self.drift_exponent(tau), g, m, self.verbatim)
        return F[0] if single else F

    def optimal_g(self, tau: int = 0) -> float:
        return self.drift_G(tau) if self.id == "F6" else 0.0

    def sample_pf(self, m: int, tau: int, count: int, seed: int) -> np.ndarray:
        """Sample ``count`` points of the Pareto front under ``m`` objectives.

        Directions are drawn uniformly from the unit simplex (normalized
        exponential spacings) and mapped onto the front shape.
        """
        if count < 1:
            raise ContractError("count must be at least 1")
        rng = np.random.default_rng(seed)
        E = rng.exponential(size=(count, m))
        V = E / E.sum(axis=1, keepdims=True)
        scale = 1.0 + self.optimal_g(tau)
        if self.id == "F1":
            return 0.5 * scale * V
        P = V / np.linalg.norm(V, axis=1, keepdims=True)
        if self.verbatim:
            P[:, : m - 1] *= 0.5
        return scale * P


DEFAULT_N = {"F1": 11, "F2": 16, "F3": 16, "F4": 16, "F5": 16, "F6": 16}


def make_problem(pid: str, **kwargs) -> DynamicProblem:
    pid = pid.upper()
    if pid not in PROBLEM_IDS:
        raise ContractError(f"unknown problem {pid!r}; expected one of {PROBLEM_IDS}")
    kwargs.setdefault("n", DEFAULT_N[pid])
    return DynamicProblem(pid, **kwargs)


@dataclass(frozen=True)
class ChangeSchedule:
    """Objective counts per time step plus generation budget.

    Time step 1 runs for ``warmup_gens`` generations, every later step for
    ``tau_t`` generations.
    """

    m_values: tuple[int, ...]
    tau_t: int = 50
    warmup_gens: int = 300
    kind: str = "custom"

    def __post_init__(self) -> None:
        if not self.m_values:
            raise ContractError("schedule must contain at least one step")
        for m in self.m_values:
            if not (M_MIN <= m <= M_MAX):
                raise ContractError(f"m={m} outside [{M_MIN}, {M_MAX}]")
        for a, b in zip(self.m_values, self.m_values[1:]):
            if a == b:
                raise ContractError("consecutive time steps must change m")
        if self.tau_t < 1 or self.warmup_gens < 1:
            raise ContractError("tau_t and warmup_gens must be positive")

    @property
    def steps(self) -> list[tuple[int, int]]:
        return [(t, m) for t, m in enumerate(self.m_values, start=1)]

    def __len__(self) -> int:
        return len(self.m_values)

    def m_of(self, t: int) -> int:
        if not (1 <= t <= len(self.m_values)):
            raise ContractError(f"time step {t} outside 1..{len(self.m_values)}")
        return self.m_values[t - 1]

    @property
    def total_generations(self) -> int:
        return self.warmup_gens + (len(self.m_values) - 1) * self.tau_t

    def time_step(self, gen: int) -> int:
        """Time step (1-based) that generation ``gen`` (0-based) belongs to."""
        if gen < self.warmup_gens:
            return 1
        return 2 + (gen - self.warmup_gens) // self.tau_t

    def last_generation(self, t: int) -> int:
        return self.warmup_gens - 1 + (t - 1) * self.tau_t


def eq10_values() -> tuple[int, ...]:
    ms = [3]
    for t in range(2, 11):
        ms.append(ms[-1] + 1 if t <= 5 else ms[-1] - 1)
    return tuple(ms)


def eq13_values() -> tuple[int, ...]:
    ms = [3]
    for t in range(2, 7):
        if t <= 3:
            ms.append(ms[-1] + 2)
        elif t <= 5:
            ms.append(ms[-1] - 2)
        else:
            ms.append(ms[-1] - 1)
    return tuple(ms)


def make_schedule(
    kind: str, tau_t: int = 50, warmup_gens: int = 300, custom: list[int] | None = None
) -> ChangeSchedule:
    if kind == "eq10":
        values = eq10_values()
    elif kind == "eq13":
        values = eq13_values()
    elif kind == "custom":
        if not custom:
            raise ContractError("custom schedule needs explicit m values")
        values = tuple(int(v) for v in custom)
    else:
        raise ContractError(f"unknown schedule {kind!r}")
    return ChangeSchedule(values, tau_t, warmup_gens, kind)


def m_of(schedule: ChangeSchedule, t: int) -> int:
    return schedule.m_of(t)


def default_cache_dir() -> Path:
    env = os.environ.get("DMOLAB_CACHE")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "dmolab"


@dataclass
class PFCache:
    """Disk-backed cache of Pareto-front reference sets."""

    root: Path = field(default_factory=default_cache_dir)
    _mem: dict = field(default_factory=dict, repr=False)

    def key(self, problem: DynamicProblem, m: int, tau: int, count: int, seed: int):
        bucket = 0
        if problem.drifts:
            bucket = math.floor(tau / problem.tau_bar)
        form = "v" if problem.verbatim else "s"
        return (problem.id, m, bucket, count, seed, form)

    def get(
        self, problem: DynamicProblem, m: int, tau: int, count: int, seed: int
    ) -> np.ndarray:
        key = self.key(problem, m, tau, count, seed)
        if key in self._mem:
            return self._mem[key]
        pid, _, bucket, _, _, form = key
        if problem.drifts:
            tag = f"n{problem.n_bar}tb{problem.tau_bar}"
        else:
            tag = "static"
        path = self.root / f"{pid}_{form}_m{m}_{tag}_b{bucket}_n{count}_s{seed}.csv"
        if path.exists():
            ref = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        else:
            ref = problem.sample_pf(m, tau, count, seed)
            self.root.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(f".tmp{os.getpid()}")
            with open(tmp, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow([f"f{i + 1}" for i in range(m)])
                w.writerows([[repr(float(v)) for v in row] for row in ref])
            os.replace(tmp, path)
            # reload so cached and fresh references are bit-identical
            ref = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        self._mem[key] = ref
        return ref
