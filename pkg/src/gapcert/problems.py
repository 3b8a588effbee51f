"""Concrete problems: planar traveling-salesman instances and the classic
continuous benchmark functions, each wrapped as a bounded Problem."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _rng
from .oracles import OracleResult
from .percentile import DomainError, Problem
from .repetitive import ProblemFamily
from .spaces import BoxSpace, PermutationSpace


@dataclass(frozen=True)
class TspInstance:
    """Planar waypoints visited exactly once by a closed tour."""

    waypoints: np.ndarray  # (n, 2)

    def __init__(self, waypoints):
        w = np.asarray(waypoints, dtype=float)
        if w.ndim != 2 or w.shape[1] != 2 or w.shape[0] < 2:
            raise DomainError("waypoints must be an (n>=2, 2) array")
        if not np.isfinite(w).all():
            raise DomainError("waypoints must be finite")
        object.__setattr__(self, "waypoints", w)

    @property
    def count(self) -> int:
        return len(self.waypoints)


def tsp_cost(instance: TspInstance, order) -> float:
    """Closed-tour length: consecutive hops plus the edge back to the start.

    Edge lengths are summed in sorted order, so tours with identical edge
    multisets (rotations, reversals) compare exactly equal in floating point.
    """
    order = np.asarray(order)
    n = instance.count
    if order.shape != (n,) or not np.array_equal(np.sort(order), np.arange(n)):
        raise DomainError(f"order must be a permutation of 0..{n - 1}")
    return float(tsp_cost_batch(instance, order[None, :])[0])


def tsp_cost_batch(instance: TspInstance, orders: np.ndarray) -> np.ndarray:
    pts = instance.waypoints[orders]  # (m, n, 2)
    edges = np.concatenate(
        [np.linalg.norm(np.diff(pts, axis=1), axis=2),
         np.linalg.norm(pts[:, :1] - pts[:, -1:], axis=2)], axis=1)
    edges.sort(axis=1)
    return edges.sum(axis=1)


def make_tsp_problem(instance: TspInstance) -> Problem:
    return Problem(
        space=PermutationSpace(instance.count),
        cost=lambda order: tsp_cost(instance, order),
        batch_cost=lambda orders: tsp_cost_batch(instance, np.asarray(orders)),
        name=f"tsp-{instance.count}",
    )


def random_tsp_instance(n_waypoints: int, seed: int,
                        box=((0.0, 0.0), (1.0, 1.0))) -> TspInstance:
    if n_waypoints < 2:
        raise DomainError("a tour needs at least 2 waypoints")
    (x0, y0), (x1, y1) = box
    u = _rng.stream(seed, _rng.FAMILY).random((n_waypoints, 2))
    pts = np.array([x0, y0]) + u * np.array([x1 - x0, y1 - y0])
    return TspInstance(pts)


def make_tsp_family(n_waypoints: int, box=((0.0, 0.0), (1.0, 1.0)),
                    description: str | None = None) -> ProblemFamily:
    """Random instances with n waypoints uniform in the box."""
    label = description or f"tsp-{n_waypoints}-uniform"
    return ProblemFamily(
        build=lambda s: make_tsp_problem(random_tsp_instance(n_waypoints, s, box)),
        description=label,
    )


def two_opt_min(instance: TspInstance, n0: int = 2000, seed: int = 0,
                max_passes: int = 200) -> OracleResult:
    """Heuristic tour optimum: best of n0 sampled tours, then 2-opt segment
    reversals to a local minimum.

    A heuristic, not ground truth: use it only for instances too large to
    enumerate, and never where exactness is asserted.
    """
    if n0 < 1:
        raise DomainError(f"n0 must be a positive integer, got {n0}")
    problem = make_tsp_problem(instance)
    tours = problem.space.sample(seed, n0, path=(_rng.ORACLE,))
    costs = tsp_cost_batch(instance, tours)
    order = np.array(tours[int(np.argmin(costs))])
    best = float(costs.min())
    evaluations = n0
    n = instance.count
    for _ in range(max_passes):
        improved = False
        for i in range(n - 1):
            # all reversals order[i:j] for j > i, evaluated as one batch
            cands = np.tile(order, (n - i - 1, 1))
            for k, j in enumerate(range(i + 1, n)):
                cands[k, i:j + 1] = order[i:j + 1][::-1]
            cand_costs = tsp_cost_batch(instance, cands)
            evaluations += len(cands)
            k = int(np.argmin(cand_costs))
            if cand_costs[k] < best:
                order, best = cands[k].copy(), float(cand_costs[k])
                improved = True
        if not improved:
            break
    return OracleResult(value=best, minimizer=order, method="2-opt-heuristic",
                        evaluations=evaluations)


def write_tsp_instance(instance: TspInstance, path) -> None:
    Path(path).write_text(
        json.dumps({"waypoints": instance.waypoints.tolist()}, indent=2),
        encoding="utf-8")


def read_tsp_instance(path) -> TspInstance:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    return TspInstance(raw["waypoints"])


# Benchmark definitions.  Only the Rastrigin form is fixed upstream
# (10*d + sum(x_i^2 - 10 cos(2 pi x_i)) on [-5.12, 5.12]^d); the rest use
# their standard textbook formulas and domains:
#   Ackley      a=20, b=0.2, c=2pi, on [-32.768, 32.768]^2, min 0 at origin
#   Beale       on [-4.5, 4.5]^2, min 0 at (3, 0.5)
#   Levi N.13   on [-10, 10]^2, min 0 at (1, 1)
#   Himmelblau  on [-5, 5]^2, min 0 at four points incl. (3, 2)


def _rastrigin(x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(x)
    return 10.0 * x.shape[1] + np.sum(x**2 - 10.0 * np.cos(2.0 * np.pi * x), axis=1)


def _ackley(x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(x)
    return (-20.0 * np.exp(-0.2 * np.sqrt(np.mean(x**2, axis=1)))
            - np.exp(np.mean(np.cos(2.0 * np.pi * x), axis=1)) + np.e + 20.0)


def _beale(x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(x)
    a, b = x[:, 0], x[:, 1]
    return ((1.5 - a + a * b) ** 2 + (2.25 - a + a * b**2) ** 2
            + (2.625 - a + a * b**3) ** 2)


def _levi13(x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(x)
    a, b = x[:, 0], x[:, 1]
    return (np.sin(3.0 * np.pi * a) ** 2
            + (a - 1.0) ** 2 * (1.0 + np.sin(3.0 * np.pi * b) ** 2)
            + (b - 1.0) ** 2 * (1.0 + np.sin(2.0 * np.pi * b) ** 2))


def _himmelblau(x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(x)
    a, b = x[:, 0], x[:, 1]
    return (a**2 + b - 11.0) ** 2 + (a + b**2 - 7.0) ** 2


@dataclass(frozen=True)
class BenchmarkSpec:
    name: str
    dims: int
    lower: float
    upper: float


BENCHMARKS: dict[str, tuple[BenchmarkSpec, callable]] = {
    "rastrigrin2": (BenchmarkSpec("rastrigrin2", 2, -5.12, 5.12), _rastrigin),
    "rastrigrin10": (BenchmarkSpec("rastrigrin10", 10, -5.12, 5.12), _rastrigin),
    "ackley": (BenchmarkSpec("ackley", 2, -32.768, 32.768), _ackley),
    "beale": (BenchmarkSpec("beale", 2, -4.5, 4.5), _beale),
    "levi13": (BenchmarkSpec("levi13", 2, -10.0, 10.0), _levi13),
    "himmelblau": (BenchmarkSpec("himmelblau", 2, -5.0, 5.0), _himmelblau),
}

# Common alternate spellings accepted on the CLI.
_ALIASES = {"rastrigin2": "rastrigrin2", "rastrigin10": "rastrigrin10",
            "levi": "levi13"}

BENCHMARK_NAMES = tuple(BENCHMARKS)


def make_benchmark(name: str) -> Problem:
    """Benchmark problem by name; every one has true minimum 0."""
    key = _ALIASES.get(name, name)
    if key not in BENCHMARKS:
        raise DomainError(f"unknown benchmark {name!r}; "
                          f"expected one of {sorted(BENCHMARKS)}")
    spec, fn = BENCHMARKS[key]
    space = BoxSpace([spec.lower] * spec.dims, [spec.upper] * spec.dims)
    return Problem(
        space=space,
        cost=lambda x: float(fn(np.asarray(x, dtype=float))[0]),
        batch_cost=fn,
        name=spec.name,
        declared_optimum=0.0,
    )
