"""Ground-truth optima for measuring true optimality gaps.

Two routes: exact enumeration for finite spaces, and best-of-n0 uniform
sampling followed by projected finite-difference descent for continuous ones.
The descent cycles a coarse-to-fine difference step: coarse stencils smooth
high-frequency ripple so the search can cross shallow local basins, fine
stencils polish the result.  Every accepted step strictly decreases the true
cost, so the refined value never exceeds the best sampled one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _rng
from .percentile import DomainError, Problem

ENUMERATION_LIMIT = math.factorial(10)


class OracleError(RuntimeError):
    """Oracle could not produce a trustworthy optimum."""


@dataclass(frozen=True)
class OracleResult:
    value: float
    minimizer: np.ndarray
    method: str  # "exhaustive" | "refine-min" | "declared"
    evaluations: int
    converged: bool = True

    def to_dict(self) -> dict:
        m = self.minimizer
        return {"value": self.value,
                "minimizer": m.tolist() if isinstance(m, np.ndarray) else m,
                "method": self.method, "evaluations": self.evaluations,
                "converged": self.converged}


@dataclass(frozen=True)
class DescentConfig:
    """Tuning for the finite-difference descent phase (fractions of box width)."""

    fd_start: float = 0.05
    fd_floor: float = 1e-6
    initial_step: float = 1.0
    backtrack: float = 0.5
    fine_backtrack: float = 0.85   # last-resort scan before declaring a stall
    min_step: float = 1e-12
    max_iters: int = 2000
    curvature_floor: float = 1e-12


def exhaustive_min(problem: Problem,
                   enumeration_limit: int = ENUMERATION_LIMIT) -> OracleResult:
    """Exact minimum by full enumeration; first minimizer in enumeration order."""
    card = problem.space.cardinality
    if card is None:
        raise DomainError("exhaustive_min requires a finite decision space")
    if card > enumeration_limit:
        raise OracleError(f"space cardinality {card} exceeds the enumeration "
                          f"limit {enumeration_limit}")
    best_value = math.inf
    best_decision = None
    evaluations = 0
    for block in problem.space.enumerate():
        costs = problem.evaluate_batch(block)
        evaluations += len(costs)
        i = int(np.argmin(costs))
        if costs[i] < best_value:
            best_value = float(costs[i])
            best_decision = np.array(block[i])
    return OracleResult(value=best_value, minimizer=best_decision,
                        method="exhaustive", evaluations=evaluations)


def refine_min(problem: Problem, n0: int = 2000, seed: int = 0,
               config: DescentConfig = DescentConfig()) -> OracleResult:
    """Best of n0 uniform samples, then projected finite-difference descent.

    Works on any space exposing per-axis ``bounds`` and a ``project`` method
    (boxes, and box-clipped shapes like the waypoint annulus).  Trial points
    that project outside the space are rejected; the incumbent value is
    monotone nonincreasing throughout.
    """
    if n0 < 1:
        raise DomainError(f"n0 must be a positive integer, got {n0}")
    space = problem.space
    if not hasattr(space, "bounds") or not hasattr(space, "project"):
        raise DomainError("refine_min needs a space with bounds and projection")
    lower, upper = space.bounds
    width = upper - lower
    wmax = float(np.max(width))

    samples = space.sample(seed, n0, path=(_rng.ORACLE,))
    costs = problem.evaluate_batch(samples)
    i = int(np.argmin(costs))
    state = {"x": np.array(samples[i], dtype=float), "fx": float(costs[i]),
             "evals": n0, "iters": 0}

    def try_candidates(cands: list[np.ndarray]) -> bool:
        """Accept the first strict improvement, in candidate order (identical
        result to sequential backtracking; evaluated as one batch)."""
        if not cands:
            return False
        projected = np.asarray([space.project(c) for c in cands])
        values = problem.evaluate_batch(projected)
        state["evals"] += len(values)
        ok = np.isfinite(values) & (values < state["fx"])
        ok &= np.fromiter((space.contains(p) for p in projected),
                          dtype=bool, count=len(projected))
        hits = np.nonzero(ok)[0]
        if hits.size == 0:
            return False
        j = int(hits[0])
        state["x"], state["fx"] = projected[j].copy(), float(values[j])
        return True

    def ladder(x, g, gmax, ratio) -> list[np.ndarray]:
        t0 = config.initial_step * wmax / gmax
        steps = math.log(t0 * gmax / (config.min_step * wmax)) / math.log(1 / ratio)
        count = min(max(int(math.ceil(steps)), 1), 400)
        return [x - (t0 * ratio**j) * g for j in range(count)]

    def level_pass(fd: float) -> bool:
        improved = False
        d = lower.size
        eye = np.eye(d, dtype=bool)
        while state["iters"] < config.max_iters:
            state["iters"] += 1
            x, fx = state["x"], state["fx"]
            h = fd * width
            up = np.minimum(x + h, upper)
            dn = np.maximum(x - h, lower)
            stencil = np.concatenate([np.where(eye, up, x), np.where(eye, dn, x)])
            sc = problem.evaluate_batch(stencil)
            state["evals"] += 2 * d
            spread = up - dn
            g = (sc[:d] - sc[d:]) / spread
            curv = (sc[:d] - 2 * fx + sc[d:]) / (spread / 2) ** 2
            gmax = float(np.max(np.abs(g)))
            if gmax == 0.0 or not math.isfinite(gmax):
                return improved
            # curvature-informed first trials, then plain backtracking
            newton = -g / np.maximum(curv, config.curvature_floor)
            flat = curv <= config.curvature_floor
            newton[flat] = (-g[flat] / gmax) * 0.1 * width[flat]
            trials = [x + tau * newton for tau in (1.0, 0.5, 0.25)]
            if try_candidates(trials) or try_candidates(
                    ladder(x, g, gmax, config.backtrack)):
                improved = True
                continue
            if try_candidates(ladder(x, g, gmax, config.fine_backtrack)):
                improved = True
                continue
            return improved
        return improved

    while state["iters"] < config.max_iters:
        progressed = False
        fd = config.fd_start
        while True:
            progressed |= level_pass(fd)
            if fd <= config.fd_floor or state["iters"] >= config.max_iters:
                break
            fd = max(fd * 0.5, config.fd_floor)
        if not progressed:
            break
    converged = state["iters"] < config.max_iters
    return OracleResult(value=state["fx"], minimizer=state["x"],
                        method="refine-min", evaluations=state["evals"],
                        converged=converged)


def declared_min(problem: Problem) -> OracleResult:
    """Use the problem's analytically declared optimum (synthetic families)."""
    if problem.declared_optimum is None:
        raise OracleError("problem carries no declared optimum")
    return OracleResult(value=float(problem.declared_optimum), minimizer=None,
                        method="declared", evaluations=0)
