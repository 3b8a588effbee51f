"""Probabilistic upper bounds on the optimality gap of a percentile solution.

A variance function measures, for any decision, the smallest absolute cost
difference to a retained subset D of the solve's information set.  Maximizing
that variance with a second percentile pass yields a value that exceeds the
solution's true optimality gap with quantifiable confidence, provided the
fraction p of the space whose variance beats the gap is at least the chosen
epsilon (the fairness premise).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _rng
from .percentile import DomainError, InfoSet, Problem, confidence_of, min_samples

DEFAULT_CHI = 0.1
DEFAULT_EPSILON = 0.01  # safe when the unknown exceedance probability p >= 1e-2
ENUMERATION_LIMIT = math.factorial(10)


class CapacityError(RuntimeError):
    """Exact enumeration requested beyond the configured size limit."""


@dataclass(frozen=True)
class VarianceModel:
    """Subset D of an information set plus the induced variance function."""

    problem: Problem | None
    d_indices: np.ndarray
    d_costs: np.ndarray
    chi: float
    solution_cost: float
    source_size: int

    @property
    def d_size(self) -> int:
        return len(self.d_costs)

    def _sorted(self) -> np.ndarray:
        return np.sort(self.d_costs)


@dataclass(frozen=True)
class GapCertificate:
    """Asserts: solution_cost exceeds the true optimum by at most v_star,
    with the stated confidence (given epsilon at most the fairness p)."""

    v_star: float
    n_v: int
    epsilon: float
    confidence: float
    solution_cost: float
    chi: float
    seed: int
    d_indices: tuple[int, ...]
    low_sample_warning: bool = False

    @property
    def optimum_interval(self) -> tuple[float, float]:
        """Interval [solution_cost - v_star, solution_cost] containing the
        optimum with the certificate's confidence."""
        return self.solution_cost - self.v_star, self.solution_cost


@dataclass(frozen=True)
class LevelSetReport:
    radius: float
    fraction: float
    mode: str  # "exact" or "monte-carlo(m)"


def subsample_info(info: InfoSet, chi: float, seed: int,
                   problem: Problem | None = None) -> VarianceModel:
    """Retain a uniform without-replacement subset of max(1, floor(chi*|info|))
    points; chi = 1 retains everything.

    Pass the originating problem so the model can evaluate fresh decisions
    (certify_gap, variance_at); omit it only for cost-only inspection.
    """
    if not 0.0 < chi <= 1.0:
        raise DomainError(f"chi must be in (0, 1], got {chi}")
    if len(info) == 0:
        raise DomainError("cannot subsample an empty information set")
    k = max(1, int(math.floor(chi * len(info))))
    if k >= len(info):
        idx = np.arange(len(info))
    else:
        idx = np.sort(_rng.stream(seed, _rng.SUBSAMPLE).choice(len(info), size=k,
                                                               replace=False))
    return VarianceModel(
        problem=problem,
        d_indices=idx,
        d_costs=info.costs[idx].copy(),
        chi=float(chi),
        solution_cost=float(info.costs.min()),
        source_size=len(info),
    )


def variance_of_costs(model: VarianceModel, costs: np.ndarray) -> np.ndarray:
    """min_i |cost - d_cost_i| for each cost, via one sorted-array lookup."""
    d = model._sorted()
    costs = np.atleast_1d(np.asarray(costs, dtype=float))
    pos = np.searchsorted(d, costs)
    left = d[np.clip(pos - 1, 0, len(d) - 1)]
    right = d[np.clip(pos, 0, len(d) - 1)]
    return np.minimum(np.abs(costs - left), np.abs(costs - right))


def variance_at(model: VarianceModel, decision) -> float:
    """Variance of one decision; evaluates the cost oracle exactly once."""
    cost = model.problem.evaluate(decision)
    return float(variance_of_costs(model, cost)[0])


def certify_gap(model: VarianceModel, n_v: int, epsilon: float,
                seed: int) -> GapCertificate:
    """Second percentile pass: the max variance over n_v fresh uniform draws,
    packaged with its confidence 1-(1-epsilon)^n_v.

    The draws come from a stream tag disjoint from the solve's, so they are
    independent of the information set even under seed reuse.  A warning flag
    is set when n_v is too small to reach 95% confidence at this epsilon.
    """
    if n_v < 1:
        raise DomainError(f"n_v must be a positive integer, got {n_v}")
    if not 0.0 <= epsilon <= 1.0:
        raise DomainError(f"epsilon must be in [0, 1], got {epsilon}")
    problem = model.problem
    decisions = problem.space.sample(seed, n_v, path=(_rng.CERTIFY,))
    costs = problem.evaluate_batch(decisions)
    v_star = float(variance_of_costs(model, costs).max())
    warn = epsilon > 0 and n_v < min_samples(epsilon, 0.95)
    return GapCertificate(
        v_star=v_star,
        n_v=int(n_v),
        epsilon=float(epsilon),
        confidence=confidence_of(epsilon, n_v),
        solution_cost=model.solution_cost,
        chi=model.chi,
        seed=int(seed),
        d_indices=tuple(int(i) for i in model.d_indices),
        low_sample_warning=bool(warn),
    )


def _variance_sample(model: VarianceModel, mode: str, m: int | None,
                     seed: int | None,
                     enumeration_limit: int) -> tuple[np.ndarray, str]:
    problem = model.problem
    if mode == "exact":
        card = problem.space.cardinality
        if card is None:
            raise DomainError("exact mode requires a finite decision space")
        if card > enumeration_limit:
            raise CapacityError(f"space cardinality {card} exceeds the "
                                f"enumeration limit {enumeration_limit}")
        chunks = [variance_of_costs(model, problem.evaluate_batch(block))
                  for block in problem.space.enumerate()]
        return np.concatenate(chunks), "exact"
    if mode == "monte-carlo":
        if m is None or m < 1:
            raise DomainError("monte-carlo mode needs a positive sample count m")
        decisions = problem.space.sample(0 if seed is None else seed, m,
                                         path=(_rng.LEVEL_SET,))
        costs = problem.evaluate_batch(decisions)
        return variance_of_costs(model, costs), f"monte-carlo({m})"
    raise DomainError(f"unknown mode {mode!r}; expected 'exact' or 'monte-carlo'")


def exceedance_probability(model: VarianceModel, threshold: float,
                           mode: str = "exact", m: int | None = None,
                           seed: int | None = None,
                           enumeration_limit: int = ENUMERATION_LIMIT) -> float:
    """Probability that a uniform decision's variance strictly exceeds the
    threshold: exact enumeration on finite spaces, sample fraction otherwise.

    With threshold set to the solution's true optimality gap this is the
    fairness probability p that caps the usable epsilon.
    """
    if threshold < 0:
        raise DomainError(f"threshold must be >= 0, got {threshold}")
    variances, _ = _variance_sample(model, mode, m, seed, enumeration_limit)
    return float((variances > threshold).mean())


def level_set_report(model: VarianceModel, r: float, mode: str = "exact",
                     m: int | None = None, seed: int | None = None,
                     enumeration_limit: int = ENUMERATION_LIMIT) -> LevelSetReport:
    """Volume fraction of decisions whose variance is at most r, on the same
    sample set exceedance_probability uses for the given mode and seed."""
    if r < 0:
        raise DomainError(f"r must be >= 0, got {r}")
    variances, mode_label = _variance_sample(model, mode, m, seed, enumeration_limit)
    return LevelSetReport(radius=float(r),
                          fraction=float((variances <= r).mean()),
                          mode=mode_label)


def certificate_to_json(cert: GapCertificate) -> str:
    return json.dumps({
        "v_star": cert.v_star,
        "n_v": cert.n_v,
        "epsilon": cert.epsilon,
        "confidence": cert.confidence,
        "solution_cost": cert.solution_cost,
        "chi": cert.chi,
        "seed": cert.seed,
        "d_indices": list(cert.d_indices),
        "low_sample_warning": cert.low_sample_warning,
    }, indent=2)


def certificate_from_json(text: str) -> GapCertificate:
    raw = json.loads(text)
    return GapCertificate(
        v_star=float(raw["v_star"]), n_v=int(raw["n_v"]),
        epsilon=float(raw["epsilon"]), confidence=float(raw["confidence"]),
        solution_cost=float(raw["solution_cost"]), chi=float(raw["chi"]),
        seed=int(raw["seed"]), d_indices=tuple(int(i) for i in raw["d_indices"]),
        low_sample_warning=bool(raw.get("low_sample_warning", False)),
    )


def write_level_set_sweep(model: VarianceModel, radii, path, mode: str = "exact",
                          m: int | None = None, seed: int | None = None) -> None:
    """CSV sweep ``r,fraction`` over the given radii (plot-ready)."""
    variances, _ = _variance_sample(model, mode, m, seed, ENUMERATION_LIMIT)
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        fh.write("r,fraction\n")
        for r in radii:
            fh.write(f"{float(r)!r},{float((variances <= r).mean())!r}\n")
