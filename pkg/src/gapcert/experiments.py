"""Seeded, resumable experiment pipelines emitting machine-readable tables.

Each experiment is described by a config (JSON file or dict), runs fully
deterministically from its seed, flushes per-trial records as it goes so an
interrupted run can resume, and writes plot-ready CSV artifacts.  Re-running
an identical config byte-reproduces every numeric output; wall-clock timings
live only in the report JSON.
"""

from __future__ import annotations

import dataclasses
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _rng
from ._version import __version__
from .certifier import DEFAULT_CHI, DEFAULT_EPSILON, ENUMERATION_LIMIT, \
    certificate_to_json, certify_gap, exceedance_probability, subsample_info, \
    variance_of_costs
from .mpc import WaypointProblemParams, mpc_family
from .oracles import exhaustive_min, refine_min
from .percentile import Problem, confidence_of, min_samples, \
    percentile_solve, write_infoset_csv
from .problems import BENCHMARK_NAMES, make_benchmark, make_tsp_family, \
    make_tsp_problem, random_tsp_instance, read_tsp_instance
from .repetitive import OracleConfig, ProblemFamily, sample_gap
from .spaces import BoxSpace

EXPERIMENTS = ("solve", "certify", "chi-sweep", "table1", "tsp-fig2",
               "mpc-fig4", "validate")


class ConfigError(ValueError):
    """Invalid experiment configuration; message names the offending field."""


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int
    out_dir: str = "runs"
    # problem / family selectors
    benchmark: str | None = None
    tsp_file: str | None = None
    tsp_random: int | None = None
    family: str | None = None
    # shared knobs
    n_p: int = 300
    n_v: int = 300
    epsilon: float = DEFAULT_EPSILON
    chi: float = DEFAULT_CHI
    trials: int = 100
    r: int = 459
    confidence: float = 0.999
    n_p_list: list[int] = field(default_factory=lambda: [200, 300, 500])
    m_validate: int = 0
    chis: list[float] = field(default_factory=lambda: [0.01, 0.05, 0.1, 0.25, 0.5, 1.0])
    mc_samples: int = 20000
    oracle: dict = field(default_factory=dict)
    certificate: str | None = None
    check: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        if "experiment" not in raw:
            raise ConfigError("field 'experiment' is required")
        if "seed" not in raw:
            raise ConfigError("field 'seed' is required (runs never seed from "
                              "the clock)")
        cfg = cls(**raw)
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {EXPERIMENTS}, "
                              f"got {self.experiment!r}")
        try:
            self.seed = int(self.seed)
        except (TypeError, ValueError):
            raise ConfigError(f"seed must be an integer, got {self.seed!r}")
        for name in ("n_p", "n_v", "trials", "r", "mc_samples"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be a positive integer")
        if not 0.0 < self.epsilon <= 1.0:
            raise ConfigError(f"epsilon must be in (0, 1], got {self.epsilon}")
        if not 0.0 < self.chi <= 1.0:
            raise ConfigError(f"chi must be in (0, 1], got {self.chi}")
        if not 0.0 <= self.confidence < 1.0:
            raise ConfigError(f"confidence must be in [0, 1), got {self.confidence}")
        needs_problem = self.experiment in ("solve", "certify", "chi-sweep",
                                            "tsp-fig2")
        if needs_problem and not (self.benchmark or self.tsp_file
                                  or self.tsp_random):
            raise ConfigError(f"experiment {self.experiment!r} needs a problem: "
                              "set 'benchmark', 'tsp_file', or 'tsp_random'")
        if self.experiment in ("mpc-fig4", "validate") and self.family is None:
            self.family = "mpc"
        if self.benchmark is not None and self.benchmark not in BENCHMARK_NAMES:
            from .problems import _ALIASES
            if self.benchmark not in _ALIASES:
                raise ConfigError(f"benchmark must be one of {BENCHMARK_NAMES}, "
                                  f"got {self.benchmark!r}")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class RunReport:
    config: ExperimentConfig
    records: list[dict]
    summary: dict
    timings: dict
    version: str = __version__

    def to_dict(self) -> dict:
        return {"config": self.config.to_dict(), "summary": self.summary,
                "timings": self.timings, "version": self.version,
                "n_records": len(self.records)}


def _resolve_problem(cfg: ExperimentConfig) -> Problem:
    if cfg.benchmark:
        return make_benchmark(cfg.benchmark)
    if cfg.tsp_file:
        return make_tsp_problem(read_tsp_instance(cfg.tsp_file))
    if cfg.tsp_random:
        return make_tsp_problem(random_tsp_instance(int(cfg.tsp_random), cfg.seed))
    raise ConfigError("no problem selector present")


def _resolve_family(cfg: ExperimentConfig) -> ProblemFamily:
    name = cfg.family or ""
    if name == "mpc":
        return mpc_family(WaypointProblemParams())
    if name == "uniform-gaps":
        return uniform_gap_family()
    if name.startswith("tsp:"):
        return make_tsp_family(int(name.split(":", 1)[1]))
    raise ConfigError(f"unknown family {name!r}; expected 'mpc', "
                      "'uniform-gaps', or 'tsp:<n>'")


def _resolve_oracle(cfg: ExperimentConfig, default_method="refine-min",
                    default_n0=2000, default_tol=None) -> OracleConfig:
    raw = dict(cfg.oracle or {})
    return OracleConfig(
        method=raw.get("method", default_method),
        n0=int(raw.get("n0", default_n0)),
        gap_tolerance=raw.get("gap_tolerance", default_tol),
    )


def uniform_gap_family() -> ProblemFamily:
    """Synthetic family whose measured gap is exactly Uniform(0, 1): each
    instance has constant cost u and a declared optimum of 0."""

    def build(instance_seed: int) -> Problem:
        u = float(_rng.stream(instance_seed, _rng.FAMILY).random())
        return Problem(space=BoxSpace([0.0], [1.0]),
                       cost=lambda _d, _u=u: _u,
                       batch_cost=lambda d, _u=u: np.full(len(d), _u),
                       name=f"uniform-gap-{instance_seed}",
                       declared_optimum=0.0)

    return ProblemFamily(build=build, description="uniform-gaps")


class _RecordSink:
    """Per-trial record store with crash-recovery flushing and resume.

    Records are keyed; completed keys from a previous identical-config run are
    loaded and skipped.  The final CSV is rewritten sorted by key so resumed
    and fresh runs produce identical bytes.
    """

    def __init__(self, out_dir: Path, config: ExperimentConfig, columns: list[str],
                 key_cols: list[str]):
        self.out = out_dir
        self.columns = columns
        self.key_cols = key_cols
        self.records: dict[tuple, dict] = {}
        self._partial = out_dir / "records.partial.csv"
        self._config_path = out_dir / "config.json"
        config_text = json.dumps(config.to_dict(), indent=2, sort_keys=True)
        if self._config_path.exists() and self._partial.exists() \
                and self._config_path.read_text(encoding="utf-8") == config_text:
            self._load_partial()
        else:
            for stale in (self._partial, out_dir / "records.csv"):
                stale.unlink(missing_ok=True)
        self._config_path.write_text(config_text, encoding="utf-8")
        self._fh = self._partial.open("a", encoding="utf-8", newline="")
        if self._partial.stat().st_size == 0:
            self._fh.write(",".join(self.columns) + "\n")
            self._fh.flush()

    def _load_partial(self):
        with self._partial.open("r", encoding="utf-8") as fh:
            header = fh.readline().rstrip("\n").split(",")
            if header != self.columns:
                return
            for line in fh:
                parts = line.rstrip("\n").split(",")
                if len(parts) != len(self.columns):
                    continue  # torn tail line from a crash
                rec = dict(zip(self.columns, parts))
                self.records[self._key_of(rec)] = rec

    def _key_of(self, rec: dict) -> tuple:
        return tuple(str(rec[k]) for k in self.key_cols)

    def done(self, **key) -> bool:
        return tuple(str(key[k]) for k in self.key_cols) in self.records

    def add(self, rec: dict) -> None:
        rec = {k: _fmt(rec[k]) for k in self.columns}
        self.records[self._key_of(rec)] = rec
        self._fh.write(",".join(rec[c] for c in self.columns) + "\n")
        self._fh.flush()

    def finish(self) -> list[dict]:
        self._fh.close()
        rows = [self.records[k] for k in sorted(self.records)]
        with (self.out / "records.csv").open("w", encoding="utf-8",
                                             newline="") as fh:
            fh.write(",".join(self.columns) + "\n")
            for rec in rows:
                fh.write(",".join(rec[c] for c in self.columns) + "\n")
        self._partial.unlink(missing_ok=True)
        return rows


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def run(config: ExperimentConfig | dict, out_dir=None) -> RunReport:
    """Execute the configured experiment and write its artifacts.

    Returns the report; also writes report.json, records.csv, and the
    experiment's plot files under the output directory.
    """
    if isinstance(config, dict):
        config = ExperimentConfig.from_dict(config)
    else:
        config.validate()
    out = Path(out_dir if out_dir is not None else config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    runner = _RUNNERS[config.experiment]
    records, summary, timings = runner(config, out)
    timings["total_s"] = time.perf_counter() - started
    report = RunReport(config=config, records=records, summary=summary,
                       timings=timings)
    (out / "report.json").write_text(json.dumps(report.to_dict(), indent=2),
                                     encoding="utf-8")
    emit_plot_data(report, config.experiment, out)
    return report


# --- individual experiments -------------------------------------------------

def _run_solve(cfg: ExperimentConfig, out: Path):
    problem = _resolve_problem(cfg)
    t0 = time.perf_counter()
    solution = percentile_solve(problem, cfg.n_p, cfg.seed)
    solve_s = time.perf_counter() - t0
    write_infoset_csv(solution.info, out / "infoset.csv")
    records = [{"index": i, "cost": float(solution.info.costs[i])}
               for i in range(len(solution.info))]
    summary = {
        "problem": problem.name,
        "n_p": cfg.n_p,
        "best_cost": solution.best.cost,
        "best_index": solution.best_index,
        "best_decision": np.asarray(solution.best.decision).tolist(),
    }
    return records, summary, {"solve_s": solve_s}


def _run_certify(cfg: ExperimentConfig, out: Path):
    problem = _resolve_problem(cfg)
    t0 = time.perf_counter()
    solution = percentile_solve(problem, cfg.n_p, cfg.seed)
    model = subsample_info(solution.info, cfg.chi,
                           _rng.child_seed(cfg.seed, _rng.SUBSAMPLE),
                           problem=problem)
    cert = certify_gap(model, cfg.n_v, cfg.epsilon,
                       _rng.child_seed(cfg.seed, _rng.CERTIFY))
    certify_s = time.perf_counter() - t0
    write_infoset_csv(solution.info, out / "infoset.csv")
    (out / "certificate.json").write_text(certificate_to_json(cert),
                                          encoding="utf-8")
    lo, hi = cert.optimum_interval
    records = [{"v_star": cert.v_star, "solution_cost": cert.solution_cost,
                "epsilon": cert.epsilon, "confidence": cert.confidence,
                "n_v": cert.n_v}]
    summary = {"problem": problem.name, "v_star": cert.v_star,
               "solution_cost": cert.solution_cost,
               "confidence": cert.confidence,
               "optimum_interval": [lo, hi],
               "low_sample_warning": cert.low_sample_warning}
    return records, summary, {"certify_s": certify_s}


def _true_optimum(cfg: ExperimentConfig, problem: Problem) -> tuple[float, str]:
    """Ground truth for gap measurement: exact for finite spaces, strong
    refine-min otherwise (n0 from the oracle config, default 20000)."""
    card = problem.space.cardinality
    if card is not None:
        if card > ENUMERATION_LIMIT:
            raise ConfigError(f"finite space with {card} elements exceeds the "
                              f"exact-oracle limit {ENUMERATION_LIMIT}")
        res = exhaustive_min(problem)
        return res.value, res.method
    oracle = _resolve_oracle(cfg, default_n0=20000)
    res = refine_min(problem, n0=oracle.n0,
                     seed=_rng.child_seed(cfg.seed, _rng.ORACLE),
                     config=oracle.descent)
    return res.value, res.method


def _run_chi_sweep(cfg: ExperimentConfig, out: Path):
    problem = _resolve_problem(cfg)
    t0 = time.perf_counter()
    j_star, method = _true_optimum(cfg, problem)
    oracle_s = time.perf_counter() - t0
    card = problem.space.cardinality
    exact = card is not None and card <= ENUMERATION_LIMIT
    sink = _RecordSink(out, cfg, ["trial", "chi", "gap", "p"], ["trial", "chi"])
    for trial in range(cfg.trials):
        solution = None
        for chi in cfg.chis:
            if sink.done(trial=trial, chi=_fmt(float(chi))):
                continue
            if solution is None:
                solution = percentile_solve(problem, cfg.n_p,
                                            _rng.child_seed(cfg.seed, 100, trial))
                gap = solution.best.cost - j_star
            model = subsample_info(solution.info, chi,
                                   _rng.child_seed(cfg.seed, 101, trial),
                                   problem=problem)
            p = exceedance_probability(
                model, max(gap, 0.0),
                mode="exact" if exact else "monte-carlo",
                m=cfg.mc_samples, seed=_rng.child_seed(cfg.seed, 102, trial))
            sink.add({"trial": trial, "chi": float(chi), "gap": gap, "p": p})
    records = sink.finish()
    by_chi = {}
    for rec in records:
        by_chi.setdefault(float(rec["chi"]), []).append(float(rec["p"]))
    mean_p = {chi: float(np.mean(ps)) for chi, ps in sorted(by_chi.items())}
    with (out / "chi_p.csv").open("w", encoding="utf-8", newline="") as fh:
        fh.write("chi,mean_p\n")
        for chi, p in mean_p.items():
            fh.write(f"{chi!r},{p!r}\n")
    summary = {"problem": problem.name, "oracle_value": j_star,
               "oracle_method": method, "mode": "exact" if exact else
               f"monte-carlo({cfg.mc_samples})", "mean_p_by_chi": mean_p}
    return records, summary, {"oracle_s": oracle_s}


def _run_table1(cfg: ExperimentConfig, out: Path):
    names = [cfg.benchmark] if cfg.benchmark else list(BENCHMARK_NAMES)
    sink = _RecordSink(out, cfg,
                       ["benchmark", "trial", "v_star", "gap", "success",
                        "certify_ms"],
                       ["benchmark", "trial"])
    oracle_values = {}
    timings = {}
    for name in names:
        problem = make_benchmark(name)
        t0 = time.perf_counter()
        j_star, _ = _true_optimum(cfg, problem)
        timings[f"oracle_{name}_s"] = time.perf_counter() - t0
        oracle_values[name] = j_star
        for trial in range(cfg.trials):
            if sink.done(benchmark=name, trial=trial):
                continue
            seed = _rng.child_seed(cfg.seed, 200, trial)
            solution = percentile_solve(problem, cfg.n_p, seed)
            t1 = time.perf_counter()
            model = subsample_info(solution.info, cfg.chi,
                                   _rng.child_seed(seed, _rng.SUBSAMPLE),
                                   problem=problem)
            cert = certify_gap(model, cfg.n_v, cfg.epsilon,
                               _rng.child_seed(seed, _rng.CERTIFY))
            certify_ms = (time.perf_counter() - t1) * 1e3
            gap = solution.best.cost - j_star
            sink.add({"benchmark": name, "trial": trial, "v_star": cert.v_star,
                      "gap": gap, "success": cert.v_star >= gap,
                      "certify_ms": certify_ms})
    records = sink.finish()
    expected = confidence_of(cfg.epsilon, cfg.n_v)
    summary_rows = {}
    for name in names:
        rows = [r for r in records if r["benchmark"] == name]
        fraction = float(np.mean([r["success"] == "1" for r in rows]))
        mean_ms = float(np.mean([float(r["certify_ms"]) for r in rows]))
        summary_rows[name] = {"success_fraction": fraction,
                              "mean_certify_ms": mean_ms,
                              "oracle_value": oracle_values[name]}
    with (out / "table1.csv").open("w", encoding="utf-8", newline="") as fh:
        fh.write("name,n_p,n_v,expected_success,success_fraction,"
                 "mean_certify_ms\n")
        for name in names:
            row = summary_rows[name]
            fh.write(f"{name},{cfg.n_p},{cfg.n_v},{expected!r},"
                     f"{row['success_fraction']!r},"
                     f"{row['mean_certify_ms']:.3f}\n")
    summary = {"expected_success": expected, "benchmarks": summary_rows,
               "success_fraction": {n: summary_rows[n]["success_fraction"]
                                    for n in names}}
    return records, summary, timings


def _run_tsp_fig2(cfg: ExperimentConfig, out: Path):
    problem = _resolve_problem(cfg)
    card = problem.space.cardinality
    if card is None:
        raise ConfigError("tsp-fig2 needs a finite (tour) problem")
    if card > ENUMERATION_LIMIT:
        raise ConfigError(f"tsp-fig2 enumerates every tour; {card} exceeds "
                          f"the limit {ENUMERATION_LIMIT}")
    t0 = time.perf_counter()
    all_costs = np.concatenate([problem.evaluate_batch(block)
                                for block in problem.space.enumerate()])
    j_star = float(all_costs.min())
    enumerate_s = time.perf_counter() - t0
    sink = _RecordSink(out, cfg,
                       ["trial", "zeta", "gap", "p", "n_v", "v_star", "success"],
                       ["trial"])
    for trial in range(cfg.trials):
        if sink.done(trial=trial):
            continue
        seed = _rng.child_seed(cfg.seed, 300, trial)
        solution = percentile_solve(problem, cfg.n_p, seed)
        gap = solution.best.cost - j_star
        model = subsample_info(solution.info, cfg.chi,
                               _rng.child_seed(seed, _rng.SUBSAMPLE),
                               problem=problem)
        p = float((variance_of_costs(model, all_costs) > gap).mean())
        if p <= 0.0:
            sink.add({"trial": trial, "zeta": solution.best.cost, "gap": gap,
                      "p": p, "n_v": 0, "v_star": float("nan"),
                      "success": False})
            continue
        n_v = min_samples(p, cfg.confidence)
        cert = certify_gap(model, n_v, p, _rng.child_seed(seed, _rng.CERTIFY))
        sink.add({"trial": trial, "zeta": solution.best.cost, "gap": gap,
                  "p": p, "n_v": n_v, "v_star": cert.v_star,
                  "success": cert.v_star >= gap})
    records = sink.finish()
    successes = [r["success"] == "1" for r in records]
    summary = {"problem": problem.name, "true_optimum": j_star,
               "confidence": cfg.confidence,
               "success_fraction": float(np.mean(successes)),
               "mean_p": float(np.mean([float(r["p"]) for r in records])),
               "mean_n_v": float(np.mean([int(r["n_v"]) for r in records]))}
    return records, summary, {"enumerate_s": enumerate_s}


def _run_mpc_fig4(cfg: ExperimentConfig, out: Path):
    family = _resolve_family(cfg)
    oracle = _resolve_oracle(
        cfg, default_tol=1.0 if (cfg.family or "mpc") == "mpc" else None)
    if family.description == "uniform-gaps" and not cfg.oracle:
        oracle = OracleConfig(method="declared")
    sink = _RecordSink(out, cfg,
                       ["phase", "n_p", "trial", "instance_seed",
                        "solution_cost", "oracle_value", "gamma"],
                       ["phase", "n_p", "trial"])
    timings = {}
    summary_rows = {}
    for n_p in cfg.n_p_list:
        base = _rng.child_seed(cfg.seed, 400, n_p)
        t0 = time.perf_counter()
        for i in range(cfg.r):
            if not sink.done(phase="certify", n_p=n_p, trial=i):
                s = sample_gap(family, n_p, oracle,
                               _rng.child_seed(base, _rng.FAMILY, i))
                sink.add({"phase": "certify", "n_p": n_p, "trial": i,
                          "instance_seed": s.instance_seed,
                          "solution_cost": s.solution_cost,
                          "oracle_value": s.oracle_value, "gamma": s.gamma})
        rows = [r for r in sink.records.values()
                if r["phase"] == "certify" and int(r["n_p"]) == n_p]
        gammas = [float(r["gamma"]) for r in rows]
        gamma_star = max(gammas)
        timings[f"certify_np{n_p}_s"] = time.perf_counter() - t0
        cert = {"gamma_star": gamma_star, "r": cfg.r, "epsilon": cfg.epsilon,
                "confidence": confidence_of(cfg.epsilon, cfg.r), "n_p": n_p,
                "family": family.description, "seed": base}
        (out / f"certificate_np{n_p}.json").write_text(
            json.dumps(cert, indent=2), encoding="utf-8")
        coverage = None
        if cfg.m_validate > 0:
            t1 = time.perf_counter()
            covered = 0
            for i in range(cfg.m_validate):
                if not sink.done(phase="validate", n_p=n_p, trial=i):
                    s = sample_gap(family, n_p, oracle,
                                   _rng.child_seed(base, _rng.VALIDATE, i))
                    sink.add({"phase": "validate", "n_p": n_p, "trial": i,
                              "instance_seed": s.instance_seed,
                              "solution_cost": s.solution_cost,
                              "oracle_value": s.oracle_value, "gamma": s.gamma})
            vrows = [r for r in sink.records.values()
                     if r["phase"] == "validate" and int(r["n_p"]) == n_p]
            coverage = float(np.mean([float(r["gamma"]) <= gamma_star
                                      for r in vrows]))
            timings[f"validate_np{n_p}_s"] = time.perf_counter() - t1
        summary_rows[str(n_p)] = {"gamma_star": gamma_star,
                                  "coverage": coverage,
                                  "confidence": cert["confidence"]}
    records = sink.finish()
    summary = {"family": family.description, "r": cfg.r,
               "epsilon": cfg.epsilon, "by_n_p": summary_rows,
               "coverage": {k: v["coverage"] for k, v in summary_rows.items()
                            if v["coverage"] is not None}}
    return records, summary, timings


def _run_validate(cfg: ExperimentConfig, out: Path):
    family = _resolve_family(cfg)
    oracle = _resolve_oracle(
        cfg, default_tol=1.0 if (cfg.family or "mpc") == "mpc" else None)
    if family.description == "uniform-gaps" and not cfg.oracle:
        oracle = OracleConfig(method="declared")
    cert_path = Path(cfg.certificate) if cfg.certificate \
        else out / f"certificate_np{cfg.n_p}.json"
    if not cert_path.exists():
        raise ConfigError(f"validate needs a certificate: set 'certificate' or "
                          f"run mpc-fig4 first (looked for {cert_path})")
    cert = json.loads(cert_path.read_text(encoding="utf-8"))
    gamma_star = float(cert["gamma_star"])
    m = cfg.m_validate or cfg.trials
    sink = _RecordSink(out, cfg,
                       ["trial", "instance_seed", "solution_cost",
                        "oracle_value", "gamma", "covered"], ["trial"])
    for i in range(m):
        if sink.done(trial=i):
            continue
        s = sample_gap(family, cfg.n_p, oracle,
                       _rng.child_seed(cfg.seed, _rng.VALIDATE, i))
        sink.add({"trial": i, "instance_seed": s.instance_seed,
                  "solution_cost": s.solution_cost,
                  "oracle_value": s.oracle_value, "gamma": s.gamma,
                  "covered": s.gamma <= gamma_star})
    records = sink.finish()
    coverage = float(np.mean([r["covered"] == "1" for r in records]))
    summary = {"family": family.description, "gamma_star": gamma_star,
               "m": m, "coverage": coverage}
    return records, summary, {}


_RUNNERS = {
    "solve": _run_solve,
    "certify": _run_certify,
    "chi-sweep": _run_chi_sweep,
    "table1": _run_table1,
    "tsp-fig2": _run_tsp_fig2,
    "mpc-fig4": _run_mpc_fig4,
    "validate": _run_validate,
}


def emit_plot_data(report: RunReport, kind: str, out_dir=None) -> list[Path]:
    """Write plot-ready CSV files for the report's experiment kind."""
    out = Path(out_dir if out_dir is not None else report.config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if kind != report.config.experiment:
        raise ConfigError(f"report holds a {report.config.experiment!r} run, "
                          f"cannot emit {kind!r} plot data")
    written: list[Path] = []
    if kind == "tsp-fig2":
        path = out / "bound_vs_gap.csv"
        with path.open("w", encoding="utf-8", newline="") as fh:
            fh.write("trial,v_star,true_gap\n")
            for rec in report.records:
                fh.write(f"{rec['trial']},{rec['v_star']},{rec['gap']}\n")
        written.append(path)
        path = out / "running_fraction.csv"
        with path.open("w", encoding="utf-8", newline="") as fh:
            fh.write("trial,fraction\n")
            hits = 0
            for i, rec in enumerate(
                    sorted(report.records, key=lambda r: int(r["trial"]))):
                hits += rec["success"] == "1"
                fh.write(f"{rec['trial']},{hits / (i + 1)!r}\n")
        written.append(path)
    elif kind == "mpc-fig4":
        markers = out / "fig4_markers.csv"
        with markers.open("w", encoding="utf-8", newline="") as fh:
            fh.write("n_p,gamma_star\n")
            for n_p, row in report.summary.get("by_n_p", {}).items():
                fh.write(f"{n_p},{row['gamma_star']!r}\n")
        written.append(markers)
        for n_p in report.config.n_p_list:
            gammas = np.array([float(r["gamma"]) for r in report.records
                               if r.get("phase") == "validate"
                               and int(r["n_p"]) == n_p])
            if gammas.size == 0:
                gammas = np.array([float(r["gamma"]) for r in report.records
                                   if r.get("phase") == "certify"
                                   and int(r["n_p"]) == n_p])
            path = out / f"fig4_hist_np{n_p}.csv"
            with path.open("w", encoding="utf-8", newline="") as fh:
                fh.write("bin_left,bin_right,count\n")
                if gammas.size:
                    counts, edges = np.histogram(gammas, bins=40)
                    for i, c in enumerate(counts):
                        fh.write(f"{edges[i]!r},{edges[i + 1]!r},{c}\n")
            written.append(path)
    elif kind == "chi-sweep":
        written.append(out / "chi_p.csv")  # written by the runner
    elif kind == "table1":
        written.append(out / "table1.csv")  # written by the runner
    return written


def apply_check(report: RunReport) -> list[str]:
    """Evaluate the config's acceptance thresholds against the summary.

    Supported keys: ``<field>_min`` / ``<field>_max`` where field names a
    numeric summary entry or a dict of numeric entries (all must satisfy the
    bound).  Returns human-readable failure strings, empty when all pass.
    """
    failures = []
    for key, bound in (report.config.check or {}).items():
        if key.endswith("_min"):
            name, op = key[:-4], "min"
        elif key.endswith("_max"):
            name, op = key[:-4], "max"
        else:
            failures.append(f"check key {key!r} must end with _min or _max")
            continue
        value = report.summary.get(name)
        if value is None:
            failures.append(f"check field {name!r} absent from summary")
            continue
        items = value.items() if isinstance(value, dict) else [(name, value)]
        for label, v in items:
            if v is None:
                failures.append(f"{label}: no value to check")
            elif op == "min" and float(v) < float(bound):
                failures.append(f"{label}: {v} < required minimum {bound}")
            elif op == "max" and float(v) > float(bound):
                failures.append(f"{label}: {v} > allowed maximum {bound}")
    return failures
