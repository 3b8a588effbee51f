"""Experiment configs, pipelines, artifacts, reproducibility, and the CLI."""

import json

import pytest

from gapcert.cli import main
from gapcert.experiments import (
    ConfigError,
    ExperimentConfig,
    RunReport,
    apply_check,
    emit_plot_data,
    run,
)
from gapcert.problems import random_tsp_instance, write_tsp_instance


class TestConfig:
    def test_requires_experiment_and_seed(self):
        with pytest.raises(ConfigError, match="experiment"):
            ExperimentConfig.from_dict({"seed": 1})
        with pytest.raises(ConfigError, match="seed"):
            ExperimentConfig.from_dict({"experiment": "solve"})

    def test_unknown_fields_named(self):
        with pytest.raises(ConfigError, match="n_pp"):
            ExperimentConfig.from_dict({"experiment": "solve", "seed": 1,
                                        "n_pp": 4})

    def test_unknown_experiment(self):
        with pytest.raises(ConfigError, match="experiment"):
            ExperimentConfig.from_dict({"experiment": "frobnicate", "seed": 1})

    def test_problem_selector_required(self):
        with pytest.raises(ConfigError, match="problem"):
            ExperimentConfig.from_dict({"experiment": "solve", "seed": 1})
        ExperimentConfig.from_dict({"experiment": "solve", "seed": 1,
                                    "benchmark": "beale"})

    def test_range_checks(self):
        with pytest.raises(ConfigError, match="epsilon"):
            ExperimentConfig.from_dict({"experiment": "solve", "seed": 1,
                                        "benchmark": "beale", "epsilon": 0.0})
        with pytest.raises(ConfigError, match="chi"):
            ExperimentConfig.from_dict({"experiment": "solve", "seed": 1,
                                        "benchmark": "beale", "chi": 2.0})

    def test_unknown_benchmark(self):
        with pytest.raises(ConfigError, match="benchmark"):
            ExperimentConfig.from_dict({"experiment": "solve", "seed": 1,
                                        "benchmark": "nope"})


class TestSolveAndCertify:
    def test_single_sample_report(self, tmp_path):
        report = run({"experiment": "solve", "seed": 3, "benchmark":
                      "rastrigrin2", "n_p": 1, "out_dir": str(tmp_path)})
        assert len(report.records) == 1
        assert (tmp_path / "infoset.csv").exists()
        assert (tmp_path / "report.json").exists()
        assert report.summary["best_cost"] == report.records[0]["cost"]
        assert report.version

    def test_certify_artifacts(self, tmp_path):
        report = run({"experiment": "certify", "seed": 5,
                      "benchmark": "beale", "n_p": 100, "n_v": 50,
                      "epsilon": 0.05, "out_dir": str(tmp_path)})
        cert = json.loads((tmp_path / "certificate.json").read_text())
        assert cert["v_star"] >= 0
        assert report.summary["v_star"] == cert["v_star"]
        lo, hi = report.summary["optimum_interval"]
        assert lo <= hi == report.summary["solution_cost"]


class TestTable1:
    def test_small_run(self, tmp_path):
        report = run({"experiment": "table1", "seed": 9, "trials": 4,
                      "n_p": 60, "n_v": 60, "benchmark": "beale",
                      "oracle": {"n0": 2000}, "out_dir": str(tmp_path)})
        table = (tmp_path / "table1.csv").read_text().splitlines()
        assert table[0].startswith("name,n_p,n_v,expected_success")
        assert len(table) == 2
        assert "beale" in report.summary["benchmarks"]
        frac = report.summary["benchmarks"]["beale"]["success_fraction"]
        assert 0.0 <= frac <= 1.0
        assert len(report.records) == 4


class TestTspFig2:
    def test_pipeline_and_plots(self, tmp_path):
        report = run({"experiment": "tsp-fig2", "seed": 2, "tsp_random": 6,
                      "n_p": 120, "trials": 8, "confidence": 0.9,
                      "out_dir": str(tmp_path)})
        assert len(report.records) == 8
        bound = (tmp_path / "bound_vs_gap.csv").read_text().splitlines()
        assert bound[0] == "trial,v_star,true_gap"
        running = (tmp_path / "running_fraction.csv").read_text().splitlines()
        assert running[0] == "trial,fraction"
        assert len(running) == 9
        assert 0.0 <= report.summary["success_fraction"] <= 1.0

    def test_tsp_file_selector(self, tmp_path):
        inst = random_tsp_instance(5, seed=1)
        write_tsp_instance(inst, tmp_path / "inst.json")
        report = run({"experiment": "tsp-fig2", "seed": 4,
                      "tsp_file": str(tmp_path / "inst.json"),
                      "n_p": 60, "trials": 3, "out_dir": str(tmp_path / "out")})
        assert report.summary["problem"] == "tsp-5"


class TestMpcFig4:
    def test_small_run_with_validation(self, tmp_path):
        report = run({"experiment": "mpc-fig4", "seed": 6, "r": 6,
                      "n_p_list": [40], "m_validate": 6,
                      "oracle": {"n0": 150}, "out_dir": str(tmp_path)})
        cert = json.loads((tmp_path / "certificate_np40.json").read_text())
        assert cert["r"] == 6
        assert (tmp_path / "fig4_markers.csv").exists()
        assert (tmp_path / "fig4_hist_np40.csv").exists()
        cov = report.summary["by_n_p"]["40"]["coverage"]
        assert cov is not None and 0.0 <= cov <= 1.0

    def test_uniform_gap_family_runs(self, tmp_path):
        report = run({"experiment": "mpc-fig4", "seed": 1, "r": 30,
                      "family": "uniform-gaps", "n_p_list": [1],
                      "epsilon": 0.05, "out_dir": str(tmp_path)})
        g = report.summary["by_n_p"]["1"]["gamma_star"]
        assert 0.0 <= g <= 1.0


class TestChiSweep:
    def test_exact_mode_on_small_tour_problem(self, tmp_path):
        report = run({"experiment": "chi-sweep", "seed": 7, "tsp_random": 5,
                      "n_p": 60, "trials": 4, "chis": [0.05, 0.5, 1.0],
                      "out_dir": str(tmp_path)})
        assert report.summary["mode"] == "exact"
        mean_p = report.summary["mean_p_by_chi"]
        assert set(mean_p) == {0.05, 0.5, 1.0}
        assert all(0.0 <= p <= 1.0 for p in mean_p.values())
        lines = (tmp_path / "chi_p.csv").read_text().splitlines()
        assert lines[0] == "chi,mean_p" and len(lines) == 4
        # shrinking the retained subset can only raise variances, hence p
        assert mean_p[0.05] >= mean_p[1.0]

    def test_monte_carlo_mode_on_benchmark(self, tmp_path):
        report = run({"experiment": "chi-sweep", "seed": 2,
                      "benchmark": "beale", "n_p": 50, "trials": 2,
                      "chis": [0.1, 1.0], "mc_samples": 400,
                      "oracle": {"n0": 500}, "out_dir": str(tmp_path)})
        assert report.summary["mode"] == "monte-carlo(400)"
        assert report.summary["oracle_value"] == pytest.approx(0.0, abs=1e-3)


class TestValidate:
    def test_validates_against_stored_certificate(self, tmp_path):
        fig4 = run({"experiment": "mpc-fig4", "seed": 21, "r": 5,
                    "n_p_list": [30], "oracle": {"n0": 100},
                    "out_dir": str(tmp_path / "fig4")})
        report = run({"experiment": "validate", "seed": 22, "family": "mpc",
                      "n_p": 30, "m_validate": 8, "oracle": {"n0": 100},
                      "certificate": str(tmp_path / "fig4" /
                                         "certificate_np30.json"),
                      "out_dir": str(tmp_path / "val")})
        assert report.summary["gamma_star"] == \
            fig4.summary["by_n_p"]["30"]["gamma_star"]
        assert 0.0 <= report.summary["coverage"] <= 1.0
        assert len(report.records) == 8

    def test_missing_certificate_is_config_error(self, tmp_path):
        with pytest.raises(ConfigError, match="certificate"):
            run({"experiment": "validate", "seed": 1, "family": "uniform-gaps",
                 "n_p": 1, "m_validate": 2, "out_dir": str(tmp_path)})


class TestReproducibilityAndResume:
    def test_rerun_is_byte_identical(self, tmp_path):
        cfg = {"experiment": "tsp-fig2", "seed": 11, "tsp_random": 5,
               "n_p": 50, "trials": 5}
        run({**cfg, "out_dir": str(tmp_path / "a")})
        run({**cfg, "out_dir": str(tmp_path / "b")})
        for name in ("records.csv", "bound_vs_gap.csv", "running_fraction.csv"):
            assert (tmp_path / "a" / name).read_bytes() == \
                   (tmp_path / "b" / name).read_bytes()

    def test_resume_skips_completed_trials(self, tmp_path, monkeypatch):
        cfg = {"experiment": "table1", "seed": 13, "trials": 6, "n_p": 40,
               "n_v": 40, "benchmark": "himmelblau", "oracle": {"n0": 500},
               "out_dir": str(tmp_path)}
        full = run(cfg)
        # simulate an interrupted run: keep only the first 3 flushed records
        partial = (tmp_path / "records.csv").read_text().splitlines()
        (tmp_path / "records.partial.csv").write_text(
            "\n".join(partial[:4]) + "\n", encoding="utf-8")
        (tmp_path / "records.csv").unlink()
        import gapcert.repetitive  # noqa: F401  (import anchor)
        import gapcert.experiments as exp
        calls = {"n": 0}
        original = exp.percentile_solve

        def counting(*args, **kwargs):
            calls["n"] += 1
            return original(*args, **kwargs)

        monkeypatch.setattr(exp, "percentile_solve", counting)
        resumed = run(cfg)
        assert calls["n"] == 3  # only the missing trials were recomputed
        strip = lambda recs: [{k: v for k, v in r.items() if k != "certify_ms"}
                              for r in recs]
        assert strip(resumed.records) == strip(full.records)

    def test_changed_config_discards_stale_records(self, tmp_path):
        base = {"experiment": "table1", "trials": 3, "n_p": 30, "n_v": 30,
                "benchmark": "beale", "oracle": {"n0": 300},
                "out_dir": str(tmp_path)}
        run({**base, "seed": 1})
        report = run({**base, "seed": 2})  # different seed: no reuse
        assert len(report.records) == 3


class TestEmitPlotData:
    def test_kind_mismatch(self, tmp_path):
        report = run({"experiment": "solve", "seed": 1, "benchmark": "beale",
                      "n_p": 2, "out_dir": str(tmp_path)})
        with pytest.raises(ConfigError):
            emit_plot_data(report, "tsp-fig2", tmp_path)

    def test_empty_report_writes_headers(self, tmp_path):
        cfg = ExperimentConfig.from_dict(
            {"experiment": "tsp-fig2", "seed": 1, "tsp_random": 5,
             "out_dir": str(tmp_path)})
        report = RunReport(config=cfg, records=[], summary={}, timings={})
        emit_plot_data(report, "tsp-fig2", tmp_path)
        assert (tmp_path / "bound_vs_gap.csv").read_text() == \
            "trial,v_star,true_gap\n"
        assert (tmp_path / "running_fraction.csv").read_text() == \
            "trial,fraction\n"


class TestApplyCheck:
    def test_passing_and_failing_thresholds(self, tmp_path):
        report = run({"experiment": "tsp-fig2", "seed": 3, "tsp_random": 5,
                      "n_p": 80, "trials": 4, "out_dir": str(tmp_path),
                      "check": {"success_fraction_min": 0.0}})
        assert apply_check(report) == []
        report.config.check = {"success_fraction_min": 1.1}
        assert apply_check(report)
        report.config.check = {"missing_field_min": 0.5}
        assert any("absent" in f for f in apply_check(report))


class TestCli:
    def test_solve_roundtrip(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"seed": 5, "benchmark": "beale", "n_p": 10,
                                   "out_dir": str(tmp_path / "out")}))
        assert main(["solve", "--config", str(cfg)]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["problem"] == "beale"

    def test_seed_and_out_overrides(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"seed": 5, "benchmark": "beale", "n_p": 4,
                                   "out_dir": str(tmp_path / "ignored")}))
        dest = tmp_path / "elsewhere"
        assert main(["solve", "--config", str(cfg), "--seed", "9",
                     "--out", str(dest)]) == 0
        report = json.loads((dest / "report.json").read_text())
        assert report["config"]["seed"] == 9

    def test_config_error_exit_code(self, tmp_path, capsys):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({"seed": 1}))  # no problem selector
        assert main(["solve", "--config", str(cfg)]) == 2
        assert "config error" in capsys.readouterr().err

    def test_missing_config_file(self, capsys):
        assert main(["solve", "--config", "/nonexistent.json"]) == 2

    def test_check_failure_exit_code(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "seed": 2, "tsp_random": 5, "n_p": 50, "trials": 3,
            "out_dir": str(tmp_path / "out"),
            "check": {"success_fraction_min": 1.5}}))
        assert main(["tsp-fig2", "--config", str(cfg), "--check"]) == 3
        assert "check failed" in capsys.readouterr().err

    def test_seed_required(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"benchmark": "beale"}))
        assert main(["solve", "--config", str(cfg)]) == 2
