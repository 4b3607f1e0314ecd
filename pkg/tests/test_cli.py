import numpy as np
import pytest

from blowup1d.cli import (
    TRACE_HEADER,
    ConfigError,
    build_initial_field,
    certify_blowup,
    main,
    parse_config,
    run_experiment,
    selftest,
    sweep,
)

MINIMAL = """
m = 1.0
p = 1.5
s0 = 1.0
n = 20
t_end = 0.5
"""


def small_config(tmp_path, extra="", **overrides):
    text = MINIMAL + extra
    cfg = parse_config(text)
    for key, value in overrides.items():
        setattr(cfg, key, value)
    cfg.output_dir = str(tmp_path / "out")
    return cfg


class TestParseConfig:
    def test_minimal_and_derived_q(self):
        cfg = parse_config(MINIMAL)
        assert cfg.m == 1.0 and cfg.p == 1.5
        assert cfg.q == 0.5
        assert cfg.initial == "hat" and cfg.peak == 1.0

    def test_regime_violation_is_distinct(self):
        with pytest.raises(ConfigError, match="reaction regime"):
            parse_config(MINIMAL.replace("p = 1.5", "p = 2.0"))

    def test_missing_required_key_named(self):
        with pytest.raises(ConfigError, match="'m'"):
            parse_config(MINIMAL.replace("m = 1.0", ""))

    def test_unknown_key_with_line_number(self):
        with pytest.raises(ConfigError, match="line 7.*frobnicate"):
            parse_config(MINIMAL + "frobnicate = 3\n")

    def test_duplicate_key_rejected(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config(MINIMAL + "m = 2.0\n")

    def test_bad_number_with_line_number(self):
        with pytest.raises(ConfigError, match="line 2"):
            parse_config(MINIMAL.replace("m = 1.0", "m = one"))

    def test_comments_and_blanks_ignored(self):
        cfg = parse_config("# comment\n\n" + MINIMAL)
        assert cfg.n == 20

    def test_inline_comments(self):
        cfg = parse_config(MINIMAL.replace("p = 1.5", "p = 1.5   # fast reaction"))
        assert cfg.p == 1.5

    def test_line_without_assignment(self):
        with pytest.raises(ConfigError, match="line 7.*expected"):
            parse_config(MINIMAL + "certify\n")

    def test_bad_boolean(self):
        with pytest.raises(ConfigError, match="true/false"):
            parse_config(MINIMAL + "strict = maybe\n")

    def test_table_initial(self):
        cfg = parse_config(MINIMAL + "initial = table\ntable = -0.5:0.2, 0:1, 0.5:0.2\n")
        assert cfg.table == [(-0.5, 0.2), (0.0, 1.0), (0.5, 0.2)]
        field = build_initial_field(cfg)
        assert field(0.0) == pytest.approx(1.0)
        assert field(0.25) == pytest.approx(0.6)

    def test_table_requires_entries(self):
        with pytest.raises(ConfigError, match="table"):
            parse_config(MINIMAL + "initial = table\n")

    def test_snapshot_times_validated(self):
        with pytest.raises(ConfigError, match="snapshot time"):
            parse_config(MINIMAL + "snapshot_times = 0.1, 7.0\n")

    def test_initial_families(self):
        hat_cfg = parse_config(MINIMAL)
        cap_cfg = parse_config(MINIMAL + "initial = cap\n")
        hat_f = build_initial_field(hat_cfg)
        cap_f = build_initial_field(cap_cfg)
        assert hat_f(0.5) == pytest.approx(0.5)
        assert cap_f(0.5) == pytest.approx(0.75)


class TestRunExperiment:
    def test_files_and_header(self, tmp_path):
        cfg = small_config(tmp_path, extra="snapshot_times = 0.0, 0.2\n")
        code, summary = run_experiment(cfg)
        assert code == 0
        out = tmp_path / "out"
        trace = (out / "trace.csv").read_text().splitlines()
        assert trace[0] == TRACE_HEADER
        assert len(trace) == summary["steps"] + 1
        assert (out / "snapshot_0.csv").exists()
        assert (out / "snapshot_0.2.csv").exists()
        assert (out / "summary.txt").exists()
        assert summary["termination"] == "horizon"

    def test_snapshots_close_support_with_zeros(self, tmp_path):
        cfg = small_config(tmp_path, extra="snapshot_times = 0.25\n")
        run_experiment(cfg)
        lines = (tmp_path / "out" / "snapshot_0.25.csv").read_text().splitlines()
        assert lines[0] == "x,u"
        first = lines[1].split(",")
        last = lines[-1].split(",")
        assert float(first[1]) == 0.0 and float(last[1]) == 0.0
        xs = [float(l.split(",")[0]) for l in lines[1:]]
        assert xs == sorted(xs)

    def test_deterministic_traces(self, tmp_path):
        cfg_a = small_config(tmp_path / "a")
        cfg_b = small_config(tmp_path / "b")
        run_experiment(cfg_a)
        run_experiment(cfg_b)
        ta = (tmp_path / "a" / "out" / "trace.csv").read_bytes()
        tb = (tmp_path / "b" / "out" / "trace.csv").read_bytes()
        assert ta == tb

    def test_blowup_summary_keys(self, tmp_path):
        cfg = small_config(tmp_path)
        cfg.t_end = 50.0
        cfg.n = 40
        code, summary = run_experiment(cfg)
        assert code == 0
        assert summary["termination"] == "blowup"
        assert "blowup_time" in summary
        assert summary["t_threshold_1e4"] < summary["t_threshold_1e5"] < summary["t_threshold_1e6"]
        assert summary["t1_lifetime"] == pytest.approx(2.0)

    def test_certificate_in_summary_when_requested(self, tmp_path):
        cfg = small_config(tmp_path)
        cfg.n = 40
        cfg.certify = True
        cfg.blowup_threshold = 1e4
        code, summary = run_experiment(cfg)
        assert code == 0
        assert summary["certificate_found"] is True
        assert summary["certificate_t_star"] > 0

    def test_every_k_snapshots(self, tmp_path):
        cfg = small_config(tmp_path, extra="snapshot_every = 5\n")
        code, summary = run_experiment(cfg)
        files = list((tmp_path / "out").glob("snapshot_*.csv"))
        assert len(files) == summary["steps"] // 5

    def test_zero_initial_data_runs_to_horizon(self, tmp_path):
        cfg = small_config(tmp_path, extra="snapshot_times = 0.25\n")
        cfg.peak = 0.0
        code, summary = run_experiment(cfg)
        assert code == 0
        assert summary["termination"] == "horizon"
        assert summary["final_sup"] == 0.0
        lines = (tmp_path / "out" / "snapshot_0.25.csv").read_text().splitlines()
        assert all(float(l.split(",")[1]) == 0.0 for l in lines[1:])

    def test_monitor_abort_maps_to_exit_3(self, tmp_path, monkeypatch):
        # the bounds hold for correct arithmetic, so force a violation to
        # exercise the strict-mode abort path
        from blowup1d import cli as cli_mod
        from blowup1d.driver import MonitorViolation

        def exploding_run(*args, **kwargs):
            raise MonitorViolation("forced for the exit-code test")

        monkeypatch.setattr(cli_mod, "run", exploding_run)
        cfg = small_config(tmp_path)
        cfg.strict = True
        code, summary = run_experiment(cfg)
        assert code == 3
        assert summary["termination"] == "monitor_abort"
        assert "forced" in summary["monitor_error"]


class TestCertifyCommand:
    def test_certificate_found(self, tmp_path, capsys):
        cfg = small_config(tmp_path)
        cfg.n = 50
        code, report = certify_blowup(cfg)
        assert code == 0
        assert report["found"] is True
        assert "lambda" in report and report["t_star"] > 0
        assert "certificate found" in capsys.readouterr().out
        assert (tmp_path / "out" / "certificate.txt").exists()

    def test_no_certificate_reports_delta(self, tmp_path, capsys):
        cfg = small_config(tmp_path)
        cfg.n = 1
        code, report = certify_blowup(cfg)
        assert code == 0
        assert report["found"] is False
        assert np.isfinite(report["delta"])
        assert "no certificate at this mesh" in capsys.readouterr().out

    def test_zero_initial_rejected(self, tmp_path):
        cfg = small_config(tmp_path)
        cfg.peak = 0.0
        with pytest.raises(ConfigError):
            certify_blowup(cfg)


class TestSweep:
    def test_runs_all_configs(self, tmp_path, capsys):
        for name, text in (("a", MINIMAL), ("b", MINIMAL.replace("n = 20", "n = 10"))):
            (tmp_path / f"{name}.cfg").write_text(text)
        code = sweep(tmp_path, max_workers=1)
        assert code == 0
        assert (tmp_path / "a.out" / "trace.csv").exists()
        assert (tmp_path / "b.out" / "trace.csv").exists()

    def test_bad_config_sets_exit_code(self, tmp_path):
        (tmp_path / "good.cfg").write_text(MINIMAL)
        (tmp_path / "bad.cfg").write_text("m = 1.0\n")
        code = sweep(tmp_path, max_workers=1)
        assert code == 2

    def test_empty_dir(self, tmp_path):
        assert sweep(tmp_path) == 2

    def test_parallel_workers(self, tmp_path):
        for name in ("a", "b", "c"):
            (tmp_path / f"{name}.cfg").write_text(MINIMAL)
        assert sweep(tmp_path, max_workers=2) == 0


class TestMain:
    def test_run_roundtrip(self, tmp_path, capsys):
        cfg_path = tmp_path / "exp.cfg"
        cfg_path.write_text(MINIMAL + f"output_dir = {tmp_path / 'out'}\n")
        assert main(["run", str(cfg_path)]) == 0
        out = capsys.readouterr().out
        assert "termination = horizon" in out

    def test_missing_config_is_config_error(self, tmp_path):
        assert main(["run", str(tmp_path / "nope.cfg")]) == 2

    def test_bad_config_exit_code(self, tmp_path):
        cfg_path = tmp_path / "bad.cfg"
        cfg_path.write_text("m = 1.0\np = 2.5\n")
        assert main(["run", str(cfg_path)]) == 2

    def test_certify_command(self, tmp_path):
        cfg_path = tmp_path / "exp.cfg"
        cfg_path.write_text(
            MINIMAL.replace("n = 20", "n = 50") + f"output_dir = {tmp_path / 'out'}\n")
        assert main(["certify", str(cfg_path)]) == 0

    def test_sweep_command(self, tmp_path):
        (tmp_path / "one.cfg").write_text(MINIMAL)
        assert main(["sweep", str(tmp_path), "--workers", "1"]) == 0
        assert (tmp_path / "one.out" / "summary.txt").exists()

    def test_selftest_passes(self, capsys):
        assert selftest() == 0
        out = capsys.readouterr().out
        assert out.count("PASS") == 5 and "FAIL" not in out
