"""Tests for the command-line entry point."""

from pathlib import Path

import pytest

from elo_tradeoff.config_loaders import load_front_csv, override_config
from elo_tradeoff.main import REPORT_FILE, build_parser, config_from_args, main, q_values, run
from elo_tradeoff.validation import CheckResult


class TestParser:
    """Tests for build_parser and config_from_args."""

    def test_power_front_flags(self):
        """Test list and repeatable flags."""
        args = build_parser().parse_args(["power-front", "--emax", "0.1,0.12", "--rho", "0.9", "--rho", "0.99"])
        assert args.command == "power-front"
        assert args.emax == (0.1, 0.12)
        assert args.rho == [0.9, 0.99]

    def test_subcommand_required(self):
        """Test that a subcommand must be given."""
        with pytest.raises(SystemExit):
            build_parser().parse_args([])

    def test_bad_list_rejected(self):
        """Test that a malformed list is a usage error."""
        with pytest.raises(SystemExit):
            build_parser().parse_args(["time-front", "--t", "0.4,abc"])

    def test_scenario_and_overrides(self):
        """Test that the subcommand selects the scenario and flags override defaults."""
        args = build_parser().parse_args(["time-front", "--t", "0.45", "--format", "dat", "--workers", "2"])
        cfg = config_from_args(args, environ={})
        assert cfg.scenario == "time"
        assert cfg.t_list == (0.45,)
        assert cfg.format == "dat"
        assert cfg.max_workers == 2

    def test_seed_precedence(self):
        """Test file < environment < flag for the seed."""
        parser = build_parser()
        from_env = config_from_args(parser.parse_args(["validate"]), environ={"ELO_SEED": "5"})
        assert from_env.sim.seed == 5
        from_flag = config_from_args(parser.parse_args(["validate", "--seed", "9"]), environ={"ELO_SEED": "5"})
        assert from_flag.sim.seed == 9

    def test_config_file(self, tmp_path: Path):
        """Test that a config file is read before the flags."""
        path = tmp_path / "run.cfg"
        path.write_text("eps = 0.01\nrho_list = 0.999\n")
        args = build_parser().parse_args(["power-front", "--config", str(path), "--rho", "0.9"])
        cfg = config_from_args(args, environ={})
        assert cfg.params.chan.eps == 0.01
        assert cfg.rho_list == (0.9,)


class TestMain:
    """End-to-end runs through main()."""

    @pytest.fixture(autouse=True)
    def no_env_seed(self, monkeypatch):
        monkeypatch.delenv("ELO_SEED", raising=False)

    def test_power_front(self, tmp_path: Path, capsys):
        """Test that a power sweep writes one front per rho."""
        status = main(["power-front", "--output-dir", str(tmp_path), "--emax", "0.077,0.1,0.12", "--rho", "0.9"])
        assert status == 0

        cfg, frame = load_front_csv(tmp_path / "power_front_rho0.9.csv")
        assert cfg.scenario == "power"
        assert list(frame["E_max"]) == [0.077, 0.1, 0.12]
        assert list(frame["feasible"]) == [0, 1, 1]
        assert frame["latency_bound"].iloc[2] <= frame["latency_bound"].iloc[1]
        assert "Power scenario Pareto front" in capsys.readouterr().out

    def test_time_front(self, tmp_path: Path):
        """Test a time sweep on a coarse grid."""
        path = tmp_path / "coarse.cfg"
        path.write_text("theta_time = 0.05\n")
        status = main(
            ["time-front", "--config", str(path), "--output-dir", str(tmp_path), "--t", "0.2,0.4", "--rho", "0.99"]
        )
        assert status == 0

        _, frame = load_front_csv(tmp_path / "time_front_rho0.99.csv")
        assert list(frame["feasible"]) == [0, 1]
        assert frame["P_succ"].iloc[1] >= 0.99

    def test_invalid_rho(self, tmp_path: Path):
        """Test that a domain violation exits with status 2."""
        assert main(["power-front", "--output-dir", str(tmp_path), "--rho", "1.5"]) == 2

    def test_missing_config_file(self, tmp_path: Path):
        """Test that an unreadable config file exits with status 2."""
        assert main(["validate", "--config", str(tmp_path / "missing.cfg")]) == 2


class TestRunValidate:
    """Tests for the validate branch of run()."""

    def _cfg(self, tmp_path: Path):
        cfg = config_from_args(build_parser().parse_args(["validate"]), environ={})
        return override_config(cfg, {"output_dir": str(tmp_path)})

    def test_failed_check_sets_status(self, tmp_path: Path, monkeypatch):
        """Test that any failing check gives status 1 and a report."""
        results = [CheckResult("a", True, 0.0, 1.0), CheckResult("b", False, 2.0, 1.0)]
        monkeypatch.setattr("elo_tradeoff.main.run_validation", lambda cfg: results)
        assert run(self._cfg(tmp_path)) == 1
        assert "FAIL" in (tmp_path / REPORT_FILE).read_text()

    def test_all_checks_pass(self, tmp_path: Path, monkeypatch):
        """Test status 0 when every check passes."""
        monkeypatch.setattr("elo_tradeoff.main.run_validation", lambda cfg: [CheckResult("a", True, 0.0, 1.0)])
        assert run(self._cfg(tmp_path)) == 0


class TestCurves:
    """Tests for the latency-curve and success-curve subcommands."""

    @pytest.fixture(autouse=True)
    def no_env_seed(self, monkeypatch):
        monkeypatch.delenv("ELO_SEED", raising=False)

    def test_q_values(self):
        """Test that the Q grid starts at 1 and ends exactly at Q_max."""
        assert q_values(1.5, 0.1) == [1.0, 1.1, 1.2, 1.3, 1.4, 1.5]
        assert q_values(1.5, 0.2)[-2:] == [1.4, 1.5]

    def test_latency_curve_csv(self, tmp_path: Path):
        """Test one latency curve file per budget and rho."""
        status = main(
            ["latency-curve", "--output-dir", str(tmp_path), "--emax", "0.1", "--rho", "0.9", "--q-step", "0.1"]
        )
        assert status == 0

        cfg, frame = load_front_csv(tmp_path / "latency_curve_rho0.9_emax0.1.csv")
        assert cfg.scenario == "power"
        assert list(frame["Q"]) == [1.0, 1.1, 1.2, 1.3, 1.4, 1.5]
        assert "fc_star" in frame.columns
        assert "latency_bound" in frame.columns

    def test_latency_curve_dat(self, tmp_path: Path):
        """Test that the dat format writes one two-column file per quantity."""
        status = main(
            [
                "latency-curve",
                "--output-dir",
                str(tmp_path),
                "--format",
                "dat",
                "--emax",
                "0.1",
                "--rho",
                "0.9",
                "--q-step",
                "0.1",
            ]
        )
        assert status == 0

        for column in ("fc_star", "latency_bound"):
            lines = (tmp_path / f"latency_curve_rho0.9_emax0.1_{column}.dat").read_text().splitlines()
            assert f"# columns = Q {column}" in lines
            body = [line for line in lines if not line.startswith("#")]
            assert 0 < len(body) <= 6
            assert all(len(line.split()) == 2 for line in body)

    def test_invalid_q_step(self, tmp_path: Path):
        """Test that a non-positive Q spacing exits with status 2."""
        assert main(["latency-curve", "--output-dir", str(tmp_path), "--q-step", "0"]) == 2

    def test_success_curve(self, tmp_path: Path):
        """Test a sweep along alpha with Q and f_c held at their defaults."""
        status = main(
            [
                "success-curve",
                "--axis",
                "alpha",
                "--output-dir",
                str(tmp_path),
                "--t",
                "0.4",
                "--rho",
                "0.9",
                "--points",
                "20",
            ]
        )
        assert status == 0

        cfg, frame = load_front_csv(tmp_path / "success_curve_alpha_T0.4.csv")
        assert cfg.scenario == "time"
        assert len(frame) == 20
        assert frame["alpha"].iloc[0] == 0.0
        assert frame["alpha"].iloc[-1] < 1.0
        assert set(frame["Q"]) == {1.2}
        assert frame["P_succ"].between(0.0, 1.0).all()

    def test_success_curve_requires_axis(self):
        """Test that the swept variable must be named."""
        with pytest.raises(SystemExit):
            build_parser().parse_args(["success-curve"])

    def test_too_few_points(self, tmp_path: Path):
        """Test that a single-point sweep exits with status 2."""
        status = main(["success-curve", "--axis", "Q", "--output-dir", str(tmp_path), "--points", "1"])
        assert status == 2


class TestParetoFilterFlag:
    """Tests for --pareto-filter on the front subcommands."""

    def test_power_front_filtered(self, tmp_path: Path, monkeypatch):
        """Test that infeasible rows are dropped from the saved front."""
        monkeypatch.delenv("ELO_SEED", raising=False)
        status = main(
            [
                "power-front",
                "--output-dir",
                str(tmp_path),
                "--emax",
                "0.077,0.1,0.12",
                "--rho",
                "0.9",
                "--pareto-filter",
            ]
        )
        assert status == 0

        _, frame = load_front_csv(tmp_path / "power_front_rho0.9.csv")
        assert 0.077 not in list(frame["E_max"])
        assert (frame["feasible"] == 1).all()
        assert list(frame["latency_bound"]) == sorted(frame["latency_bound"], reverse=True)
