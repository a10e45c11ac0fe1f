"""
Test suite for the command-line interface
"""

import json
import os
import sys

import pandas as pd
import pytest
from click.testing import CliRunner

sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from extension_verify import cli


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def quiet_config(tmp_path):
    path = tmp_path / "quiet.yaml"
    path.write_text("logging:\n  enabled: false\n")
    return str(path)


class TestVerifyCommand:
    """Test cases for `verify`"""

    def test_norms_suite_exits_zero(self, runner, quiet_config, tmp_path):
        """Test a passing run writes the report and exits 0"""
        out = tmp_path / "report.json"
        result = runner.invoke(cli, ["verify", "norms", "--trials", "5", "--config", quiet_config,
                                     "--out", str(out)])
        assert result.exit_code == 0, result.output
        report = json.loads(out.read_text())
        assert report["pass"]
        assert report["trials"] == 5
        assert "PASS norms.exact_norm" in result.output

    def test_trials_flag_overrides_suite_counts(self, runner, tmp_path):
        """Test --trials wins over a per-suite trial count from the file"""
        config = tmp_path / "counts.yaml"
        config.write_text("logging:\n  enabled: false\nsuites:\n  norms:\n    trials: 40\n")
        out = tmp_path / "report.json"
        result = runner.invoke(cli, ["verify", "norms", "--trials", "3", "--config", str(config),
                                     "--out", str(out)])
        assert result.exit_code == 0, result.output
        rows = {row["check"]: row for row in json.loads(out.read_text())["checks"]}
        assert rows["dual_norm"]["instances"] == 3

    def test_csv_report(self, runner, quiet_config, tmp_path):
        """Test the CSV report format"""
        out = tmp_path / "report.csv"
        result = runner.invoke(cli, ["verify", "counterexample", "--config", quiet_config,
                                     "--out", str(out), "--format", "csv"])
        assert result.exit_code == 0, result.output
        frame = pd.read_csv(out)
        assert "c0_min_head" in set(frame["check"])

    def test_corrupted_run_exits_one(self, runner, tmp_path):
        """Test a failing check gives exit code 1"""
        config = tmp_path / "corrupt.yaml"
        config.write_text("logging:\n  enabled: false\n"
                          "suites:\n  extension:\n    corrupt_entry: [0, 0]\n")
        out = tmp_path / "report.json"
        result = runner.invoke(cli, ["verify", "extension", "--trials", "2", "--config", str(config),
                                     "--out", str(out)])
        assert result.exit_code == 1
        report = json.loads(out.read_text())
        assert "extension.extension_relation" in report["failures"]

    def test_malformed_config_exits_two(self, runner, tmp_path):
        """Test a bad value exits 2 and names the key"""
        config = tmp_path / "bad.yaml"
        config.write_text("verification:\n  trials: lots\n")
        result = runner.invoke(cli, ["verify", "--config", str(config)])
        assert result.exit_code == 2
        assert "verification.trials" in result.output

    def test_missing_config_exits_two(self, runner, tmp_path):
        """Test a named but absent file exits 2"""
        result = runner.invoke(cli, ["verify", "--config", str(tmp_path / "absent.yaml")])
        assert result.exit_code == 2


class TestCondexpCommand:
    """Test cases for `condexp`"""

    def test_scenario_passes(self, runner, tmp_path):
        """Test a valid scenario file"""
        scenario = tmp_path / "scenario.yaml"
        scenario.write_text("weights: [0.25, 0.25, 0.25, 0.25]\n"
                            "blocks: [[0, 1], [2, 3]]\n"
                            "Y: {p: 1, dim: 2}\n"
                            "trials: 20\n")
        out = tmp_path / "condexp.json"
        result = runner.invoke(cli, ["condexp", "--config", str(scenario), "--out", str(out)])
        assert result.exit_code == 0, result.output
        report = json.loads(out.read_text())
        assert report["suites"] == ["condexp"]
        assert report["pass"]

    def test_unknown_scenario_key(self, runner, tmp_path):
        """Test that unknown scenario keys exit 2"""
        scenario = tmp_path / "scenario.yaml"
        scenario.write_text("weights: [1, 1]\nshape: round\n")
        result = runner.invoke(cli, ["condexp", "--config", str(scenario)])
        assert result.exit_code == 2
        assert "shape" in result.output

    def test_invalid_blocks(self, runner, tmp_path):
        """Test that an incomplete partition exits 2"""
        scenario = tmp_path / "scenario.yaml"
        scenario.write_text("weights: [1, 1, 1]\nblocks: [[0, 1]]\n")
        result = runner.invoke(cli, ["condexp", "--config", str(scenario)])
        assert result.exit_code == 2
        assert "suites.condexp.blocks" in result.output


class TestNormsCommand:
    """Test cases for `norms`"""

    def test_hadamard(self, runner):
        """Test the Hadamard matrix on l^2_2"""
        result = runner.invoke(cli, ["norms", "--matrix", "[[1, 1], [1, -1]]",
                                     "--source-p", "2", "--target-p", "2"])
        assert result.exit_code == 0, result.output
        data = json.loads(result.output)
        assert data["value"] == pytest.approx(2 ** 0.5)
        assert data["m_norm"] == pytest.approx(2.0)
        assert data["exact"]
        assert data["method"] == "svd"

    def test_weighted_l1_source(self, runner):
        """Test source weights are honoured"""
        result = runner.invoke(cli, ["norms", "--matrix", "[[1, 1]]", "--source-p", "1",
                                     "--target-p", "inf", "--source-weights", "[0.5, 2]"])
        assert result.exit_code == 0, result.output
        assert json.loads(result.output)["value"] == pytest.approx(2.0)

    def test_bad_matrix(self, runner):
        """Test a flat list is rejected"""
        result = runner.invoke(cli, ["norms", "--matrix", "[1, 2]"])
        assert result.exit_code == 2


class TestCounterexampleCommand:
    """Test cases for `counterexample`"""

    def test_l1_json(self, runner):
        """Test the l1 diagnostic on stdout"""
        result = runner.invoke(cli, ["counterexample", "--space", "l1", "--N", "10000", "--K", "100"])
        assert result.exit_code == 0, result.output
        data = json.loads(result.output)
        assert data["gap"] == pytest.approx(0.99, abs=1e-12)

    def test_c0_csv(self, runner, tmp_path):
        """Test the c0 value table"""
        out = tmp_path / "c0.csv"
        result = runner.invoke(cli, ["counterexample", "--space", "c0", "--N", "100", "--K", "10",
                                     "--format", "csv", "--out", str(out)])
        assert result.exit_code == 0, result.output
        frame = pd.read_csv(out)
        assert len(frame) == 100
        assert frame["value"].iloc[0] == 1.0

    def test_k_above_n(self, runner):
        """Test K > N exits 2"""
        result = runner.invoke(cli, ["counterexample", "--space", "c0", "--N", "10", "--K", "20"])
        assert result.exit_code == 2
