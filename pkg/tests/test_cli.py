"""Tests for the command line interface."""

from unittest.mock import patch

import yaml
from click.testing import CliRunner

from cv_channels.cli import cli
from cv_channels.reporting.acceptance import CriterionResult


class TestCli:
    """Test cv-channels commands."""

    def setup_method(self):
        """Set up test fixtures."""
        self.runner = CliRunner()

    def test_backends(self):
        """Test backend information lists every registered backend."""
        result = self.runner.invoke(cli, ["backends"])
        assert result.exit_code == 0
        assert "Channel Backend Information" in result.output
        for name in ("stinespring", "charfn", "kraus"):
            assert f"Backend: {name}" in result.output

    def test_config_save(self, tmp_path):
        """Test the effective configuration can be written out."""
        path = tmp_path / "saved.yaml"
        result = self.runner.invoke(cli, ["config", "--save", str(path)])
        assert result.exit_code == 0
        assert "Current Configuration" in result.output
        assert yaml.safe_load(path.read_text())["omega"]["cat_amplitude"] == "fock_table"

    def test_fig3_writes_table(self, tmp_path):
        """Test fig3 writes one row per photon number."""
        out = tmp_path / "fig3.csv"
        result = self.runner.invoke(cli, ["fig3", "--e-grid", "1", "--n-trunc", "20", "-o", str(out)])
        assert result.exit_code == 0, result.output
        lines = out.read_text().splitlines()
        assert lines[0] == "E,n,probability,n_trunc,tail_mass"
        assert len(lines) == 21

    def test_bad_e_grid(self):
        """Test a malformed energy list is a usage error."""
        result = self.runner.invoke(cli, ["fig3", "--e-grid", "one,two"])
        assert result.exit_code == 2
        assert "comma-separated numbers" in result.output

    def test_zeta_out_of_range(self):
        """Test attenuator angles above π/2 are rejected."""
        result = self.runner.invoke(cli, ["contraction", "--zeta", "2.0"])
        assert result.exit_code == 2
        assert "angles must lie in [0, pi/2]" in result.output

    def test_invalid_config(self, tmp_path):
        """Test an invalid configuration file is a usage error."""
        path = tmp_path / "bad.yaml"
        path.write_text(yaml.dump({"e_grid": [-1.0]}))
        result = self.runner.invoke(cli, ["-c", str(path), "backends"])
        assert result.exit_code == 2
        assert "Invalid configuration" in result.output

    def test_command_failure_exits_nonzero(self, tmp_path):
        """Test a failing sweep is logged and exits with status 1."""
        with patch("cv_channels.cli.entropy_records", side_effect=RuntimeError("no convergence")):
            result = self.runner.invoke(cli, ["fig1", "-o", str(tmp_path / "fig1.csv")])
        assert result.exit_code == 1
        assert not (tmp_path / "fig1.csv").exists()

    def test_acceptance_failure(self):
        """Test a failed criterion sets the exit status."""
        results = [CriterionResult(1, "One", True, "ok", 0.1), CriterionResult(2, "Two", False, "gap 1e-3", 0.2)]
        with patch("cv_channels.cli.run_acceptance", return_value=results) as run:
            result = self.runner.invoke(cli, ["acceptance", "--only", "1,2", "--no-progress"])
        run.assert_called_once_with([1, 2], show_progress=False)
        assert result.exit_code == 1
        assert "1 of 2 criteria failed: [2]" in result.output

    def test_acceptance_success(self):
        """Test all criteria passing exits cleanly."""
        results = [CriterionResult(3, "Three", True, "ok", 0.1)]
        with patch("cv_channels.cli.run_acceptance", return_value=results):
            result = self.runner.invoke(cli, ["acceptance", "--only", "3"])
        assert result.exit_code == 0
        assert "All 1 criteria passed" in result.output
