import csv
import json
import re
import subprocess
import sys

import numpy as np
import pytest

from tfdforge.cli import main
from tfdforge.errors import ContractViolation, ResourceLimitError
from tfdforge.experiments import (
    ExperimentConfig,
    load_config,
    read_csv,
    run_spectrum_report,
)
from tfdforge.models import HubbardParams, free_frequencies, mean_field_frequencies

FLOAT = re.compile(r"^-?\d(\.\d+)?(e[+-]\d+)?$|^-?\d+(\.\d+)?(e[+-]\d+)?$")


def csv_body(path):
    return [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]


def sig_digits(text):
    mantissa = text.lstrip("-").split("e")[0].replace(".", "").lstrip("0")
    return len(mantissa)


class TestConfig:
    def test_defaults_recorded(self):
        cfg = ExperimentConfig()
        grid = cfg.beta_grid()
        assert grid[0] == 0.05 and grid[-1] == 5.0 and len(grid) == 50

    @pytest.mark.parametrize("kwargs", [{"beta_min": 0.0}, {"beta_steps": 1},
                                        {"frequencies": "guess"}])
    def test_invalid(self, kwargs):
        with pytest.raises(ContractViolation):
            ExperimentConfig(**kwargs)

    def test_qubit_cap(self):
        with pytest.raises(ResourceLimitError, match="16"):
            ExperimentConfig(n=9)

    def test_unknown_key(self):
        with pytest.raises(ContractViolation):
            ExperimentConfig.from_dict({"nn": 3})


class TestOverlapSweep:
    def test_columns_and_format(self, tmp_path):
        out = tmp_path / "sweep.csv"
        code = main(["overlap-sweep", "--n", "2", "--u", "0", "--u", "0.5",
                     "--beta-steps", "3", "--out", str(out)])
        assert code == 0
        text = out.read_text().splitlines()
        assert text[0].startswith("# config: ") and text[1] == "# seed: 0"
        body = csv_body(out)
        assert body[0] == "beta,u,freq_source,overlap_gs_tfd,gs_energy"
        rows = list(csv.reader(body[1:]))
        assert len(rows) == 6
        for row in rows:
            assert len(row) == 5 and row[2] == "meanfield"
            for cell in (row[0], row[1], row[3], row[4]):
                assert FLOAT.match(cell), cell
                assert sig_digits(cell) <= 12
        assert any(sig_digits(r[4]) == 12 for r in rows)

    def test_free_rows_are_exact(self, tmp_path):
        out = tmp_path / "free.csv"
        main(["overlap-sweep", "--n", "3", "--u", "0", "--beta-steps", "5",
              "--beta-max", "10", "--out", str(out)])
        for row in read_csv(out):
            assert float(row["overlap_gs_tfd"]) == pytest.approx(1, abs=1e-8)

    def test_embedded_config_reproduces(self, tmp_path):
        first = tmp_path / "a.csv"
        main(["overlap-sweep", "--n", "2", "--u", "0.7", "--beta-steps", "4",
              "--frequencies", "free", "--seed", "5", "--out", str(first)])
        second = tmp_path / "b.csv"
        assert main(["overlap-sweep", "--config", str(first), "--out", str(second)]) == 0
        assert csv_body(first) == csv_body(second)
        cfg = load_config(first)
        assert cfg["seed"] == 5 and cfg["frequencies"] == "free" and cfg["u"] == [0.7]

    def test_flags_override_config_file(self, tmp_path):
        conf = tmp_path / "c.json"
        conf.write_text(json.dumps({"n": 2, "u": [0.3], "beta_steps": 2, "t": 0.5}))
        out = tmp_path / "o.csv"
        main(["overlap-sweep", "--config", str(conf), "--t", "2.0", "--out", str(out)])
        cfg = load_config(out)
        assert cfg["t"] == 2.0 and cfg["n"] == 2 and cfg["u"] == [0.3]

    def test_stdout(self, capsys):
        assert main(["overlap-sweep", "--n", "2", "--u", "0", "--beta-steps", "2"]) == 0
        out = capsys.readouterr().out
        assert "beta,u,freq_source,overlap_gs_tfd,gs_energy" in out

    def test_resource_error_exit_code(self, tmp_path, caplog):
        assert main(["overlap-sweep", "--n", "9", "--out", str(tmp_path / "x.csv")]) == 1
        assert "16" in caplog.text

    def test_bad_config_exit_code(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"beta_min": 0.0}')
        assert main(["overlap-sweep", "--config", str(bad)]) == 1


class TestVQE:
    def _run(self, path, *extra):
        return main(["vqe", "--n", "2", "--u", "1.0", "--beta", "1.26", "--restarts", "2",
                     "--out", str(path), *extra])

    def test_record_contents(self, tmp_path):
        out = tmp_path / "v.json"
        assert self._run(out, "--validate") == 0
        data = json.loads(out.read_text())
        assert data["seed"] == 0 and data["config"]["restarts"] == 2
        run = data["runs"][0]
        for key in ("theta_opt", "cost_history", "energy_estimators", "overlap_psi_tfd",
                    "overlap_gs_tfd", "exact_spectrum", "converged"):
            assert key in run
        assert len(run["energy_estimators"]) == 4

    def test_deterministic_apart_from_timing(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        self._run(a)
        self._run(b)
        da, db = json.loads(a.read_text()), json.loads(b.read_text())
        da.pop("timing"), db.pop("timing")
        da["config"].pop("out"), db["config"].pop("out")
        assert json.dumps(da, sort_keys=True) == json.dumps(db, sort_keys=True)

    def test_free_case_exact(self, tmp_path):
        out = tmp_path / "free.json"
        main(["vqe", "--n", "3", "--u", "0", "--frequencies", "free", "--restarts", "1",
              "--validate", "--out", str(out)])
        run = json.loads(out.read_text())["runs"][0]
        assert run["overlap_psi_tfd"] == pytest.approx(1, abs=1e-6)

    def test_non_convergence_exit_code(self, tmp_path):
        out = tmp_path / "nc.json"
        assert self._run(out, "--maxiter", "0") == 2
        assert json.loads(out.read_text())["converged"] is False


class TestSpectrum:
    def test_free_columns_identical(self, tmp_path):
        out = tmp_path / "s.csv"
        cfg = ExperimentConfig(n=3, u=[0.0], frequencies="free", out=str(out))
        rows = run_spectrum_report(cfg, theta=0.0)
        assert len(rows) == 8
        for r in rows:
            assert r["e_exact"] == pytest.approx(r["e_variational"], abs=1e-12)
        assert csv_body(out)[0] == "m,e_exact,e_variational"

    def test_cli_row_count(self, tmp_path):
        out = tmp_path / "s.csv"
        assert main(["spectrum", "--n", "2", "--u", "0.5", "--restarts", "1",
                     "--out", str(out)]) == 0
        rows = read_csv(out)
        assert [int(r["m"]) for r in rows] == [0, 1, 2, 3]
        exact = [float(r["e_exact"]) for r in rows]
        assert exact == sorted(exact)


class TestMeanFieldBands:
    def test_table(self, tmp_path):
        out = tmp_path / "mf.csv"
        assert main(["meanfield-bands", "--n", "4", "--u", "0", "--u", "0.5",
                     "--eps0", "-1", "--out", str(out)]) == 0
        rows = read_csv(out)
        assert list(rows[0]) == ["k", "omega_free", "omega_meanfield", "U"]
        assert len(rows) == 8
        params = HubbardParams(4, 1.0, -1.0, 0.5)
        mf = mean_field_frequencies(params).frequencies.values
        free = free_frequencies(params).values
        for r in rows[4:]:
            k = int(r["k"])
            assert float(r["omega_meanfield"]) == pytest.approx(mf[k], abs=1e-11)
            assert float(r["omega_free"]) == pytest.approx(free[k], abs=1e-11)
        for r in rows[:4]:
            assert r["omega_free"] == r["omega_meanfield"]


def test_module_entry_point(tmp_path):
    out = tmp_path / "m.csv"
    proc = subprocess.run([sys.executable, "-m", "tfdforge", "meanfield-bands", "--n", "3",
                           "--out", str(out)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert len(read_csv(out)) == 3
    assert np.isfinite([float(r["omega_meanfield"]) for r in read_csv(out)]).all()
