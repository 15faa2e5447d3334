import json
import os
import stat

import pytest

from sdlab.cli import main
from sdlab.config import ConfigError, load_config, validate_config
from sdlab.reports import ExperimentResult, content_hash, emit_results


def write_config(tmp_path, payload, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


class TestConfigLoading:
    def test_minimal_defaults(self, tmp_path):
        cfg = load_config(write_config(tmp_path,
                                       {"experiment": "selfcheck"}))
        assert cfg.grid["n"] == 64
        assert cfg.noise["modes"] == 32  # defaults to n // 2
        assert cfg.solver["dt"] == 1e-3
        assert cfg.output["format"] == "csv"

    def test_delta_rule_named(self, tmp_path):
        with pytest.raises(ConfigError) as err:
            load_config(write_config(tmp_path, {
                "experiment": "pl-convergence",
                "noise": {"delta": 0.3, "kappa": 0.1}}))
        assert any("0.5 + noise.kappa" in p for p in err.value.problems)

    def test_p_range_rule(self, tmp_path):
        with pytest.raises(ConfigError) as err:
            load_config(write_config(tmp_path, {
                "experiment": "pl-convergence",
                "exponents": {"p_list": [1.5, 2.5]}}))
        assert any("[1, 2]" in p for p in err.value.problems)

    def test_unknown_keys_rejected(self, tmp_path):
        with pytest.raises(ConfigError) as err:
            load_config(write_config(tmp_path, {
                "experiment": "selfcheck", "grid": {"n": 16, "m": 2},
                "bogus": True}))
        msgs = " ".join(err.value.problems)
        assert "grid.m" in msgs and "bogus" in msgs

    def test_all_problems_reported_at_once(self, tmp_path):
        with pytest.raises(ConfigError) as err:
            load_config(write_config(tmp_path, {
                "experiment": "nope",
                "noise": {"delta": 0.1, "kappa": 0.2},
                "solver": {"dt": -1},
                "output": {"format": "xml"}}))
        assert len(err.value.problems) >= 4

    def test_parse_error(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError, match="JSON"):
            load_config(str(path))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="read"):
            load_config(str(tmp_path / "absent.json"))

    def test_stability_guard_rule(self, tmp_path):
        with pytest.raises(ConfigError) as err:
            load_config(write_config(tmp_path, {
                "experiment": "p-to-1",
                "solver": {"scheme": "regularized", "eps": 0.01,
                           "dt": 0.01}}))
        assert any("stability" in p for p in err.value.problems)


class TestEmission:
    def _result(self):
        res = ExperimentResult(experiment="selfcheck")
        res.add_table("numbers", ("a", "b"), [(1, 2.5), (3, 4.0)])
        res.record("ok", True)
        return res

    def _config(self):
        return validate_config({"experiment": "selfcheck"})

    def test_empty_table_header_only(self, tmp_path):
        res = ExperimentResult(experiment="selfcheck")
        res.add_table("empty", ("x", "y"), [])
        cfg = self._config()
        emit_results(res, cfg, str(tmp_path), make_figures=False)
        lines = (tmp_path / "empty.csv").read_text().strip().split("\n")
        assert len(lines) == 2  # meta comment + header row
        assert lines[1] == "x,y"

    def test_rerun_identical_modulo_timestamp(self, tmp_path):
        cfg = self._config()
        emit_results(self._result(), cfg, str(tmp_path / "a"),
                     make_figures=False)
        emit_results(self._result(), cfg, str(tmp_path / "b"),
                     make_figures=False)
        csv_a = (tmp_path / "a" / "numbers.csv").read_text()
        csv_b = (tmp_path / "b" / "numbers.csv").read_text()
        assert csv_a == csv_b
        sa = json.loads((tmp_path / "a" / "summary.json").read_text())
        sb = json.loads((tmp_path / "b" / "summary.json").read_text())
        sa.pop("timestamp"), sb.pop("timestamp")
        assert sa == sb

    def test_hash_excludes_timestamp(self):
        res = self._result()
        cfg = self._config()
        h1 = content_hash(cfg.to_dict(), res.tables)
        h2 = content_hash(cfg.to_dict(), res.tables)
        assert h1 == h2
        res.tables[0].rows.append((9, 9.0))
        assert content_hash(cfg.to_dict(), res.tables) != h1

    def test_json_format_single_file(self, tmp_path):
        cfg = self._config()
        emit_results(self._result(), cfg, str(tmp_path), fmt="json",
                     make_figures=False)
        files = sorted(os.listdir(tmp_path))
        assert files == ["summary.json"]
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["tables"][0]["rows"] == [[1, 2.5], [3, 4.0]]

    def test_unwritable_directory_no_partials(self, tmp_path):
        target = tmp_path / "locked"
        target.mkdir()
        os.chmod(target, stat.S_IRUSR | stat.S_IXUSR)
        try:
            if os.access(str(target), os.W_OK):
                pytest.skip("running as privileged user, cannot lock dir")
            with pytest.raises(OSError):
                emit_results(self._result(), self._config(), str(target),
                             make_figures=False)
            assert os.listdir(target) == []
        finally:
            os.chmod(target, stat.S_IRWXU)

    def test_config_hash_in_header(self, tmp_path):
        cfg = self._config()
        emit_results(self._result(), cfg, str(tmp_path), make_figures=False)
        head = (tmp_path / "numbers.csv").read_text().split("\n")[0]
        assert head.startswith("# config_hash=")
        assert "master_seed=12345" in head

    def test_output_path_collision_no_partials(self, tmp_path):
        # the output "directory" is an existing regular file: the run
        # must abort before any artifact is created
        blocker = tmp_path / "blocked"
        blocker.write_text("occupied")
        with pytest.raises(OSError):
            emit_results(self._result(), self._config(), str(blocker),
                         make_figures=False)
        assert blocker.read_text() == "occupied"
        assert sorted(p.name for p in tmp_path.iterdir()) == ["blocked"]


class TestCLI:
    def test_selfcheck_exit_zero(self, tmp_path, capsys):
        code = main(["selfcheck", "--out", str(tmp_path / "sc"),
                     "--no-figures"])
        assert code == 0
        out = capsys.readouterr().out
        assert "[PASS]" in out and "[FAIL]" not in out

    def test_bad_config_exit_two(self, tmp_path, capsys):
        path = write_config(tmp_path, {"experiment": "bogus"})
        assert main(["run", "--config", path]) == 2
        assert "experiment must be" in capsys.readouterr().err

    def test_run_experiment_deterministic(self, tmp_path):
        payload = {
            "experiment": "pl-convergence",
            "grid": {"n": 16},
            "noise": {"master_seed": 11, "modes": 8},
            "solver": {"dt": 0.005, "T": 0.05, "paths": 2,
                       "snapshot_stride": 5},
            "output": {"directory": str(tmp_path / "out1")},
        }
        path = write_config(tmp_path, payload)
        assert main(["run", "--config", path, "--no-figures"]) == 0
        payload["output"]["directory"] = str(tmp_path / "out2")
        path2 = write_config(tmp_path, payload, name="cfg2.json")
        assert main(["run", "--config", path2, "--no-figures"]) == 0
        a = (tmp_path / "out1" / "sup_errors.csv").read_text()
        b = (tmp_path / "out2" / "sup_errors.csv").read_text()
        # identical numbers; headers differ only through the echoed config
        assert a.split("\n")[1:] == b.split("\n")[1:]

    def test_seed_override_changes_output(self, tmp_path):
        payload = {
            "experiment": "pl-convergence",
            "grid": {"n": 16},
            "noise": {"master_seed": 11, "modes": 8},
            "solver": {"dt": 0.005, "T": 0.05, "paths": 2,
                       "snapshot_stride": 5},
            "output": {"directory": str(tmp_path / "o1")},
        }
        path = write_config(tmp_path, payload)
        main(["run", "--config", path, "--no-figures"])
        main(["run", "--config", path, "--no-figures", "--seed", "99",
              "--out", str(tmp_path / "o2")])
        a = (tmp_path / "o1" / "sup_errors.csv").read_text()
        b = (tmp_path / "o2" / "sup_errors.csv").read_text()
        assert a.split("\n")[2] != b.split("\n")[2]

    def test_figures_rendered(self, tmp_path):
        payload = {
            "experiment": "pl-convergence",
            "grid": {"n": 16},
            "noise": {"master_seed": 11, "modes": 8},
            "solver": {"dt": 0.005, "T": 0.05, "paths": 2,
                       "snapshot_stride": 5},
            "output": {"directory": str(tmp_path / "fig")},
        }
        path = write_config(tmp_path, payload)
        assert main(["run", "--config", path]) == 0
        assert (tmp_path / "fig" / "sup_error_decay.png").exists()
