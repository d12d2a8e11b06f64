import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tpflow import cli
from tpflow.cli import ConfigError, main, parse_config, report

SMALL = {"lambda": 1.0, "box_half_length": 8, "n_spatial": 32, "n_temporal": 2}


def write_cfg(tmp_path, **kw):
    cfg = {"params": SMALL, "tasks": ["verify:symbol_nonvanishing"], "output_dir": str(tmp_path / "out")}
    cfg.update(kw)
    path = tmp_path / "run.json"
    path.write_text(json.dumps(cfg, indent=2))
    return path


class TestParse:
    def test_defaults(self):
        cfg = parse_config("{}")
        assert cfg.params.lam == 1.0 and cfg.tasks == ["verify_all"] and cfg.output_dir is None

    def test_zero_drift(self):
        with pytest.raises(ConfigError, match="drift required"):
            parse_config('{"params": {"lambda": 0}}')

    def test_malformed_json_names_line(self):
        with pytest.raises(ConfigError, match="line 3"):
            parse_config('{\n "params": {"lambda": 1},\n "tasks": [,]\n}')

    def test_unknown_key_names_key_and_line(self):
        with pytest.raises(ConfigError, match=r"'n_spacial' \(line 3\)"):
            parse_config('{\n "params": {\n  "n_spacial": 32\n }\n}')

    @pytest.mark.parametrize(
        "text, key",
        [
            ('{"params": {"n_spatial": 31}}', "n_spatial"),
            ('{"params": {"period": -1}}', "period"),
            ('{"params": {"lambda": "one"}}', "lambda"),
            ('{"tasks": []}', "tasks"),
            ('{"tasks": ["verify:lemma"]}', "tasks"),
            ('{"seed": 1.5}', "seed"),
            ('{"forcing": {"radius": 0}}', "forcing"),
            ('{"forcing": {"center": [0, 0]}}', "center"),
        ],
    )
    def test_invalid_values_name_key(self, text, key):
        with pytest.raises(ConfigError, match=f"'{key}'"):
            parse_config(text)

    @settings(max_examples=20, deadline=None)
    @given(st.text(max_size=40))
    def test_garbage_never_crashes(self, text):
        try:
            parse_config(text)
        except ConfigError:
            pass

    def test_forcing_roundtrip(self):
        cfg = parse_config('{"forcing": {"radius": 1.5, "time_profile": "mixed", "weights": [[0, 1], [2, 0.5]]}}')
        assert cfg.forcing.time_coefficients() == {0: 1.0, 2: 0.25, -2: 0.25}


class TestMain:
    def test_missing_output_dir(self, tmp_path, capsys):
        path = tmp_path / "c.json"
        path.write_text('{"tasks": ["verify:symbol_nonvanishing"]}')
        assert main(["--config", str(path)]) == 2
        assert "output_dir" in capsys.readouterr().err

    def test_zero_drift_exit_code(self, tmp_path, capsys):
        path = write_cfg(tmp_path, params={"lambda": 0.0})
        assert main(["--config", str(path)]) == 2
        assert "drift required" in capsys.readouterr().err
        assert not (tmp_path / "out").exists()

    def test_passing_claim(self, tmp_path):
        path = write_cfg(tmp_path)
        assert main(["--config", str(path)]) == 0
        out = tmp_path / "out"
        rep = json.loads((out / "verify_symbol_nonvanishing.json").read_text())
        assert rep["pass"] is True
        summ = json.loads((out / "verify_summary.json").read_text())
        assert summ == {"claims": {"symbol_nonvanishing": True}, "failed": 0, "passed": 1, "total": 1}

    def test_failing_claim_exit_code(self, tmp_path, capsys):
        path = write_cfg(tmp_path)
        # small lattice: the L2 kernel decay is preasymptotic on [2, 10]
        assert main(["--config", str(path), "--task", "verify:tp_kernel_decay"]) == 1
        assert "tp_kernel_decay" in capsys.readouterr().err

    def test_nan_abort(self, tmp_path, monkeypatch):
        def boom(*a, **k):
            raise FloatingPointError("NaN")

        monkeypatch.setattr(cli, "picard_solve", boom)
        path = write_cfg(tmp_path, tasks=["solve"])
        assert main(["--config", str(path)]) == 3

    def test_solve_artifacts(self, tmp_path):
        path = write_cfg(tmp_path, tasks=["solve"])
        assert main(["--config", str(path)]) == 0
        out = tmp_path / "out"
        s = json.loads((out / "solve_summary.json").read_text())
        assert set(s) == {"iterations", "converged", "final_residual", "divergence_max", "amplitude"}
        assert (out / "solution_u.bin").exists() and (out / "solution_u.bin.json").exists()


class TestReport:
    def fake(self, out, cid, ok, measured):
        out.mkdir(exist_ok=True)
        (out / f"verify_{cid}.json").write_text(json.dumps(
            {"claim_id": cid, "pass": ok, "measured": measured, "thresholds": {}, "info": {}}))

    def test_empty_directory(self, tmp_path):
        with pytest.raises(ConfigError):
            report(tmp_path)

    def test_mixed_results_and_exact_exponents(self, tmp_path):
        self.fake(tmp_path, "tp_kernel_decay", False, {"alpha_kernel_min": 2.5694720570037815,
                                                       "alpha_gradient_min": 3.03})
        self.fake(tmp_path, "oseen_properties", True, {"alpha_downstream": 1.0000000000000016})
        text = report(tmp_path).read_text()
        assert "| tp_kernel_decay |" in text and "✗" in text and "✓" in text
        assert "| 2.5694720570037815 | 3 |" in text
        assert "| 1.0000000000000016 | 1 |" in text
