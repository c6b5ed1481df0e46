from pathlib import Path

import pytest
import yaml

from app.cli import main
from app.core.config import load_run_config
from app.core.exceptions import ConfigError
from app.schemas.control import MethodId
from app.schemas.run_config import RunConfig
from app.services.batch_service import BatchService

DEFAULT_CONFIG = str(Path(__file__).resolve().parents[1] / "config" / "default.yaml")


def write_config(tmp_path, data) -> str:
    path = tmp_path / "config.yaml"
    path.write_text(yaml.safe_dump(data))
    return str(path)


def test_default_file_matches_built_in_defaults():
    from_file = load_run_config(DEFAULT_CONFIG)
    built_in = load_run_config(None)
    assert from_file.model_dump(exclude={"output_dir"}) == built_in.model_dump(exclude={"output_dir"})


def test_grid_lists_every_trial(capsys):
    assert main(["grid", "--config", DEFAULT_CONFIG, "--repeats", "2"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[-1] == "132 planned trials"
    assert len(out) == 133


def test_grid_filters(capsys):
    code = main(["grid", "--config", DEFAULT_CONFIG, "--repeats", "1", "--box", "small", "--method", "combined"])
    assert code == 0
    assert capsys.readouterr().out.splitlines()[-1] == "4 planned trials"


def test_unknown_key_exits_with_config_error(tmp_path, capsys):
    path = write_config(tmp_path, {"seed": 1, "bogus_key": 3})
    assert main(["grid", "--config", path]) == 1
    assert "bogus_key" in capsys.readouterr().err


def test_nested_unknown_key_names_its_location(tmp_path):
    path = write_config(tmp_path, {"simulation": {"contact": {"pad_stiff": 1.0}}})
    with pytest.raises(ConfigError, match="simulation.contact.pad_stiff"):
        load_run_config(path)


def test_invalid_yaml(tmp_path):
    path = tmp_path / "broken.yaml"
    path.write_text("seed: [1, 2\n")
    with pytest.raises(ConfigError):
        load_run_config(str(path))


def test_unknown_box_exits_with_config_error(capsys):
    assert main(["grid", "--config", DEFAULT_CONFIG, "--box", "nope"]) == 1
    assert "nope" in capsys.readouterr().err


def test_bad_flag_exits_with_config_error(capsys):
    assert main(["trial", "--method", "bogus"]) == 1
    assert "invalid choice" in capsys.readouterr().err
    assert main(["nope"]) == 1
    assert main(["grid", "--seed", "abc"]) == 1


def test_help_exits_cleanly(capsys):
    assert main(["--help"]) == 0
    assert "pivotsim" in capsys.readouterr().out


def test_environment_sets_output_dir(monkeypatch, tmp_path):
    monkeypatch.setenv("PIVOT_OUTPUT_DIR", str(tmp_path / "env"))
    assert load_run_config(None).output_dir == str(tmp_path / "env")
    flagged = load_run_config(None, {"output_dir": str(tmp_path / "flag")})
    assert flagged.output_dir == str(tmp_path / "flag")


def test_flags_override_file(tmp_path):
    path = write_config(tmp_path, {"seed": 5, "repeats": 3})
    config = load_run_config(path, {"repeats": 1, "seed": None})
    assert config.seed == 5
    assert config.repeats == 1


@pytest.mark.slow
def test_trial_command_writes_trace(tmp_path, capsys):
    code = main(["trial", "--config", DEFAULT_CONFIG, "--method", "combined", "--box", "small", "--out", str(tmp_path)])
    assert code == 0
    assert "success=true" in capsys.readouterr().out
    assert (tmp_path / "effective_config.yaml").exists()
    assert len(list((tmp_path / "traces").glob("combined_small_*.csv"))) == 1


@pytest.mark.slow
def test_batch_is_identical_across_worker_counts(tmp_path):
    config = RunConfig(repeats=1, noise=[0.05], methods=[MethodId.COMBINED, MethodId.OPEN_LOOP])
    scenarios = BatchService.build_grid(config)
    serial, serial_rows = BatchService.run_batch(scenarios, config.simulation, parallelism=1)
    pooled, pooled_rows = BatchService.run_batch(scenarios, config.simulation, parallelism=4)
    assert [r.model_dump() for r in serial] == [r.model_dump() for r in pooled]
    assert serial_rows == pooled_rows


@pytest.mark.slow
def test_batch_exports_are_byte_identical_across_worker_counts(tmp_path):
    outputs = []
    for workers in ("1", "8"):
        out = tmp_path / f"workers{workers}"
        argv = [
            "batch", "--config", DEFAULT_CONFIG, "--box", "small", "--noise", "0.05",
            "--method", "combined", "open_loop", "--pivot", "long_to_short",
            "--repeats", "2", "--parallel", workers, "--out", str(out),
        ]
        assert main(argv) == 0
        outputs.append(out)

    serial, pooled = outputs
    for name in ("summary.json", "summary.csv", "overall.json", "trials.csv"):
        assert (serial / name).read_bytes() == (pooled / name).read_bytes()
    traces = sorted(p.name for p in (serial / "traces").glob("*.csv"))
    assert traces and traces == sorted(p.name for p in (pooled / "traces").glob("*.csv"))
    for name in traces:
        assert (serial / "traces" / name).read_bytes() == (pooled / "traces" / name).read_bytes()
