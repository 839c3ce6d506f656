import json

import pytest

from utils.config import env_jobs, merge_config, parse_grid
from utils.errors import ConfigError, SimulationConfigError
from utils.run_config import resolve_run_config, write_resolved_config


def write_json(path, payload):
    path.write_text(json.dumps(payload))
    return str(path)


def test_parse_grid_ranges():
    assert parse_grid("1:1:10") == [float(v) for v in range(1, 11)]
    norm_bounds = parse_grid("50:10:300")
    assert len(norm_bounds) == 26
    assert norm_bounds[0] == 50.0 and norm_bounds[-1] == 300.0


def test_parse_grid_lists_and_scalars():
    assert parse_grid("1,1e-1,1e-5,1e-10") == [1.0, 0.1, 1e-5, 1e-10]
    assert parse_grid(3) == [3.0]
    assert parse_grid([1, 2]) == [1.0, 2.0]


@pytest.mark.parametrize("text", ["", "a,b", "1:2", "1:0:5", "1:-1:5", "x"])
def test_parse_grid_rejects_bad_text(text):
    with pytest.raises(ConfigError):
        parse_grid(text)


def test_merge_config_ignores_none():
    merged = merge_config({"a": {"b": 1, "c": 2}, "d": 3}, {"a": {"b": None, "c": 5}, "d": None})
    assert merged == {"a": {"b": 1, "c": 5}, "d": 3}


def test_env_jobs(monkeypatch, clean_env):
    assert env_jobs(4) == 4
    monkeypatch.setenv("SPARSEPICK_JOBS", "2")
    assert env_jobs() == 2
    monkeypatch.setenv("SPARSEPICK_JOBS", "many")
    with pytest.raises(ConfigError):
        env_jobs()


def test_defaults(clean_env):
    run = resolve_run_config()
    assert run.simulation.noise_sigma == 0.8
    assert run.simulation.seed == 1
    assert run.sparse_coding.alpha == 5.0
    assert run.picking.min_width == run.simulation.min_width
    assert not run.min_width_given
    assert len(run.evaluation.alphas) == 10
    assert len(run.evaluation.norm_bounds) == 26
    assert run.evaluation.betas == (1.0, 0.1, 1e-5, 1e-10)
    assert run.evaluation.cell_count == 10 * 26 * 4
    assert run.evaluation.num_atoms == 110
    assert run.log_level == "INFO"


def test_layers_apply_in_order(tmp_path, monkeypatch, clean_env):
    path = write_json(tmp_path / "run.json", {"sparse_coding": {"alpha": 2.0, "beta": 1e-3}, "jobs": 3})
    run = resolve_run_config(path)
    assert run.sparse_coding.alpha == 2.0
    assert run.jobs == 3

    monkeypatch.setenv("SPARSEPICK_JOBS", "2")
    monkeypatch.setenv("SPARSEPICK_LOG_LEVEL", "debug")
    run = resolve_run_config(path, {"sparse_coding": {"alpha": 7.0}, "picking": {"min_width": 4}})
    assert run.sparse_coding.alpha == 7.0
    assert run.sparse_coding.beta == 1e-3
    assert run.jobs == 2
    assert run.log_level == "DEBUG"
    assert run.picking.min_width == 4
    assert run.min_width_given

    assert resolve_run_config(path, {"jobs": 1}).jobs == 1


def test_high_preset_through_config(tmp_path, clean_env):
    path = write_json(tmp_path / "run.json", {"simulation": {"preset": "high", "seed": 5}})
    run = resolve_run_config(path)
    assert run.simulation.noise_sigma == 1.8
    assert run.simulation.seed == 5


def test_invalid_configs(tmp_path, monkeypatch, clean_env):
    with pytest.raises(ConfigError):
        resolve_run_config(write_json(tmp_path / "a.json", {"plotting": {}}))
    with pytest.raises(ConfigError):
        resolve_run_config(str(tmp_path / "missing.json"))
    (tmp_path / "b.json").write_text("{not json")
    with pytest.raises(ConfigError):
        resolve_run_config(str(tmp_path / "b.json"))
    with pytest.raises(ConfigError):
        resolve_run_config(write_json(tmp_path / "c.json", {"sparse_coding": {"gamma": 1.0}}))
    with pytest.raises(SimulationConfigError):
        resolve_run_config(write_json(tmp_path / "d.json", {"simulation": {"preset": "extreme"}}))
    monkeypatch.setenv("SPARSEPICK_LOG_LEVEL", "chatty")
    with pytest.raises(ConfigError):
        resolve_run_config()


def test_resolved_config_is_written(tmp_path, clean_env):
    run = resolve_run_config(None, {"jobs": 1})
    path = write_resolved_config(run, str(tmp_path / "out"), {"replicate_checksums": ["abc"]})
    with open(path) as handle:
        payload = json.load(handle)
    assert payload["jobs"] == 1
    assert payload["replicate_checksums"] == ["abc"]
    assert payload["simulation"]["class_peak_positions"] == [[15, 45, 75], [30, 60, 90]]
    assert payload["select_alpha"]["num_classes"] == 2
