"""
Resolved run configuration.

Values are layered as: config/default_config.json <- --config file <-
environment (SPARSEPICK_JOBS, SPARSEPICK_LOG_LEVEL) <- command-line flags.
"""
import json
import logging
import os
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional, Tuple

from joblib import effective_n_jobs

from peak_picking.peak_picker import PickerParams
from simulation.spectra_simulator import SimConfig, config_to_dict, load_preset
from sparse_coding.dictionary_learner import HyperParams
from .config import LOG_LEVEL_ENV, env_jobs, env_log_level, load_default_config, load_json_config, merge_config, parse_grid
from .errors import ConfigError, InvalidParameterError

logger = logging.getLogger(__name__)

SECTIONS = ("simulation", "sparse_coding", "picking", "evaluation", "select_alpha")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


@dataclass(frozen=True)
class EvaluationGrid:
    preset: str
    alphas: Tuple[float, ...]
    norm_bounds: Tuple[float, ...]
    betas: Tuple[float, ...]
    replicates: int
    base_seed: int
    match_tol: int = 1
    num_atoms: Optional[int] = None

    def __post_init__(self):
        if self.replicates < 1:
            raise InvalidParameterError(f"replicates must be at least 1, got {self.replicates}")
        if self.match_tol < 0:
            raise InvalidParameterError(f"match_tol must be non-negative, got {self.match_tol}")

    @property
    def cell_count(self) -> int:
        return len(self.alphas) * len(self.norm_bounds) * len(self.betas)


@dataclass(frozen=True)
class RunConfig:
    """Every setting of one CLI run after all layers are applied."""
    simulation: SimConfig
    sparse_coding: HyperParams
    picking: PickerParams
    evaluation: EvaluationGrid
    select_alpha_grid: Tuple[float, ...]
    num_classes: int
    jobs: int
    log_level: str
    min_width_given: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "simulation": config_to_dict(self.simulation),
            "sparse_coding": asdict(self.sparse_coding),
            "picking": asdict(self.picking),
            "evaluation": asdict(self.evaluation),
            "select_alpha": {"alphas": list(self.select_alpha_grid), "num_classes": self.num_classes},
            "jobs": self.jobs,
            "log_level": self.log_level,
        }


def _section(raw: Dict[str, Any], name: str) -> Dict[str, Any]:
    value = raw.get(name, {})
    if not isinstance(value, dict):
        raise ConfigError(f"Config section '{name}' must be an object")
    return value


def layered_config(config_path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """Raw configuration dict with the file, environment and flag layers applied."""
    raw = load_default_config()
    if config_path:
        user = load_json_config(config_path)
        unknown = set(user) - set(SECTIONS) - {"jobs", "log_level"}
        if unknown:
            raise ConfigError(f"Unknown config keys in {config_path}: {', '.join(sorted(unknown))}")
        raw = merge_config(raw, user)
    raw = merge_config(raw, {"jobs": env_jobs(), "log_level": os.environ.get(LOG_LEVEL_ENV)})
    return merge_config(raw, overrides or {})


def resolve_run_config(config_path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """
    Build the typed RunConfig.

    Args:
        config_path: optional JSON file with the same sections as the defaults
        overrides: nested dict of command-line values; None entries are ignored

    Raises:
        ConfigError: If a value has the wrong type or an unknown key is given.
        InvalidParameterError / SimulationConfigError: If a section fails validation.
    """
    raw = layered_config(config_path, overrides)
    simulation = dict(_section(raw, "simulation"))
    preset = simulation.pop("preset", "moderate")
    sparse = _section(raw, "sparse_coding")
    picking = dict(_section(raw, "picking"))
    evaluation = _section(raw, "evaluation")
    selection = _section(raw, "select_alpha")

    jobs = raw.get("jobs")
    jobs = effective_n_jobs(-1 if jobs is None else int(jobs))
    log_level = str(raw.get("log_level") or env_log_level()).upper()
    if log_level not in LOG_LEVELS:
        raise ConfigError(f"log level must be one of {LOG_LEVELS}, got '{log_level}'")

    try:
        sim_config = load_preset(preset, **simulation)
        hyperparams = HyperParams(**sparse)
        min_width_given = picking.get("min_width") is not None
        if not min_width_given:
            picking["min_width"] = sim_config.min_width
        picker = PickerParams(**picking)
        grid = EvaluationGrid(
            preset=str(evaluation.get("preset", preset)),
            alphas=tuple(parse_grid(evaluation["alphas"])),
            norm_bounds=tuple(parse_grid(evaluation["norm_bounds"])),
            betas=tuple(parse_grid(evaluation["betas"])),
            replicates=int(evaluation["replicates"]),
            base_seed=int(evaluation["base_seed"]),
            match_tol=int(evaluation.get("match_tol", 1)),
            num_atoms=evaluation.get("num_atoms"),
        )
        alphas = tuple(parse_grid(selection["alphas"]))
        num_classes = int(selection.get("num_classes", sim_config.num_classes))
    except KeyError as e:
        raise ConfigError(f"Missing config key {e}")
    except TypeError as e:
        raise ConfigError(f"Invalid config value: {e}")

    return RunConfig(sim_config, hyperparams, picker, grid, alphas, num_classes, jobs, log_level, min_width_given)


def write_resolved_config(run_config: RunConfig, out_dir: str, extra: Optional[Dict[str, Any]] = None) -> str:
    """Echo the resolved configuration to out_dir/resolved_config.json."""
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "resolved_config.json")
    payload = run_config.to_dict()
    if extra:
        payload.update(extra)
    with open(path, "w") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
    logger.debug(f"Wrote {path}")
    return path
