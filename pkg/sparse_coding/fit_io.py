"""
FitResult directory format: dictionary.csv (L x K), codes.csv (K x R),
history.csv and meta.json.
"""
import json
import logging
import os
from dataclasses import asdict
from typing import Any, Dict, Optional, Tuple

import numpy as np
import pandas as pd

from spectra_model.spectra_types import CodeMatrix, Dictionary
from utils.errors import ConfigError
from .dictionary_learner import FitResult, HyperParams

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def save_fit_result(result: FitResult, out_dir: str, extra_meta: Optional[Dict[str, Any]] = None) -> None:
    """
    Write a FitResult into out_dir (created when missing).

    Args:
        result: fit to store
        out_dir: target directory
        extra_meta: additional meta.json entries (input path, mz axis, ...)
    """
    os.makedirs(out_dir, exist_ok=True)
    pd.DataFrame(result.dictionary.atoms).to_csv(
        os.path.join(out_dir, "dictionary.csv"), header=False, index=False, float_format=FLOAT_FORMAT)
    pd.DataFrame(result.codes.codes).to_csv(
        os.path.join(out_dir, "codes.csv"), header=False, index=False, float_format=FLOAT_FORMAT)
    pd.DataFrame({
        "iteration": np.arange(1, len(result.objective_history) + 1),
        "objective": result.objective_history,
    }).to_csv(os.path.join(out_dir, "history.csv"), index=False, float_format=FLOAT_FORMAT)

    meta = {
        "hyperparams": asdict(result.hyperparams),
        "seed": result.hyperparams.seed,
        "active_set": list(result.active_set),
        "converged": result.converged,
        "iterations_run": result.iterations_run,
        "flagged_columns": list(result.flagged_columns),
        "reseeded": result.reseeded,
    }
    meta.update(extra_meta or {})
    with open(os.path.join(out_dir, "meta.json"), "w") as handle:
        json.dump(meta, handle, indent=2, sort_keys=True)
    logger.info(f"Wrote fit result to {out_dir}")


def _read_matrix(path: str) -> np.ndarray:
    return pd.read_csv(path, header=None, float_precision="round_trip").to_numpy(dtype=float)


def load_fit_result(fit_dir: str) -> Tuple[FitResult, Dict[str, Any]]:
    """
    Read a directory written by save_fit_result.

    Returns:
        The FitResult and the full meta.json dictionary.

    Raises:
        ConfigError: If a file is missing or meta.json lacks a key.
    """
    try:
        with open(os.path.join(fit_dir, "meta.json")) as handle:
            meta = json.load(handle)
        atoms = _read_matrix(os.path.join(fit_dir, "dictionary.csv"))
        codes = _read_matrix(os.path.join(fit_dir, "codes.csv"))
        history = pd.read_csv(os.path.join(fit_dir, "history.csv"),
                              float_precision="round_trip")["objective"].to_numpy(dtype=float)
        hyperparams = HyperParams(**meta["hyperparams"])
        result = FitResult(
            dictionary=Dictionary(atoms, hyperparams.norm_bound),
            codes=CodeMatrix(codes),
            objective_history=tuple(float(value) for value in history),
            active_set=tuple(int(i) for i in meta["active_set"]),
            iterations_run=int(meta["iterations_run"]),
            converged=bool(meta["converged"]),
            hyperparams=hyperparams,
            flagged_columns=tuple(meta.get("flagged_columns", ())),
            reseeded=int(meta.get("reseeded", 0)),
        )
    except OSError as e:
        raise ConfigError(f"Cannot read fit result from {fit_dir}: {e}")
    except KeyError as e:
        raise ConfigError(f"meta.json in {fit_dir} is missing key {e}")
    return result, meta
