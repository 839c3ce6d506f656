"""
Replicated (alpha, C, beta) grid search on simulated spectra.

All cells share the same replicate datasets (fixed child seeds), so cell means
are directly comparable with each other and with the mean-spectrum baseline.
"""
import hashlib
import logging
from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed, effective_n_jobs

from peak_picking.peak_picker import PickerParams
from simulation.spectra_simulator import SimConfig, generate, replicate_seeds
from sparse_coding.dictionary_learner import HyperParams
from utils.errors import (
    DegenerateInputError,
    FitDivergedError,
    InvalidParameterError,
    NoActiveAtomsError,
    SparsePickError,
)
from .pipeline import run_pipeline
from .scoring import mean_spectrum_baseline, score

logger = logging.getLogger(__name__)

GRID_COLUMNS = ["alpha", "beta", "C", "mean_accuracy", "mean_fp", "n_failed", "mean_fp_per_spectrum"]

# Failures that turn a cell replicate into the (accuracy 0, FP 0) sentinel
CELL_FAILURES = (FitDivergedError, NoActiveAtomsError, DegenerateInputError, np.linalg.LinAlgError,
                 FloatingPointError)


@dataclass(frozen=True)
class GridCell:
    alpha: float
    norm_bound: float
    beta: float
    mean_accuracy: float
    mean_fp: float
    mean_fp_per_spectrum: float
    n_failed: int

    def as_row(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "C": self.norm_bound,
            "mean_accuracy": self.mean_accuracy,
            "mean_fp": self.mean_fp,
            "n_failed": self.n_failed,
            "mean_fp_per_spectrum": self.mean_fp_per_spectrum,
        }


@dataclass(frozen=True)
class GridResult:
    """
    Attributes:
        alphas, norm_bounds, betas: grid axes
        cells: one GridCell per (beta, alpha, C), in that nesting order
        replicate_count: replicates behind every mean
        baseline_accuracy, baseline_fp, baseline_fp_per_spectrum: mean-spectrum reference
        replicate_checksums: SHA-256 of every replicate's spectra
        match_tol: matching tolerance used for scoring
    """
    alphas: Tuple[float, ...]
    norm_bounds: Tuple[float, ...]
    betas: Tuple[float, ...]
    cells: Tuple[GridCell, ...]
    replicate_count: int
    baseline_accuracy: float
    baseline_fp: float
    baseline_fp_per_spectrum: float
    replicate_checksums: Tuple[str, ...]
    match_tol: int = 1

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([cell.as_row() for cell in self.cells], columns=GRID_COLUMNS)

    def accuracy_surface(self, beta: float) -> pd.DataFrame:
        """Mean accuracy for one beta as an alpha x C table."""
        frame = self.to_frame()
        frame = frame[np.isclose(frame["beta"], beta)]
        if frame.empty:
            raise InvalidParameterError(f"beta={beta} is not on the grid {list(self.betas)}")
        return frame.pivot(index="alpha", columns="C", values="mean_accuracy")

    def best_cells(self, top: int = 5) -> List[GridCell]:
        """Highest mean accuracy first, fewer false positives breaking ties."""
        return sorted(self.cells, key=lambda cell: (-cell.mean_accuracy, cell.mean_fp))[:top]


def data_checksum(data: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(data, dtype=float).tobytes()).hexdigest()


def _evaluate_cell(cfg: SimConfig, seeds: Sequence[int], checksums: Sequence[str], hyperparams: HyperParams,
                   params: PickerParams, match_tol: int) -> GridCell:
    accuracies, fps, fps_per_spectrum = [], [], []
    failed = 0
    for seed, checksum in zip(seeds, checksums):
        spectra, truth = generate(cfg.with_seed(seed))
        if data_checksum(spectra.data) != checksum:
            raise SparsePickError(f"replicate with seed {seed} changed between grid cells")
        try:
            merged, _ = run_pipeline(spectra, hyperparams, params)
        except CELL_FAILURES as e:
            logger.warning(f"Cell alpha={hyperparams.alpha}, C={hyperparams.norm_bound}, beta={hyperparams.beta} "
                           f"failed on seed {seed}: {e}")
            failed += 1
            accuracies.append(0.0)
            fps.append(0.0)
            fps_per_spectrum.append(0.0)
            continue
        result = score(merged, truth, match_tol)
        accuracies.append(result.accuracy)
        fps.append(result.false_positives)
        fps_per_spectrum.append(result.fp_per_spectrum)
    return GridCell(
        alpha=hyperparams.alpha,
        norm_bound=hyperparams.norm_bound,
        beta=hyperparams.beta,
        mean_accuracy=float(np.mean(accuracies)),
        mean_fp=float(np.mean(fps)),
        mean_fp_per_spectrum=float(np.mean(fps_per_spectrum)),
        n_failed=failed,
    )


def grid_search(cfg: SimConfig, alphas: Sequence[float], norm_bounds: Sequence[float], betas: Sequence[float],
                replicates: int, params: PickerParams, hyperparams: Optional[HyperParams] = None,
                base_seed: int = 0, match_tol: int = 1, jobs: int = 1,
                on_cell: Optional[Callable[[GridCell], None]] = None) -> GridResult:
    """
    Score the sparse-coding pipeline over every (alpha, C, beta) cell.

    Args:
        cfg: simulation settings shared by all replicates
        alphas, norm_bounds, betas: grid axes
        replicates: datasets per cell
        params: picking settings, also used by the baseline
        hyperparams: template for the remaining learner settings
        base_seed: seed the replicate seeds are derived from
        match_tol: matching tolerance of the scoring
        jobs: joblib workers over cells (-1 for all cores)
        on_cell: called with every finished cell, in grid order

    Returns:
        GridResult with cell means and the baseline reference.

    Raises:
        InvalidParameterError: If an axis is empty or replicates < 1.
    """
    if not alphas or not norm_bounds or not betas:
        raise InvalidParameterError("grid axes must be nonempty")
    if replicates < 1:
        raise InvalidParameterError(f"need at least one replicate, got {replicates}")

    seeds = replicate_seeds(base_seed, replicates)
    checksums = []
    baseline = []
    for seed in seeds:
        spectra, truth = generate(cfg.with_seed(seed))
        checksums.append(data_checksum(spectra.data))
        baseline.append(score(mean_spectrum_baseline(spectra, params), truth, match_tol))

    template = hyperparams or HyperParams(alpha=alphas[0], norm_bound=norm_bounds[0])
    settings = [
        replace(template, alpha=float(alpha), norm_bound=float(norm_bound), beta=float(beta), jobs=1)
        for beta in betas for alpha in alphas for norm_bound in norm_bounds
    ]
    logger.info(f"Grid search over {len(settings)} cells x {replicates} replicates "
                f"with {effective_n_jobs(jobs)} workers")

    cells: List[GridCell] = []
    outputs = Parallel(n_jobs=jobs, return_as="generator")(
        delayed(_evaluate_cell)(cfg, seeds, checksums, setting, params, match_tol) for setting in settings
    )
    for cell in outputs:
        cells.append(cell)
        logger.debug(f"cell {len(cells)}/{len(settings)}: alpha={cell.alpha}, C={cell.norm_bound}, "
                     f"beta={cell.beta}, accuracy={cell.mean_accuracy:.3f}, fp={cell.mean_fp:.2f}")
        if on_cell is not None:
            on_cell(cell)

    failed = sum(cell.n_failed for cell in cells)
    if failed:
        logger.warning(f"{failed} cell replicates failed and were scored as accuracy 0, FP 0")

    return GridResult(
        alphas=tuple(float(a) for a in alphas),
        norm_bounds=tuple(float(c) for c in norm_bounds),
        betas=tuple(float(b) for b in betas),
        cells=tuple(cells),
        replicate_count=replicates,
        baseline_accuracy=float(np.mean([s.accuracy for s in baseline])),
        baseline_fp=float(np.mean([s.false_positives for s in baseline])),
        baseline_fp_per_spectrum=float(np.mean([s.fp_per_spectrum for s in baseline])),
        replicate_checksums=tuple(checksums),
        match_tol=match_tol,
    )


def accuracy_variance_ratio(grid: GridResult, beta: float) -> float:
    """
    Variance of mean accuracy along alpha (averaged over C) divided by the
    variance along C (averaged over alpha). Large values mean accuracy is
    driven by alpha rather than by C.
    """
    surface = grid.accuracy_surface(beta).to_numpy()
    along_alpha = float(np.var(surface.mean(axis=1)))
    along_c = float(np.var(surface.mean(axis=0)))
    if along_c == 0.0:
        return float("inf") if along_alpha > 0.0 else float("nan")
    return along_alpha / along_c
