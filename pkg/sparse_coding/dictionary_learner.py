"""
Elastic-net dictionary learning.

Alternates an exact per-column elastic-net solve for the codes with the
Lagrange-dual basis update until the objective

    0.5 ||X - B S||_F^2 + alpha * sum_r ||S_r||_1 + beta * sum_r ||S_r||_2^2

stops decreasing. Each half step solves its subproblem exactly, so the
objective never increases; the joint problem is not convex and only a
stationary pair is reached.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np

from spectra_model.spectra_types import ACTIVITY_EPS, CodeMatrix, Dictionary, SpectraMatrix
from utils.errors import DimensionMismatchError, FitDivergedError, InvalidParameterError
from .base_code_solver import BaseCodeSolver
from .basis_update import project_columns, update_basis
from .feature_sign_solver import FeatureSignSolver

logger = logging.getLogger(__name__)

ArrayLike = Union[np.ndarray, SpectraMatrix, Dictionary, CodeMatrix]


@dataclass(frozen=True)
class HyperParams:
    """
    Hyperparameters of the elastic-net dictionary learner.

    Attributes:
        alpha: l1 weight (>= 0)
        norm_bound: C, cap on the squared norm of every atom (> 0)
        beta: squared-l2 weight (> 0; grid values down to 1e-10 are fine)
        num_atoms: K; None means min(L, 2R)
        max_iters: cap on alternating iterations
        rel_tol: stop when the relative objective decrease falls below this
        seed: seed of the dictionary initialization
        dead_atom_patience: reseed atoms unused for this many iterations (0 disables)
        jobs: joblib workers for the per-column code solve
    """
    alpha: float
    norm_bound: float
    beta: float = 1e-10
    num_atoms: Optional[int] = None
    max_iters: int = 200
    rel_tol: float = 1e-6
    seed: int = 0
    dead_atom_patience: int = 5
    jobs: int = 1

    def __post_init__(self):
        if not self.alpha >= 0:
            raise InvalidParameterError(f"alpha must be non-negative, got {self.alpha}")
        if not self.beta > 0:
            raise InvalidParameterError(f"beta must be strictly positive, got {self.beta}")
        if not self.norm_bound > 0:
            raise InvalidParameterError(f"norm bound C must be positive, got {self.norm_bound}")
        if not self.rel_tol > 0:
            raise InvalidParameterError(f"rel_tol must be positive, got {self.rel_tol}")
        if self.max_iters < 1:
            raise InvalidParameterError(f"max_iters must be at least 1, got {self.max_iters}")
        if self.num_atoms is not None and self.num_atoms < 1:
            raise InvalidParameterError(f"num_atoms must be at least 1, got {self.num_atoms}")
        if self.dead_atom_patience < 0:
            raise InvalidParameterError(f"dead_atom_patience must be >= 0, got {self.dead_atom_patience}")

    def resolve_num_atoms(self, length: int, num_spectra: int) -> int:
        num_atoms = self.num_atoms if self.num_atoms is not None else min(length, 2 * num_spectra)
        if num_atoms > length:
            raise InvalidParameterError(f"num_atoms K={num_atoms} exceeds the spectrum length L={length}")
        return num_atoms


@dataclass(frozen=True, eq=False)
class FitResult:
    """Outcome of a dictionary-learning run."""
    dictionary: Dictionary
    codes: CodeMatrix
    objective_history: Tuple[float, ...]
    active_set: Tuple[int, ...]
    iterations_run: int
    converged: bool
    hyperparams: HyperParams
    flagged_columns: Tuple[int, ...] = ()
    reseeded: int = 0

    @property
    def final_objective(self) -> float:
        return self.objective_history[-1]


def _values(item: ArrayLike) -> np.ndarray:
    if isinstance(item, SpectraMatrix):
        return item.data
    if isinstance(item, Dictionary):
        return item.atoms
    if isinstance(item, CodeMatrix):
        return item.codes
    return np.asarray(item, dtype=float)


def objective(data: ArrayLike, atoms: ArrayLike, codes: ArrayLike, alpha: float, beta: float) -> float:
    """
    Elastic-net dictionary-learning objective.

    Raises:
        DimensionMismatchError: If X (L x R), B (L x K) and S (K x R) disagree.
    """
    x, b, s = _values(data), _values(atoms), _values(codes)
    if x.shape[0] != b.shape[0] or b.shape[1] != s.shape[0] or x.shape[1] != s.shape[1]:
        raise DimensionMismatchError(f"incompatible shapes X{x.shape}, B{b.shape}, S{s.shape}")
    return float(0.5 * np.sum((x - b @ s) ** 2) + alpha * np.sum(np.abs(s)) + beta * np.sum(s ** 2))


def solve_codes(data: ArrayLike, atoms: ArrayLike, alpha: float, beta: float, jobs: int = 1) -> CodeMatrix:
    """
    Exact elastic-net codes of every column for a fixed dictionary.

    Raises:
        InvalidParameterError: If beta <= 0 or alpha < 0.
    """
    codes, flagged = FeatureSignSolver(jobs=jobs).solve(_values(data), _values(atoms), alpha, beta)
    if flagged:
        logger.warning(f"Columns {flagged} needed a fallback solve")
    return CodeMatrix(codes)


def active_atoms(codes: ArrayLike) -> List[int]:
    """Sorted indices of code rows holding an entry larger than the activity threshold."""
    values = _values(codes)
    return [int(i) for i in np.flatnonzero(np.any(np.abs(values) > ACTIVITY_EPS, axis=1))]


def initial_atoms(data: np.ndarray, num_atoms: int, norm_bound: float, rng: np.random.Generator) -> np.ndarray:
    """Sampled data columns plus a small jitter, projected onto the norm ball."""
    length, num_spectra = data.shape
    picks = rng.choice(num_spectra, size=num_atoms, replace=num_atoms > num_spectra)
    atoms = data[:, picks].copy()
    norms = np.linalg.norm(atoms, axis=0)
    empty = norms == 0
    if np.any(empty):
        atoms[:, empty] = rng.standard_normal((length, int(np.count_nonzero(empty))))
        norms = np.linalg.norm(atoms, axis=0)
    atoms += rng.standard_normal(atoms.shape) * (1e-3 * norms)
    return project_columns(atoms, norm_bound)


def _reseed(data: np.ndarray, atoms: np.ndarray, codes: np.ndarray, dead: np.ndarray,
            norm_bound: float) -> np.ndarray:
    errors = np.sum((data - atoms @ codes) ** 2, axis=0)
    worst = np.argsort(-errors, kind="stable")
    atoms = atoms.copy()
    for rank, atom in enumerate(dead):
        column = data[:, worst[rank % worst.size]]
        norm = np.linalg.norm(column)
        if norm > 0:
            atoms[:, atom] = column * (np.sqrt(norm_bound) / norm)
    return atoms


def fit(spectra: ArrayLike, hyperparams: HyperParams, solver: Optional[BaseCodeSolver] = None) -> FitResult:
    """
    Learn a dictionary and sparse codes for the spectra.

    Args:
        spectra: L x R spectra matrix
        hyperparams: learner settings
        solver: code solver; a FeatureSignSolver with hyperparams.jobs workers by default

    Returns:
        FitResult with the final dictionary, codes and objective history.

    Raises:
        FitDivergedError: If the objective becomes non-finite.
    """
    data = _values(spectra)
    length, num_spectra = data.shape
    num_atoms = hyperparams.resolve_num_atoms(length, num_spectra)
    solver = solver or FeatureSignSolver(jobs=hyperparams.jobs)
    rng = np.random.default_rng(hyperparams.seed)

    atoms = initial_atoms(data, num_atoms, hyperparams.norm_bound, rng)
    codes = np.zeros((num_atoms, num_spectra))
    history: List[float] = []
    flagged = set()
    idle = np.zeros(num_atoms, dtype=int)
    reseeded = 0
    converged = False
    iteration = 0

    logger.info(f"Fitting K={num_atoms} atoms to {num_spectra} spectra of length {length} "
                f"(alpha={hyperparams.alpha}, beta={hyperparams.beta}, C={hyperparams.norm_bound})")

    for iteration in range(1, hyperparams.max_iters + 1):
        codes, flagged_columns = solver.solve(data, atoms, hyperparams.alpha, hyperparams.beta)
        flagged.update(flagged_columns)
        active = np.any(np.abs(codes) > ACTIVITY_EPS, axis=1)

        if np.any(active):
            atoms = update_basis(data, codes, hyperparams.norm_bound, previous=atoms)
        value = objective(data, atoms, codes, hyperparams.alpha, hyperparams.beta)
        if not np.isfinite(value):
            raise FitDivergedError(f"Objective became non-finite at iteration {iteration}", iteration)
        history.append(value)
        logger.debug(f"iteration {iteration}: objective {value:.10g}, {int(np.count_nonzero(active))} active atoms")

        if not np.any(active):
            converged = True
            break
        if len(history) > 1 and history[-2] - value <= hyperparams.rel_tol * max(abs(history[-2]), 1e-300):
            converged = True
            break

        if hyperparams.dead_atom_patience:
            idle = np.where(active, 0, idle + 1)
            dead = np.flatnonzero((idle >= hyperparams.dead_atom_patience) & np.all(codes == 0, axis=1))
            if dead.size:
                atoms = _reseed(data, atoms, codes, dead, hyperparams.norm_bound)
                idle[dead] = 0
                reseeded += int(dead.size)
                logger.debug(f"Reseeded {dead.size} idle atoms at iteration {iteration}")

    if not converged:
        logger.warning(f"Dictionary learning stopped after {hyperparams.max_iters} iterations without converging")

    result = FitResult(
        dictionary=Dictionary(atoms, hyperparams.norm_bound),
        codes=CodeMatrix(codes),
        objective_history=tuple(history),
        active_set=tuple(active_atoms(codes)),
        iterations_run=iteration,
        converged=converged,
        hyperparams=hyperparams,
        flagged_columns=tuple(sorted(flagged)),
        reseeded=reseeded,
    )
    logger.info(f"Fit finished after {iteration} iterations: objective {result.final_objective:.6g}, "
                f"{len(result.active_set)} active atoms, converged={converged}")
    return result


def kkt_violation(data: ArrayLike, atoms: ArrayLike, codes: ArrayLike, alpha: float, beta: float) -> np.ndarray:
    """
    Per-column optimality violation of codes for a fixed dictionary, relative
    to max(1, |B^T x|_inf). Exact codes score at most KKT_TOLERANCE.
    """
    x, b, s = _values(data), _values(atoms), _values(codes)
    if x.shape[0] != b.shape[0] or b.shape[1] != s.shape[0] or x.shape[1] != s.shape[1]:
        raise DimensionMismatchError(f"incompatible shapes X{x.shape}, B{b.shape}, S{s.shape}")
    return BaseCodeSolver.kkt_violation(x, b, s, alpha, beta)
