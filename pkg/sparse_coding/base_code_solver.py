from abc import ABC, abstractmethod
from typing import List, Tuple

import numpy as np
from joblib import Parallel, delayed, effective_n_jobs

from utils.errors import DimensionMismatchError, InvalidParameterError

# Relative KKT tolerance of the exactness contract: kappa = KKT_TOLERANCE * max(1, |B^T x|_inf).
KKT_TOLERANCE = 1e-7


def kkt_scale(corr: np.ndarray) -> float:
    return max(1.0, float(np.max(np.abs(corr)))) if corr.size else 1.0


def column_kkt_violation(gram: np.ndarray, corr: np.ndarray, solution: np.ndarray, alpha: float) -> float:
    """
    Largest violation of the elastic-net optimality conditions for one column.

    With g = corr - gram @ s, a zero coefficient needs |g_j| <= alpha and a
    nonzero one needs g_j = alpha * sign(s_j).
    """
    g = corr - gram @ solution
    nonzero = solution != 0
    violation = np.where(nonzero, np.abs(g - alpha * np.sign(solution)), np.maximum(np.abs(g) - alpha, 0.0))
    return float(np.max(violation)) if violation.size else 0.0


class BaseCodeSolver(ABC):
    """
    Base class for per-column elastic-net code solvers.

    For a fixed dictionary B every column x of the data is coded independently by
    minimizing 0.5 ||x - B s||^2 + alpha ||s||_1 + beta ||s||^2. In Gram form this is
    0.5 s^T (B^T B + 2 beta I) s - (B^T x)^T s + alpha ||s||_1, which is what
    solve_column receives.
    """

    def __init__(self, jobs: int = 1):
        """
        Args:
            jobs: Number of joblib workers used to solve columns in parallel
        """
        self.jobs = jobs

    @abstractmethod
    def solve_column(self, gram: np.ndarray, corr: np.ndarray, alpha: float) -> Tuple[np.ndarray, bool]:
        """
        Solve one column exactly.

        Args:
            gram: K x K matrix B^T B + 2 beta I (positive definite)
            corr: length-K vector B^T x
            alpha: l1 weight

        Returns:
            The minimizer and a flag telling whether a fallback path was needed.
        """
        pass

    def _solve_block(self, gram: np.ndarray, corr_block: np.ndarray, alpha: float) -> Tuple[np.ndarray, List[bool]]:
        codes = np.zeros_like(corr_block)
        flags = []
        for r in range(corr_block.shape[1]):
            codes[:, r], flagged = self.solve_column(gram, corr_block[:, r], alpha)
            flags.append(flagged)
        return codes, flags

    def solve(self, data: np.ndarray, atoms: np.ndarray, alpha: float, beta: float) -> Tuple[np.ndarray, List[int]]:
        """
        Code every column of data against the atoms.

        Args:
            data: L x R matrix
            atoms: L x K dictionary matrix
            alpha: l1 weight (>= 0)
            beta: squared-l2 weight (> 0)

        Returns:
            K x R code matrix and the indices of flagged columns.

        Raises:
            InvalidParameterError: If alpha < 0 or beta <= 0.
            DimensionMismatchError: If data and atoms have different row counts.
        """
        if not beta > 0:
            raise InvalidParameterError(f"beta must be strictly positive, got {beta}")
        if alpha < 0:
            raise InvalidParameterError(f"alpha must be non-negative, got {alpha}")
        if data.shape[0] != atoms.shape[0]:
            raise DimensionMismatchError(
                f"data has {data.shape[0]} rows but the dictionary has {atoms.shape[0]}"
            )

        gram = atoms.T @ atoms + 2.0 * beta * np.eye(atoms.shape[1])
        corr = atoms.T @ data

        n_jobs = min(effective_n_jobs(self.jobs), data.shape[1])
        if n_jobs == 1:
            codes, flags = self._solve_block(gram, corr, alpha)
        else:
            blocks = np.array_split(np.arange(data.shape[1]), n_jobs)
            results = Parallel(n_jobs=n_jobs)(
                delayed(self._solve_block)(gram, corr[:, block], alpha) for block in blocks
            )
            codes = np.hstack([block_codes for block_codes, _ in results])
            flags = [flag for _, block_flags in results for flag in block_flags]
        return codes, [r for r, flagged in enumerate(flags) if flagged]

    @staticmethod
    def kkt_violation(data: np.ndarray, atoms: np.ndarray, codes: np.ndarray, alpha: float,
                      beta: float) -> np.ndarray:
        """
        Per-column KKT violation divided by max(1, |B^T x|_inf).

        A column satisfies the exactness contract when its value is at most
        KKT_TOLERANCE.
        """
        gram = atoms.T @ atoms + 2.0 * beta * np.eye(atoms.shape[1])
        corr = atoms.T @ data
        return np.array([
            column_kkt_violation(gram, corr[:, r], codes[:, r], alpha) / kkt_scale(corr[:, r])
            for r in range(data.shape[1])
        ])
