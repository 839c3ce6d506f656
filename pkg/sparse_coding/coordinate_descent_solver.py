from typing import Optional, Tuple

import numpy as np

from .base_code_solver import BaseCodeSolver, KKT_TOLERANCE, column_kkt_violation, kkt_scale


def soft_threshold(value: float, threshold: float) -> float:
    return float(np.sign(value) * max(abs(value) - threshold, 0.0))


class CoordinateDescentSolver(BaseCodeSolver):
    """
    Cyclic coordinate descent for the elastic-net coding problem.

    Slower than the active-set solver but simple and robust; the feature-sign
    solver uses it to polish columns that fail the KKT check.
    """

    def __init__(self, jobs: int = 1, tolerance: float = 0.1 * KKT_TOLERANCE, max_sweeps: int = 20000):
        super().__init__(jobs)
        self.tolerance = tolerance
        self.max_sweeps = max_sweeps

    def solve_column(self, gram: np.ndarray, corr: np.ndarray, alpha: float,
                     start: Optional[np.ndarray] = None) -> Tuple[np.ndarray, bool]:
        solution = np.zeros_like(corr) if start is None else np.array(start, dtype=float)
        diag = np.diag(gram)
        # residual correlation corr - gram @ solution, kept up to date per coordinate
        residual = corr - gram @ solution
        tol = self.tolerance * kkt_scale(corr)

        for _ in range(self.max_sweeps):
            for j in range(corr.size):
                target = residual[j] + diag[j] * solution[j]
                updated = soft_threshold(target, alpha) / diag[j]
                delta = updated - solution[j]
                if delta != 0.0:
                    solution[j] = updated
                    residual -= gram[:, j] * delta
            if column_kkt_violation(gram, corr, solution, alpha) <= tol:
                return solution, False
        return solution, True
