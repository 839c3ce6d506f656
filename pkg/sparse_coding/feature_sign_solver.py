import logging
from typing import Tuple

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .base_code_solver import BaseCodeSolver, KKT_TOLERANCE, column_kkt_violation, kkt_scale
from .coordinate_descent_solver import CoordinateDescentSolver

logger = logging.getLogger(__name__)


class FeatureSignSolver(BaseCodeSolver):
    """
    Exact active-set (feature-sign) solver for the elastic-net coding problem.

    The solver guesses the signs of the coefficients, solves the reduced smooth
    problem on the active set in closed form and repairs sign violations with a
    line search over the zero crossings. Because the Gram matrix already carries
    the 2*beta ridge, every reduced system is positive definite.
    """

    def __init__(self, jobs: int = 1, tolerance: float = 1e-10, max_iter: int = 0):
        """
        Args:
            jobs: joblib workers for column-parallel solving
            tolerance: relative optimality tolerance of the active-set loop
            max_iter: feature-sign steps per column (0 picks 20*K + 100)
        """
        super().__init__(jobs)
        self.tolerance = tolerance
        self.max_iter = max_iter
        self._polisher = CoordinateDescentSolver()

    @staticmethod
    def _cost(gram: np.ndarray, corr: np.ndarray, alpha: float, x: np.ndarray) -> float:
        return float(0.5 * x @ gram @ x - corr @ x + alpha * np.sum(np.abs(x)))

    @staticmethod
    def _solve_reduced(gram: np.ndarray, rhs: np.ndarray) -> Tuple[np.ndarray, bool]:
        try:
            return cho_solve(cho_factor(gram), rhs), False
        except LinAlgError:
            damping = 1e-10 * max(1.0, float(np.trace(gram)) / gram.shape[0])
            logger.warning(f"Active-set system of size {gram.shape[0]} is singular; using ridge damping {damping:.3g}")
            return np.linalg.solve(gram + damping * np.eye(gram.shape[0]), rhs), True

    def _line_search(self, gram: np.ndarray, corr: np.ndarray, alpha: float, x_old: np.ndarray,
                     x_new: np.ndarray, signs: np.ndarray) -> np.ndarray:
        flips = np.flatnonzero(np.sign(x_new) != signs)
        if flips.size == 0:
            return x_new

        best, best_cost = x_new, self._cost(gram, corr, alpha, x_new)
        for idx in flips:
            step = x_old[idx] - x_new[idx]
            if step == 0.0:
                continue
            t = x_old[idx] / step
            candidate = x_old + t * (x_new - x_old)
            candidate[idx] = 0.0
            cost = self._cost(gram, corr, alpha, candidate)
            if cost < best_cost:
                best, best_cost = candidate, cost
        return best

    def solve_column(self, gram: np.ndarray, corr: np.ndarray, alpha: float) -> Tuple[np.ndarray, bool]:
        size = corr.size
        scale = kkt_scale(corr)
        tol = self.tolerance * scale
        max_iter = self.max_iter or 20 * size + 100

        x = np.zeros(size)
        signs = np.zeros(size)
        grad = -corr.copy()
        flagged = False
        nonzero_optimal = True
        converged = False

        for _ in range(max_iter):
            if nonzero_optimal:
                magnitude = np.where(signs == 0, np.abs(grad), -np.inf)
                candidate = int(np.argmax(magnitude))  # lowest index wins ties
                if magnitude[candidate] <= alpha + tol:
                    converged = True
                    break
                signs[candidate] = -np.sign(grad[candidate])

            active = np.flatnonzero(signs)
            sub_gram = gram[np.ix_(active, active)]
            sub_corr = corr[active]
            x_new, singular = self._solve_reduced(sub_gram, sub_corr - alpha * signs[active])
            flagged |= singular

            x[active] = self._line_search(sub_gram, sub_corr, alpha, x[active], x_new, signs[active])
            x[np.abs(x) < 1e-15 * scale] = 0.0
            signs = np.sign(x)
            grad = gram @ x - corr

            nonzero = signs != 0
            nonzero_optimal = (not nonzero.any()
                               or float(np.max(np.abs(grad[nonzero] + alpha * signs[nonzero]))) <= tol)

        if not converged or column_kkt_violation(gram, corr, x, alpha) > 0.1 * KKT_TOLERANCE * scale:
            logger.warning("Feature-sign search did not certify optimality; polishing with coordinate descent")
            x, _ = self._polisher.solve_column(gram, corr, alpha, start=x)
            flagged = True
        return x, flagged
