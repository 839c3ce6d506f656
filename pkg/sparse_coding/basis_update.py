"""
Norm-constrained least-squares update of the dictionary.

Minimizes ||X - B S||_F^2 subject to ||B_j||^2 <= C. The problem is solved
through its Lagrange dual (one multiplier per atom, maximized with bounded
L-BFGS), then the primal solution is refined by exact single-column updates so
that no feasible change of one column can lower the residual.
"""
import logging
from typing import Optional

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve
from scipy.optimize import minimize

from spectra_model.spectra_types import ACTIVITY_EPS
from utils.errors import DegenerateInputError, DimensionMismatchError, InvalidParameterError

logger = logging.getLogger(__name__)


def project_columns(atoms: np.ndarray, norm_bound: float) -> np.ndarray:
    """Radially project every column onto the ball ||b||^2 <= C."""
    squared = np.sum(atoms ** 2, axis=0)
    factor = np.where(squared > norm_bound, np.sqrt(norm_bound / np.maximum(squared, 1e-300)), 1.0)
    return atoms * factor


def residual_norm(data: np.ndarray, atoms: np.ndarray, codes: np.ndarray) -> float:
    """Squared Frobenius norm of X - B S."""
    return float(np.sum((data - atoms @ codes) ** 2))


def _dual_atoms(gram: np.ndarray, cross: np.ndarray, norm_bound: float) -> np.ndarray:
    size = gram.shape[0]
    # keeps the system factorizable when S S^T is singular and a multiplier sits at zero
    ridge = 1e-12 * max(1.0, float(np.trace(gram)) / size)

    def atoms_for(multipliers: np.ndarray) -> np.ndarray:
        factor = cho_factor(gram + np.diag(multipliers) + ridge * np.eye(size))
        return cho_solve(factor, cross.T).T

    def negative_dual(multipliers: np.ndarray):
        atoms = atoms_for(multipliers)
        value = float(np.sum(cross * atoms)) + norm_bound * float(np.sum(multipliers))
        gradient = norm_bound - np.sum(atoms ** 2, axis=0)
        return value, gradient

    result = minimize(
        negative_dual,
        x0=np.zeros(size),
        jac=True,
        method="L-BFGS-B",
        bounds=[(0.0, None)] * size,
        options={"maxiter": 500, "ftol": 1e-12, "gtol": 1e-10},
    )
    logger.debug(f"Lagrange dual: {result.nit} iterations, status {result.status} ({result.message})")
    return project_columns(atoms_for(result.x), norm_bound)


def _refine_columns(gram: np.ndarray, cross: np.ndarray, atoms: np.ndarray, norm_bound: float,
                    max_sweeps: int, tol: float = 1e-10) -> np.ndarray:
    """
    Exact block-coordinate sweeps in Gram form: each column is set to its
    constrained optimum given the others. Stops once a sweep moves no column
    by more than tol relative to the largest column, or after max_sweeps.
    """
    atoms = atoms.copy()
    scale = np.sqrt(norm_bound)
    sweep, largest_step = 0, 0.0
    for sweep in range(1, max_sweeps + 1):
        largest_step = 0.0
        for j in range(atoms.shape[1]):
            # X s_j minus the other atoms' share, divided by ||s_j||^2
            column = (cross[:, j] - atoms @ gram[:, j]) / gram[j, j] + atoms[:, j]
            squared = float(column @ column)
            if squared > norm_bound:
                column *= np.sqrt(norm_bound / squared)
            largest_step = max(largest_step, float(np.max(np.abs(column - atoms[:, j]))))
            atoms[:, j] = column
        if largest_step <= tol * scale:
            break
    logger.debug(f"Basis refinement stopped after {sweep} sweeps (last step {largest_step:.3g})")
    return atoms


def update_basis(data: np.ndarray, codes: np.ndarray, norm_bound: float,
                 previous: Optional[np.ndarray] = None, max_sweeps: int = 50) -> np.ndarray:
    """
    Optimize the dictionary for fixed codes.

    Args:
        data: L x R matrix X
        codes: K x R matrix S with at least one nonzero entry
        norm_bound: C, cap on squared column norms
        previous: L x K dictionary to keep for atoms whose code row is zero
        max_sweeps: cap on the single-column refinement sweeps

    Returns:
        L x K dictionary with every squared column norm <= C.

    Raises:
        InvalidParameterError: If C <= 0.
        DimensionMismatchError: If the shapes of X, S and previous disagree.
        DegenerateInputError: If S is entirely zero.
    """
    if not norm_bound > 0:
        raise InvalidParameterError(f"norm bound C must be positive, got {norm_bound}")
    if data.shape[1] != codes.shape[1]:
        raise DimensionMismatchError(f"X has {data.shape[1]} columns but S has {codes.shape[1]}")
    num_atoms = codes.shape[0]
    if previous is not None and previous.shape != (data.shape[0], num_atoms):
        raise DimensionMismatchError(
            f"previous dictionary has shape {previous.shape}, expected {(data.shape[0], num_atoms)}"
        )

    active = np.flatnonzero(np.any(np.abs(codes) > ACTIVITY_EPS, axis=1))
    if active.size == 0:
        raise DegenerateInputError("Cannot update the basis: the code matrix is all zero")

    atoms = np.zeros((data.shape[0], num_atoms)) if previous is None else project_columns(previous, norm_bound)
    active_codes = codes[active]
    # rows below the activity threshold still touch the residual; remove their share first
    inactive = np.setdiff1d(np.arange(num_atoms), active)
    target = data - atoms[:, inactive] @ codes[inactive]

    gram = active_codes @ active_codes.T
    cross = target @ active_codes.T
    try:
        start = _dual_atoms(gram, cross, norm_bound)
    except LinAlgError:
        logger.warning("Lagrange dual system is singular; starting refinement from the previous atoms")
        start = atoms[:, active]
    if previous is not None:
        kept = atoms[:, active]
        if residual_norm(target, kept, active_codes) < residual_norm(target, start, active_codes):
            start = kept

    atoms[:, active] = _refine_columns(gram, cross, start, norm_bound, max_sweeps)
    return atoms
