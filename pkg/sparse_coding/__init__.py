from .base_code_solver import BaseCodeSolver, KKT_TOLERANCE
from .feature_sign_solver import FeatureSignSolver
from .coordinate_descent_solver import CoordinateDescentSolver
from .basis_update import update_basis
from .dictionary_learner import (
    FitResult,
    HyperParams,
    active_atoms,
    fit,
    kkt_violation,
    objective,
    solve_codes,
)
from .fit_io import load_fit_result, save_fit_result

__all__ = [
    'BaseCodeSolver',
    'KKT_TOLERANCE',
    'FeatureSignSolver',
    'CoordinateDescentSolver',
    'update_basis',
    'FitResult',
    'HyperParams',
    'active_atoms',
    'fit',
    'kkt_violation',
    'objective',
    'solve_codes',
    'load_fit_result',
    'save_fit_result',
]
