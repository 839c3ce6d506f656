import logging
from typing import Tuple

from peak_picking.peak_picker import PickerParams, pick_from_dictionary
from sparse_coding.dictionary_learner import FitResult, HyperParams, fit
from spectra_model.spectra_types import LineSpectrum, SpectraMatrix

logger = logging.getLogger(__name__)


def run_pipeline(spectra: SpectraMatrix, hyperparams: HyperParams, params: PickerParams,
                 solver=None) -> Tuple[LineSpectrum, FitResult]:
    """
    Dictionary learning followed by peak picking on the active atoms.

    Returns:
        The merged line spectrum and the full FitResult.

    Raises:
        NoActiveAtomsError: If alpha leaves no active atom.
    """
    result = fit(spectra, hyperparams, solver)
    merged, _ = pick_from_dictionary(result, params, spectra.mz_axis)
    return merged, result
