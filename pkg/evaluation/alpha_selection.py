import logging
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Tuple

from peak_picking.peak_picker import PickerParams, pick_from_dictionary
from sparse_coding.dictionary_learner import HyperParams, fit
from spectra_model.spectra_types import LineSpectrum, SpectraMatrix
from utils.errors import InvalidParameterError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AlphaSelection:
    """
    Attributes:
        chosen: selected alpha
        warning: True when no candidate kept enough atoms and the smallest was returned
        atom_counts: (alpha, active atom count) for every candidate, ascending
        peaks: merged peaks picked at the chosen alpha, when picking settings were given
    """
    chosen: float
    warning: bool
    atom_counts: Tuple[Tuple[float, int], ...]
    peaks: Optional[LineSpectrum] = None


def select_alpha(spectra: SpectraMatrix, num_classes: int, candidates: Sequence[float],
                 hyperparams: HyperParams, params: Optional[PickerParams] = None) -> AlphaSelection:
    """
    Largest candidate alpha whose fit still keeps at least num_classes active atoms.

    Args:
        spectra: spectra to fit
        num_classes: assumed number of classes D
        candidates: ascending alpha values
        hyperparams: template for the remaining learner settings
        params: optional picking settings; when given, peaks are picked at the chosen alpha

    Raises:
        InvalidParameterError: If candidates are empty or not ascending, or num_classes < 1.
    """
    values = [float(alpha) for alpha in candidates]
    if not values:
        raise InvalidParameterError("alpha candidates must be nonempty")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise InvalidParameterError(f"alpha candidates must be strictly ascending, got {values}")
    if num_classes < 1:
        raise InvalidParameterError(f"num_classes must be at least 1, got {num_classes}")

    counts = []
    fits = {}
    for alpha in values:
        result = fit(spectra, replace(hyperparams, alpha=alpha))
        counts.append((alpha, len(result.active_set)))
        fits[alpha] = result
        logger.info(f"alpha={alpha:g}: {len(result.active_set)} active atoms")

    qualifying = [alpha for alpha, count in counts if count >= num_classes]
    if qualifying:
        chosen, warning = max(qualifying), False
    else:
        chosen, warning = values[0], True
        logger.warning(f"No alpha candidate keeps {num_classes} active atoms; falling back to alpha={chosen:g}")

    peaks = None
    if params is not None and fits[chosen].active_set:
        peaks, _ = pick_from_dictionary(fits[chosen], params, spectra.mz_axis)
    return AlphaSelection(chosen, warning, tuple(counts), peaks)
