"""
Attribution of learned atoms to classes by correlation with class mean spectra.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from sparse_coding.dictionary_learner import FitResult
from spectra_model.spectra_types import SpectraMatrix
from utils.errors import DimensionMismatchError, EmptyInputError, NoActiveAtomsError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AtomAttribution:
    class_id: int
    atom: int
    correlation: float


def class_mean_spectra(spectra: SpectraMatrix, labels: Sequence[int]) -> pd.DataFrame:
    """L x D frame of per-class mean spectra, one column per class id (sorted)."""
    if len(labels) != spectra.num_spectra:
        raise DimensionMismatchError(f"{len(labels)} labels for {spectra.num_spectra} spectra")
    frame = pd.DataFrame(spectra.data, columns=list(labels))
    return frame.T.groupby(level=0).mean().T


def _abs_correlation(a: np.ndarray, b: np.ndarray) -> float:
    if np.std(a) == 0 or np.std(b) == 0:
        return 0.0
    return float(abs(np.corrcoef(a, b)[0, 1]))


def attribute_atoms(fit_result: FitResult, spectra: SpectraMatrix,
                    labels: Optional[Sequence[int]] = None) -> List[AtomAttribution]:
    """
    Best-matching active atom of every class.

    The correlation is |Pearson r|, which aligns the arbitrary sign of an atom.

    Args:
        fit_result: fit on spectra
        spectra: the fitted spectra
        labels: class id per spectrum; defaults to spectra.class_labels

    Raises:
        NoActiveAtomsError: If the fit has no active atom.
        EmptyInputError: If no labels are available.
    """
    labels = labels if labels is not None else spectra.class_labels
    if labels is None:
        raise EmptyInputError("attribution needs a class label per spectrum")
    if not fit_result.active_set:
        raise NoActiveAtomsError("The fit has no active basis vector; lower alpha")

    means = class_mean_spectra(spectra, labels)
    return match_templates(fit_result, means.to_numpy(), [int(c) for c in means.columns])


def match_templates(fit_result: FitResult, templates: np.ndarray,
                    class_ids: Optional[Sequence[int]] = None) -> List[AtomAttribution]:
    """Best active atom for every column of an L x D reference matrix."""
    if not fit_result.active_set:
        raise NoActiveAtomsError("The fit has no active basis vector; lower alpha")
    atoms = fit_result.dictionary.atoms
    if templates.shape[0] != atoms.shape[0]:
        raise DimensionMismatchError(f"templates have {templates.shape[0]} bins, atoms {atoms.shape[0]}")
    class_ids = list(class_ids) if class_ids is not None else list(range(templates.shape[1]))
    attributions = []
    for column, class_id in enumerate(class_ids):
        reference = templates[:, column]
        scored = [(_abs_correlation(atoms[:, atom], reference), atom) for atom in fit_result.active_set]
        correlation, atom = max(scored, key=lambda item: (item[0], -item[1]))
        attributions.append(AtomAttribution(int(class_id), int(atom), correlation))
        logger.debug(f"class {class_id}: atom {atom} (|r|={correlation:.3f})")
    return attributions


def attributions_frame(attributions: Sequence[AtomAttribution]) -> pd.DataFrame:
    return pd.DataFrame(
        [(a.class_id, a.atom, a.correlation) for a in attributions],
        columns=["class", "atom", "abs_correlation"],
    )
