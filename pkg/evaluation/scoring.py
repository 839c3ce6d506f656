"""
Scoring of picked peaks against simulation ground truth, and the
mean-spectrum reference method.
"""
import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from peak_picking.peak_picker import PickerParams, pick_vector
from simulation.spectra_simulator import SimGroundTruth
from spectra_model.spectra_types import LineSpectrum, SpectraMatrix
from utils.errors import InvalidParameterError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Score:
    """
    Attributes:
        accuracy: matched / number of true positions, in [0, 1]
        false_positives: found peaks without a matching true peak (per dataset)
        matched: (found, truth) position pairs
        match_tol: matching tolerance in bins
        fp_per_spectrum: false_positives divided by the number of spectra, when known
    """
    accuracy: float
    false_positives: int
    matched: Tuple[Tuple[int, int], ...]
    match_tol: int
    fp_per_spectrum: Optional[float] = None


def _positions(items: Union[LineSpectrum, Iterable[int]]) -> Sequence[int]:
    if isinstance(items, LineSpectrum):
        return [int(i) for i in items.indices]
    return [int(i) for i in items]


def score(found: Union[LineSpectrum, Iterable[int]], truth: Union[SimGroundTruth, Iterable[int]],
          match_tol: int = 1, num_spectra: Optional[int] = None) -> Score:
    """
    Match found peaks to true peaks greedily, nearest pairs first.

    Each true and each found position is used at most once; ties are broken by
    position so the result does not depend on the input order.

    Args:
        found: picked peaks (line spectrum or bin indices)
        truth: ground truth (its union positions) or true bin indices
        match_tol: largest admissible distance in bins
        num_spectra: spectra per dataset, for the per-spectrum FP figure
            (taken from the ground truth when omitted)
    """
    if match_tol < 0:
        raise InvalidParameterError(f"match_tol must be non-negative, got {match_tol}")
    if isinstance(truth, SimGroundTruth):
        true_positions = list(truth.union_positions)
        num_spectra = num_spectra or len(truth.class_of_spectrum)
    else:
        true_positions = sorted(set(int(p) for p in truth))
    found_positions = sorted(set(_positions(found)))

    pairs = sorted(
        (abs(f - t), t, f) for f in found_positions for t in true_positions if abs(f - t) <= match_tol
    )
    used_found, used_truth = set(), set()
    matched = []
    for _, t, f in pairs:
        if f in used_found or t in used_truth:
            continue
        used_found.add(f)
        used_truth.add(t)
        matched.append((f, t))

    accuracy = len(matched) / len(true_positions) if true_positions else 1.0
    false_positives = len(found_positions) - len(matched)
    return Score(
        accuracy=float(accuracy),
        false_positives=int(false_positives),
        matched=tuple(sorted(matched)),
        match_tol=int(match_tol),
        fp_per_spectrum=false_positives / num_spectra if num_spectra else None,
    )


def mean_spectrum(spectra: SpectraMatrix) -> np.ndarray:
    return spectra.data.mean(axis=1)


def mean_spectrum_baseline(spectra: SpectraMatrix, params: PickerParams) -> LineSpectrum:
    """Reference method: the same peak picking applied to the mean of all spectra."""
    return pick_vector(mean_spectrum(spectra), params, spectra.mz_axis)
