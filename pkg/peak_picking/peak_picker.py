"""
Peak picking on learned basis vectors.

Each active atom is normalized, local maxima above a multiple of the vector's
central value are taken as candidate peaks, and candidates whose area over the
minimal peak width is too small are dropped. Per-atom results are merged into
a single line spectrum.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid

from spectra_model.spectra_types import LineSpectrum
from utils.errors import DegenerateInputError, InvalidParameterError, NoActiveAtomsError

logger = logging.getLogger(__name__)

STATISTICS = ("mean", "median")


@dataclass(frozen=True)
class PickerParams:
    """
    Peak-picking settings.

    Attributes:
        multiplier: a peak must exceed multiplier times the central value
        min_width: minimal peak width in bins used by the area check
        area_factor: required fraction of the triangle area v[i] * min_width / 2
        merge_tol: peaks from different atoms at most this many bins apart are merged
        statistic: central value of the threshold, "mean" or "median"
    """
    multiplier: float = 2.5
    min_width: int = 3
    area_factor: float = 0.5
    merge_tol: int = 1
    statistic: str = "mean"

    def __post_init__(self):
        if not self.multiplier > 0:
            raise InvalidParameterError(f"multiplier must be positive, got {self.multiplier}")
        if self.min_width < 1:
            raise InvalidParameterError(f"min_width must be at least 1, got {self.min_width}")
        if not self.area_factor > 0:
            raise InvalidParameterError(f"area_factor must be positive, got {self.area_factor}")
        if self.merge_tol < 0:
            raise InvalidParameterError(f"merge_tol must be non-negative, got {self.merge_tol}")
        if self.statistic not in STATISTICS:
            raise InvalidParameterError(f"statistic must be one of {STATISTICS}, got '{self.statistic}'")


def normalize(vector: Sequence[float]) -> np.ndarray:
    """
    Scale a vector so that its largest-magnitude entry becomes +1.

    Vectors whose dominant extremum is negative (atoms learned with flipped sign)
    are negated first.

    Raises:
        DegenerateInputError: If the vector is zero.
    """
    values = np.asarray(vector, dtype=float)
    if values.size == 0 or not np.any(values):
        raise DegenerateInputError("Cannot normalize a zero vector")
    extremum = values[int(np.argmax(np.abs(values)))]
    return values / extremum


def detect_peaks(vector: Sequence[float], multiplier: float = 2.5, statistic: str = "mean") -> LineSpectrum:
    """
    Local maxima higher than multiplier times the mean (or median) of the vector.

    A bin is a maximum when it rises from its left neighbour and does not fall
    below its right one, so a plateau counts once at its first index, even as
    a shoulder that rises again. The first and last bins are never peaks.
    """
    values = np.asarray(vector, dtype=float)
    if values.ndim != 1 or values.size < 3:
        raise InvalidParameterError(f"peak detection needs a 1-D vector of length >= 3, got shape {values.shape}")
    center = float(np.median(values)) if statistic == "median" else float(np.mean(values))
    threshold = multiplier * center

    interior = values[1:-1]
    maxima = (values[:-2] < interior) & (interior >= values[2:]) & (interior > threshold)
    peaks = [(int(i), float(values[i])) for i in np.flatnonzero(maxima) + 1]
    return LineSpectrum(tuple(peaks), length=values.size)


def peak_area(vector: np.ndarray, index: int, min_width: int) -> float:
    """Trapezoidal area of the positive part over the window index +- min_width // 2."""
    half = min_width // 2
    low = max(0, index - half)
    high = min(vector.size - 1, index + half)
    return float(trapezoid(np.maximum(vector[low:high + 1], 0.0)))


def _narrowest_failing_width(values: np.ndarray, index: int, params: PickerParams) -> Optional[int]:
    for width in range(2, params.min_width + 1):
        reference = params.area_factor * values[index] * width / 2.0
        if peak_area(values, index, width) < reference:
            return width
    return None


def filter_by_area(vector: Sequence[float], line_spectrum: LineSpectrum, params: PickerParams) -> LineSpectrum:
    """
    Keep peaks whose area is at least area_factor times that of a triangle of
    the peak's height and base w, for every width w from 2 up to min_width.
    Single-bin spikes fail this check once min_width reaches 5, and the kept
    set never grows with min_width.
    """
    values = np.asarray(vector, dtype=float)
    kept = []
    for index, intensity in line_spectrum.peaks:
        failed_width = _narrowest_failing_width(values, index, params)
        if failed_width is None:
            kept.append((index, intensity))
        else:
            logger.debug(f"Dropped peak at bin {index}: area too small at width {failed_width}")
    mz = None
    if line_spectrum.mz is not None:
        lookup = dict(zip(line_spectrum.indices.tolist(), line_spectrum.mz))
        mz = tuple(lookup[index] for index, _ in kept)
    return LineSpectrum(tuple(kept), mz, line_spectrum.length)


def pick_vector(vector: Sequence[float], params: PickerParams, mz_axis: Optional[np.ndarray] = None) -> LineSpectrum:
    """normalize -> detect_peaks -> filter_by_area for one vector."""
    normalized = normalize(vector)
    candidates = detect_peaks(normalized, params.multiplier, params.statistic)
    picked = filter_by_area(normalized, candidates, params)
    if mz_axis is not None:
        return LineSpectrum.from_pairs(picked.peaks, mz_axis, picked.length)
    return picked


def merge_line_spectra(spectra: Sequence[LineSpectrum], merge_tol: int,
                       mz_axis: Optional[np.ndarray] = None, length: Optional[int] = None) -> LineSpectrum:
    """
    Union of several line spectra where peaks at most merge_tol bins apart
    collapse onto the one with the highest intensity (lowest index on ties).
    """
    candidates = sorted(
        ((index, intensity) for spectrum in spectra for index, intensity in spectrum.peaks),
        key=lambda peak: (-peak[1], peak[0]),
    )
    accepted: List[Tuple[int, float]] = []
    for index, intensity in candidates:
        if all(abs(index - other) > merge_tol for other, _ in accepted):
            accepted.append((index, intensity))
    return LineSpectrum.from_pairs(accepted, mz_axis, length)


def pick_from_dictionary(fit_result, params: PickerParams,
                         mz_axis: Optional[np.ndarray] = None) -> Tuple[LineSpectrum, List[LineSpectrum]]:
    """
    Pick peaks on every active atom of a fit and merge the results.

    Args:
        fit_result: FitResult of the dictionary learner
        params: picking settings
        mz_axis: optional mz axis attached to the output

    Returns:
        The merged line spectrum and one line spectrum per active atom, in
        the order of fit_result.active_set.

    Raises:
        NoActiveAtomsError: If the fit has no active atom (alpha too large).
    """
    if not fit_result.active_set:
        raise NoActiveAtomsError("The fit has no active basis vector; lower alpha")
    atoms = fit_result.dictionary.atoms
    per_atom = [pick_vector(atoms[:, atom], params, mz_axis) for atom in fit_result.active_set]
    merged = merge_line_spectra(per_atom, params.merge_tol, mz_axis, atoms.shape[0])
    logger.info(f"Picked {len(merged)} peaks from {len(per_atom)} active atoms")
    return merged, per_atom
