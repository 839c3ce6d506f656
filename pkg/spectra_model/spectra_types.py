"""
Core data types: spectra, dictionaries, sparse codes and line spectra.

Matrices are stored column-oriented (one spectrum, atom or code vector per
column). All types are frozen and keep read-only copies of their arrays, so
instances can be shared between threads.
"""
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from utils.errors import DimensionMismatchError, InvalidParameterError

# A code-matrix row is active when some entry exceeds this magnitude.
ACTIVITY_EPS = 1e-8
# Relative slack on the squared-norm cap of dictionary atoms.
NORM_TOLERANCE = 1e-9


def _frozen_array(values, ndim: int, name: str) -> np.ndarray:
    array = np.array(values, dtype=float, copy=True)
    if array.ndim != ndim:
        raise DimensionMismatchError(f"{name} must be {ndim}-dimensional, got shape {array.shape}")
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class SpectraMatrix:
    """
    R spectra of length L, one spectrum per column.

    Attributes:
        data: L x R intensity matrix
        mz_axis: optional strictly increasing mz value of every bin
        class_labels: optional class id of every spectrum (evaluation only)
    """
    data: np.ndarray
    mz_axis: Optional[np.ndarray] = None
    class_labels: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        data = _frozen_array(self.data, 2, "SpectraMatrix.data")
        if data.shape[0] < 2 or data.shape[1] < 1:
            raise DimensionMismatchError(
                f"SpectraMatrix needs L >= 2 bins and R >= 1 spectra, got {data.shape}"
            )
        if not np.all(np.isfinite(data)):
            raise InvalidParameterError("SpectraMatrix contains non-finite entries")
        object.__setattr__(self, "data", data)

        if self.mz_axis is not None:
            mz_axis = _frozen_array(self.mz_axis, 1, "SpectraMatrix.mz_axis")
            if mz_axis.size != data.shape[0]:
                raise DimensionMismatchError(
                    f"mz axis has {mz_axis.size} values but spectra have {data.shape[0]} bins"
                )
            if not np.all(np.isfinite(mz_axis)) or not np.all(np.diff(mz_axis) > 0):
                raise InvalidParameterError("mz axis must be finite and strictly increasing")
            object.__setattr__(self, "mz_axis", mz_axis)

        if self.class_labels is not None:
            labels = tuple(int(label) for label in self.class_labels)
            if len(labels) != data.shape[1]:
                raise DimensionMismatchError(
                    f"{len(labels)} class labels given for {data.shape[1]} spectra"
                )
            object.__setattr__(self, "class_labels", labels)

    @property
    def length(self) -> int:
        return int(self.data.shape[0])

    @property
    def num_spectra(self) -> int:
        return int(self.data.shape[1])


@dataclass(frozen=True, eq=False)
class Dictionary:
    """
    L x K matrix of basis vectors whose squared column norms are capped by C.
    """
    atoms: np.ndarray
    norm_bound: float

    def __post_init__(self):
        if not self.norm_bound > 0:
            raise InvalidParameterError(f"norm bound C must be positive, got {self.norm_bound}")
        atoms = _frozen_array(self.atoms, 2, "Dictionary.atoms")
        if not np.all(np.isfinite(atoms)):
            raise InvalidParameterError("Dictionary contains non-finite entries")
        worst = float(np.max(np.sum(atoms ** 2, axis=0))) if atoms.size else 0.0
        if worst > self.norm_bound * (1 + NORM_TOLERANCE):
            raise InvalidParameterError(
                f"atom squared norm {worst:.6g} exceeds the bound C={self.norm_bound:.6g}"
            )
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "norm_bound", float(self.norm_bound))

    @property
    def num_atoms(self) -> int:
        return int(self.atoms.shape[1])


@dataclass(frozen=True, eq=False)
class CodeMatrix:
    """K x R matrix of sparse coefficients."""
    codes: np.ndarray

    def __post_init__(self):
        codes = _frozen_array(self.codes, 2, "CodeMatrix.codes")
        if not np.all(np.isfinite(codes)):
            raise InvalidParameterError("CodeMatrix contains non-finite entries")
        object.__setattr__(self, "codes", codes)


@dataclass(frozen=True, eq=False)
class LineSpectrum:
    """
    Detected peaks as (bin index, intensity) pairs, sorted by index.

    Attributes:
        peaks: (index, intensity) pairs with strictly increasing indices
        mz: optional mz value of every peak, when an mz axis is attached
        length: optional spectrum length used to bound-check indices
    """
    peaks: Tuple[Tuple[int, float], ...] = ()
    mz: Optional[Tuple[float, ...]] = None
    length: Optional[int] = None

    def __post_init__(self):
        peaks = tuple((int(index), float(intensity)) for index, intensity in self.peaks)
        indices = [index for index, _ in peaks]
        if any(b <= a for a, b in zip(indices, indices[1:])):
            raise InvalidParameterError(f"line spectrum indices must be strictly increasing: {indices}")
        if indices and indices[0] < 0:
            raise InvalidParameterError(f"negative peak index {indices[0]}")
        if self.length is not None and indices and indices[-1] >= self.length:
            raise InvalidParameterError(f"peak index {indices[-1]} outside spectrum of length {self.length}")
        if not all(np.isfinite(intensity) for _, intensity in peaks):
            raise InvalidParameterError("line spectrum intensities must be finite")
        object.__setattr__(self, "peaks", peaks)
        if self.mz is not None:
            mz = tuple(float(value) for value in self.mz)
            if len(mz) != len(peaks):
                raise DimensionMismatchError(f"{len(mz)} mz values for {len(peaks)} peaks")
            object.__setattr__(self, "mz", mz)

    @classmethod
    def from_pairs(cls, pairs: Sequence[Tuple[int, float]], mz_axis: Optional[np.ndarray] = None,
                   length: Optional[int] = None) -> "LineSpectrum":
        """Build from unsorted pairs, attaching mz positions when an axis is given."""
        ordered = sorted((int(i), float(v)) for i, v in pairs)
        mz = tuple(float(mz_axis[i]) for i, _ in ordered) if mz_axis is not None else None
        return cls(tuple(ordered), mz, length)

    @property
    def indices(self) -> np.ndarray:
        return np.array([index for index, _ in self.peaks], dtype=int)

    @property
    def intensities(self) -> np.ndarray:
        return np.array([intensity for _, intensity in self.peaks], dtype=float)

    def __len__(self) -> int:
        return len(self.peaks)
