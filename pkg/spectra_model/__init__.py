from .spectra_types import (
    ACTIVITY_EPS,
    CodeMatrix,
    Dictionary,
    LineSpectrum,
    SpectraMatrix,
)
from .spectra_io import (
    crop_mz_range,
    load_line_spectrum,
    load_spectra,
    save_line_spectrum,
    save_spectra,
)

__all__ = [
    'ACTIVITY_EPS',
    'CodeMatrix',
    'Dictionary',
    'LineSpectrum',
    'SpectraMatrix',
    'crop_mz_range',
    'load_line_spectrum',
    'load_spectra',
    'save_line_spectrum',
    'save_spectra',
]
