from .peak_picker import (
    PickerParams,
    detect_peaks,
    filter_by_area,
    merge_line_spectra,
    normalize,
    pick_from_dictionary,
    pick_vector,
)

__all__ = [
    'PickerParams',
    'detect_peaks',
    'filter_by_area',
    'merge_line_spectra',
    'normalize',
    'pick_from_dictionary',
    'pick_vector',
]
