from .scoring import Score, mean_spectrum, mean_spectrum_baseline, score
from .pipeline import run_pipeline
from .grid_search import GridCell, GridResult, accuracy_variance_ratio, data_checksum, grid_search
from .alpha_selection import AlphaSelection, select_alpha
from .atom_attribution import AtomAttribution, attribute_atoms, attributions_frame, class_mean_spectra, match_templates

__all__ = [
    'Score',
    'mean_spectrum',
    'mean_spectrum_baseline',
    'score',
    'run_pipeline',
    'GridCell',
    'GridResult',
    'accuracy_variance_ratio',
    'data_checksum',
    'grid_search',
    'AlphaSelection',
    'select_alpha',
    'AtomAttribution',
    'attribute_atoms',
    'attributions_frame',
    'class_mean_spectra',
    'match_templates',
]
