from .spectra_simulator import (
    SimConfig,
    SimGroundTruth,
    class_templates,
    config_from_dict,
    config_to_dict,
    generate,
    load_preset,
    preset_names,
    replicate_seeds,
)

__all__ = [
    'SimConfig',
    'SimGroundTruth',
    'class_templates',
    'config_from_dict',
    'config_to_dict',
    'generate',
    'load_preset',
    'preset_names',
    'replicate_seeds',
]
