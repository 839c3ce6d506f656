"""
Synthetic multi-class spectra with ground truth.

Every spectrum is the sum of its class's Gaussian peaks (heights jittered
around h), a few smaller spurious Gaussian peaks at random positions away from
the true peaks, and white Gaussian noise.
"""
import logging
from dataclasses import asdict, dataclass, replace
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from spectra_model.spectra_types import SpectraMatrix
from utils.config import load_default_config
from utils.errors import SimulationConfigError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SimConfig:
    """
    Settings of the spectra simulator. The defaults are the calibrated moderate preset.

    Attributes:
        length: spectrum length L
        num_spectra: number of spectra R
        num_classes: number of classes D
        peaks_per_class: true peaks per class (ignored when positions are given)
        class_peak_positions: per-class bin positions; None spreads D * peaks_per_class
            positions evenly and deals them to the classes in turn
        peak_height_mean: h
        peak_height_jitter: relative s.d. of true-peak heights
        peak_sigma: Gaussian peak width in bins
        spurious_count_per_spectrum: spurious peaks added to every spectrum
        spurious_height_fraction: spurious height as a fraction of h, in (0, 1)
        noise_sigma: s.d. of the white noise
        min_width: minimal peak width; spurious peaks keep 2 * min_width bins away from true peaks
        seed: RNG seed
    """
    length: int = 110
    num_spectra: int = 50
    num_classes: int = 2
    peaks_per_class: int = 3
    class_peak_positions: Optional[Tuple[Tuple[int, ...], ...]] = None
    peak_height_mean: float = 1.0
    peak_height_jitter: float = 0.1
    peak_sigma: float = 1.5
    spurious_count_per_spectrum: int = 4
    spurious_height_fraction: float = 0.43
    noise_sigma: float = 0.8
    min_width: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.length < 2 or self.num_spectra < 1 or self.num_classes < 1:
            raise SimulationConfigError(
                f"need length >= 2, num_spectra >= 1 and num_classes >= 1, got "
                f"{self.length}, {self.num_spectra}, {self.num_classes}"
            )
        if self.class_peak_positions is None:
            total = self.num_classes * self.peaks_per_class
            step = self.length // (total + 1)
            if self.peaks_per_class < 1 or step < 1:
                raise SimulationConfigError(f"cannot place {total} peaks in a spectrum of length {self.length}")
            positions = tuple(
                tuple(step * (k + 1) for k in range(total) if k % self.num_classes == c)
                for c in range(self.num_classes)
            )
            object.__setattr__(self, "class_peak_positions", positions)
        else:
            positions = tuple(tuple(sorted(int(p) for p in ps)) for ps in self.class_peak_positions)
            object.__setattr__(self, "class_peak_positions", positions)

        if len(positions) != self.num_classes:
            raise SimulationConfigError(f"{len(positions)} position lists for {self.num_classes} classes")
        flat = [p for ps in positions for p in ps]
        if any(not 0 <= p < self.length for p in flat):
            raise SimulationConfigError(f"peak positions must lie in [0, {self.length}): {positions}")
        if len(set(flat)) != len(flat):
            raise SimulationConfigError(f"class peak positions must be pairwise disjoint: {positions}")
        if not 0 < self.spurious_height_fraction < 1:
            raise SimulationConfigError(
                f"spurious_height_fraction must lie in (0, 1), got {self.spurious_height_fraction}"
            )
        if not self.noise_sigma > 0:
            raise SimulationConfigError(f"noise_sigma must be positive, got {self.noise_sigma}")
        if not self.peak_sigma > 0 or not self.peak_height_mean > 0:
            raise SimulationConfigError("peak_sigma and peak_height_mean must be positive")
        if self.peak_height_jitter < 0 or self.spurious_count_per_spectrum < 0 or self.min_width < 1:
            raise SimulationConfigError("jitter and spurious count must be >= 0 and min_width >= 1")

    def with_seed(self, seed: int) -> "SimConfig":
        return replace(self, seed=int(seed))


@dataclass(frozen=True)
class SimGroundTruth:
    """Class of every spectrum and the true peak positions of every class."""
    class_of_spectrum: Tuple[int, ...]
    true_positions: Tuple[Tuple[int, ...], ...]

    @property
    def union_positions(self) -> Tuple[int, ...]:
        return tuple(sorted({p for ps in self.true_positions for p in ps}))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "class_of_spectrum": list(self.class_of_spectrum),
            "true_positions": [list(ps) for ps in self.true_positions],
            "union_positions": list(self.union_positions),
        }

    @classmethod
    def from_dict(cls, payload: Dict[str, Any]) -> "SimGroundTruth":
        try:
            return cls(
                tuple(int(c) for c in payload["class_of_spectrum"]),
                tuple(tuple(int(p) for p in ps) for ps in payload["true_positions"]),
            )
        except KeyError as e:
            raise SimulationConfigError(f"ground truth is missing key {e}")


def gaussian_peak(length: int, position: float, height: float, sigma: float) -> np.ndarray:
    bins = np.arange(length, dtype=float)
    return height * np.exp(-0.5 * ((bins - position) / sigma) ** 2)


def spurious_candidates(cfg: SimConfig) -> np.ndarray:
    """Bins farther than 2 * min_width from every true peak."""
    bins = np.arange(cfg.length)
    guard = 2 * cfg.min_width
    true = np.array([p for ps in cfg.class_peak_positions for p in ps])
    return bins[np.all(np.abs(bins[:, None] - true[None, :]) > guard, axis=1)]


def class_templates(cfg: SimConfig) -> np.ndarray:
    """L x D noiseless templates: unit-height (h) true peaks only."""
    templates = np.zeros((cfg.length, cfg.num_classes))
    for c, positions in enumerate(cfg.class_peak_positions):
        for p in positions:
            templates[:, c] += gaussian_peak(cfg.length, p, cfg.peak_height_mean, cfg.peak_sigma)
    return templates


def generate(cfg: SimConfig) -> Tuple[SpectraMatrix, SimGroundTruth]:
    """
    Simulate a labelled spectra set.

    Spectra are dealt to the classes in turn. Output is fully determined by cfg.seed.

    Raises:
        SimulationConfigError: If the guard band leaves no bin for spurious peaks.
    """
    legal = spurious_candidates(cfg)
    if cfg.spurious_count_per_spectrum > 0 and legal.size == 0:
        raise SimulationConfigError(
            f"guard band of {2 * cfg.min_width} bins around the true peaks leaves no position for spurious peaks"
        )

    rng = np.random.default_rng(cfg.seed)
    h = cfg.peak_height_mean
    labels = [r % cfg.num_classes for r in range(cfg.num_spectra)]
    data = np.zeros((cfg.length, cfg.num_spectra))

    for r, label in enumerate(labels):
        positions = cfg.class_peak_positions[label]
        heights = h * (1.0 + cfg.peak_height_jitter * rng.standard_normal(len(positions)))
        heights = np.maximum(heights, 0.5 * h)
        for position, height in zip(positions, heights):
            data[:, r] += gaussian_peak(cfg.length, position, height, cfg.peak_sigma)
        if cfg.spurious_count_per_spectrum:
            for position in rng.choice(legal, size=cfg.spurious_count_per_spectrum, replace=True):
                data[:, r] += gaussian_peak(cfg.length, position, cfg.spurious_height_fraction * h, cfg.peak_sigma)
        data[:, r] += rng.normal(0.0, cfg.noise_sigma, cfg.length)

    truth = SimGroundTruth(tuple(labels), cfg.class_peak_positions)
    return SpectraMatrix(data, class_labels=tuple(labels)), truth


def replicate_seeds(base_seed: int, count: int) -> List[int]:
    """
    Distinct, reproducible child seeds for count replicates.

    Replicates differ in noise, heights and spurious placement only; the class
    peak positions come from the shared SimConfig.
    """
    if count < 1:
        raise SimulationConfigError(f"need at least one replicate, got {count}")
    seeds: List[int] = []
    sequence = np.random.SeedSequence(base_seed)
    while len(seeds) < count:
        for child in sequence.spawn(count - len(seeds)):
            seed = int(child.generate_state(1, dtype=np.uint64)[0])
            if seed not in seeds:
                seeds.append(seed)
    return seeds


def preset_names() -> List[str]:
    return sorted(load_default_config().get("simulation_presets", {}))


def load_preset(name: str, **overrides) -> SimConfig:
    """
    SimConfig of a named noise preset from config/default_config.json.

    Raises:
        SimulationConfigError: If the preset is unknown (the message lists valid ones).
    """
    presets = load_default_config().get("simulation_presets", {})
    if name not in presets:
        raise SimulationConfigError(f"Unknown preset '{name}'; valid presets: {', '.join(sorted(presets))}")
    values = dict(presets[name])
    values.update({key: value for key, value in overrides.items() if value is not None})
    try:
        return SimConfig(**values)
    except TypeError as e:
        raise SimulationConfigError(f"Invalid simulation setting in preset '{name}': {e}")


def config_to_dict(cfg: SimConfig) -> Dict[str, Any]:
    payload = asdict(cfg)
    payload["class_peak_positions"] = [list(ps) for ps in cfg.class_peak_positions]
    return payload


def config_from_dict(payload: Dict[str, Any]) -> SimConfig:
    values = dict(payload)
    if values.get("class_peak_positions") is not None:
        values["class_peak_positions"] = tuple(tuple(ps) for ps in values["class_peak_positions"])
    try:
        return SimConfig(**values)
    except TypeError as e:
        raise SimulationConfigError(f"Invalid simulation settings: {e}")
