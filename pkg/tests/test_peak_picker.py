import numpy as np
import pytest

from peak_picking import (
    PickerParams,
    detect_peaks,
    filter_by_area,
    merge_line_spectra,
    normalize,
    pick_from_dictionary,
    pick_vector,
)
from simulation.spectra_simulator import gaussian_peak
from sparse_coding import FitResult, HyperParams
from spectra_model import CodeMatrix, Dictionary, LineSpectrum
from utils.errors import DegenerateInputError, InvalidParameterError, NoActiveAtomsError


def make_fit(atoms, active_rows):
    codes = np.zeros((atoms.shape[1], 3))
    codes[list(active_rows)] = 1.0
    norm_bound = float(np.max(np.sum(atoms ** 2, axis=0))) + 1.0
    return FitResult(
        dictionary=Dictionary(atoms, norm_bound),
        codes=CodeMatrix(codes),
        objective_history=(1.0,),
        active_set=tuple(active_rows),
        iterations_run=1,
        converged=True,
        hyperparams=HyperParams(alpha=1.0, norm_bound=norm_bound),
    )


def peaks_at(length, positions):
    return sum(gaussian_peak(length, p, 1.0, 1.5) for p in positions)


def test_normalize_examples():
    np.testing.assert_array_equal(normalize([0, 2, 0]), [0, 1, 0])
    np.testing.assert_array_equal(normalize([0, -2, 0]), [0, 1, 0])
    once = normalize([0.3, -0.1, 0.9, 0.2])
    np.testing.assert_array_equal(normalize(once), once)
    assert np.max(once) == 1.0


def test_normalize_zero_vector():
    with pytest.raises(DegenerateInputError):
        normalize([0.0, 0.0, 0.0])


def test_detect_constant_vector_has_no_peaks():
    assert len(detect_peaks(np.ones(10))) == 0


def test_detect_single_spike():
    peaks = detect_peaks([0, 0, 1, 0, 0], multiplier=2.5)
    assert peaks.peaks == ((2, 1.0),)


def test_detect_threshold_multiplier():
    vector = [0, 0.4, 0, 0.4, 0.2, 0.2, 0.2, 0.2]
    assert len(detect_peaks(vector, multiplier=2.5)) == 0
    assert detect_peaks(vector, multiplier=1.5).indices.tolist() == [1, 3]


def test_detect_plateau_takes_first_index():
    assert detect_peaks([0, 0, 1, 1, 1, 0, 0, 0], multiplier=1.0).indices.tolist() == [2]


def test_detect_keeps_rising_shoulder():
    peaks = detect_peaks([0, 1, 1, 2, 0, 0, 0, 0, 0, 0], multiplier=1.0)
    assert peaks.peaks == ((1, 1.0), (3, 2.0))


def test_detect_median_statistic():
    vector = [0, 0, 1, 0, 0, 0.3, 0, 0]
    assert detect_peaks(vector, 2.5, "median").indices.tolist() == [2, 5]
    assert detect_peaks(vector, 2.5, "mean").indices.tolist() == [2]


@pytest.mark.parametrize("scale", [0.1, 1.0, 7.0])
def test_detect_is_scale_invariant(rng, scale):
    vector = np.abs(rng.standard_normal(60)) + peaks_at(60, [15, 40]) * 4
    assert detect_peaks(scale * vector).indices.tolist() == detect_peaks(vector).indices.tolist()


def test_area_filter_width_sensitivity():
    spike = np.array([0, 0, 1, 0, 0], dtype=float)
    candidates = detect_peaks(spike)
    assert filter_by_area(spike, candidates, PickerParams(min_width=3)).indices.tolist() == [2]
    assert len(filter_by_area(spike, candidates, PickerParams(min_width=5))) == 0


def test_area_filter_keeps_gaussian_peak():
    vector = gaussian_peak(41, 20, 1.0, 3.0)
    candidates = detect_peaks(vector)
    assert filter_by_area(vector, candidates, PickerParams(min_width=3)).indices.tolist() == [20]


def test_area_filter_empty_input():
    assert len(filter_by_area(np.arange(5.0), LineSpectrum(), PickerParams())) == 0


def test_area_filter_is_monotone_in_width(rng):
    vector = normalize(np.abs(rng.standard_normal(80)) + peaks_at(80, [10, 35, 60]) * 3)
    candidates = detect_peaks(vector, 1.5)
    previous = set(candidates.indices.tolist())
    for width in range(1, 10):
        kept = set(filter_by_area(vector, candidates, PickerParams(min_width=width)).indices.tolist())
        assert kept <= previous
        previous = kept


def test_picker_params_validation():
    with pytest.raises(InvalidParameterError):
        PickerParams(multiplier=0)
    with pytest.raises(InvalidParameterError):
        PickerParams(min_width=0)
    with pytest.raises(InvalidParameterError):
        PickerParams(statistic="mode")


def test_pick_vector_ignores_sign_flip():
    vector = peaks_at(60, [20, 40])
    assert pick_vector(-vector, PickerParams()).indices.tolist() == pick_vector(vector, PickerParams()).indices.tolist()


def test_disjoint_atoms_merge_to_union():
    atoms = np.column_stack([peaks_at(80, [10, 30, 50]), peaks_at(80, [20, 40, 60])])
    merged, per_atom = pick_from_dictionary(make_fit(atoms, [0, 1]), PickerParams())
    assert merged.indices.tolist() == [10, 20, 30, 40, 50, 60]
    assert [p.indices.tolist() for p in per_atom] == [[10, 30, 50], [20, 40, 60]]


def test_neighbouring_peaks_collapse():
    atoms = np.column_stack([peaks_at(80, [30]), peaks_at(80, [31])])
    merged, _ = pick_from_dictionary(make_fit(atoms, [0, 1]), PickerParams(merge_tol=1))
    assert merged.indices.tolist() == [30]


def test_merge_prefers_higher_intensity():
    merged = merge_line_spectra([LineSpectrum(((30, 0.5),)), LineSpectrum(((31, 0.9),))], merge_tol=1)
    assert merged.peaks == ((31, 0.9),)
    kept_apart = merge_line_spectra([LineSpectrum(((30, 0.5),)), LineSpectrum(((31, 0.9),))], merge_tol=0)
    assert kept_apart.indices.tolist() == [30, 31]


def test_merged_peaks_are_separated(rng):
    spectra = [LineSpectrum.from_pairs([(int(i), float(v)) for i, v in
                                        zip(rng.choice(100, 8, replace=False), rng.uniform(0, 1, 8))])
               for _ in range(5)]
    merged = merge_line_spectra(spectra, merge_tol=2)
    assert np.all(np.diff(merged.indices) > 2)


def test_empty_active_set_raises():
    atoms = np.column_stack([peaks_at(40, [10]), peaks_at(40, [20])])
    with pytest.raises(NoActiveAtomsError):
        pick_from_dictionary(make_fit(atoms, []), PickerParams())
