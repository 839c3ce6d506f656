from dataclasses import replace

import numpy as np
import pytest

from evaluation import (
    GridCell,
    GridResult,
    accuracy_variance_ratio,
    attribute_atoms,
    attributions_frame,
    grid_search,
    match_templates,
    mean_spectrum_baseline,
    run_pipeline,
    score,
    select_alpha,
)
from peak_picking import PickerParams, pick_vector
from simulation import SimGroundTruth, class_templates, generate, load_preset, replicate_seeds
from simulation.spectra_simulator import gaussian_peak
from sparse_coding import FitResult, HyperParams, fit
from spectra_model import CodeMatrix, Dictionary, SpectraMatrix
from utils.errors import (
    DimensionMismatchError,
    EmptyInputError,
    InvalidParameterError,
    NoActiveAtomsError,
)

SMALL_LEARNER = HyperParams(alpha=0.2, norm_bound=10.0, num_atoms=6, max_iters=20)


def fixed_fit(atoms):
    codes = np.ones((atoms.shape[1], 4))
    norm_bound = float(np.max(np.sum(atoms ** 2, axis=0))) + 1.0
    return FitResult(
        dictionary=Dictionary(atoms, norm_bound),
        codes=CodeMatrix(codes),
        objective_history=(1.0,),
        active_set=tuple(range(atoms.shape[1])),
        iterations_run=1,
        converged=True,
        hyperparams=HyperParams(alpha=1.0, norm_bound=norm_bound),
    )


def test_score_identity():
    result = score([15, 30, 45], [15, 30, 45])
    assert result.accuracy == 1.0
    assert result.false_positives == 0


def test_score_extra_peak():
    result = score([15, 30, 45, 50], [15, 30, 45])
    assert result.accuracy == 1.0
    assert result.false_positives == 1


def test_score_half_found_with_extras():
    result = score([10, 21, 30, 80, 90], [10, 20, 30, 40, 50, 60])
    assert result.accuracy == 0.5
    assert result.false_positives == 2
    assert result.matched == ((10, 10), (21, 20), (30, 30))


def test_score_tolerance_and_one_to_one():
    assert score([12], [10], match_tol=1).accuracy == 0.0
    assert score([12], [10], match_tol=2).accuracy == 1.0
    result = score([10, 11], [10])
    assert result.matched == ((10, 10),)
    assert result.false_positives == 1


def test_score_ignores_input_order():
    truth = [10, 20, 30, 40]
    found = [41, 9, 21, 29, 60]
    assert score(found, truth) == score(list(reversed(found)), list(reversed(truth)))


def test_score_against_ground_truth_reports_fp_per_spectrum():
    truth = SimGroundTruth((0, 1, 0, 1), ((15,), (45,)))
    result = score([15, 45, 70, 90], truth)
    assert result.accuracy == 1.0
    assert result.fp_per_spectrum == 0.5


def test_score_rejects_negative_tolerance():
    with pytest.raises(InvalidParameterError):
        score([1], [1], match_tol=-1)


def test_baseline_on_identical_spectra_equals_single_spectrum():
    vector = gaussian_peak(60, 20, 1.0, 1.5) + gaussian_peak(60, 40, 0.8, 1.5)
    spectra = SpectraMatrix(np.tile(vector[:, None], (1, 5)))
    expected = pick_vector(vector, PickerParams())
    assert mean_spectrum_baseline(spectra, PickerParams()).indices.tolist() == expected.indices.tolist()


@pytest.mark.slow
@pytest.mark.parametrize("preset, accuracy_band, fp_band", [
    ("moderate", (0.92, 0.97), (1.2, 2.2)),
    ("high", (0.85, 0.91), None),
])
def test_baseline_calibration(preset, accuracy_band, fp_band):
    cfg = load_preset(preset)
    params = PickerParams(min_width=cfg.min_width)
    scores = []
    for seed in replicate_seeds(2009, 100):
        spectra, truth = generate(cfg.with_seed(seed))
        scores.append(score(mean_spectrum_baseline(spectra, params), truth))
    accuracy = np.mean([s.accuracy for s in scores])
    assert accuracy_band[0] <= accuracy <= accuracy_band[1]
    if fp_band is not None:
        assert fp_band[0] <= np.mean([s.false_positives for s in scores]) <= fp_band[1]


def test_select_alpha_takes_largest_qualifying(small_sim_config):
    spectra, _ = generate(small_sim_config)
    selection = select_alpha(spectra, 2, [0.01, 0.05], SMALL_LEARNER, PickerParams())
    assert selection.chosen == 0.05
    assert not selection.warning
    assert [alpha for alpha, _ in selection.atom_counts] == [0.01, 0.05]
    assert selection.peaks is not None and len(selection.peaks) > 0


def test_select_alpha_falls_back_to_smallest(small_sim_config):
    spectra, _ = generate(small_sim_config)
    selection = select_alpha(spectra, 2, [1e5, 1e6], SMALL_LEARNER, PickerParams())
    assert selection.chosen == 1e5
    assert selection.warning
    assert selection.atom_counts == ((1e5, 0), (1e6, 0))
    assert selection.peaks is None


def test_select_alpha_rejects_unsorted_candidates(small_sim_config):
    spectra, _ = generate(small_sim_config)
    with pytest.raises(InvalidParameterError):
        select_alpha(spectra, 2, [0.5, 0.1], SMALL_LEARNER)
    with pytest.raises(InvalidParameterError):
        select_alpha(spectra, 2, [], SMALL_LEARNER)


def test_single_cell_grid_matches_pipeline(small_sim_config):
    params = PickerParams()
    grid = grid_search(small_sim_config, [0.2], [10.0], [1e-10], replicates=2, params=params,
                       hyperparams=SMALL_LEARNER, base_seed=3)
    accuracies, fps = [], []
    for seed in replicate_seeds(3, 2):
        spectra, truth = generate(small_sim_config.with_seed(seed))
        merged, _ = run_pipeline(spectra, replace(SMALL_LEARNER, beta=1e-10), params)
        result = score(merged, truth)
        accuracies.append(result.accuracy)
        fps.append(result.false_positives)
    (cell,) = grid.cells
    assert cell.mean_accuracy == pytest.approx(np.mean(accuracies))
    assert cell.mean_fp == pytest.approx(np.mean(fps))
    assert cell.n_failed == 0
    assert len(grid.replicate_checksums) == 2


def test_grid_is_ordered_and_reproducible(small_sim_config):
    seen = []
    kwargs = dict(replicates=1, params=PickerParams(), hyperparams=SMALL_LEARNER, base_seed=1)
    first = grid_search(small_sim_config, [0.1, 0.3], [5.0, 10.0], [1e-10], on_cell=seen.append, **kwargs)
    second = grid_search(small_sim_config, [0.1, 0.3], [5.0, 10.0], [1e-10], jobs=2, **kwargs)
    assert [(cell.alpha, cell.norm_bound) for cell in seen] == [(0.1, 5.0), (0.1, 10.0), (0.3, 5.0), (0.3, 10.0)]
    assert first.to_frame().equals(second.to_frame())


def test_grid_failed_cells_are_counted(small_sim_config):
    grid = grid_search(small_sim_config, [1e6], [10.0], [1e-10], replicates=2, params=PickerParams(),
                       hyperparams=SMALL_LEARNER)
    (cell,) = grid.cells
    assert cell.n_failed == 2
    assert cell.mean_accuracy == 0.0
    assert cell.mean_fp == 0.0


def test_grid_rejects_empty_axes(small_sim_config):
    with pytest.raises(InvalidParameterError):
        grid_search(small_sim_config, [], [10.0], [1e-10], replicates=1, params=PickerParams())


def constructed_grid(accuracies):
    cells = tuple(
        GridCell(alpha, c, 1.0, accuracy, 1.0, 0.1, 0)
        for (alpha, c), accuracy in zip([(1.0, 10.0), (1.0, 20.0), (2.0, 10.0), (2.0, 20.0)], accuracies)
    )
    return GridResult((1.0, 2.0), (10.0, 20.0), (1.0,), cells, 1, 0.5, 2.0, 0.04, ("x",))


def test_variance_ratio():
    assert accuracy_variance_ratio(constructed_grid([0.2, 0.4, 0.6, 0.8]), 1.0) == pytest.approx(4.0)
    assert accuracy_variance_ratio(constructed_grid([0.2, 0.2, 0.8, 0.8]), 1.0) == float("inf")
    assert np.isnan(accuracy_variance_ratio(constructed_grid([0.5] * 4), 1.0))


def test_accuracy_surface_and_best_cells():
    grid = constructed_grid([0.2, 0.4, 0.6, 0.8])
    surface = grid.accuracy_surface(1.0)
    assert surface.loc[2.0, 20.0] == 0.8
    assert grid.best_cells(top=1)[0].mean_accuracy == 0.8
    with pytest.raises(InvalidParameterError):
        grid.accuracy_surface(0.5)


def test_attribute_atoms_finds_class_atoms(small_sim_config, rng):
    spectra, _ = generate(small_sim_config)
    templates = class_templates(small_sim_config)
    atoms = np.column_stack([templates[:, 1], rng.standard_normal(small_sim_config.length), -templates[:, 0]])
    attributions = attribute_atoms(fixed_fit(atoms), spectra)
    assert [(a.class_id, a.atom) for a in attributions] == [(0, 2), (1, 0)]
    assert all(a.correlation > 0.9 for a in attributions)
    frame = attributions_frame(attributions)
    assert list(frame.columns) == ["class", "atom", "abs_correlation"]


@pytest.mark.slow
def test_learned_atoms_follow_class_means_on_moderate_noise():
    cfg = load_preset("moderate")
    spectra, _ = generate(cfg.with_seed(replicate_seeds(2009, 1)[0]))
    fit_result = fit(spectra, HyperParams(alpha=5.0, norm_bound=100.0, num_atoms=cfg.num_classes))
    attributions = attribute_atoms(fit_result, spectra)
    assert len({a.atom for a in attributions}) == cfg.num_classes
    assert all(a.correlation >= 0.9 for a in attributions)
    # white noise left in a 25-spectrum average caps the match with the noiseless shape
    assert all(a.correlation >= 0.6 for a in match_templates(fit_result, class_templates(cfg)))


def test_attribution_needs_labels_and_atoms(small_sim_config):
    spectra, _ = generate(small_sim_config)
    fit_result = fixed_fit(class_templates(small_sim_config))
    with pytest.raises(EmptyInputError):
        attribute_atoms(fit_result, SpectraMatrix(spectra.data))
    with pytest.raises(DimensionMismatchError):
        match_templates(fit_result, np.ones((5, 2)))
    empty = replace(fit_result, active_set=())
    with pytest.raises(NoActiveAtomsError):
        match_templates(empty, class_templates(small_sim_config))
