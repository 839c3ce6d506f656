"""
Command-line entry point: simulate, fit, pick, baseline, evaluate, select-alpha.

Exit codes: 0 success, 2 configuration or input error, 3 no active basis
vector (lower alpha), 1 internal error.
"""
import argparse
import json
import logging
import os
import sys
import traceback
from dataclasses import replace
from typing import Any, Dict, List, Optional

import pandas as pd
from dotenv import load_dotenv

from evaluation import (
    attribute_atoms,
    attributions_frame,
    grid_search,
    mean_spectrum_baseline,
    score,
    select_alpha,
)
from evaluation.grid_search import GRID_COLUMNS
from peak_picking import pick_from_dictionary
from simulation import SimGroundTruth, config_from_dict, config_to_dict, generate, load_preset
from sparse_coding import fit, load_fit_result, save_fit_result
from spectra_model import SpectraMatrix, crop_mz_range, load_spectra, save_line_spectrum, save_spectra
from utils.config import env_log_level
from utils.errors import ConfigError, NoActiveAtomsError
from utils.reporting import format_grid_summary_table
from utils.run_config import LOG_LEVELS, RunConfig, resolve_run_config, write_resolved_config

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INPUT = 2
EXIT_NO_ATOMS = 3

TRUTH_FILE = "truth.json"


def _configure_logging(level: str) -> None:
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format='%(asctime)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
        force=True,
    )


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--config', type=str, help='JSON config file overriding config/default_config.json')
    parser.add_argument('--seed', type=int, help='Seed of the command (simulation, initialization or replicates)')
    parser.add_argument('--jobs', type=int, help='Parallel workers (-1 for all cores, 1 for serial)')
    parser.add_argument('-o', '--out-dir', type=str, default='.', help='Output directory (default: current)')
    parser.add_argument('--log-level', type=str.upper, choices=LOG_LEVELS, help='Logging level')


def _add_input(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('input', type=str, help='Spectra CSV')
    parser.add_argument('--orientation', choices=['columns', 'rows'], default='columns',
                        help='columns: one mz bin per row; rows: one spectrum per row')
    parser.add_argument('--mz-axis', action='store_true', help='The file carries an mz axis')
    parser.add_argument('--mz-min', type=float, help='Lower end of the analysed mz window')
    parser.add_argument('--mz-max', type=float, help='Upper end of the analysed mz window')


def _add_learner(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--alpha', type=float, help='l1 weight')
    parser.add_argument('-C', '--norm-bound', type=float, help='Cap on the squared norm of every atom')
    parser.add_argument('--beta', type=float, help='Squared-l2 weight (> 0)')
    parser.add_argument('--num-atoms', type=int, help='Number of atoms K (default min(L, 2R))')
    parser.add_argument('--max-iters', type=int, help='Cap on alternating iterations')
    parser.add_argument('--rel-tol', type=float, help='Relative objective decrease that stops the fit')


def _add_picker(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--multiplier', type=float, help='Peak threshold as a multiple of the central value')
    parser.add_argument('--min-width', type=int, help='Minimal peak width in bins')
    parser.add_argument('--area-factor', type=float, help='Required fraction of the triangle area')
    parser.add_argument('--merge-tol', type=int, help='Merge peaks at most this many bins apart')
    parser.add_argument('--statistic', choices=['mean', 'median'], help='Central value of the threshold')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description='Peak picking on dictionaries learned by elastic-net sparse coding')
    subparsers = parser.add_subparsers(dest='command', required=True)

    simulate = subparsers.add_parser('simulate', help='Write a simulated spectra set and its ground truth')
    _add_common(simulate)
    simulate.add_argument('--preset', type=str, help='Noise preset (moderate or high)')
    simulate.add_argument('--num-spectra', type=int, help='Number of spectra R')
    simulate.add_argument('--length', type=int, help='Spectrum length L')
    simulate.add_argument('--num-classes', type=int, help='Number of classes D')
    simulate.add_argument('--noise-sigma', type=float, help='White-noise standard deviation')
    simulate.add_argument('--spurious-count', type=int, help='Spurious peaks per spectrum')
    simulate.set_defaults(handler=cmd_simulate)

    fit_parser = subparsers.add_parser('fit', help='Learn a dictionary on a spectra CSV')
    _add_common(fit_parser)
    _add_input(fit_parser)
    _add_learner(fit_parser)
    fit_parser.set_defaults(handler=cmd_fit)

    pick = subparsers.add_parser('pick', help='Pick peaks on the atoms of a fit directory')
    _add_common(pick)
    pick.add_argument('fit_dir', type=str, help='Directory written by the fit command')
    _add_picker(pick)
    pick.add_argument('--labels', type=str, help='truth.json with class labels; writes attribution.csv')
    pick.set_defaults(handler=cmd_pick)

    baseline = subparsers.add_parser('baseline', help='Pick peaks on the mean spectrum')
    _add_common(baseline)
    _add_input(baseline)
    _add_picker(baseline)
    baseline.add_argument('--truth', type=str, help='truth.json to score the result against')
    baseline.set_defaults(handler=cmd_baseline)

    evaluate = subparsers.add_parser('evaluate', help='Replicated (alpha, C, beta) grid search on simulations')
    _add_common(evaluate)
    _add_picker(evaluate)
    evaluate.add_argument('--preset', type=str, help='Noise preset of the replicates')
    evaluate.add_argument('--alphas', type=str, help='alpha axis, start:step:stop or comma list')
    evaluate.add_argument('--norm-bounds', type=str, help='C axis, start:step:stop or comma list')
    evaluate.add_argument('--betas', type=str, help='beta axis, comma list')
    evaluate.add_argument('--replicates', type=int, help='Replicates per cell')
    evaluate.add_argument('--match-tol', type=int, help='Matching tolerance in bins')
    evaluate.add_argument('--num-atoms', type=int, help='Number of atoms K')
    evaluate.set_defaults(handler=cmd_evaluate)

    selection = subparsers.add_parser('select-alpha', help='Largest alpha that keeps enough active atoms')
    _add_common(selection)
    _add_input(selection)
    _add_learner(selection)
    _add_picker(selection)
    selection.add_argument('--alphas', type=str, help='Ascending alpha candidates')
    selection.add_argument('--num-classes', type=int, help='Assumed number of classes D')
    selection.set_defaults(handler=cmd_select_alpha)
    return parser


def _arg(args: argparse.Namespace, name: str) -> Any:
    return getattr(args, name, None)


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """Nested config overrides from the parsed flags; unset flags stay None."""
    command = args.command
    seed = _arg(args, 'seed')
    overrides: Dict[str, Any] = {
        "jobs": _arg(args, 'jobs'),
        "log_level": _arg(args, 'log_level'),
        "simulation": {
            "preset": _arg(args, 'preset') if command == 'simulate' else None,
            "seed": seed if command == 'simulate' else None,
            "num_spectra": _arg(args, 'num_spectra'),
            "length": _arg(args, 'length'),
            "num_classes": _arg(args, 'num_classes') if command == 'simulate' else None,
            "noise_sigma": _arg(args, 'noise_sigma'),
            "spurious_count_per_spectrum": _arg(args, 'spurious_count'),
        },
        "sparse_coding": {
            "alpha": _arg(args, 'alpha'),
            "norm_bound": _arg(args, 'norm_bound'),
            "beta": _arg(args, 'beta'),
            "num_atoms": _arg(args, 'num_atoms') if command != 'evaluate' else None,
            "max_iters": _arg(args, 'max_iters'),
            "rel_tol": _arg(args, 'rel_tol'),
            "seed": seed if command in ('fit', 'select-alpha') else None,
        },
        "picking": {
            "multiplier": _arg(args, 'multiplier'),
            "min_width": _arg(args, 'min_width'),
            "area_factor": _arg(args, 'area_factor'),
            "merge_tol": _arg(args, 'merge_tol'),
            "statistic": _arg(args, 'statistic'),
        },
        "evaluation": {
            "preset": _arg(args, 'preset') if command == 'evaluate' else None,
            "alphas": _arg(args, 'alphas') if command == 'evaluate' else None,
            "norm_bounds": _arg(args, 'norm_bounds'),
            "betas": _arg(args, 'betas'),
            "replicates": _arg(args, 'replicates'),
            "base_seed": seed if command == 'evaluate' else None,
            "match_tol": _arg(args, 'match_tol'),
            "num_atoms": _arg(args, 'num_atoms') if command == 'evaluate' else None,
        },
        "select_alpha": {
            "alphas": _arg(args, 'alphas') if command == 'select-alpha' else None,
            "num_classes": _arg(args, 'num_classes') if command == 'select-alpha' else None,
        },
    }
    return overrides


def _read_truth(path: str) -> Dict[str, Any]:
    try:
        with open(path) as handle:
            return json.load(handle)
    except OSError as e:
        raise ConfigError(f"Cannot read ground truth {path}: {e}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"Ground truth {path} is not valid JSON: {e}")


def _read_spectra(path: str, orientation: str, mz_axis: bool, mz_min: Optional[float],
                  mz_max: Optional[float]) -> SpectraMatrix:
    spectra = load_spectra(path, orientation, mz_axis)
    if mz_min is not None or mz_max is not None:
        low = mz_min if mz_min is not None else float('-inf')
        high = mz_max if mz_max is not None else float('inf')
        spectra = crop_mz_range(spectra, low, high)
        logger.info(f"Cropped to {spectra.length} bins in mz window [{low}, {high}]")
    return spectra


def _load_input(args: argparse.Namespace) -> SpectraMatrix:
    return _read_spectra(args.input, args.orientation, args.mz_axis, args.mz_min, args.mz_max)


def _truth_beside(path: str) -> Optional[str]:
    candidate = os.path.join(os.path.dirname(os.path.abspath(path)), TRUTH_FILE)
    return candidate if os.path.isfile(candidate) else None


def cmd_simulate(args: argparse.Namespace, run: RunConfig) -> int:
    spectra, truth = generate(run.simulation)
    os.makedirs(args.out_dir, exist_ok=True)
    save_spectra(spectra, os.path.join(args.out_dir, 'spectra.csv'))
    payload = {"config": config_to_dict(run.simulation), **truth.to_dict()}
    with open(os.path.join(args.out_dir, TRUTH_FILE), 'w') as handle:
        json.dump(payload, handle, indent=2)
    write_resolved_config(run, args.out_dir)
    logger.info(f"Simulated {spectra.num_spectra} spectra of length {spectra.length} into {args.out_dir}")
    return EXIT_OK


def cmd_fit(args: argparse.Namespace, run: RunConfig) -> int:
    spectra = _load_input(args)
    hyperparams = replace(run.sparse_coding, jobs=run.jobs)
    result = fit(spectra, hyperparams)

    extra: Dict[str, Any] = {
        "input": os.path.abspath(args.input),
        "orientation": args.orientation,
        "has_mz_axis": bool(args.mz_axis),
        "mz_min": args.mz_min,
        "mz_max": args.mz_max,
        "mz_axis": spectra.mz_axis.tolist() if spectra.mz_axis is not None else None,
    }
    truth_path = _truth_beside(args.input)
    if truth_path:
        truth = _read_truth(truth_path)
        extra["simulated"] = True
        extra["truth"] = truth_path
        extra["min_width"] = config_from_dict(truth["config"]).min_width if "config" in truth else 3
    else:
        extra["simulated"] = False
    save_fit_result(result, args.out_dir, extra)
    write_resolved_config(run, args.out_dir, {"input": extra["input"]})
    print(f"converged={str(result.converged).lower()} iterations={result.iterations_run} "
          f"active_atoms={len(result.active_set)} objective={result.final_objective:.10g}")
    return EXIT_OK


def cmd_pick(args: argparse.Namespace, run: RunConfig) -> int:
    result, meta = load_fit_result(args.fit_dir)
    params = run.picking
    if not run.min_width_given:
        if not meta.get("simulated"):
            raise ConfigError("--min-width is required for fits of non-simulated data")
        params = replace(params, min_width=int(meta.get("min_width", 3)))

    mz_axis = meta.get("mz_axis")
    merged, per_atom = pick_from_dictionary(result, params, mz_axis)
    os.makedirs(args.out_dir, exist_ok=True)
    save_line_spectrum(merged, os.path.join(args.out_dir, 'peaks.csv'))
    for atom, line_spectrum in zip(result.active_set, per_atom):
        save_line_spectrum(line_spectrum, os.path.join(args.out_dir, f'atom_{atom}.csv'))

    if args.labels:
        truth = SimGroundTruth.from_dict(_read_truth(args.labels))
        spectra = _read_spectra(meta["input"], meta.get("orientation", "columns"), meta.get("has_mz_axis", False),
                                meta.get("mz_min"), meta.get("mz_max"))
        attributions = attribute_atoms(result, spectra, truth.class_of_spectrum)
        attributions_frame(attributions).to_csv(os.path.join(args.out_dir, 'attribution.csv'), index=False)

    write_resolved_config(run, args.out_dir, {"fit_dir": os.path.abspath(args.fit_dir)})
    print(f"peaks={len(merged)} active_atoms={len(per_atom)}")
    return EXIT_OK


def cmd_baseline(args: argparse.Namespace, run: RunConfig) -> int:
    spectra = _load_input(args)
    params = run.picking
    truth_path = args.truth or _truth_beside(args.input)
    if not run.min_width_given and truth_path is None:
        raise ConfigError("--min-width is required for non-simulated data")
    if not run.min_width_given:
        truth = _read_truth(truth_path)
        min_width = config_from_dict(truth["config"]).min_width if "config" in truth else 3
        params = replace(params, min_width=min_width)

    peaks = mean_spectrum_baseline(spectra, params)
    os.makedirs(args.out_dir, exist_ok=True)
    save_line_spectrum(peaks, os.path.join(args.out_dir, 'peaks.csv'))
    write_resolved_config(run, args.out_dir, {"input": os.path.abspath(args.input)})

    line = f"peaks={len(peaks)}"
    if truth_path:
        result = score(peaks, SimGroundTruth.from_dict(_read_truth(truth_path)), run.evaluation.match_tol)
        line += f" accuracy={result.accuracy:.4f} false_positives={result.false_positives}"
    print(line)
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace, run: RunConfig) -> int:
    grid = run.evaluation
    cfg = load_preset(grid.preset)
    hyperparams = replace(run.sparse_coding, num_atoms=grid.num_atoms, jobs=1)
    params = run.picking if run.min_width_given else replace(run.picking, min_width=cfg.min_width)

    os.makedirs(args.out_dir, exist_ok=True)
    grid_path = os.path.join(args.out_dir, 'grid.csv')
    pd.DataFrame(columns=GRID_COLUMNS).to_csv(grid_path, index=False)

    def append_cell(cell) -> None:
        pd.DataFrame([cell.as_row()], columns=GRID_COLUMNS).to_csv(grid_path, mode='a', header=False, index=False)

    logger.info(f"Evaluating {grid.cell_count} cells x {grid.replicates} replicates on preset '{grid.preset}'")
    result = grid_search(cfg, grid.alphas, grid.norm_bounds, grid.betas, grid.replicates, params,
                         hyperparams=hyperparams, base_seed=grid.base_seed, match_tol=grid.match_tol,
                         jobs=run.jobs, on_cell=append_cell)

    pd.DataFrame([{
        "replicates": result.replicate_count,
        "baseline_accuracy": result.baseline_accuracy,
        "baseline_fp": result.baseline_fp,
        "baseline_fp_per_spectrum": result.baseline_fp_per_spectrum,
        "match_tol": result.match_tol,
    }]).to_csv(os.path.join(args.out_dir, 'baseline.csv'), index=False)
    write_resolved_config(run, args.out_dir, {
        "replicate_checksums": list(result.replicate_checksums),
        "simulation_used": config_to_dict(cfg),
    })
    logger.info(format_grid_summary_table(result))
    return EXIT_OK


def cmd_select_alpha(args: argparse.Namespace, run: RunConfig) -> int:
    spectra = _load_input(args)
    hyperparams = replace(run.sparse_coding, jobs=run.jobs)
    params = run.picking if run.min_width_given else None
    selection = select_alpha(spectra, run.num_classes, run.select_alpha_grid, hyperparams, params)

    os.makedirs(args.out_dir, exist_ok=True)
    pd.DataFrame(selection.atom_counts, columns=["alpha", "active_atoms"]).to_csv(
        os.path.join(args.out_dir, 'alpha_selection.csv'), index=False)
    if selection.peaks is not None:
        save_line_spectrum(selection.peaks, os.path.join(args.out_dir, 'peaks.csv'))
    write_resolved_config(run, args.out_dir, {"chosen_alpha": selection.chosen, "warning": selection.warning})
    print(f"alpha={selection.chosen:g}" + (" warning=no-candidate-kept-enough-atoms" if selection.warning else ""))
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.log_level or env_log_level())

    try:
        run = resolve_run_config(args.config, _overrides(args))
        _configure_logging(run.log_level)
        return args.handler(args, run)
    except NoActiveAtomsError as e:
        logger.error(f"{e}")
        return EXIT_NO_ATOMS
    except ValueError as e:
        logger.error(f"{e}")
        return EXIT_INPUT
    except Exception as e:
        logger.error(f"Internal error: {e}")
        logger.debug(traceback.format_exc())
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
