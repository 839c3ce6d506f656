import numpy as np
from typing import Any, Dict, Optional, Sequence


def format_grid_summary_table(grid, top: int = 5) -> str:
    """
    Formats the best grid cells next to the mean-spectrum baseline as a text table.

    Args:
        grid: GridResult of a grid search.
        top: Number of best cells to list.

    Returns:
        A string containing the formatted summary table.
    """
    lines = []
    lines.append("\n---------------- GRID SEARCH SUMMARY ----------------")
    lines.append(f"Replicates per cell: {grid.replicate_count}   match tolerance: {grid.match_tol} bins")
    headers = ['Setting', 'Accuracy', 'FP/dataset', 'FP/spectrum', 'Failed']
    lines.append(f"{headers[0]:<30} {headers[1]:<10} {headers[2]:<11} {headers[3]:<12} {headers[4]:<6}")
    lines.append("-" * 72)

    for cell in grid.best_cells(top):
        setting = f"a={cell.alpha:g} C={cell.norm_bound:g} b={cell.beta:g}"
        lines.append(f"{setting:<30} {cell.mean_accuracy:<10.3f} {cell.mean_fp:<11.2f} "
                     f"{cell.mean_fp_per_spectrum:<12.4f} {cell.n_failed:<6d}")

    lines.append("-" * 72)
    lines.append(f"{'Mean-spectrum baseline':<30} {grid.baseline_accuracy:<10.3f} {grid.baseline_fp:<11.2f} "
                 f"{grid.baseline_fp_per_spectrum:<12.4f}")
    lines.append("-----------------------------------------------------")
    return "\n".join(lines)


def format_criteria_report(results: Sequence[Dict[str, Any]]) -> str:
    """
    Formats acceptance-check outcomes as a text table.

    Args:
        results: Dicts with 'name', 'passed' and optional 'value'/'detail' entries.

    Returns:
        A string containing the formatted report.
    """
    lines = ["\n---------------- ACCEPTANCE REPORT ----------------"]
    lines.append(f"{'Check':<40} {'Result':<8} Detail")
    lines.append("-" * 72)
    for result in results:
        status = "PASS" if result["passed"] else "FAIL"
        value: Optional[float] = result.get("value")
        detail = result.get("detail", "")
        if value is not None and not np.isnan(value):
            detail = f"{value:.4g} {detail}".strip()
        lines.append(f"{result['name']:<40} {status:<8} {detail}")
    lines.append("-" * 72)
    passed = sum(1 for result in results if result["passed"])
    lines.append(f"{passed}/{len(results)} checks passed")
    return "\n".join(lines)
