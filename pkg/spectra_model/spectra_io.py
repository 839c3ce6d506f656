"""
CSV ingestion and serialization for spectra and line spectra.

Spectra CSV: one mz bin per row ("columns" orientation, the canonical one) or
one spectrum per row ("rows" orientation). When an mz axis is stored it is the
first row in "rows" orientation and the first column in "columns"
orientation, so a file and its transpose describe the same data.
"""

import logging
import os
import re
from typing import Optional

import numpy as np
import pandas as pd

from utils.errors import (
    EmptyInputError,
    SpectraFormatError,
    SpectraParseError,
)
from .spectra_types import LineSpectrum, SpectraMatrix

logger = logging.getLogger(__name__)

ORIENTATIONS = ("columns", "rows")
# 17 significant digits round-trip every IEEE double exactly.
FLOAT_FORMAT = "%.17g"


def _check_orientation(orientation: str) -> None:
    if orientation not in ORIENTATIONS:
        raise SpectraFormatError(
            f"Unknown orientation '{orientation}'; expected one of {', '.join(ORIENTATIONS)}"
        )


def _read_numeric_table(path: str) -> np.ndarray:
    """
    Read a rectangular numeric CSV into a 2-D array.

    Blank lines are skipped; rows and columns in error messages are 1-based
    and count data rows only.

    Raises:
        SpectraFormatError: If the file is missing or rows differ in length.
        SpectraParseError: If a cell is not a finite number (1-based row/column).
        EmptyInputError: If the file holds no data rows.
    """
    if not os.path.isfile(path):
        raise SpectraFormatError(f"Spectra file not found: {path}")

    try:
        frame = pd.read_csv(path, header=None, dtype=str, keep_default_na=False, skip_blank_lines=True)
    except pd.errors.EmptyDataError:
        raise EmptyInputError(f"Spectra file {path} is empty")
    except pd.errors.ParserError as e:
        # "Expected 3 fields in line 2, saw 4"
        match = re.search(r"line (\d+)", str(e))
        row = int(match.group(1)) if match else None
        raise SpectraFormatError(f"Ragged CSV {path}: row {row} has more cells than the first row", row=row)
    except OSError as e:
        raise SpectraFormatError(f"Cannot read spectra file {path}: {e}")

    frame = frame.apply(lambda column: column.str.strip())
    frame = frame[~frame.fillna("").eq("").all(axis=1)].reset_index(drop=True)
    if frame.empty:
        raise EmptyInputError(f"Spectra file {path} is empty")

    # the parser pads short rows with NaN or "" depending on the pandas version
    missing = frame.isna() | frame.eq("")
    short_rows = frame.index[missing.iloc[:, -1]]
    if len(short_rows):
        row = int(short_rows[0]) + 1
        raise SpectraFormatError(
            f"Ragged CSV {path}: row {row} has {int((~missing.loc[short_rows[0]]).sum())} cells, "
            f"expected {frame.shape[1]}",
            row=row,
        )

    numeric = frame.apply(pd.to_numeric, errors="coerce")
    bad = ~np.isfinite(numeric.to_numpy(dtype=float))
    if bad.any():
        row, column = (int(i) for i in np.argwhere(bad)[0])
        cell = frame.iat[row, column]
        raise SpectraParseError(
            f"Non-numeric or non-finite cell '{cell}' in {path} at row {row + 1}, column {column + 1}",
            row=row + 1,
            column=column + 1,
        )
    # float() per string is exact for the 17-digit cells save_spectra writes
    return frame.to_numpy(dtype=float)


def load_spectra(path: str, orientation: str = "columns", mz_axis: bool = False) -> SpectraMatrix:
    """
    Load a spectra CSV.

    Args:
        path: CSV file
        orientation: "columns" (one mz bin per row) or "rows" (one spectrum per row)
        mz_axis: Whether the file carries an mz axis (first row for "rows",
            first column for "columns")

    Returns:
        SpectraMatrix in column orientation regardless of the file orientation.
    """
    _check_orientation(orientation)
    table = _read_numeric_table(path)
    if orientation == "rows":
        table = table.T

    axis = None
    if mz_axis:
        if table.shape[1] < 2:
            raise EmptyInputError(f"Spectra file {path} holds an mz axis but no spectra")
        axis, table = table[:, 0], table[:, 1:]

    spectra = SpectraMatrix(table, axis)
    logger.info(f"Loaded {spectra.num_spectra} spectra of length {spectra.length} from {path}")
    return spectra


def save_spectra(spectra: SpectraMatrix, path: str, orientation: str = "columns") -> None:
    """Write spectra so that load_spectra reproduces them bit-exactly."""
    _check_orientation(orientation)
    table = spectra.data
    if spectra.mz_axis is not None:
        table = np.column_stack([spectra.mz_axis, table])
    if orientation == "rows":
        table = table.T
    try:
        pd.DataFrame(table).to_csv(path, header=False, index=False, float_format=FLOAT_FORMAT)
    except OSError as e:
        raise OSError(f"Cannot write spectra to {path}: {e}") from e


def crop_mz_range(spectra: SpectraMatrix, mz_min: float, mz_max: float) -> SpectraMatrix:
    """
    Restrict spectra to the bins whose mz value lies in [mz_min, mz_max].

    Raises:
        SpectraFormatError: If the spectra have no mz axis.
        EmptyInputError: If fewer than two bins fall into the window.
    """
    if spectra.mz_axis is None:
        raise SpectraFormatError("Cropping by mz requires spectra with an mz axis")
    keep = (spectra.mz_axis >= mz_min) & (spectra.mz_axis <= mz_max)
    if np.count_nonzero(keep) < 2:
        raise EmptyInputError(f"mz window [{mz_min}, {mz_max}] holds fewer than two bins")
    return SpectraMatrix(spectra.data[keep], spectra.mz_axis[keep], spectra.class_labels)


def save_line_spectrum(line_spectrum: LineSpectrum, path: str) -> None:
    """
    Write a line spectrum as a two-column CSV with a header.

    The first column holds bin indices (header ``position``) or, when mz values
    are attached, mz positions (header ``mz``).
    """
    indices = line_spectrum.indices
    if np.any(np.diff(indices) <= 0):
        raise SpectraFormatError(f"Refusing to write unsorted or duplicate peak positions: {indices.tolist()}")

    if line_spectrum.mz is not None:
        frame = pd.DataFrame({"mz": list(line_spectrum.mz), "intensity": line_spectrum.intensities})
    else:
        frame = pd.DataFrame({"position": indices, "intensity": line_spectrum.intensities})
    try:
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    except OSError as e:
        raise OSError(f"Cannot write line spectrum to {path}: {e}") from e


def load_line_spectrum(path: str, mz_axis: Optional[np.ndarray] = None) -> LineSpectrum:
    """
    Read a line-spectrum CSV written by save_line_spectrum.

    Files with an ``mz`` column need the spectra's mz axis to recover bin indices.
    """
    if not os.path.isfile(path):
        raise SpectraFormatError(f"Line spectrum file not found: {path}")
    frame = pd.read_csv(path, float_precision="round_trip")
    if list(frame.columns) == ["position", "intensity"]:
        return LineSpectrum(tuple(zip(frame["position"].astype(int), frame["intensity"])))
    if list(frame.columns) == ["mz", "intensity"]:
        if mz_axis is None:
            raise SpectraFormatError(f"{path} stores mz positions; an mz axis is needed to map them to bins")
        mz_axis = np.asarray(mz_axis, dtype=float)
        mz = frame["mz"].to_numpy(dtype=float)
        indices = np.clip(np.searchsorted(mz_axis, mz), 0, len(mz_axis) - 1)
        off_axis = mz_axis[indices] != mz
        if off_axis.any():
            raise SpectraFormatError(f"{path}: mz values {mz[off_axis].tolist()} are not on the spectra mz axis")
        return LineSpectrum(tuple(zip(indices, frame["intensity"])), tuple(frame["mz"]))
    raise SpectraFormatError(f"Unexpected line spectrum header in {path}: {list(frame.columns)}")
