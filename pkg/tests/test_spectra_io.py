import numpy as np
import pytest

from spectra_model import (
    LineSpectrum,
    SpectraMatrix,
    crop_mz_range,
    load_line_spectrum,
    load_spectra,
    save_line_spectrum,
    save_spectra,
)
from utils.errors import EmptyInputError, InvalidParameterError, SpectraFormatError, SpectraParseError


def write(path, text):
    path.write_text(text)
    return str(path)


def test_columns_orientation_keeps_shape(tmp_path):
    path = write(tmp_path / "x.csv", "1,2\n3,4\n5,6\n")
    spectra = load_spectra(path, "columns")
    assert spectra.length == 3
    assert spectra.num_spectra == 2
    np.testing.assert_array_equal(spectra.data, [[1, 2], [3, 4], [5, 6]])


def test_rows_orientation_is_transpose(tmp_path):
    path = write(tmp_path / "x.csv", "1,2\n3,4\n5,6\n")
    as_rows = load_spectra(path, "rows")
    as_columns = load_spectra(path, "columns")
    assert (as_rows.length, as_rows.num_spectra) == (2, 3)
    np.testing.assert_array_equal(as_rows.data, as_columns.data.T)


def test_ragged_rows_name_the_row(tmp_path):
    path = write(tmp_path / "x.csv", "1,2,3\n4,5,6,7\n")
    with pytest.raises(SpectraFormatError) as excinfo:
        load_spectra(path)
    assert excinfo.value.row == 2
    assert "row 2" in str(excinfo.value)


def test_non_numeric_cell_reports_position(tmp_path):
    path = write(tmp_path / "x.csv", "1,2\n3,abc\n")
    with pytest.raises(SpectraParseError) as excinfo:
        load_spectra(path)
    assert (excinfo.value.row, excinfo.value.column) == (2, 2)


def test_empty_and_missing_files(tmp_path):
    with pytest.raises(EmptyInputError):
        load_spectra(write(tmp_path / "empty.csv", ""))
    with pytest.raises(SpectraFormatError):
        load_spectra(str(tmp_path / "missing.csv"))


def test_errors_are_value_errors(tmp_path):
    with pytest.raises(ValueError):
        load_spectra(write(tmp_path / "x.csv", "1,nan\n2,3\n"))


@pytest.mark.parametrize("orientation", ["columns", "rows"])
def test_save_load_is_bit_exact(tmp_path, rng, orientation):
    spectra = SpectraMatrix(rng.standard_normal((7, 4)) * 1e3, mz_axis=np.linspace(1000.5, 1012.25, 7))
    path = str(tmp_path / "x.csv")
    save_spectra(spectra, path, orientation)
    loaded = load_spectra(path, orientation, mz_axis=True)
    np.testing.assert_array_equal(loaded.data, spectra.data)
    np.testing.assert_array_equal(loaded.mz_axis, spectra.mz_axis)


def test_mz_axis_transposes_with_the_file(tmp_path, rng):
    spectra = SpectraMatrix(rng.standard_normal((5, 3)), mz_axis=np.arange(5.0) + 100)
    columns_path, rows_path = str(tmp_path / "c.csv"), str(tmp_path / "r.csv")
    save_spectra(spectra, columns_path, "columns")
    save_spectra(spectra, rows_path, "rows")
    np.testing.assert_array_equal(load_spectra(columns_path, "columns", True).data,
                                  load_spectra(rows_path, "rows", True).data)


def test_crop_mz_range(rng):
    spectra = SpectraMatrix(rng.standard_normal((6, 2)), mz_axis=[1000, 1100, 1200, 1300, 1400, 1500])
    cropped = crop_mz_range(spectra, 1100, 1300)
    assert cropped.length == 3
    np.testing.assert_array_equal(cropped.mz_axis, [1100, 1200, 1300])
    with pytest.raises(EmptyInputError):
        crop_mz_range(spectra, 2000, 3000)
    with pytest.raises(SpectraFormatError):
        crop_mz_range(SpectraMatrix(np.ones((3, 1))), 0, 1)


def test_save_line_spectrum_empty_writes_header_only(tmp_path):
    path = tmp_path / "peaks.csv"
    save_line_spectrum(LineSpectrum(), str(path))
    assert path.read_text().strip() == "position,intensity"


def test_save_line_spectrum_rows_in_order(tmp_path):
    path = tmp_path / "peaks.csv"
    save_line_spectrum(LineSpectrum(((5, 1.2), (9, 0.8))), str(path))
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "position,intensity"
    assert [line.split(",")[0] for line in lines[1:]] == ["5", "9"]
    loaded = load_line_spectrum(str(path))
    assert loaded.indices.tolist() == [5, 9]
    np.testing.assert_allclose(loaded.intensities, [1.2, 0.8], rtol=1e-15)


def test_duplicate_peak_indices_are_rejected():
    with pytest.raises(InvalidParameterError):
        LineSpectrum(((5, 1.0), (5, 2.0)))


def test_line_spectrum_with_mz_round_trip(tmp_path):
    axis = np.array([10.0, 10.5, 11.0, 11.5])
    line_spectrum = LineSpectrum.from_pairs([(2, 0.5), (1, 1.0)], axis)
    path = str(tmp_path / "peaks.csv")
    save_line_spectrum(line_spectrum, path)
    loaded = load_line_spectrum(path, axis)
    assert loaded.indices.tolist() == [1, 2]
    assert loaded.mz == (10.5, 11.0)


def test_short_row_names_the_row(tmp_path):
    path = write(tmp_path / "x.csv", "1,2,3\n4,5,6\n7,8\n")
    with pytest.raises(SpectraFormatError) as excinfo:
        load_spectra(path)
    assert excinfo.value.row == 3


def test_blank_lines_and_padding_are_ignored(tmp_path):
    spectra = load_spectra(write(tmp_path / "x.csv", "1, 2\n\n 3,4\n"))
    np.testing.assert_array_equal(spectra.data, [[1, 2], [3, 4]])


def test_infinite_cell_reports_position(tmp_path):
    with pytest.raises(SpectraParseError) as excinfo:
        load_spectra(write(tmp_path / "x.csv", "1,2\n3,4\ninf,5\n"))
    assert (excinfo.value.row, excinfo.value.column) == (3, 1)


def test_line_spectrum_mz_off_the_axis_is_rejected(tmp_path):
    path = tmp_path / "peaks.csv"
    path.write_text("mz,intensity\n10.5,1.0\n10.7,0.5\n")
    with pytest.raises(SpectraFormatError):
        load_line_spectrum(str(path), np.array([10.0, 10.5, 11.0, 11.5]))
    path.write_text("mz,intensity\n12.0,1.0\n")
    with pytest.raises(SpectraFormatError):
        load_line_spectrum(str(path), np.array([10.0, 10.5, 11.0, 11.5]))
