"""Tests for reconstruction metrics, index agreement, the CSV report and the interpolation baseline."""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from band_repair.errors import DomainError, ShapeError
from band_repair.metrics import (
    CSV_COLUMNS,
    evaluate,
    index_consistency,
    interpolate_bands,
    pearson,
    psnr,
    read_csv,
    rmse,
    sam,
    ssim,
    write_csv,
)
from band_repair.physops import IndexKind
from band_repair.sensorlib import ConditionPair
from band_repair.specdata import default_wavelengths, generate_scene, normalize

WL = default_wavelengths()


@pytest.fixture(scope="module")
def scene() -> np.ndarray:
    cube, _ = generate_scene(16, 16, 12, 3)
    return cube.data


def test_psnr_values() -> None:
    x = np.full((4, 4, 3), 0.4)
    assert psnr(x, x) == 99.0
    assert psnr(x + 0.1, x) == pytest.approx(20.0, abs=1e-9)
    y = x.copy()
    y[0, 0, 0] += np.sqrt(0.01 * y.size)
    assert psnr(y, x) == pytest.approx(20.0, abs=1e-9)


def test_psnr_shape_mismatch() -> None:
    with pytest.raises(ShapeError):
        psnr(np.zeros((2, 2, 3)), np.zeros((2, 2, 4)))


def test_ssim_identity_and_inversion(scene) -> None:
    assert ssim(scene, scene) == pytest.approx(1.0, abs=1e-12)
    assert ssim(1.0 - scene, scene) < 0.5


def test_ssim_symmetric() -> None:
    rng = np.random.default_rng(0)
    for _ in range(3):
        a = rng.uniform(size=(12, 12, 2))
        b = rng.uniform(size=(12, 12, 2))
        assert ssim(a, b) == pytest.approx(ssim(b, a), abs=1e-12)


def test_ssim_too_small() -> None:
    with pytest.raises(ShapeError, match="11"):
        ssim(np.zeros((8, 16, 2)), np.zeros((8, 16, 2)))


def test_sam_and_rmse() -> None:
    rng = np.random.default_rng(1)
    x = rng.uniform(0.1, 0.5, size=(4, 4, 6))
    assert sam(2.0 * x, x) == pytest.approx(0.0, abs=1e-7)
    assert sam(np.array([[1.0, 0.0]]), np.array([[0.0, 1.0]])) == pytest.approx(np.pi / 2, abs=1e-12)
    assert rmse(x + 0.05, x) == pytest.approx(0.05, abs=1e-12)


def test_metrics_reject_normalized_cubes() -> None:
    cube, _ = generate_scene(16, 16, 12, 0)
    with pytest.raises(DomainError):
        rmse(normalize(cube), cube)


def test_index_consistency_identity(scene) -> None:
    agreement = index_consistency(scene, scene, IndexKind.NDVI, WL)
    assert agreement.cc == pytest.approx(1.0, abs=1e-12)
    assert agreement.rmse == 0.0
    assert not agreement.degenerate


def test_index_consistency_under_spectral_scaling(scene) -> None:
    scale = np.random.default_rng(2).uniform(0.5, 1.0, size=scene.shape[:2] + (1,))
    agreement = index_consistency(scene * scale, scene, IndexKind.NDVI, WL)
    assert agreement.cc == pytest.approx(1.0, abs=1e-8)


def test_index_consistency_degenerate() -> None:
    flat = np.full((4, 4, 12), 0.3)
    agreement = index_consistency(flat, flat, IndexKind.NDWI, WL)
    assert agreement.degenerate and agreement.cc == 0.0


def test_pearson_matches_oracle() -> None:
    rng = np.random.default_rng(3)
    a = rng.normal(size=200)
    b = 0.3 * a + rng.normal(size=200)
    cov = np.mean((a - a.mean()) * (b - b.mean()))
    cc, degenerate = pearson(a, b)
    assert cc == pytest.approx(cov / (a.std() * b.std()), abs=1e-10)
    assert not degenerate


def test_report_row_and_csv(tmp_path: Path, scene) -> None:
    report = evaluate(scene, scene, WL)
    row = report.as_row("model", 0.5, 3)
    assert len(row) == len(CSV_COLUMNS)
    assert row[:4] == ["model", 0.5, 3, 99.0]
    path = write_csv(tmp_path / "out" / "m.csv", CSV_COLUMNS, [row])
    rows = read_csv(path)
    assert list(rows[0]) == CSV_COLUMNS
    assert float(rows[0]["ndvi_cc"]) == pytest.approx(1.0, abs=1e-12)


def test_report_blank_for_skipped_indices(scene) -> None:
    row = evaluate(scene, scene, WL, kinds=[IndexKind.NDVI]).as_row("x", 0.1, 0)
    assert row[-2:] == ["", ""]


def _pair_with(bands: list[int], values: np.ndarray) -> ConditionPair:
    m = np.zeros((1, 1, values.size))
    m[..., bands] = 1.0
    return ConditionPair(values.reshape(1, 1, -1) * m, m, 1 - len(bands) / values.size)


def test_interpolation_linear_between_and_constant_beyond() -> None:
    wl = np.array([400.0, 500.0, 600.0, 700.0, 800.0])
    values = np.array([0.0, 0.2, 0.0, 0.6, 0.0])
    out = interpolate_bands(_pair_with([1, 3], values), wl)[0, 0]
    np.testing.assert_allclose(out, [0.2, 0.2, 0.4, 0.6, 0.6], rtol=0, atol=1e-12)


def test_interpolation_keeps_observed_and_handles_empty_pixels() -> None:
    cube, _ = generate_scene(8, 8, 12, 1)
    norm = normalize(cube).data
    m = np.ones_like(norm)
    m[..., 4] = 0.0
    m[0, 0] = 0.0
    out = interpolate_bands(ConditionPair(norm * m, m, 0.1), WL)
    np.testing.assert_array_equal(out[m > 0], norm[m > 0])
    assert np.all(out[0, 0] == 0.0)
    expected = 0.5 * (norm[..., 3] + norm[..., 5])
    np.testing.assert_allclose(out[1:, :, 4], expected[1:], rtol=0, atol=1e-12)


def test_interpolation_single_band() -> None:
    wl = np.array([400.0, 500.0, 600.0, 700.0])
    out = interpolate_bands(_pair_with([2], np.array([0.0, 0.0, -0.3, 0.0])), wl)
    np.testing.assert_allclose(out[0, 0], [-0.3] * 4, rtol=0, atol=1e-12)
