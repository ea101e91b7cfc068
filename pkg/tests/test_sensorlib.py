"""Tests for SRF resampling, sensor simulation, the sensor library and dual stochastic masking."""

import logging
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from band_repair.errors import DomainError, ShapeError
from band_repair.sensorlib import (
    ConditionPair,
    SensorLibrary,
    SensorSRF,
    SRFBand,
    apply_srf,
    band_subset_mask,
    builtin_sensor,
    builtin_sensors,
    dsm_mask,
    gaussian_band,
    identity_sensor,
    load_library,
    project_sensor,
    resample_srf,
    sample_p_drop,
    save_library,
    simulate_sensor,
    spline_response,
    training_library,
)
from band_repair.specdata import default_wavelengths, generate_scene, normalize

WL = default_wavelengths()


@pytest.fixture(scope="module")
def scene():
    cube, _ = generate_scene(8, 8, 12, 4)
    return cube


def test_spline_hits_knots() -> None:
    grid = np.array([500.0, 520.0, 540.0, 560.0, 580.0])
    resp = np.array([0.1, 0.6, 1.0, 0.5, 0.2])
    out = spline_response(SRFBand(grid, resp), grid)
    np.testing.assert_allclose(out, resp, rtol=0, atol=1e-12)


def test_constant_response_gives_uniform_weights() -> None:
    band = SRFBand(np.array([400.0, 700.0, 1000.0]), np.array([1.0, 1.0, 1.0]))
    np.testing.assert_allclose(resample_srf(band, WL), np.full(12, 1.0 / 12.0), rtol=0, atol=1e-12)


def test_gaussian_srf_matches_analytic() -> None:
    mu, sigma = 665.0, 20.0
    grid = np.arange(mu - 60.0, mu + 60.0 + 1.0, 5.0)
    band = SRFBand(grid, np.exp(-((grid - mu) ** 2) / (2 * sigma**2)))
    analytic = np.exp(-((WL - mu) ** 2) / (2 * sigma**2))
    analytic /= analytic.sum()
    assert np.max(np.abs(resample_srf(band, WL) - analytic)) < 1e-3


def test_resample_weights_non_negative_and_normalized() -> None:
    for sensor in builtin_sensors():
        for band in sensor.bands:
            w = resample_srf(band, WL)
            assert np.all(w >= 0)
            assert w.sum() == pytest.approx(1.0, abs=1e-12) or not w.any()


def test_resample_needs_two_knots() -> None:
    with pytest.raises(DomainError, match="2 knots"):
        resample_srf(SRFBand(np.array([500.0]), np.array([1.0])), WL)


def test_srf_band_validation() -> None:
    with pytest.raises(DomainError):
        SRFBand(np.array([500.0, 510.0]), np.array([1.0, -0.1]))
    with pytest.raises(DomainError):
        SRFBand(np.array([510.0, 500.0]), np.array([1.0, 1.0]))
    with pytest.raises(ShapeError):
        SRFBand(np.array([500.0, 510.0]), np.array([1.0]))


def test_identity_sensor_observes_everything(scene) -> None:
    x_obs, m_sens = apply_srf(scene, identity_sensor(WL))
    np.testing.assert_array_equal(x_obs, scene.data)
    assert np.all(m_sens == 1.0)


def test_single_band_sensor(scene) -> None:
    _, m_sens = apply_srf(scene, SensorSRF("nir", (gaussian_band(842.0, 60.0),)))
    occupied = np.flatnonzero(m_sens[0, 0])
    assert occupied.tolist() == [int(np.argmin(np.abs(WL - 842.0)))]


def test_rgb_sensor_weighted_means(scene) -> None:
    sensor = builtin_sensor("rgb-3")
    x_obs, m_sens = apply_srf(scene, sensor)
    occupied = np.flatnonzero(m_sens[0, 0])
    assert occupied.size == 3
    for band in sensor.bands:
        w = resample_srf(band, WL)
        slot = int(np.argmin(np.abs(WL - w @ WL)))
        np.testing.assert_allclose(x_obs[..., slot], np.einsum("hwb,b->hw", scene.data, w), rtol=0, atol=1e-12)
    assert np.all(x_obs[..., m_sens[0, 0] == 0] == 0)


def test_collision_keeps_stronger_band(scene, caplog) -> None:
    sensor = SensorSRF("clash", (gaussian_band(660.0, 40.0), gaussian_band(670.0, 60.0)))
    with caplog.at_level(logging.WARNING):
        _, m_sens, collisions = simulate_sensor(scene, sensor)
    assert int(m_sens[0, 0].sum()) == 1
    assert len(collisions) == 1 and "kept band 1" in collisions[0]
    assert "share slot" in caplog.text
    assert project_sensor(sensor, WL).weights.shape == (1, 12)


def test_apply_srf_needs_physical(scene) -> None:
    with pytest.raises(DomainError):
        apply_srf(normalize(scene), identity_sensor(WL))


def test_builtin_library_has_fifteen_sensors() -> None:
    sensors = builtin_sensors()
    assert len(sensors) == 15
    assert len({s.name for s in sensors}) == 15
    assert {len(s.bands) for s in sensors} >= {1, 12}
    with pytest.raises(DomainError):
        builtin_sensor("landsat-9")


def test_library_json_round_trip(tmp_path: Path) -> None:
    sensors = builtin_sensors()
    path = save_library(sensors, tmp_path / "lib" / "sensors.json")
    loaded = load_library(path)
    assert [s.to_json_dict() for s in loaded] == [s.to_json_dict() for s in sensors]


def test_training_library_appends_native() -> None:
    assert training_library(WL).names[-1] == "native"
    assert len(training_library(WL, include_native=False)) == 15


def test_dsm_zero_drop_identity(scene) -> None:
    cube = normalize(scene)
    pair = dsm_mask(cube, [identity_sensor(WL)], 0.0, seed=0)
    assert np.all(pair.m == 1.0)
    np.testing.assert_array_equal(pair.c, cube.data)


@pytest.mark.parametrize("p_drop", [0.1, 0.3, 0.5, 0.7])
@pytest.mark.parametrize("mode", ["per_band", "per_element"])
def test_dsm_kept_fraction(p_drop: float, mode: str) -> None:
    cube, _ = generate_scene(8, 8, 12, 0)
    cube = normalize(cube)
    library = SensorLibrary([identity_sensor(WL)])
    rng = np.random.default_rng(11)
    draws = 10_000
    kept = 0.0
    for _ in range(draws):
        pair = dsm_mask(cube, library, p_drop, mode, seed=rng)
        assert np.all(pair.c[pair.m == 0] == 0)
        kept += pair.m[0, 0].mean()
    n = draws * 12
    sigma = np.sqrt(p_drop * (1 - p_drop) / n)
    assert abs(kept / draws - (1 - p_drop)) < 3 * sigma


def test_dsm_mask_within_sensor_mask(scene) -> None:
    cube = normalize(scene)
    library = training_library(WL)
    for seed in range(30):
        pair = dsm_mask(cube, library, 0.3, seed=seed)
        sensor = next(s for s in library if s.name == pair.sensor_name)
        _, m_sens = apply_srf(scene, sensor)
        assert np.all(pair.m <= m_sens)
        np.testing.assert_array_equal(pair.c * pair.m, pair.c)


def test_dsm_deterministic(scene) -> None:
    cube = normalize(scene)
    a = dsm_mask(cube, training_library(WL), 0.5, "per_band", seed=42)
    b = dsm_mask(cube, training_library(WL), 0.5, "per_band", seed=42)
    assert a.sensor_name == b.sensor_name
    assert a.m.tobytes() == b.m.tobytes() and a.c.tobytes() == b.c.tobytes()


def test_dsm_errors(scene) -> None:
    cube = normalize(scene)
    with pytest.raises(DomainError, match="empty"):
        dsm_mask(cube, [], 0.1)
    with pytest.raises(DomainError, match="p_drop"):
        dsm_mask(cube, [identity_sensor(WL)], 1.0)
    with pytest.raises(DomainError, match="normalized"):
        dsm_mask(scene, [identity_sensor(WL)], 0.1)


def test_condition_pair_invariants() -> None:
    m = np.ones((2, 2, 4))
    m[..., 1] = 0
    with pytest.raises(DomainError, match="zero wherever"):
        ConditionPair(np.ones((2, 2, 4)), m, 0.2)
    with pytest.raises(DomainError, match="binary"):
        ConditionPair(np.zeros((2, 2, 4)), np.full((2, 2, 4), 0.5), 0.2)


def test_sample_p_drop_distribution() -> None:
    rng = np.random.default_rng(3)
    draws = np.array([sample_p_drop(rng) for _ in range(10_000)])
    assert draws.min() >= 0.1 and draws.max() <= 0.7
    sigma = 0.6 / np.sqrt(12.0) / np.sqrt(draws.size)
    assert abs(draws.mean() - 0.4) < 3 * sigma
    assert sample_p_drop(5) == sample_p_drop(5)


@pytest.mark.parametrize("keep", [3, 5, 7])
def test_band_subset_mask_keeps_exactly_k(scene, keep: int) -> None:
    pair = band_subset_mask(normalize(scene), keep, seed=keep)
    assert pair.observed_bands().size == keep
    assert pair.m[..., pair.observed_bands()].min() == 1.0
    assert pair.p_drop_used == pytest.approx(1 - keep / 12)
