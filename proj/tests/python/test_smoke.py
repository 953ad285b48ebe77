import numpy as np
import pytest

import eprsim


def test_resolve_config_round_trips():
    text = eprsim.resolve_config("[rig]\ncamera_offset_m = [0.0, 0.05, 0.0]\n")
    assert "camera_offset_m = [0.0, 0.05, 0.0]" in text
    assert eprsim.resolve_config(text) == text


def test_config_errors_carry_code_and_line():
    with pytest.raises(eprsim.ConfigError) as info:
        eprsim.resolve_config("[rig]\n\nipd_m = -1\n")
    assert info.value.code == "E_RANGE"
    assert info.value.line == 3
    with pytest.raises(eprsim.ConfigError) as info:
        eprsim.resolve_config("[rig]\nwobble = 1\n")
    assert info.value.code == "E_UNKNOWN_KEY"


def test_render_shapes_and_status():
    out = eprsim.render(method="plane", ground_truth=True)
    assert out["left"].shape == (480, 640, 3)
    assert out["left"].dtype == np.uint8
    assert out["right_status"].shape == (480, 640)
    assert set(np.unique(out["right_status"])) <= {0, 1, 2, 3}
    assert "left_truth" in out


def test_zero_baseline_plane_matches_world():
    cfg = "[rig]\ncamera_offset_m = [0.0, 0.0, 0.0]\ndominant_eye = \"right\"\n"
    out = eprsim.render(cfg, method="plane")
    valid = out["right_status"] == 0
    diff = np.abs(out["right"].astype(int) - out["world"].astype(int)).max(axis=2)
    assert valid.sum() > 0.99 * valid.size
    assert diff[valid].max() <= 1


def test_plane_sweep_follows_parallax_law():
    rows = eprsim.sweep("[rig]\ncamera_offset_m = [0.03, 0.0, 0.0]\n", values=[0.55, 0.95, 1.15])
    for row in rows:
        expected = 0.03 * abs(0.75 - row["value"]) / row["value"]
        assert row["median_m"] == pytest.approx(expected, rel=1e-6)


def test_exact_mesh_has_no_misalignment():
    cfg = "[proxy]\nmesh_density = 1e9\n"
    m = eprsim.misalignment(cfg, method="mesh")
    assert m["valid_count"] > 1000
    assert np.nanmax(m["displacement_m"]) < 1e-9


def test_select_is_deterministic():
    a = eprsim.select(method="plane", trials=25, seed=7)
    b = eprsim.select(method="plane", trials=25, seed=7)
    assert a == b
    assert 0.0 <= a["accuracy"] <= 1.0


def test_image_ops():
    rng = np.random.default_rng(3)
    img = rng.integers(0, 256, size=(40, 50, 3), dtype=np.uint8)
    assert not eprsim.canny(np.full((30, 30, 3), 90, np.uint8)).any()
    assert eprsim.canny(img).shape == (40, 50)
    red = np.zeros((8, 8, 3), np.uint8)
    red[..., 0] = 255
    assert eprsim.hue_segment(red, 350, 10).all()
    once = eprsim.simulate_cvd(img, "deuteranopia")
    twice = eprsim.simulate_cvd(once, "deuteranopia")
    assert np.abs(once.astype(int) - twice.astype(int)).max() <= 1
    assert np.array_equal(eprsim.daltonize(img, strength=0.0), img)
    with pytest.raises(ValueError):
        eprsim.simulate_cvd(img, "tritanopia")
