import numpy as np
import pytest

import rgbps


def test_render_identity_rig():
    normals = np.zeros((2, 2, 3))
    normals[..., 2] = 1.0
    albedo = np.ones((2, 2, 3))
    image = rgbps.render(normals, albedo, np.eye(3))
    assert image.shape == (2, 2, 3)
    np.testing.assert_allclose(image[..., :2], 0.0)
    np.testing.assert_allclose(image[..., 2], 1.0)


def test_invert_pixels_roundtrip():
    rng = np.random.default_rng(3)
    n = rng.normal(size=(4, 5, 3))
    n[..., 2] = np.abs(n[..., 2]) + 0.5
    n /= np.linalg.norm(n, axis=-1, keepdims=True)
    chroma = np.array([0.5, 0.6, 0.7])
    chroma /= np.linalg.norm(chroma)
    L = rgbps.benchmark_rig()
    shading = np.einsum("ij,hwi->hwj", L, n)
    n[shading.min(axis=-1) <= 0] = [0.0, 0.0, 1.0]
    image = rgbps.render(n, np.broadcast_to(1.3 * chroma, n.shape), L)
    tau, normals, valid = rgbps.invert_pixels(image, L, chroma)
    assert valid.all()
    np.testing.assert_allclose(tau, 1.3, atol=1e-9)
    np.testing.assert_allclose(normals, n, atol=1e-9)


def test_reconstruct_synthetic_instance():
    inst = rgbps.gen_instance(7, {"image_size": "48", "coarse_size": "6", "noise_sigma": "0"})
    L = rgbps.benchmark_rig()
    out = rgbps.reconstruct(inst["image"], L, config={"K": "20", "iterations": "40", "lambda_init": "2^-11"})
    assert out["normals"].shape == (48, 48, 3)
    valid = out["valid"]
    assert valid.any()
    norms = np.linalg.norm(out["normals"][valid], axis=-1)
    np.testing.assert_allclose(norms, 1.0, atol=1e-6)
    errors, median, _ = rgbps.angular_error(out["normals"], inst["normals"])
    assert np.isfinite(median)
    assert errors.shape == (48, 48)


def test_classical_ps_and_integration():
    inst = rgbps.gen_instance(11, {"image_size": "32", "noise_sigma": "0"})
    normals, flagged = rgbps.classical_ps(inst["image"], inst["albedo"], rgbps.benchmark_rig())
    _, median, _ = rgbps.angular_error(normals, inst["normals"])
    assert median < 1e-6
    depth, rms = rgbps.integrate_normals(inst["normals"])
    assert depth.shape == (32, 32)
    assert abs(depth.mean()) < 1e-9
    assert rms >= 0.0


def test_pfm_roundtrip(tmp_path):
    data = np.random.default_rng(0).random((5, 7, 3)).astype(np.float32)
    path = str(tmp_path / "x.pfm")
    rgbps.write_pfm(path, data)
    np.testing.assert_array_equal(rgbps.read_pfm(path), data)


def test_bad_input_raises_value_error():
    with pytest.raises(ValueError):
        rgbps.render(np.zeros((2, 2, 2)), np.ones((2, 2, 3)), np.eye(3))
    with pytest.raises(rgbps.InputError):
        rgbps.reconstruct(np.ones((8, 8, 3)), np.eye(3), config={"no_such_key": "1"})


def test_config_keys_match_default_text():
    keys = rgbps.config_keys()
    text_keys = [line.split("=")[0] for line in rgbps.default_config().splitlines()]
    assert keys == text_keys
    assert "lambda_init" in keys and "K" in keys
