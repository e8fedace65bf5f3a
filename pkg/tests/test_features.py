import numpy as np
import pytest

from identiface.errors import DegeneracyError, DimensionError, ParseError
from identiface.features import (
    FEATURE_DIMS,
    face_raw_features,
    gabor_bank,
    gabor_features,
    gabor_kernel,
    gabor_response,
    landmark_features,
    lbp_codes,
    lbp_features,
    load_landmarks,
)


# --- face_raw -------------------------------------------------------------------

def test_face_raw_constant_255_is_all_ones():
    vec = face_raw_features(np.full((48, 48), 255, dtype=np.uint8))
    np.testing.assert_array_equal(vec, np.ones(2304))


def test_face_raw_length():
    assert face_raw_features(np.zeros((48, 48))).shape == (FEATURE_DIMS["face_raw"],)


def test_face_raw_flatten_order(rng):
    img = rng.integers(0, 256, size=(48, 48), dtype=np.uint8)
    vec = face_raw_features(img)
    # index oracle: pixel (r, c) lands at 48r + c
    for r, c in [(0, 0), (0, 47), (1, 0), (13, 29), (47, 47)]:
        assert vec[48 * r + c] == img[r, c] / 255.0


def test_face_raw_wrong_dims():
    with pytest.raises(DimensionError):
        face_raw_features(np.zeros((48, 47)))


# --- landmarks --------------------------------------------------------------------

def random_landmarks(rng):
    pts = rng.random((68, 2)) * 100.0
    # keep the eye clusters apart so the inter-ocular distance is healthy
    pts[36:42] = rng.random((6, 2)) * 5.0 + np.array([20.0, 40.0])
    pts[42:48] = rng.random((6, 2)) * 5.0 + np.array([60.0, 40.0])
    return pts


def test_landmarks_translation_invariant(rng):
    pts = random_landmarks(rng)
    shifted = pts + np.array([13.7, -42.1])
    np.testing.assert_allclose(landmark_features(pts), landmark_features(shifted), atol=1e-12)


def test_landmarks_scale_invariant(rng):
    pts = random_landmarks(rng)
    scaled = (pts - np.array([7.0, 11.0])) * 3.25 + np.array([7.0, 11.0])
    np.testing.assert_allclose(landmark_features(pts), landmark_features(scaled), atol=1e-12)


def test_landmarks_norm_matches_direct_formula(rng):
    pts = random_landmarks(rng)
    vec = landmark_features(pts)
    # direct-formula oracle
    centered = pts - pts.mean(axis=0)
    iod = np.linalg.norm(pts[42:48].mean(axis=0) - pts[36:42].mean(axis=0))
    oracle = (centered / iod).reshape(-1)
    assert abs(np.linalg.norm(vec) - np.linalg.norm(oracle)) < 1e-12
    np.testing.assert_allclose(vec, oracle, atol=1e-12)
    assert vec.shape == (FEATURE_DIMS["landmarks_68"],)


def test_landmarks_zero_iod_degenerate():
    pts = np.zeros((68, 2))
    with pytest.raises(DegeneracyError):
        landmark_features(pts)


def test_landmark_file_roundtrip(tmp_path, rng):
    pts = random_landmarks(rng)
    lines = [f"{i} {float(pts[i, 0])!r} {float(pts[i, 1])!r}" for i in range(68)]
    path = tmp_path / "face.landmarks"
    path.write_text("\n".join(lines), encoding="utf-8")
    np.testing.assert_allclose(load_landmarks(path), pts, atol=0)


def test_landmark_file_wrong_count(tmp_path):
    path = tmp_path / "short.landmarks"
    path.write_text("0 1.0 2.0\n", encoding="utf-8")
    with pytest.raises(ParseError):
        load_landmarks(path)


# --- LBP ---------------------------------------------------------------------------

def lbp_oracle(img):
    """Per-pixel bit loop, clockwise from top-left, neighbor >= center."""
    arr = np.asarray(img, dtype=float)
    h, w = arr.shape
    offsets = [(-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1)]
    codes = np.zeros((h - 2, w - 2), dtype=np.int64)
    for r in range(1, h - 1):
        for c in range(1, w - 1):
            code = 0
            for bit, (dr, dc) in enumerate(offsets):
                if arr[r + dr, c + dc] >= arr[r, c]:
                    code |= 1 << bit
            codes[r - 1, c - 1] = code
    return codes


def test_lbp_constant_image_code_255():
    img = np.full((8, 8), 120, dtype=np.uint8)
    codes = lbp_codes(img)
    assert (codes == 255).all()
    hist = lbp_features(img)
    # 255 has zero 0/1 transitions -> uniform; all mass in its bin
    assert hist.sum() == pytest.approx(1.0, abs=1e-12)
    assert hist.max() == pytest.approx(1.0, abs=1e-12)


def test_lbp_histogram_sums_to_one(rng):
    img = rng.integers(0, 256, size=(16, 16), dtype=np.uint8)
    assert lbp_features(img).sum() == pytest.approx(1.0, abs=1e-9)


def test_lbp_codes_match_bit_loop_oracle(rng):
    img = rng.integers(0, 256, size=(5, 5), dtype=np.uint8)
    np.testing.assert_array_equal(lbp_codes(img), lbp_oracle(img))


def test_lbp_monotone_intensity_invariance(rng):
    img = rng.integers(0, 200, size=(10, 10), dtype=np.uint8)
    remapped = (img.astype(np.float64) ** 1.5 + 7.0)  # strictly monotone
    np.testing.assert_array_equal(lbp_features(img), lbp_features(remapped))


def test_lbp_dim_and_small_image_error():
    assert lbp_features(np.random.default_rng(0).integers(0, 255, (9, 9))).shape == (59,)
    with pytest.raises(DimensionError):
        lbp_features(np.zeros((2, 5)))


def test_lbp_58_uniform_codes_exist():
    from identiface.features import _transitions

    assert sum(1 for c in range(256) if _transitions(c) <= 2) == 58


# --- Gabor -------------------------------------------------------------------------

def test_gabor_constant_image_near_zero_response():
    vec = gabor_features(np.full((48, 48), 200, dtype=np.uint8))
    means = vec[0::2]
    assert np.abs(means).max() < 1e-9


def test_gabor_vector_length():
    assert gabor_features(np.zeros((48, 48))).shape == (FEATURE_DIMS["gabor"],)
    assert len(gabor_bank()) == 40


def test_gabor_kernels_are_zero_dc():
    for kernel in gabor_bank():
        assert abs(kernel.sum()) < 1e-12


def test_gabor_matched_grating_dominates_orthogonal():
    lam = 8.0
    yy, xx = np.mgrid[0:48, 0:48].astype(np.float64)
    grating = 127.5 + 127.5 * np.cos(2 * np.pi * xx / lam)  # horizontal frequency
    matched = gabor_kernel(lam, 0.0)
    orthogonal = gabor_kernel(lam, np.pi / 2.0)
    resp_matched = np.abs(gabor_response(grating / 255.0, matched)).mean()
    resp_orth = np.abs(gabor_response(grating / 255.0, orthogonal)).mean()
    assert resp_matched >= 5.0 * resp_orth


def test_gabor_wrong_dims():
    with pytest.raises(DimensionError):
        gabor_features(np.zeros((32, 32)))


def test_features_nan_free(rng):
    img = rng.integers(0, 256, size=(48, 48), dtype=np.uint8)
    assert np.isfinite(face_raw_features(img)).all()
    assert np.isfinite(lbp_features(img)).all()
    assert np.isfinite(gabor_features(img)).all()
    assert np.isfinite(landmark_features(random_landmarks(rng))).all()
