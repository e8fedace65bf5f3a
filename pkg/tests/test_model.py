import numpy as np
import pytest

from identiface.errors import DataError, SpecError
from identiface.model import (
    EMOTION_LABELS,
    FACE_SHAPE_LABELS,
    GENDER_LABELS,
    ModelSpec,
    build_model,
    top2_from_probs,
    validate_label_map,
)


def tiny_spec(**overrides):
    kwargs = dict(
        task="emotion",
        input_shape=(1, 48, 48),
        label_map=list(EMOTION_LABELS),
        width_multiplier=0.125,
    )
    kwargs.update(overrides)
    return ModelSpec(**kwargs)


def test_48_input_five_pools_reaches_1x1():
    spec = tiny_spec()
    assert spec.spatial_trace() == [(24, 24), (12, 12), (6, 6), (3, 3), (1, 1)]


def test_output_layer_shape_at_full_width():
    spec = ModelSpec(task="face_shape", input_shape=(1, 64, 64),
                     label_map=list(FACE_SHAPE_LABELS), width_multiplier=1.0)
    shapes = dict(spec.parameter_shapes())
    assert shapes["dense_out.w"] == (256, 5)
    assert shapes["dense_out.b"] == (5,)


def test_width_multiplier_scales_channels():
    spec = tiny_spec()
    assert spec.scaled_blocks[0] == (8, 8)
    assert spec.scaled_blocks[-1] == (64, 64, 64)
    assert spec.scaled_hidden == 32


def test_pool_underflow_is_spec_error():
    with pytest.raises(SpecError):
        ModelSpec(task="emotion", input_shape=(1, 16, 16),
                  label_map=list(EMOTION_LABELS))  # 5 pools on 16 -> 0


def test_same_seed_bit_identical_initial_weights():
    a = build_model(tiny_spec(), seed=42)
    b = build_model(tiny_spec(), seed=42)
    for p, q in zip(a.parameters(), b.parameters()):
        assert p.data.tobytes() == q.data.tobytes()
    c = build_model(tiny_spec(), seed=43)
    assert any(
        p.data.tobytes() != q.data.tobytes() for p, q in zip(a.parameters(), c.parameters())
    )


def test_parameter_count_reported():
    model = build_model(tiny_spec(), seed=0)
    expected = sum(int(np.prod(s)) for _, s in tiny_spec().parameter_shapes())
    assert model.parameter_count == expected


def test_forward_shapes_and_predict(rng):
    model = build_model(tiny_spec(), seed=0)
    x = rng.random((2, 1, 48, 48))
    logits = model.forward(x)
    assert logits.shape == (2, 5)
    probs = model.predict_batch(x)
    np.testing.assert_allclose(probs.sum(axis=1), [1.0, 1.0], atol=1e-6)


def test_predict_pixels_top2(rng):
    model = build_model(tiny_spec(), seed=0)
    img = rng.integers(0, 256, size=(48, 48), dtype=np.uint8)
    result = model.predict_pixels(img)
    assert result.label in EMOTION_LABELS
    assert len(result.top2) == 2
    assert result.top2[0][1] >= result.top2[1][1]
    assert result.probabilities.sum() == pytest.approx(1.0, abs=1e-6)


def test_top2_ordering_and_rounding():
    probs = [0.50, 0.30, 0.10, 0.05, 0.05]
    top2 = top2_from_probs(probs, EMOTION_LABELS)
    assert top2 == [("neutral", 50.0), ("happy", 30.0)]


def test_top2_exact_tie_lower_index_first():
    probs = [0.25, 0.4, 0.4, 0.05, 0.05]  # tie between indices 1 and 2
    top2 = top2_from_probs(probs, EMOTION_LABELS)
    assert top2 == [("happy", 40.0), ("angry", 40.0)]


def test_top2_percent_rounded_to_tenth():
    top2 = top2_from_probs([0.61549, 0.38451], GENDER_LABELS)
    assert top2[0] == ("female", 61.5)
    assert top2[1] == ("male", 38.5)


def test_evaluate_always_class0_on_balanced_set(rng):
    model = build_model(tiny_spec(), seed=0)
    # force the output head to always pick class 0
    model.params["dense_out.w"].data[...] = 0.0
    model.params["dense_out.b"].data[...] = np.array([10.0, 0, 0, 0, 0])
    x = rng.random((20, 1, 48, 48))
    y = np.repeat(np.arange(5), 4)
    report = model.evaluate_arrays(x, y)
    assert report.accuracy == pytest.approx(0.2)
    assert len(report.labels) == 5
    # recount oracle
    assert report.accuracy == np.trace(report.confusion) / report.confusion.sum()


def test_evaluate_rejects_out_of_range_labels(rng):
    model = build_model(tiny_spec(), seed=0)
    with pytest.raises(DataError):
        model.evaluate_arrays(rng.random((2, 1, 48, 48)), np.array([0, 7]))


def test_label_map_constants_match_task_orders():
    assert GENDER_LABELS == ["female", "male"]
    assert FACE_SHAPE_LABELS == ["oblong", "square", "round", "heart", "oval"]
    assert EMOTION_LABELS == ["neutral", "happy", "angry", "surprise", "sad"]


def test_validate_label_map_enforcement():
    validate_label_map("gender", ["female", "male"])
    with pytest.raises(DataError):
        validate_label_map("gender", ["male", "female"])
    validate_label_map("face_shape", ["oblong", "square", "round"])
    with pytest.raises(DataError):
        validate_label_map("face_shape", ["round", "square", "oblong"])
    validate_label_map("emotion", ["neutral", "happy", "angry", "surprise"])
    with pytest.raises(DataError):
        validate_label_map("emotion", ["happy", "neutral"])
    validate_label_map("recognition", ["anyone", "Other"])
