"""Adapter arithmetic against a dense oracle and finite differences."""
import numpy as np
import pytest

from drskit.lora import (
    DimensionMismatchError,
    LoraLayer,
    RankTooLargeError,
    adapter_forward,
    adapter_gradients,
    apply_gradients,
    attention_layer_specs,
    frozen_forward,
    grad_check,
    initialize_adapter,
    lora_forward,
    model_param_summary,
    param_counts,
)
from drskit.testing import random_lora_layer

from oracles import dense_lora_forward


def test_forward_matches_dense_oracle():
    """h = W0 x + B(Ax) equals (W0 + BA) x without ever forming BA."""
    rng = np.random.default_rng(42)
    for _ in range(300):
        layer = random_lora_layer(rng)
        x = rng.standard_normal(layer.k)
        got = lora_forward(layer, x)
        want = dense_lora_forward(layer, x)
        assert np.allclose(got, want, rtol=1e-12, atol=1e-12)
        assert np.allclose(got, frozen_forward(layer, x) + adapter_forward(layer, x))


def test_gradients_match_finite_differences():
    rng = np.random.default_rng(7)
    for _ in range(50):
        layer = random_lora_layer(rng, max_dim=6, max_rank=3)
        x = rng.standard_normal(layer.k)
        g = rng.standard_normal(layer.d)
        check = grad_check(layer, x, g)
        assert check.max_relative_error < 1e-6
        dB, dA = adapter_gradients(layer, x, g)
        assert np.array_equal(check.dB, dB)
        assert np.array_equal(check.dA, dA)


def test_gradient_shapes_and_zero_case():
    layer = initialize_adapter(np.eye(4), r=2, seed=1)
    dB, dA = adapter_gradients(layer, np.ones(4), np.zeros(4))
    assert dB.shape == (4, 2) and dA.shape == (2, 4)
    assert not dB.any() and not dA.any()
    assert grad_check(layer, np.ones(4), np.zeros(4)).max_relative_error == 0.0


def test_param_counts_reference_point():
    counts = param_counts(1024, 1024, 32)
    assert counts["full"] == 1_048_576
    assert counts["lora"] == 65_536
    assert counts["ratio"] == pytest.approx(0.0625)


def test_param_counts_bounds():
    with pytest.raises(RankTooLargeError):
        param_counts(8, 8, 8)
    with pytest.raises(RankTooLargeError):
        param_counts(8, 8, 0)
    with pytest.raises(ValueError):
        param_counts(0, 8, 1)


def test_layer_is_immutable():
    layer = initialize_adapter(np.eye(3), r=1)
    with pytest.raises(AttributeError):
        layer.B = np.zeros((3, 1))
    with pytest.raises(ValueError):
        layer.W0[0, 0] = 5.0
    assert layer.trainable_count() == 1 * (3 + 3)
    assert set(layer.trainable_parameters()) == {"B", "A"}


def test_layer_shape_checks():
    with pytest.raises(DimensionMismatchError, match="rows"):
        LoraLayer(np.eye(4), np.zeros((3, 2)), np.zeros((2, 4)))
    with pytest.raises(DimensionMismatchError, match="columns"):
        LoraLayer(np.eye(4), np.zeros((4, 2)), np.zeros((2, 3)))
    with pytest.raises(DimensionMismatchError, match="inner ranks"):
        LoraLayer(np.eye(4), np.zeros((4, 2)), np.zeros((3, 4)))
    with pytest.raises(RankTooLargeError):
        LoraLayer(np.eye(4), np.zeros((4, 4)), np.zeros((4, 4)))
    with pytest.raises(DimensionMismatchError, match="2-D"):
        LoraLayer(np.zeros(4), np.zeros((4, 1)), np.zeros((1, 4)))


def test_forward_checks_vector_length():
    layer = initialize_adapter(np.eye(3), r=1)
    with pytest.raises(DimensionMismatchError, match="length 3"):
        lora_forward(layer, np.ones(4))


def test_initialize_adapter_starts_at_frozen():
    """B = 0 makes the adapted layer coincide with its frozen path."""
    rng = np.random.default_rng(0)
    W0 = rng.standard_normal((5, 7))
    layer = initialize_adapter(W0, r=3, seed=9)
    x = rng.standard_normal(7)
    assert np.array_equal(lora_forward(layer, x), frozen_forward(layer, x))
    assert layer.A.any()   # A is random, not zero


def test_apply_gradients_shares_frozen_base():
    rng = np.random.default_rng(3)
    layer = random_lora_layer(rng)
    x = rng.standard_normal(layer.k)
    g = rng.standard_normal(layer.d)
    dB, dA = adapter_gradients(layer, x, g)
    stepped = apply_gradients(layer, dB, dA, lr=0.1)
    assert stepped.W0 is layer.W0
    assert np.allclose(stepped.B, layer.B - 0.1 * dB)
    # a step against the gradient lowers the loss
    assert g @ lora_forward(stepped, x) < g @ lora_forward(layer, x)
    with pytest.raises(DimensionMismatchError):
        apply_gradients(layer, dB.T, dA, lr=0.1)


def test_attention_specs_adapt_query_and_value():
    specs = attention_layer_specs(2, 16)
    assert len(specs) == 8
    adapted = [s.name for s in specs if s.adapted]
    assert adapted == ["block0.query", "block0.value",
                       "block1.query", "block1.value"]
    with pytest.raises(ValueError):
        attention_layer_specs(0, 16)


def test_model_param_summary():
    specs = attention_layer_specs(2, 16)
    summary = model_param_summary(specs, r=4)
    assert summary["frozen"] == 8 * 16 * 16
    assert summary["trainable"] == 4 * (4 * 32)
    assert summary["adapted_layers"] == ("block0.query", "block0.value",
                                         "block1.query", "block1.value")
    with pytest.raises(RankTooLargeError):
        model_param_summary(specs, r=16)
