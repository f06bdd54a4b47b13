"""Low-rank adapter arithmetic at desk scale.

A layer holds a frozen base matrix W0 (d x k) and a trainable low-rank
pair B (d x r), A (r x k). The forward pass is h = W0 x + B (A x) — the
d x k product B A is never materialized. Includes exact parameter
accounting, analytic adapter gradients with a central-finite-difference
check, and a toy attention-layer registry (adapters sit on the query and
value projections only).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DimensionMismatchError(ValueError):
    pass


class RankTooLargeError(ValueError):
    """Rank must satisfy 1 <= r < min(d, k)."""


def _as_matrix(value, name: str) -> np.ndarray:
    """Private read-only float64 matrix. An array that is already a
    read-only owner (e.g. another layer's W0) is shared, not copied."""
    m = np.asarray(value, dtype=np.float64)
    if m.ndim != 2:
        raise DimensionMismatchError(f"{name} must be 2-D, got shape {m.shape}")
    if m.flags.writeable or m.base is not None:
        m = m.copy()
    m.flags.writeable = False
    return m


class LoraLayer:
    """Immutable adapter layer. Updates go through apply_gradients, which
    returns a new layer sharing the same frozen W0."""

    __slots__ = ("W0", "B", "A")

    def __init__(self, W0, B, A):
        W0 = _as_matrix(W0, "W0")
        B = _as_matrix(B, "B")
        A = _as_matrix(A, "A")
        d, k = W0.shape
        if B.shape[0] != d:
            raise DimensionMismatchError(
                f"B has {B.shape[0]} rows, W0 has {d}")
        if A.shape[1] != k:
            raise DimensionMismatchError(
                f"A has {A.shape[1]} columns, W0 has {k}")
        if B.shape[1] != A.shape[0]:
            raise DimensionMismatchError(
                f"B is {B.shape}, A is {A.shape}: inner ranks differ")
        r = B.shape[1]
        if r < 1:
            raise RankTooLargeError(f"rank must be >= 1, got {r}")
        if r >= min(d, k):
            raise RankTooLargeError(
                f"rank {r} must stay below min(d, k) = {min(d, k)}")
        object.__setattr__(self, "W0", W0)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "A", A)

    def __setattr__(self, name, value):
        raise AttributeError("LoraLayer is immutable")

    @property
    def d(self) -> int:
        return self.W0.shape[0]

    @property
    def k(self) -> int:
        return self.W0.shape[1]

    @property
    def r(self) -> int:
        return self.B.shape[1]

    def trainable_parameters(self) -> dict[str, np.ndarray]:
        """Exactly B and A — W0 is not trainable."""
        return {"B": self.B, "A": self.A}

    def trainable_count(self) -> int:
        return self.r * (self.d + self.k)

    def __repr__(self):
        return f"LoraLayer(d={self.d}, k={self.k}, r={self.r})"


def _as_vector(x, name: str, length: int) -> np.ndarray:
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] != length:
        raise DimensionMismatchError(
            f"{name} must be a vector of length {length}, got shape {v.shape}")
    return v


def frozen_forward(layer: LoraLayer, x) -> np.ndarray:
    x = _as_vector(x, "x", layer.k)
    return layer.W0 @ x


def adapter_forward(layer: LoraLayer, x) -> np.ndarray:
    x = _as_vector(x, "x", layer.k)
    return layer.B @ (layer.A @ x)


def lora_forward(layer: LoraLayer, x) -> np.ndarray:
    """h = W0 x + B (A x), never forming the d x k update matrix."""
    x = _as_vector(x, "x", layer.k)
    return layer.W0 @ x + layer.B @ (layer.A @ x)


def param_counts(d: int, k: int, r: int) -> dict:
    """Exact parameter accounting: full d*k vs adapter r*(d+k)."""
    if d < 1 or k < 1:
        raise ValueError("d and k must be >= 1")
    if r < 1:
        raise RankTooLargeError(f"rank must be >= 1, got {r}")
    if r >= min(d, k):
        raise RankTooLargeError(
            f"rank {r} must stay below min(d, k) = {min(d, k)}")
    full = d * k
    lora = r * (d + k)
    return {"full": full, "lora": lora, "ratio": lora / full}


def adapter_gradients(layer: LoraLayer, x, g) -> tuple[np.ndarray, np.ndarray]:
    """Analytic gradients of L = g . h(x) with respect to B and A.

    dB = outer(g, A x); dA = outer(B^T g, x). W0 gets no gradient.
    """
    x = _as_vector(x, "x", layer.k)
    g = _as_vector(g, "g", layer.d)
    ax = layer.A @ x
    dB = np.outer(g, ax)
    dA = np.outer(layer.B.T @ g, x)
    return dB, dA


@dataclass(frozen=True)
class GradCheckResult:
    dB: np.ndarray
    dA: np.ndarray
    max_relative_error: float


def grad_check(layer: LoraLayer, x, g, step: float = 1e-5) -> GradCheckResult:
    """Compare analytic adapter gradients against central finite
    differences of L = g . h(x), entry by entry.

    The relative error denominator is floored at a small fraction of the
    largest analytic gradient entry so that near-zero entries measure
    absolute noise instead of dividing by nothing; an all-zero gradient
    (g = 0) reports exactly 0.
    """
    x = _as_vector(x, "x", layer.k)
    g = _as_vector(g, "g", layer.d)
    dB, dA = adapter_gradients(layer, x, g)

    def loss(B, A):
        return float(g @ (layer.W0 @ x + B @ (A @ x)))

    scale = max(np.max(np.abs(dB), initial=0.0), np.max(np.abs(dA), initial=0.0))
    floor = max(1e-8, 1e-3 * scale)
    worst = 0.0
    B = np.array(layer.B)
    A = np.array(layer.A)
    for mat, analytic, other_first in ((B, dB, True), (A, dA, False)):
        it = np.nditer(mat, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            orig = mat[idx]
            mat[idx] = orig + step
            hi = loss(B, A)
            mat[idx] = orig - step
            lo = loss(B, A)
            mat[idx] = orig
            fd = (hi - lo) / (2.0 * step)
            an = analytic[idx]
            err = abs(fd - an) / max(abs(fd), abs(an), floor)
            if err > worst:
                worst = err
    return GradCheckResult(dB, dA, worst)


def apply_gradients(layer: LoraLayer, dB, dA, lr: float) -> LoraLayer:
    """One plain gradient step on the adapter; returns a new layer with
    the same frozen W0."""
    dB = _as_matrix(dB, "dB")
    dA = _as_matrix(dA, "dA")
    if dB.shape != layer.B.shape:
        raise DimensionMismatchError(
            f"dB shape {dB.shape} != B shape {layer.B.shape}")
    if dA.shape != layer.A.shape:
        raise DimensionMismatchError(
            f"dA shape {dA.shape} != A shape {layer.A.shape}")
    return LoraLayer(layer.W0, layer.B - lr * dB, layer.A - lr * dA)


def initialize_adapter(W0, r: int, seed: int = 0, scale: float = 0.01) -> LoraLayer:
    """Fresh adapter on a given frozen matrix: B starts at zero (so the
    layer initially equals its frozen path), A small random."""
    W0 = _as_matrix(W0, "W0")
    d, k = W0.shape
    rng = np.random.default_rng(seed)
    B = np.zeros((d, r))
    A = scale * rng.standard_normal((r, k))
    return LoraLayer(W0, B, A)


# ---------------------------------------------------------------------------
# toy model registry: which layers carry adapters

@dataclass(frozen=True)
class LayerSpec:
    name: str
    d: int
    k: int
    adapted: bool


def attention_layer_specs(n_blocks: int, d_model: int) -> tuple[LayerSpec, ...]:
    """Projection layers of a toy attention stack. Adapters go on the
    query and value projections only; key and output stay frozen."""
    if n_blocks < 1 or d_model < 1:
        raise ValueError("need n_blocks >= 1 and d_model >= 1")
    specs = []
    for i in range(n_blocks):
        for proj, adapted in (("query", True), ("key", False),
                              ("value", True), ("output", False)):
            specs.append(LayerSpec(f"block{i}.{proj}", d_model, d_model, adapted))
    return tuple(specs)


def model_param_summary(specs, r: int) -> dict:
    """Sum frozen and trainable parameters over a layer registry."""
    frozen = 0
    trainable = 0
    adapted_names = []
    for spec in specs:
        frozen += spec.d * spec.k
        if spec.adapted:
            if r < 1 or r >= min(spec.d, spec.k):
                raise RankTooLargeError(
                    f"rank {r} invalid for layer {spec.name} "
                    f"({spec.d} x {spec.k})")
            trainable += r * (spec.d + spec.k)
            adapted_names.append(spec.name)
    return {
        "frozen": frozen,
        "trainable": trainable,
        "adapted_layers": tuple(adapted_names),
        "ratio": (trainable / frozen) if frozen else 0.0,
    }
