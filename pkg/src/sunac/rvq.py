"""Residual vector quantization with shared down/up projections.

Feature columns are projected to a small code space, then quantized by a
stack of codebooks: each layer picks the entry nearest its incoming
residual (Euclidean, lowest index on ties) and passes the remainder on.
Distances accumulate in float64 so the argmin is reproducible.  Entry 0 of
every codebook is pinned to the zero vector at init, so a layer can always
choose "add nothing" and residual norms never increase with depth.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codec import ModelConfig, WeightStore
from .errors import ContractViolationError, InvalidArgumentError

__all__ = [
    "RvqWeights",
    "QuantizeResult",
    "quantize",
    "codes_to_features",
    "codebook_losses",
]


@dataclass(frozen=True)
class RvqWeights:
    """Projections and codebooks of one quantizer module.

    down_w/down_b map features (F) to the code space (D); up_w/up_b map
    back.  codebooks holds one (n_entries, D) array per layer; all layers
    share the same entry count.
    """

    down_w: np.ndarray
    down_b: np.ndarray
    up_w: np.ndarray
    up_b: np.ndarray
    codebooks: tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(self, "codebooks", tuple(
            np.asarray(cb, dtype=np.float32) for cb in self.codebooks
        ))
        if not self.codebooks:
            raise ContractViolationError("need at least one codebook")
        d = self.code_dim
        for i, cb in enumerate(self.codebooks):
            if cb.ndim != 2 or cb.shape != (self.n_entries, d):
                raise ContractViolationError(
                    f"codebook {i} has shape {cb.shape}, expected "
                    f"({self.n_entries}, {d})"
                )
        if self.down_w.shape != (d, self.feature_dim):
            raise ContractViolationError("down projection shape mismatch")
        if self.up_w.shape != (self.feature_dim, d):
            raise ContractViolationError("up projection shape mismatch")

    @property
    def n_layers(self) -> int:
        return len(self.codebooks)

    @property
    def n_entries(self) -> int:
        return self.codebooks[0].shape[0]

    @property
    def code_dim(self) -> int:
        return self.codebooks[0].shape[1]

    @property
    def feature_dim(self) -> int:
        return self.down_w.shape[1]

    @classmethod
    def from_store(
        cls, store: WeightStore, config: ModelConfig, module_index: int | None = None
    ) -> "RvqWeights":
        prefix = "rvq" if module_index is None else f"rvq{module_index}"
        return cls(
            down_w=store[f"{prefix}.down.weight"],
            down_b=store[f"{prefix}.down.bias"],
            up_w=store[f"{prefix}.up.weight"],
            up_b=store[f"{prefix}.up.bias"],
            codebooks=tuple(store[f"{prefix}.codebook{i}"]
                            for i in range(config.n_codebooks)),
        )


@dataclass(frozen=True)
class QuantizeResult:
    """Outcome of quantizing one feature map.

    codes is (n_active, T) int32; quantized is the (F, T) reconstruction
    through the up projection; residual_norms[i] is the Frobenius norm of
    the code-space residual after layer i.
    """

    quantized: np.ndarray
    codes: np.ndarray
    residual_norms: np.ndarray


def _check_features(features: np.ndarray, weights: RvqWeights) -> np.ndarray:
    features = np.asarray(features, dtype=np.float32)
    if features.ndim != 2 or features.shape[0] != weights.feature_dim:
        raise ContractViolationError(
            f"expected ({weights.feature_dim}, T) features, got {features.shape}"
        )
    if features.shape[1] < 1:
        raise InvalidArgumentError("feature map has no frames")
    return features


def _check_active(n_active: int, weights: RvqWeights) -> None:
    if not 1 <= n_active <= weights.n_layers:
        raise InvalidArgumentError(
            f"n_active must be in [1, {weights.n_layers}], got {n_active}"
        )


def _scan(features: np.ndarray, weights: RvqWeights, n_active: int):
    """Greedy layer-by-layer nearest-entry walk in code space.

    Returns codes, per-layer residual norms, and the final projected
    target (for the losses).  All in float64.
    """
    down_w = weights.down_w.astype(np.float64)
    target = down_w @ features.astype(np.float64) + weights.down_b.astype(
        np.float64
    )[:, None]
    t = target.shape[1]
    codes = np.zeros((n_active, t), dtype=np.int32)
    norms = np.zeros(n_active)
    distances_sq = np.zeros(n_active)
    residual = target.copy()
    for layer in range(n_active):
        entries = weights.codebooks[layer].astype(np.float64)
        # ||r - e||^2 expanded; the argmin ties break toward the lowest
        # index, which np.argmin guarantees.
        d2 = (
            np.sum(entries * entries, axis=1)[:, None]
            - 2.0 * entries @ residual
            + np.sum(residual * residual, axis=0)[None, :]
        )
        picked = np.argmin(d2, axis=0)
        codes[layer] = picked.astype(np.int32)
        residual -= entries[picked].T
        norms[layer] = np.sqrt(np.sum(residual * residual))
        distances_sq[layer] = np.mean(residual * residual)
    return codes, norms, distances_sq, target


def quantize(features: np.ndarray, weights: RvqWeights, n_active: int) -> QuantizeResult:
    """Quantize an (F, T) feature map with the first n_active layers.

    The reconstruction is produced by codes_to_features on the emitted
    codes, so the two paths agree bitwise by construction.
    """
    features = _check_features(features, weights)
    _check_active(n_active, weights)
    codes, norms, _, _ = _scan(features, weights, n_active)
    return QuantizeResult(
        quantized=codes_to_features(codes, weights),
        codes=codes,
        residual_norms=norms,
    )


def codes_to_features(codes: np.ndarray, weights: RvqWeights) -> np.ndarray:
    """Rebuild an (F, T) feature map from code indices.

    Sums the selected entries of the first `codes.shape[0]` codebooks in
    float64 and sends the total through the up projection.
    """
    codes = np.asarray(codes)
    if codes.ndim != 2:
        raise ContractViolationError(f"codes must be (layers, T), got {codes.shape}")
    n_layers = codes.shape[0]
    _check_active(n_layers, weights)
    if codes.min() < 0 or codes.max() >= weights.n_entries:
        raise InvalidArgumentError(
            f"code indices must be in [0, {weights.n_entries}), "
            f"got range [{codes.min()}, {codes.max()}]"
        )
    total = np.zeros((weights.code_dim, codes.shape[1]))
    for layer in range(n_layers):
        total += weights.codebooks[layer].astype(np.float64)[codes[layer]].T
    up_w = weights.up_w.astype(np.float64)
    out = up_w @ total + weights.up_b.astype(np.float64)[:, None]
    return out.astype(np.float32)


def codebook_losses(
    features: np.ndarray, weights: RvqWeights, n_active: int
) -> tuple[float, float]:
    """Forward values of the codebook and commitment losses.

    Both are the mean squared element-wise distance between each layer's
    incoming residual and its selected entry, averaged over layers.  The
    two are numerically identical here; in a training setup they differ
    only in which side the gradient reaches, which is out of scope for a
    forward-only stack.
    """
    features = _check_features(features, weights)
    _check_active(n_active, weights)
    _, _, distances_sq, _ = _scan(features, weights, n_active)
    value = float(np.mean(distances_sq))
    return value, value
