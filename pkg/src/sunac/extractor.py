"""Prompt-driven source extraction on top of the shared encoder.

A mixture is encoded once; a bank of four learned prompt vectors (one per
source type) steers what each decoding branch should pull out of it.  The
prompt vectors are prepended to the latent sequence and transformed jointly
with it, so the n-th transformed prompt has seen the whole mixture and its
own position.  Each transformed prompt then modulates the transformed
mixture through a FiLM map with a residual connection, and two further
Transformer layers refine the modulated map.  The FiLM maps and refinement
layers are shared across prompts; only the prompt column differs per source.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .codec import ModelConfig, WeightStore
from .errors import ContractViolationError, InvalidArgumentError
from .numerics import TransformerLayerWeights, transformer_block

__all__ = [
    "PromptType",
    "parse_prompts",
    "PromptBank",
    "FilmWeights",
    "ExtractorWeights",
    "cross_prompt",
    "film",
    "extract",
]


class PromptType(enum.Enum):
    """Source types a prompt can request.

    MIX asks for the mixture itself, which makes plain coding a special
    case of extraction.  Enum order fixes both the prompt bank row and the
    wire tag, so it must not change.
    """

    SPEECH = "speech"
    MUSIC = "music"
    SFX = "sfx"
    MIX = "mix"

    @property
    def wire_tag(self) -> int:
        return _WIRE_ORDER.index(self)

    @classmethod
    def from_wire_tag(cls, tag: int) -> "PromptType":
        if not 0 <= tag < len(_WIRE_ORDER):
            raise InvalidArgumentError(f"unknown prompt tag {tag}")
        return _WIRE_ORDER[tag]

    @classmethod
    def parse(cls, text: str) -> "PromptType":
        try:
            return cls(text.strip().lower())
        except ValueError:
            valid = ", ".join(p.value for p in cls)
            raise InvalidArgumentError(
                f"unknown prompt type {text!r}, expected one of: {valid}"
            ) from None


_WIRE_ORDER = (PromptType.SPEECH, PromptType.MUSIC, PromptType.SFX, PromptType.MIX)


def parse_prompts(text: str) -> tuple[PromptType, ...]:
    """Parse a comma-separated prompt list like "speech,speech,music"."""
    parts = [p for p in text.split(",") if p.strip()]
    if not parts:
        raise InvalidArgumentError("prompt list is empty")
    return tuple(PromptType.parse(p) for p in parts)


@dataclass(frozen=True)
class PromptBank:
    """Learned prompt vectors, one row per PromptType in wire order."""

    vectors: np.ndarray  # (4, F) float32

    def __post_init__(self):
        arr = np.asarray(self.vectors, dtype=np.float32)
        if arr.ndim != 2 or arr.shape[0] != len(_WIRE_ORDER):
            raise ContractViolationError(
                f"prompt bank must be ({len(_WIRE_ORDER)}, F), got {arr.shape}"
            )
        object.__setattr__(self, "vectors", arr)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def vector_for(self, prompt: PromptType) -> np.ndarray:
        return self.vectors[prompt.wire_tag]

    @classmethod
    def from_store(cls, store: WeightStore) -> "PromptBank":
        return cls(store["extractor.prompts"])


@dataclass(frozen=True)
class FilmWeights:
    scale_w: np.ndarray
    scale_b: np.ndarray
    shift_w: np.ndarray
    shift_b: np.ndarray

    @classmethod
    def from_store(cls, store: WeightStore) -> "FilmWeights":
        return cls(
            scale_w=store["extractor.film.scale.weight"],
            scale_b=store["extractor.film.scale.bias"],
            shift_w=store["extractor.film.shift.weight"],
            shift_b=store["extractor.film.shift.bias"],
        )


@dataclass(frozen=True)
class ExtractorWeights:
    """All extraction parameters: one cross layer, one FiLM, two refiners.

    There is deliberately a single FilmWeights and a single refine tuple;
    every prompt runs through the same objects.
    """

    cross: TransformerLayerWeights
    film: FilmWeights
    refine: tuple[TransformerLayerWeights, ...]

    @classmethod
    def from_store(cls, store: WeightStore, config: ModelConfig) -> "ExtractorWeights":
        from .codec import extractor_nodes, TransformerNode

        nodes = {n.name: n for n in extractor_nodes(config)
                 if isinstance(n, TransformerNode)}
        return cls(
            cross=nodes["extractor.cross"].weights(store),
            film=FilmWeights.from_store(store),
            refine=(nodes["extractor.refine0"].weights(store),
                    nodes["extractor.refine1"].weights(store)),
        )


def cross_prompt(
    features: np.ndarray,
    prompts: tuple[PromptType, ...],
    bank: PromptBank,
    layer: TransformerLayerWeights,
) -> tuple[np.ndarray, np.ndarray]:
    """Jointly transform prompt vectors and mixture latents.

    The N prompt vectors are prepended to the latent sequence at positions
    0..N-1 and a single Transformer layer runs over the combined sequence;
    the first N output columns are split back off.  Rotary position coding
    means two copies of the same prompt at different positions come out
    different, which is what lets duplicated source types separate.

    Returns:
        (transformed_features (F, T), transformed_prompts (F, N)).
    """
    features = np.asarray(features, dtype=np.float32)
    if len(prompts) < 1:
        raise InvalidArgumentError("need at least one prompt")
    if features.ndim != 2 or features.shape[0] != bank.dim:
        raise ContractViolationError(
            f"features {features.shape} do not match prompt dim {bank.dim}"
        )
    columns = np.stack([bank.vector_for(p) for p in prompts], axis=1)
    seq = np.concatenate([columns, features], axis=1)
    out = transformer_block(seq, layer, name="extractor.cross")
    n = len(prompts)
    return out[:, n:], out[:, :n]


def film(
    x: np.ndarray,
    prompt_column: np.ndarray,
    weights: FilmWeights,
) -> np.ndarray:
    """Feature-wise modulation with a residual path.

    out = x + f(p) * x + h(p), where f and h are affine maps of the
    transformed prompt column p, broadcast over time.  With f and h both
    identically zero this is exactly the identity.
    """
    x = np.asarray(x, dtype=np.float32)
    p = np.asarray(prompt_column, dtype=np.float64).reshape(-1)
    if x.ndim != 2 or p.shape[0] != x.shape[0]:
        raise ContractViolationError(
            f"prompt column of length {p.shape[0]} does not match "
            f"feature map {x.shape}"
        )
    scale = weights.scale_w.astype(np.float64) @ p + weights.scale_b
    shift = weights.shift_w.astype(np.float64) @ p + weights.shift_b
    x64 = x.astype(np.float64)
    out = x64 + scale[:, None] * x64 + shift[:, None]
    return out.astype(np.float32)


def extract(
    features: np.ndarray,
    prompts: tuple[PromptType, ...],
    bank: PromptBank,
    weights: ExtractorWeights,
) -> list[np.ndarray]:
    """Produce one refined feature map per prompt from shared mixture latents.

    Runs cross_prompt once, then per prompt: FiLM modulation with that
    prompt's transformed column followed by the two shared refinement
    layers.  Output order matches the prompt order.
    """
    x_shared, p_shared = cross_prompt(features, prompts, bank, weights.cross)
    maps = []
    for n in range(len(prompts)):
        branch = film(x_shared, p_shared[:, n], weights.film)
        for li, layer in enumerate(weights.refine):
            branch = transformer_block(branch, layer,
                                       name=f"extractor.refine{li}")
        maps.append(branch)
    return maps
