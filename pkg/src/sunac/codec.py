"""Codec model family: configurations, deterministic weights, encode/decode.

The runnable signal path is a strided convolutional encoder (residual units
with dilations 1, 3, 9 between downsampling stages), optional Transformer
stages on either side, a shared residual vector quantizer, and a mirrored
transposed-convolution decoder.  Five named configurations cover the family:

    DAC       conv encoder/decoder only, wide (base dims 64 / 1536)
    DACT      narrow conv stacks (32 / 768) plus 3 Transformer layers per side
    SDCodec   DAC topology with three quantizer modules (analyzer only)
    SDCodecT  DACT topology with three quantizer modules (analyzer only)
    SUNAC     DACT conv stacks plus a prompt-driven extraction front end

Every architecture is first described as a tree of layer nodes.  The same
tree yields the tensor manifest (names, shapes, init rules), the runnable
forward pass, the parameter count, and the shape information the cost
analyzer consumes, so those four views cannot drift apart.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass

import numpy as np

from .audio import AudioBuffer
from .errors import (
    ConfigError,
    ContractViolationError,
    CorruptStreamError,
    InvalidArgumentError,
)
from . import numerics

__all__ = [
    "ARCH_FAMILIES",
    "RES_DILATIONS",
    "ModelConfig",
    "default_config",
    "bitrate_bps",
    "TensorSpec",
    "manifest",
    "WeightStore",
    "init_weights",
    "count_params",
    "ParamCount",
    "encode",
    "decode",
    "frames_for_length",
    "load_weights",
]

ARCH_FAMILIES = ("DAC", "DACT", "SDCodec", "SDCodecT", "SUNAC")
RES_DILATIONS = (1, 3, 9)
_RUNNABLE = ("DAC", "DACT", "SUNAC")
_ANALYZER_ONLY = ("SDCodec", "SDCodecT")

WEIGHTS_MAGIC = b"SUWT"
WEIGHTS_VERSION = 1


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class ModelConfig:
    """Structural description of one codec instance.

    Everything the forward pass, the weight initializer, and the cost
    model need is recorded here so they always agree.  `strides` list the
    encoder downsampling factors; the decoder mirrors them in reverse.
    """

    arch_family: str = "SUNAC"
    sample_rate: int = 16000
    strides: tuple[int, ...] = (2, 4, 5, 8)
    enc_base_dim: int = 32
    dec_base_dim: int = 768
    latent_dim: int = 1024
    n_enc_transformer: int = 0
    n_dec_transformer: int = 3
    transformer_hidden: int = 1024
    n_heads: int = 8
    ff_dim: int = 1536
    n_codebooks: int = 12
    codebook_size: int = 1024
    code_dim: int = 8
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "strides", tuple(int(s) for s in self.strides))
        self.validate()

    def validate(self) -> None:
        if self.arch_family not in ARCH_FAMILIES:
            raise ConfigError(
                f"unknown arch family {self.arch_family!r}, "
                f"expected one of {ARCH_FAMILIES}"
            )
        if self.sample_rate <= 0:
            raise ConfigError("sample_rate must be positive")
        if not self.strides or any(s < 1 for s in self.strides):
            raise ConfigError(f"strides must be positive, got {self.strides}")
        if self.sample_rate % self.hop != 0:
            raise ConfigError(
                f"stride product {self.hop} must divide sample rate "
                f"{self.sample_rate} for an integer token rate"
            )
        if self.enc_base_dim < 1 or self.dec_base_dim < 1 or self.latent_dim < 1:
            raise ConfigError("channel dims must be positive")
        if self.dec_base_dim % (2 ** len(self.strides)) != 0:
            raise ConfigError(
                f"dec_base_dim {self.dec_base_dim} must be divisible by "
                f"2^{len(self.strides)} so decoder stages can halve it"
            )
        if self.n_codebooks < 1:
            raise ConfigError("need at least one codebook")
        if self.codebook_size < 2:
            raise ConfigError("codebook needs at least two entries")
        if self.code_dim < 1:
            raise ConfigError("code_dim must be positive")
        uses_transformers = (
            self.n_enc_transformer > 0
            or self.n_dec_transformer > 0
            or self.arch_family == "SUNAC"
        )
        if uses_transformers:
            if self.latent_dim != self.transformer_hidden:
                raise ConfigError(
                    "Transformer stages act on the latent map directly, so "
                    f"latent_dim ({self.latent_dim}) must equal "
                    f"transformer_hidden ({self.transformer_hidden})"
                )
            if self.transformer_hidden % self.n_heads != 0:
                raise ConfigError(
                    f"{self.n_heads} heads do not divide hidden "
                    f"{self.transformer_hidden}"
                )
            if (self.transformer_hidden // self.n_heads) % 2 != 0:
                raise ConfigError("per-head dim must be even for rotary coding")

    # -- derived quantities

    @property
    def hop(self) -> int:
        return math.prod(self.strides)

    @property
    def token_rate(self) -> int:
        return self.sample_rate // self.hop

    @property
    def has_extractor(self) -> bool:
        return self.arch_family == "SUNAC"

    @property
    def n_rvq_modules(self) -> int:
        return 3 if self.arch_family in _ANALYZER_ONLY else 1

    @property
    def bits_per_code(self) -> int:
        return max(1, (self.codebook_size - 1).bit_length())

    @property
    def is_runnable(self) -> bool:
        return self.arch_family in _RUNNABLE

    # -- serialization

    def to_json(self) -> str:
        payload = {
            "arch_family": self.arch_family,
            "sample_rate": self.sample_rate,
            "strides": list(self.strides),
            "enc_base_dim": self.enc_base_dim,
            "dec_base_dim": self.dec_base_dim,
            "latent_dim": self.latent_dim,
            "n_enc_transformer": self.n_enc_transformer,
            "n_dec_transformer": self.n_dec_transformer,
            "transformer_hidden": self.transformer_hidden,
            "n_heads": self.n_heads,
            "ff_dim": self.ff_dim,
            "n_codebooks": self.n_codebooks,
            "codebook_size": self.codebook_size,
            "code_dim": self.code_dim,
            "seed": self.seed,
        }
        return json.dumps(payload, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ModelConfig":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(payload, dict):
            raise ConfigError("config JSON must be an object")
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(payload) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        try:
            return cls(**payload)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


def default_config(family: str) -> ModelConfig:
    """Full-size configuration for one of the named architectures."""
    if family not in ARCH_FAMILIES:
        raise ConfigError(
            f"unknown arch family {family!r}, expected one of {ARCH_FAMILIES}"
        )
    wide = dict(enc_base_dim=64, dec_base_dim=1536)
    narrow = dict(enc_base_dim=32, dec_base_dim=768)
    per_family = {
        "DAC": dict(wide, n_enc_transformer=0, n_dec_transformer=0),
        "SDCodec": dict(wide, n_enc_transformer=0, n_dec_transformer=0),
        "DACT": dict(narrow, n_enc_transformer=3, n_dec_transformer=3),
        "SDCodecT": dict(narrow, n_enc_transformer=3, n_dec_transformer=3),
        "SUNAC": dict(narrow, n_enc_transformer=0, n_dec_transformer=3),
    }
    return ModelConfig(arch_family=family, **per_family[family])


def bitrate_bps(config: ModelConfig) -> int:
    """Bits per second on the wire: codebooks x bits per code x token rate."""
    return config.n_codebooks * config.bits_per_code * config.token_rate


# ---------------------------------------------------------------------------
# layer nodes

# Init rules understood by init_weights.
INIT_UNIFORM = "uniform"      # U[-a, a] with a = sqrt(1 / fan_in)
INIT_ONES = "ones"
INIT_ZEROS = "zeros"
INIT_CODEBOOK = "codebook"    # uniform rows, entry 0 pinned to zero


@dataclass(frozen=True)
class TensorSpec:
    name: str
    shape: tuple[int, ...]
    init: str
    fan_in: int = 0

    @property
    def size(self) -> int:
        return int(math.prod(self.shape))


class ConvNode:
    def __init__(self, name, c_in, c_out, kernel, *, stride=1, dilation=1,
                 padding=0, transposed=False, output_padding=0):
        self.name = name
        self.c_in = c_in
        self.c_out = c_out
        self.kernel = kernel
        self.stride = stride
        self.dilation = dilation
        self.padding = padding
        self.transposed = transposed
        self.output_padding = output_padding

    def manifest(self):
        fan_in = self.c_in * self.kernel
        return [
            TensorSpec(f"{self.name}.weight", (self.c_out, self.c_in, self.kernel),
                       INIT_UNIFORM, fan_in),
            TensorSpec(f"{self.name}.bias", (self.c_out,), INIT_UNIFORM, fan_in),
        ]

    def apply(self, x, store):
        return numerics.conv1d(
            x,
            store[f"{self.name}.weight"],
            store[f"{self.name}.bias"],
            stride=self.stride,
            padding=self.padding,
            dilation=self.dilation,
            transposed=self.transposed,
            output_padding=self.output_padding,
        )


class SnakeNode:
    def __init__(self, name, channels):
        self.name = name
        self.channels = channels

    def manifest(self):
        return [TensorSpec(f"{self.name}.alpha", (self.channels,), INIT_ONES)]

    def apply(self, x, store):
        return numerics.snake(x, store[f"{self.name}.alpha"])


class ResidualNode:
    """y = x + f(x) where f is the child chain; children preserve length."""

    def __init__(self, children):
        self.children = list(children)

    def manifest(self):
        return [spec for child in self.children for spec in child.manifest()]

    def apply(self, x, store):
        y = x
        for child in self.children:
            y = child.apply(y, store)
        if y.shape != x.shape:
            raise ContractViolationError(
                f"residual branch changed shape {x.shape} -> {y.shape}"
            )
        return (x.astype(np.float64) + y.astype(np.float64)).astype(np.float32)


class TanhNode:
    def manifest(self):
        return []

    def apply(self, x, store):
        return np.tanh(x).astype(np.float32)


class LinearNode:
    """Per-column affine map, used by the quantizer projections and FiLM."""

    def __init__(self, name, d_in, d_out):
        self.name = name
        self.d_in = d_in
        self.d_out = d_out

    def manifest(self):
        return [
            TensorSpec(f"{self.name}.weight", (self.d_out, self.d_in),
                       INIT_UNIFORM, self.d_in),
            TensorSpec(f"{self.name}.bias", (self.d_out,), INIT_UNIFORM, self.d_in),
        ]

    def apply(self, x, store):
        w = store[f"{self.name}.weight"].astype(np.float64)
        b = store[f"{self.name}.bias"].astype(np.float64)
        return (w @ np.asarray(x, dtype=np.float64) + b[:, None]).astype(np.float32)


class ParamNode:
    """A bare tensor with no forward op (codebooks, prompt vectors)."""

    def __init__(self, name, shape, init, fan_in=0):
        self.name = name
        self.shape = tuple(shape)
        self.init = init
        self.fan_in = fan_in

    def manifest(self):
        return [TensorSpec(self.name, self.shape, self.init, self.fan_in)]

    def apply(self, x, store):
        raise ContractViolationError(f"{self.name} is not an executable layer")


class TransformerNode:
    def __init__(self, name, hidden, n_heads, ff_dim):
        self.name = name
        self.hidden = hidden
        self.n_heads = n_heads
        self.ff_dim = ff_dim

    def manifest(self):
        d, f = self.hidden, self.ff_dim
        n = self.name
        specs = []
        for part in ("ln1.gain", "ln2.gain"):
            specs.append(TensorSpec(f"{n}.{part}", (d,), INIT_ONES))
        for part in ("ln1.bias", "ln2.bias"):
            specs.append(TensorSpec(f"{n}.{part}", (d,), INIT_ZEROS))
        for part in ("attn.wq", "attn.wk", "attn.wv", "attn.wo"):
            specs.append(TensorSpec(f"{n}.{part}.weight", (d, d), INIT_UNIFORM, d))
            specs.append(TensorSpec(f"{n}.{part}.bias", (d,), INIT_UNIFORM, d))
        specs.append(TensorSpec(f"{n}.ff.w1.weight", (f, d), INIT_UNIFORM, d))
        specs.append(TensorSpec(f"{n}.ff.w1.bias", (f,), INIT_UNIFORM, d))
        specs.append(TensorSpec(f"{n}.ff.w2.weight", (d, f), INIT_UNIFORM, f))
        specs.append(TensorSpec(f"{n}.ff.w2.bias", (d,), INIT_UNIFORM, f))
        return specs

    def weights(self, store) -> numerics.TransformerLayerWeights:
        n = self.name
        return numerics.TransformerLayerWeights(
            n_heads=self.n_heads,
            wq=store[f"{n}.attn.wq.weight"], bq=store[f"{n}.attn.wq.bias"],
            wk=store[f"{n}.attn.wk.weight"], bk=store[f"{n}.attn.wk.bias"],
            wv=store[f"{n}.attn.wv.weight"], bv=store[f"{n}.attn.wv.bias"],
            wo=store[f"{n}.attn.wo.weight"], bo=store[f"{n}.attn.wo.bias"],
            ln1_gain=store[f"{n}.ln1.gain"], ln1_bias=store[f"{n}.ln1.bias"],
            ln2_gain=store[f"{n}.ln2.gain"], ln2_bias=store[f"{n}.ln2.bias"],
            ff_w1=store[f"{n}.ff.w1.weight"], ff_b1=store[f"{n}.ff.w1.bias"],
            ff_w2=store[f"{n}.ff.w2.weight"], ff_b2=store[f"{n}.ff.w2.bias"],
        )

    def apply(self, x, store):
        return numerics.transformer_block(x, self.weights(store), name=self.name)


def _apply_chain(nodes, x, store):
    for node in nodes:
        x = node.apply(x, store)
    return x


# ---------------------------------------------------------------------------
# architecture builders


def _residual_unit(prefix: str, channels: int, dilation: int) -> ResidualNode:
    return ResidualNode([
        SnakeNode(f"{prefix}.snake1", channels),
        ConvNode(f"{prefix}.conv1", channels, channels, 7,
                 dilation=dilation, padding=3 * dilation),
        SnakeNode(f"{prefix}.snake2", channels),
        ConvNode(f"{prefix}.conv2", channels, channels, 1),
    ])


def encoder_nodes(config: ModelConfig) -> list:
    """Conv stack (plus any Transformer stages) mapping waveform to latents."""
    c = config.enc_base_dim
    nodes = [ConvNode("encoder.conv_in", 1, c, 7, padding=3)]
    for bi, s in enumerate(config.strides):
        prefix = f"encoder.block{bi}"
        for ri, d in enumerate(RES_DILATIONS):
            nodes.append(_residual_unit(f"{prefix}.res{ri}", c, d))
        nodes.append(SnakeNode(f"{prefix}.snake", c))
        # Downsampling conv: kernel 2s with ceil(s/2) padding keeps the
        # length exactly divisible through the whole cascade.
        nodes.append(ConvNode(f"{prefix}.down", c, 2 * c, 2 * s,
                              stride=s, padding=math.ceil(s / 2)))
        c *= 2
    nodes.append(SnakeNode("encoder.snake_out", c))
    nodes.append(ConvNode("encoder.conv_out", c, config.latent_dim, 3, padding=1))
    for ti in range(config.n_enc_transformer):
        nodes.append(TransformerNode(f"encoder.transformer{ti}",
                                     config.transformer_hidden,
                                     config.n_heads, config.ff_dim))
    return nodes


def decoder_nodes(config: ModelConfig) -> list:
    """Transformer stages (if any) plus the upsampling conv stack."""
    nodes = []
    for ti in range(config.n_dec_transformer):
        nodes.append(TransformerNode(f"decoder.transformer{ti}",
                                     config.transformer_hidden,
                                     config.n_heads, config.ff_dim))
    c = config.dec_base_dim
    nodes.append(ConvNode("decoder.conv_in", config.latent_dim, c, 7, padding=3))
    for bi, s in enumerate(reversed(config.strides)):
        prefix = f"decoder.block{bi}"
        nodes.append(SnakeNode(f"{prefix}.snake", c))
        # output_padding 1 for odd strides makes each stage produce exactly
        # stride * L columns, so decode length is T * prod(strides).
        nodes.append(ConvNode(f"{prefix}.up", c, c // 2, 2 * s, stride=s,
                              padding=math.ceil(s / 2), transposed=True,
                              output_padding=s % 2))
        c //= 2
        for ri, d in enumerate(RES_DILATIONS):
            nodes.append(_residual_unit(f"{prefix}.res{ri}", c, d))
    nodes.append(SnakeNode("decoder.snake_out", c))
    nodes.append(ConvNode("decoder.conv_out", c, 1, 7, padding=3))
    nodes.append(TanhNode())
    return nodes


def extractor_nodes(config: ModelConfig) -> list:
    """Prompt bank, cross-prompt layer, FiLM maps, and refinement stages."""
    f = config.latent_dim
    hidden, heads, ff = config.transformer_hidden, config.n_heads, config.ff_dim
    return [
        ParamNode("extractor.prompts", (4, f), INIT_UNIFORM, f),
        TransformerNode("extractor.cross", hidden, heads, ff),
        LinearNode("extractor.film.scale", f, f),
        LinearNode("extractor.film.shift", f, f),
        TransformerNode("extractor.refine0", hidden, heads, ff),
        TransformerNode("extractor.refine1", hidden, heads, ff),
    ]


def rvq_nodes(config: ModelConfig, module_index: int | None = None) -> list:
    """Shared projections plus per-layer codebooks for one quantizer module."""
    prefix = "rvq" if module_index is None else f"rvq{module_index}"
    f, d = config.latent_dim, config.code_dim
    nodes = [
        LinearNode(f"{prefix}.down", f, d),
        LinearNode(f"{prefix}.up", d, f),
    ]
    for i in range(config.n_codebooks):
        nodes.append(ParamNode(f"{prefix}.codebook{i}",
                               (config.codebook_size, d), INIT_CODEBOOK, d))
    return nodes


def model_nodes(config: ModelConfig) -> list:
    nodes = list(encoder_nodes(config))
    if config.has_extractor:
        nodes.extend(extractor_nodes(config))
    if config.n_rvq_modules == 1:
        nodes.extend(rvq_nodes(config))
    else:
        for m in range(config.n_rvq_modules):
            nodes.extend(rvq_nodes(config, m))
    nodes.extend(decoder_nodes(config))
    return nodes


def manifest(config: ModelConfig) -> list[TensorSpec]:
    """Ordered tensor manifest for a configuration.

    The order is load-bearing: init_weights draws tensors from a single
    seeded stream in exactly this order.
    """
    specs = [spec for node in model_nodes(config) for spec in node.manifest()]
    seen = set()
    for spec in specs:
        if spec.name in seen:
            raise ConfigError(f"duplicate tensor name {spec.name}")
        seen.add(spec.name)
    return specs


# ---------------------------------------------------------------------------
# weights


@dataclass
class WeightStore:
    """Named float32 tensors plus the seed they were drawn from."""

    seed: int
    tensors: dict[str, np.ndarray]

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self.tensors[name]
        except KeyError:
            raise ContractViolationError(f"weight store has no tensor {name!r}")

    def __contains__(self, name: str) -> bool:
        return name in self.tensors

    def names(self) -> list[str]:
        return list(self.tensors)

    @property
    def total_params(self) -> int:
        return sum(int(t.size) for t in self.tensors.values())

    def save(self, path: str) -> None:
        from .audio import _atomic_write_bytes

        chunks = [WEIGHTS_MAGIC,
                  struct.pack("<H", WEIGHTS_VERSION),
                  struct.pack("<Q", self.seed)]
        for name, tensor in self.tensors.items():
            encoded = name.encode("utf-8")
            chunks.append(struct.pack("<H", len(encoded)))
            chunks.append(encoded)
            chunks.append(struct.pack("<B", tensor.ndim))
            for dim in tensor.shape:
                chunks.append(struct.pack("<I", dim))
            chunks.append(np.ascontiguousarray(tensor, dtype="<f4").tobytes())
        _atomic_write_bytes(path, b"".join(chunks))

    @classmethod
    def load(cls, path: str) -> "WeightStore":
        with open(path, "rb") as handle:
            blob = handle.read()
        if blob[:4] != WEIGHTS_MAGIC:
            raise CorruptStreamError(
                f"{path}: bad magic {blob[:4]!r}, expected {WEIGHTS_MAGIC!r}"
            )
        offset = 4
        (version,) = struct.unpack_from("<H", blob, offset)
        offset += 2
        if version != WEIGHTS_VERSION:
            raise CorruptStreamError(
                f"{path}: unsupported weight format version {version}"
            )
        (seed,) = struct.unpack_from("<Q", blob, offset)
        offset += 8
        tensors: dict[str, np.ndarray] = {}
        try:
            while offset < len(blob):
                (name_len,) = struct.unpack_from("<H", blob, offset)
                offset += 2
                name = blob[offset : offset + name_len].decode("utf-8")
                offset += name_len
                (rank,) = struct.unpack_from("<B", blob, offset)
                offset += 1
                shape = struct.unpack_from(f"<{rank}I", blob, offset)
                offset += 4 * rank
                count = int(math.prod(shape))
                end = offset + 4 * count
                if end > len(blob):
                    raise CorruptStreamError(f"{path}: truncated tensor {name!r}")
                data = np.frombuffer(blob[offset:end], dtype="<f4").reshape(shape)
                tensors[name] = data.copy()
                offset = end
        except (struct.error, UnicodeDecodeError) as exc:
            raise CorruptStreamError(f"{path}: malformed tensor table: {exc}") from exc
        return cls(seed=seed, tensors=tensors)


def init_weights(config: ModelConfig, seed: int) -> WeightStore:
    """Materialize a deterministic weight store for a configuration.

    Weights and biases are drawn uniformly from [-a, a] with
    a = sqrt(1 / fan_in); norm gains start at one, norm biases at zero,
    snake slopes at one.  Codebooks draw uniform rows and then pin entry 0
    to the zero vector, which guarantees that adding a quantizer layer can
    never increase the residual.  Identical (config, seed) pairs give
    bitwise-identical stores.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    tensors: dict[str, np.ndarray] = {}
    for spec in manifest(config):
        if spec.init == INIT_ONES:
            value = np.ones(spec.shape, dtype=np.float32)
        elif spec.init == INIT_ZEROS:
            value = np.zeros(spec.shape, dtype=np.float32)
        elif spec.init in (INIT_UNIFORM, INIT_CODEBOOK):
            bound = math.sqrt(1.0 / max(spec.fan_in, 1))
            value = rng.uniform(-bound, bound, size=spec.shape).astype(np.float32)
            if spec.init == INIT_CODEBOOK:
                value[0, :] = 0.0
        else:
            raise ConfigError(f"unknown init rule {spec.init!r}")
        tensors[spec.name] = value
    return WeightStore(seed=seed, tensors=tensors)


def load_weights(path: str, config: ModelConfig | None = None) -> WeightStore:
    """Load a weight store, optionally validating it against a config."""
    store = WeightStore.load(path)
    if config is not None:
        validate_store(config, store)
    return store


def validate_store(config: ModelConfig, store: WeightStore) -> None:
    for spec in manifest(config):
        if spec.name not in store:
            raise ContractViolationError(
                f"weight store is missing tensor {spec.name!r}"
            )
        found = store[spec.name].shape
        if tuple(found) != spec.shape:
            raise ContractViolationError(
                f"tensor {spec.name!r} has shape {tuple(found)}, "
                f"config expects {spec.shape}"
            )


@dataclass(frozen=True)
class ParamCount:
    total: int
    per_tensor: dict[str, int]

    def group_total(self, prefix: str) -> int:
        dotted = prefix if prefix.endswith(".") else prefix + "."
        return sum(v for k, v in self.per_tensor.items()
                   if k.startswith(dotted) or k == prefix)


def count_params(config: ModelConfig) -> ParamCount:
    """Per-tensor and total parameter counts, straight from the manifest."""
    per_tensor = {spec.name: spec.size for spec in manifest(config)}
    return ParamCount(total=sum(per_tensor.values()), per_tensor=per_tensor)


# ---------------------------------------------------------------------------
# forward passes


def frames_for_length(config: ModelConfig, n_samples: int) -> int:
    """Token count produced for an input of n_samples (before padding)."""
    if n_samples < 1:
        raise InvalidArgumentError("need at least one sample")
    return -(-n_samples // config.hop)  # ceil


def _require_runnable(config: ModelConfig, op: str) -> None:
    if not config.is_runnable:
        raise InvalidArgumentError(
            f"{config.arch_family} exists for cost analysis only and has no "
            f"runnable {op} path; use DAC, DACT, or SUNAC"
        )


def encode(audio: AudioBuffer, config: ModelConfig, store: WeightStore) -> np.ndarray:
    """Encode a waveform into a latent feature map of shape (F, T).

    The input is right-padded with zeros to a multiple of the stride
    product, so T = ceil(len / hop) exactly.  The sample rate must match
    the configuration.
    """
    _require_runnable(config, "encode")
    if audio.sample_rate != config.sample_rate:
        raise InvalidArgumentError(
            f"audio is {audio.sample_rate} Hz but config expects "
            f"{config.sample_rate} Hz"
        )
    if audio.n_samples < 1:
        raise InvalidArgumentError("cannot encode empty audio")
    validate_store(config, store)
    hop = config.hop
    padded_len = frames_for_length(config, audio.n_samples) * hop
    x = np.zeros((1, padded_len), dtype=np.float32)
    x[0, : audio.n_samples] = audio.samples
    features = _apply_chain(encoder_nodes(config), x, store)
    expected_t = padded_len // hop
    if features.shape != (config.latent_dim, expected_t):
        raise ContractViolationError(
            f"encoder produced {features.shape}, expected "
            f"({config.latent_dim}, {expected_t})"
        )
    return features


def decode(features: np.ndarray, config: ModelConfig, store: WeightStore) -> AudioBuffer:
    """Decode a latent feature map back to a waveform.

    Output length is exactly T * prod(strides); callers trim to the
    original length themselves when they know it.
    """
    _require_runnable(config, "decode")
    features = np.asarray(features, dtype=np.float32)
    if features.ndim != 2 or features.shape[0] != config.latent_dim:
        raise ContractViolationError(
            f"expected ({config.latent_dim}, T) features, got {features.shape}"
        )
    if features.shape[1] < 1:
        raise InvalidArgumentError("cannot decode an empty feature map")
    validate_store(config, store)
    out = _apply_chain(decoder_nodes(config), features, store)
    expected = features.shape[1] * config.hop
    if out.shape != (1, expected):
        raise ContractViolationError(
            f"decoder produced {out.shape}, expected (1, {expected})"
        )
    return AudioBuffer(out[0], config.sample_rate)
