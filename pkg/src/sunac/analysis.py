"""Multiply-accumulate and parameter accounting for the codec family.

Costs follow the usual conventions: a convolution spends
C_out * C_in * K multiplies per output column, a linear map D_out * D_in
per column, and one attention layer 2 * T^2 * d for scores plus context on
top of 4 * T * d^2 for its projections.  Activations, norms, softmax, and
biases are not counted.  Each layer is tagged either `const` (runs once per
mixture regardless of the source count) or `per_source` (runs once per
decoded source), and flagged by whether its cost grows linearly or
quadratically with the frame count, since attention leaves the linear
regime as inputs get longer.

Layer shapes for the built-in specs are derived from the same node trees
the runnable models are built from, and parameter totals are taken from
the model manifests, so the analyzer cannot drift away from the signal
path it describes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from . import codec as _codec
from .errors import ConfigError, InvalidArgumentError

__all__ = [
    "TAG_CONST",
    "TAG_PER_SOURCE",
    "LayerSpec",
    "ArchSpec",
    "LayerCost",
    "MacReport",
    "count_macs",
    "builtin_specs",
    "BUILTIN_ORDER",
    "CompareReport",
    "compare_report",
    "format_report_text",
    "report_to_json",
]

TAG_CONST = "const"
TAG_PER_SOURCE = "per_source"

SCALING_LINEAR = "linear"
SCALING_QUADRATIC = "quadratic"

_KINDS = ("conv1d", "transposed_conv1d", "linear", "attention",
          "feed_forward", "film", "rvq_scan")


@dataclass(frozen=True)
class LayerSpec:
    """Shape description of one counted layer.

    Only the fields relevant to `kind` need to be set; count_macs validates
    the rest and tracks channel agreement between consecutive layers.
    """

    name: str
    kind: str
    tag: str
    c_in: int | None = None
    c_out: int | None = None
    kernel: int | None = None
    stride: int = 1
    dilation: int = 1
    padding: int = 0
    output_padding: int = 0
    d_model: int | None = None
    n_heads: int | None = None
    d_ff: int | None = None
    d_in: int | None = None
    d_out: int | None = None
    n_codebooks: int | None = None
    n_entries: int | None = None
    code_dim: int | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ConfigError(f"unknown layer kind {self.kind!r}")
        if self.tag not in (TAG_CONST, TAG_PER_SOURCE):
            raise ConfigError(f"unknown tag {self.tag!r}")


@dataclass(frozen=True)
class ArchSpec:
    """An ordered layer list plus the architecture's parameter total."""

    name: str
    layers: tuple[LayerSpec, ...]
    params: int


@dataclass(frozen=True)
class LayerCost:
    name: str
    kind: str
    tag: str
    macs: int
    scaling: str


@dataclass(frozen=True)
class MacReport:
    """Cost of one architecture at a given input duration.

    const_macs covers layers that run once per mixture; per_source_macs
    covers layers that repeat for every requested source.
    """

    arch: str
    params: int
    const_macs: int
    per_source_macs: int
    duration_s: float
    sample_rate: int
    layers: tuple[LayerCost, ...] = field(repr=False)

    def total_macs(self, n_sources: int) -> int:
        if n_sources < 1:
            raise InvalidArgumentError("need at least one source")
        return self.const_macs + n_sources * self.per_source_macs


def _conv_out_len(length: int, spec: LayerSpec) -> int:
    span = (spec.kernel - 1) * spec.dilation + 1
    if spec.kind == "transposed_conv1d":
        out = (length - 1) * spec.stride - 2 * spec.padding + span + spec.output_padding
    else:
        out = (length + 2 * spec.padding - span) // spec.stride + 1
    if out < 1:
        raise ConfigError(
            f"layer {spec.name}: output length {out} is not positive at "
            f"input length {length}"
        )
    return out


def _layer_cost(spec: LayerSpec, length: int) -> tuple[int, int, str]:
    """Return (macs, new_length, scaling) for one layer at frame count `length`."""
    t = length
    if spec.kind in ("conv1d", "transposed_conv1d"):
        out_len = _conv_out_len(t, spec)
        per_col = spec.c_out * spec.c_in * spec.kernel
        cols = t if spec.kind == "transposed_conv1d" else out_len
        return per_col * cols, out_len, SCALING_LINEAR
    if spec.kind == "linear":
        return spec.d_out * spec.d_in * t, t, SCALING_LINEAR
    if spec.kind == "attention":
        d = spec.d_model
        macs = 4 * t * d * d + 2 * t * t * d
        return macs, t, SCALING_QUADRATIC
    if spec.kind == "feed_forward":
        return 2 * t * spec.d_model * spec.d_ff, t, SCALING_LINEAR
    if spec.kind == "film":
        d = spec.d_model
        # Two affine maps on one prompt vector plus the per-frame modulation.
        return 2 * d * d + 2 * d * t, t, SCALING_LINEAR
    if spec.kind == "rvq_scan":
        d = spec.code_dim
        scan = spec.n_codebooks * spec.n_entries * d
        projections = 2 * spec.d_model * d
        return (scan + projections) * t, t, SCALING_LINEAR
    raise ConfigError(f"unknown layer kind {spec.kind!r}")


def _channels_after(spec: LayerSpec, channels: int) -> int:
    if spec.kind in ("conv1d", "transposed_conv1d"):
        if spec.c_in != channels:
            raise ConfigError(
                f"layer {spec.name}: expects {spec.c_in} channels but the "
                f"previous layer produced {channels}"
            )
        return spec.c_out
    if spec.kind == "linear":
        if spec.d_in != channels:
            raise ConfigError(
                f"layer {spec.name}: expects width {spec.d_in}, got {channels}"
            )
        return spec.d_out
    width = spec.d_model
    if width is not None and width != channels:
        raise ConfigError(
            f"layer {spec.name}: operates at width {width} but the previous "
            f"layer produced {channels}"
        )
    return channels


def count_macs(spec: ArchSpec, duration_s: float, sample_rate: int = 16000) -> MacReport:
    """Walk an ArchSpec at a given duration and total its MACs.

    Sequence length starts at round(duration * sample_rate) samples and is
    updated by every conv layer, so attention stages automatically see the
    frame count in effect where they sit.
    """
    if duration_s <= 0:
        raise InvalidArgumentError(f"duration must be positive, got {duration_s}")
    length = int(round(duration_s * sample_rate))
    if length < 1:
        raise InvalidArgumentError("duration too short for one sample")
    channels = 1
    costs = []
    const_total = 0
    per_source_total = 0
    for layer in spec.layers:
        channels = _channels_after(layer, channels)
        macs, length, scaling = _layer_cost(layer, length)
        costs.append(LayerCost(layer.name, layer.kind, layer.tag, macs, scaling))
        if layer.tag == TAG_CONST:
            const_total += macs
        else:
            per_source_total += macs
    return MacReport(
        arch=spec.name,
        params=spec.params,
        const_macs=const_total,
        per_source_macs=per_source_total,
        duration_s=duration_s,
        sample_rate=sample_rate,
        layers=tuple(costs),
    )


# ---------------------------------------------------------------------------
# built-in architecture specs


def _specs_from_nodes(nodes, tag: str) -> list[LayerSpec]:
    """Flatten a codec node tree into counted LayerSpec rows."""
    out: list[LayerSpec] = []
    for node in nodes:
        if isinstance(node, _codec.ResidualNode):
            out.extend(_specs_from_nodes(node.children, tag))
        elif isinstance(node, _codec.ConvNode):
            kind = "transposed_conv1d" if node.transposed else "conv1d"
            out.append(LayerSpec(
                name=node.name, kind=kind, tag=tag,
                c_in=node.c_in, c_out=node.c_out, kernel=node.kernel,
                stride=node.stride, dilation=node.dilation,
                padding=node.padding, output_padding=node.output_padding,
            ))
        elif isinstance(node, _codec.TransformerNode):
            out.append(LayerSpec(name=f"{node.name}.attn", kind="attention",
                                 tag=tag, d_model=node.hidden,
                                 n_heads=node.n_heads))
            out.append(LayerSpec(name=f"{node.name}.ff", kind="feed_forward",
                                 tag=tag, d_model=node.hidden, d_ff=node.ff_dim))
        elif isinstance(node, _codec.LinearNode):
            out.append(LayerSpec(name=node.name, kind="linear", tag=tag,
                                 d_in=node.d_in, d_out=node.d_out))
        # Snake/Tanh/Param nodes carry no counted MACs.
    return out


def _rvq_scan_spec(config: _codec.ModelConfig, tag: str, name: str = "rvq") -> LayerSpec:
    return LayerSpec(
        name=name, kind="rvq_scan", tag=tag,
        d_model=config.latent_dim, n_codebooks=config.n_codebooks,
        n_entries=config.codebook_size, code_dim=config.code_dim,
    )


def _film_spec(config: _codec.ModelConfig, tag: str) -> LayerSpec:
    return LayerSpec(name="extractor.film", kind="film", tag=tag,
                     d_model=config.latent_dim)


def _extractor_specs(config: _codec.ModelConfig):
    """Cross-prompt rows (const) and per-source rows (film + refiners)."""
    nodes = {n.name: n for n in _codec.extractor_nodes(config)}
    cross = _specs_from_nodes([nodes["extractor.cross"]], TAG_CONST)
    per_source = [_film_spec(config, TAG_PER_SOURCE)]
    per_source += _specs_from_nodes(
        [nodes["extractor.refine0"], nodes["extractor.refine1"]], TAG_PER_SOURCE
    )
    return cross, per_source


def _spec_single_path(name: str, config: _codec.ModelConfig) -> ArchSpec:
    """A codec run end to end per source: everything is per_source."""
    layers = _specs_from_nodes(_codec.encoder_nodes(config), TAG_PER_SOURCE)
    layers.append(_rvq_scan_spec(config, TAG_PER_SOURCE))
    layers += _specs_from_nodes(_codec.decoder_nodes(config), TAG_PER_SOURCE)
    return ArchSpec(name=name, layers=tuple(layers),
                    params=_codec.count_params(config).total)


def _spec_shared_encoder(name: str, config: _codec.ModelConfig) -> ArchSpec:
    """Shared encoder, then one quantizer and decoder pass per source."""
    layers = _specs_from_nodes(_codec.encoder_nodes(config), TAG_CONST)
    layers.append(_rvq_scan_spec(config, TAG_PER_SOURCE))
    layers += _specs_from_nodes(_codec.decoder_nodes(config), TAG_PER_SOURCE)
    return ArchSpec(name=name, layers=tuple(layers),
                    params=_codec.count_params(config).total)


def _spec_prompted(name: str, config: _codec.ModelConfig,
                   with_decoder: bool) -> ArchSpec:
    """Prompt-conditioned path: shared conv encoder and cross-prompt layer,
    then FiLM, refinement, quantization (and optionally decoding) per source.

    The cross-prompt layer is counted at the mixture's frame count; the
    handful of extra prompt tokens it sees is noise at this resolution.
    """
    layers = _specs_from_nodes(_codec.encoder_nodes(config), TAG_CONST)
    cross, per_source = _extractor_specs(config)
    layers += cross
    layers += per_source
    layers.append(_rvq_scan_spec(config, TAG_PER_SOURCE))
    params = _codec.count_params(config)
    if with_decoder:
        layers += _specs_from_nodes(_codec.decoder_nodes(config), TAG_PER_SOURCE)
        total = params.total
    else:
        total = (params.group_total("encoder")
                 + params.group_total("extractor")
                 + params.group_total("rvq"))
    return ArchSpec(name=name, layers=tuple(layers), params=total)


BUILTIN_ORDER = ("DAC", "DACT", "SDCodec", "SDCodecT", "SUNAC",
                 "SUNAC-encoder-only")


def builtin_specs() -> dict[str, ArchSpec]:
    """ArchSpecs for the named architectures, keyed and ordered as reported."""
    sunac_cfg = _codec.default_config("SUNAC")
    specs = {
        "DAC": _spec_single_path("DAC", _codec.default_config("DAC")),
        "DACT": _spec_single_path("DACT", _codec.default_config("DACT")),
        "SDCodec": _spec_shared_encoder("SDCodec", _codec.default_config("SDCodec")),
        "SDCodecT": _spec_shared_encoder("SDCodecT",
                                         _codec.default_config("SDCodecT")),
        "SUNAC": _spec_prompted("SUNAC", sunac_cfg, with_decoder=True),
        "SUNAC-encoder-only": _spec_prompted("SUNAC-encoder-only", sunac_cfg,
                                             with_decoder=False),
    }
    return {name: specs[name] for name in BUILTIN_ORDER}


# ---------------------------------------------------------------------------
# comparison report


@dataclass(frozen=True)
class CompareReport:
    duration_s: float
    n_sources: int
    sample_rate: int
    rows: tuple[MacReport, ...]


def compare_report(duration_s: float = 1.0, n_sources: int = 1,
                   sample_rate: int = 16000) -> CompareReport:
    """Cost table over every built-in spec at one duration and source count."""
    if n_sources < 1:
        raise InvalidArgumentError("need at least one source")
    rows = tuple(
        count_macs(spec, duration_s, sample_rate)
        for spec in builtin_specs().values()
    )
    return CompareReport(duration_s=duration_s, n_sources=n_sources,
                         sample_rate=sample_rate, rows=rows)


def _gmacs(value: int) -> float:
    return value / 1e9


def format_report_text(report: CompareReport) -> str:
    """Fixed-width table: params, const / per-source / total GMACs."""
    header = (
        f"costs at {report.duration_s:g} s, {report.n_sources} source(s), "
        f"{report.sample_rate} Hz"
    )
    lines = [header, ""]
    lines.append(f"{'arch':<20} {'params (M)':>10} {'const (G)':>10} "
                 f"{'per-src (G)':>11} {'total (G)':>10}")
    for row in report.rows:
        total = row.total_macs(report.n_sources)
        lines.append(
            f"{row.arch:<20} {row.params / 1e6:>10.2f} "
            f"{_gmacs(row.const_macs):>10.2f} "
            f"{_gmacs(row.per_source_macs):>11.2f} "
            f"{_gmacs(total):>10.2f}"
        )
    quadratic = sorted({
        cost.name for row in report.rows for cost in row.layers
        if cost.scaling == SCALING_QUADRATIC
    })
    if quadratic:
        lines.append("")
        lines.append(
            "quadratic in frame count: " + ", ".join(quadratic)
        )
    return "\n".join(lines) + "\n"


def report_to_json(report: CompareReport) -> str:
    payload = {
        "duration_s": report.duration_s,
        "n_sources": report.n_sources,
        "sample_rate": report.sample_rate,
        "rows": [
            {
                "arch": row.arch,
                "params": row.params,
                "const_macs": row.const_macs,
                "per_source_macs": row.per_source_macs,
                "total_macs": row.total_macs(report.n_sources),
                "layers": [
                    {
                        "name": cost.name,
                        "kind": cost.kind,
                        "tag": cost.tag,
                        "macs": cost.macs,
                        "scaling": cost.scaling,
                    }
                    for cost in row.layers
                ],
            }
            for row in report.rows
        ],
    }
    return json.dumps(payload, indent=2) + "\n"
