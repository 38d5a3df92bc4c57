"""Dense numeric kernels shared by the codec stack.

One-dimensional convolutions (strided, dilated, and transposed), a
Transformer block with rotary position coding, and the STFT / mel machinery
behind the spectral losses and mask-based evaluation.

Neural kernels keep tensors in float32 but accumulate every dot product in
float64, so outputs are reproducible bit for bit on a given platform.  All
functions are pure: no hidden state, safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .errors import ContractViolationError, InvalidArgumentError, NumericError

__all__ = [
    "conv1d",
    "snake",
    "layer_norm",
    "gelu",
    "rope_rotate",
    "TransformerLayerWeights",
    "transformer_block",
    "attention_probs",
    "stft",
    "istft",
    "mel_filterbank",
    "mel_spectrogram",
]

_LN_EPS = 1e-5


def as_samples(audio) -> np.ndarray:
    """Pull a 1-D float64 sample vector out of an AudioBuffer or array."""
    arr = np.asarray(getattr(audio, "samples", audio), dtype=np.float64)
    if arr.ndim != 1:
        raise ContractViolationError(f"expected 1-D audio, got shape {arr.shape}")
    return arr


def _f64(a: np.ndarray) -> np.ndarray:
    return np.asarray(a, dtype=np.float64)


# ---------------------------------------------------------------------------
# convolution


def conv1d(
    x: np.ndarray,
    weight: np.ndarray,
    bias: np.ndarray | None = None,
    *,
    stride: int = 1,
    padding: int = 0,
    dilation: int = 1,
    transposed: bool = False,
    output_padding: int = 0,
) -> np.ndarray:
    """Strided 1-D convolution, or its transpose, over a channel-major signal.

    Args:
        x: input of shape (C_in, L), float32.
        weight: kernels of shape (C_out, C_in, K).  The same layout is used
            for the transposed direction; C_in is always the channel count
            of `x`.
        bias: optional (C_out,) vector added to every output column.
        stride, padding, dilation: the usual conv hyperparameters.
        transposed: scatter instead of gather.  Output length becomes
            (L - 1) * stride - 2 * padding + span + output_padding where
            span = (K - 1) * dilation + 1.
        output_padding: extra columns appended in the transposed direction
            only, to disambiguate the output length for odd strides.

    Returns:
        (C_out, L_out) float32.  Forward direction satisfies
        L_out = (L + 2 * padding - span) // stride + 1.
    """
    x = np.asarray(x, dtype=np.float32)
    w = np.asarray(weight, dtype=np.float32)
    if x.ndim != 2 or w.ndim != 3:
        raise ContractViolationError(
            f"conv1d wants (C_in, L) input and (C_out, C_in, K) kernels, "
            f"got {x.shape} and {w.shape}"
        )
    if stride < 1:
        raise InvalidArgumentError(f"stride must be >= 1, got {stride}")
    if dilation < 1:
        raise InvalidArgumentError(f"dilation must be >= 1, got {dilation}")
    if padding < 0:
        raise InvalidArgumentError(f"padding must be >= 0, got {padding}")
    if output_padding and not transposed:
        raise InvalidArgumentError("output_padding only applies when transposed")
    if not 0 <= output_padding < max(stride, 1) + 1:
        raise InvalidArgumentError(f"output_padding out of range: {output_padding}")
    c_out, c_in, k = w.shape
    if x.shape[0] != c_in:
        raise ContractViolationError(
            f"input has {x.shape[0]} channels, kernels expect {c_in}"
        )
    length = x.shape[1]
    span = (k - 1) * dilation + 1
    x64 = x.astype(np.float64)
    w64 = w.astype(np.float64)

    if transposed:
        l_out = (length - 1) * stride - 2 * padding + span + output_padding
        if l_out < 1:
            raise InvalidArgumentError(
                f"transposed conv output length {l_out} is not positive"
            )
        # Each input column scatters a full kernel; accumulate per tap.
        contrib = (w64.transpose(0, 2, 1).reshape(c_out * k, c_in) @ x64).reshape(
            c_out, k, length
        )
        full = np.zeros((c_out, (length - 1) * stride + span + output_padding))
        offsets = np.arange(length) * stride
        for tap in range(k):
            full[:, tap * dilation + offsets] += contrib[:, tap, :]
        y = full[:, padding : padding + l_out]
    else:
        padded_len = length + 2 * padding
        if padded_len < span:
            raise InvalidArgumentError(
                f"kernel span {span} exceeds padded input length {padded_len}"
            )
        l_out = (padded_len - span) // stride + 1
        xp = np.zeros((c_in, padded_len))
        xp[:, padding : padding + length] = x64
        starts = np.arange(l_out) * stride
        taps = np.arange(k) * dilation
        cols = xp[:, starts[:, None] + taps[None, :]]  # (C_in, L_out, K)
        y = w64.reshape(c_out, c_in * k) @ cols.transpose(0, 2, 1).reshape(
            c_in * k, l_out
        )

    if bias is not None:
        y = y + np.asarray(bias, dtype=np.float64)[:, None]
    return y.astype(np.float32)


def snake(x: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """Periodic activation x + sin^2(alpha * x) / alpha with per-channel alpha."""
    x = np.asarray(x, dtype=np.float32)
    a = np.asarray(alpha, dtype=np.float32)[:, None]
    return (x + np.square(np.sin(a * x)) / a).astype(np.float32)


# ---------------------------------------------------------------------------
# transformer block


def gelu(x: np.ndarray) -> np.ndarray:
    """Exact (erf-based) Gaussian error linear unit."""
    return 0.5 * x * (1.0 + erf(x / np.sqrt(2.0)))


def layer_norm(
    x: np.ndarray, gain: np.ndarray, bias: np.ndarray, eps: float = _LN_EPS
) -> np.ndarray:
    """Normalize each column of an (F, T) map across its features."""
    x64 = np.asarray(x, dtype=np.float64)
    out = _ln_rows(x64.T, np.asarray(gain, np.float64), np.asarray(bias, np.float64), eps)
    return out.T.astype(np.float32)


def _ln_rows(tokens: np.ndarray, gain, bias, eps: float = _LN_EPS) -> np.ndarray:
    # tokens: (T, D) float64, normalized along the last axis.
    mean = tokens.mean(axis=-1, keepdims=True)
    var = np.square(tokens - mean).mean(axis=-1, keepdims=True)
    return (tokens - mean) / np.sqrt(var + eps) * gain + bias


def rope_rotate(
    x: np.ndarray, positions: np.ndarray, base: float = 10000.0
) -> np.ndarray:
    """Apply rotary position coding to per-head vectors.

    x has shape (T, H, Dh) with Dh even.  Consecutive (even, odd) pairs of
    each head vector are rotated by an angle that grows with the token
    position and shrinks geometrically with the pair index, so two equal
    tokens at different positions stop being equal after rotation.
    """
    x = np.asarray(x, dtype=np.float64)
    dh = x.shape[-1]
    if dh % 2 != 0:
        raise ContractViolationError(f"rotary coding needs an even head dim, got {dh}")
    freqs = base ** (-np.arange(0, dh, 2, dtype=np.float64) / dh)
    angles = np.asarray(positions, dtype=np.float64)[:, None] * freqs[None, :]
    cos = np.cos(angles)[:, None, :]
    sin = np.sin(angles)[:, None, :]
    even = x[..., 0::2]
    odd = x[..., 1::2]
    out = np.empty_like(x)
    out[..., 0::2] = even * cos - odd * sin
    out[..., 1::2] = even * sin + odd * cos
    return out


@dataclass(frozen=True)
class TransformerLayerWeights:
    """Parameters of one pre-norm Transformer layer.

    Projection matrices are (D, D) with rows indexing outputs; the feed
    forward expands to ff_dim and contracts back.  `validate` checks the
    shapes agree and that the per-head dimension is even, which the rotary
    coding requires.
    """

    n_heads: int
    wq: np.ndarray
    wk: np.ndarray
    wv: np.ndarray
    wo: np.ndarray
    bq: np.ndarray
    bk: np.ndarray
    bv: np.ndarray
    bo: np.ndarray
    ln1_gain: np.ndarray
    ln1_bias: np.ndarray
    ln2_gain: np.ndarray
    ln2_bias: np.ndarray
    ff_w1: np.ndarray
    ff_b1: np.ndarray
    ff_w2: np.ndarray
    ff_b2: np.ndarray

    @property
    def hidden_dim(self) -> int:
        return self.wq.shape[0]

    @property
    def head_dim(self) -> int:
        return self.hidden_dim // self.n_heads

    @property
    def ff_dim(self) -> int:
        return self.ff_w1.shape[0]

    def validate(self) -> None:
        d = self.hidden_dim
        if self.n_heads < 1 or d % self.n_heads != 0:
            raise ContractViolationError(
                f"{self.n_heads} heads do not divide hidden dim {d}"
            )
        if (d // self.n_heads) % 2 != 0:
            raise ContractViolationError(
                f"head dim {d // self.n_heads} must be even for rotary coding"
            )
        for name in ("wq", "wk", "wv", "wo"):
            if getattr(self, name).shape != (d, d):
                raise ContractViolationError(f"{name} must be ({d}, {d})")
        for name in ("bq", "bk", "bv", "bo", "ln1_gain", "ln1_bias",
                     "ln2_gain", "ln2_bias", "ff_b2"):
            if getattr(self, name).shape != (d,):
                raise ContractViolationError(f"{name} must be ({d},)")
        f = self.ff_dim
        if self.ff_w1.shape != (f, d) or self.ff_w2.shape != (d, f):
            raise ContractViolationError("feed-forward shapes are inconsistent")
        if self.ff_b1.shape != (f,):
            raise ContractViolationError(f"ff_b1 must be ({f},)")


def _attention(tokens: np.ndarray, w: TransformerLayerWeights,
               positions: np.ndarray, use_rope: bool):
    t, d = tokens.shape
    heads, dh = w.n_heads, w.head_dim
    q = (tokens @ w.wq.T.astype(np.float64) + w.bq).reshape(t, heads, dh)
    k = (tokens @ w.wk.T.astype(np.float64) + w.bk).reshape(t, heads, dh)
    v = (tokens @ w.wv.T.astype(np.float64) + w.bv).reshape(t, heads, dh)
    if use_rope:
        q = rope_rotate(q, positions)
        k = rope_rotate(k, positions)
    scores = np.einsum("thd,shd->hts", q, k) / np.sqrt(dh)
    scores -= scores.max(axis=-1, keepdims=True)
    probs = np.exp(scores)
    probs /= probs.sum(axis=-1, keepdims=True)
    ctx = np.einsum("hts,shd->thd", probs, v).reshape(t, d)
    out = ctx @ w.wo.T.astype(np.float64) + w.bo
    return out, probs


def transformer_block(
    x: np.ndarray,
    weights: TransformerLayerWeights,
    *,
    use_rope: bool = True,
    positions: np.ndarray | None = None,
    return_attention: bool = False,
    name: str | None = None,
):
    """Run one pre-norm Transformer layer over an (F, T) feature map.

    Columns are tokens.  F must equal the layer's hidden dim.  Attention is
    full (non-causal); rotary coding is applied to queries and keys only.
    Raises NumericError naming the layer if the output is not finite.
    """
    weights.validate()
    x = np.asarray(x, dtype=np.float32)
    if x.ndim != 2 or x.shape[0] != weights.hidden_dim:
        raise ContractViolationError(
            f"expected ({weights.hidden_dim}, T) input, got {x.shape}"
        )
    if x.shape[1] < 1:
        raise InvalidArgumentError("transformer input needs at least one token")
    tokens = x.T.astype(np.float64)
    if positions is None:
        positions = np.arange(tokens.shape[0])

    normed = _ln_rows(tokens, _f64(weights.ln1_gain), _f64(weights.ln1_bias))
    attn_out, probs = _attention(normed, weights, positions, use_rope)
    tokens = tokens + attn_out
    normed = _ln_rows(tokens, _f64(weights.ln2_gain), _f64(weights.ln2_bias))
    hidden = gelu(normed @ weights.ff_w1.T.astype(np.float64) + weights.ff_b1)
    tokens = tokens + hidden @ weights.ff_w2.T.astype(np.float64) + weights.ff_b2

    out = tokens.T.astype(np.float32)
    if not np.all(np.isfinite(out)):
        where = name if name is not None else "<unnamed>"
        raise NumericError(f"non-finite output in transformer layer {where}")
    if return_attention:
        return out, probs
    return out


def attention_probs(
    x: np.ndarray,
    weights: TransformerLayerWeights,
    *,
    use_rope: bool = True,
    positions: np.ndarray | None = None,
) -> np.ndarray:
    """Attention map (H, T, T) a transformer_block call would produce."""
    _, probs = transformer_block(
        x, weights, use_rope=use_rope, positions=positions, return_attention=True
    )
    return probs


# ---------------------------------------------------------------------------
# STFT and mel


def _window(kind: str, n_fft: int) -> np.ndarray:
    if kind == "hann":
        # Periodic form, the right one for overlap-add analysis.
        return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n_fft) / n_fft)
    if kind == "rect":
        return np.ones(n_fft)
    raise InvalidArgumentError(f"unknown window {kind!r}, expected 'hann' or 'rect'")


def _check_stft_params(n_fft: int, hop: int) -> None:
    if n_fft < 2 or n_fft & (n_fft - 1) != 0:
        raise InvalidArgumentError(f"n_fft must be a power of two, got {n_fft}")
    if not 0 < hop <= n_fft:
        raise InvalidArgumentError(f"hop must be in (0, n_fft], got {hop}")


def stft(audio, n_fft: int, hop: int, window: str = "hann") -> np.ndarray:
    """Short-time Fourier transform of a mono signal.

    The signal is zero-padded by n_fft // 2 on both sides, so frame `t`
    is centered on sample `t * hop` and the frame count is a pure function
    of the input length: 1 + len(x) // hop.

    Args:
        audio: AudioBuffer or 1-D array.
        n_fft: FFT size, a power of two.
        hop: step between frames, 0 < hop <= n_fft.
        window: "hann" (default) or "rect".

    Returns:
        Complex matrix of shape (n_fft // 2 + 1, n_frames).
    """
    x = as_samples(audio)
    if x.size == 0:
        raise InvalidArgumentError("cannot transform empty audio")
    _check_stft_params(n_fft, hop)
    win = _window(window, n_fft)
    pad = n_fft // 2
    xp = np.concatenate([np.zeros(pad), x, np.zeros(pad)])
    n_frames = 1 + x.size // hop
    frames = np.lib.stride_tricks.sliding_window_view(xp, n_fft)[::hop][:n_frames]
    return np.fft.rfft(frames * win, axis=1).T


def istft(
    spec: np.ndarray,
    n_fft: int,
    hop: int,
    window: str = "hann",
    length: int | None = None,
) -> np.ndarray:
    """Invert `stft` by windowed overlap-add with squared-window weighting.

    `length` selects how many samples to return after stripping the
    center padding; it defaults to (n_frames - 1) * hop, which equals the
    original length whenever that length was a multiple of the hop.
    """
    spec = np.asarray(spec)
    _check_stft_params(n_fft, hop)
    if spec.ndim != 2 or spec.shape[0] != n_fft // 2 + 1:
        raise ContractViolationError(
            f"expected ({n_fft // 2 + 1}, n_frames) spectrogram, got {spec.shape}"
        )
    win = _window(window, n_fft)
    n_frames = spec.shape[1]
    frames = np.fft.irfft(spec.T, n=n_fft, axis=1)
    total = (n_frames - 1) * hop + n_fft
    acc = np.zeros(total)
    weight = np.zeros(total)
    for t in range(n_frames):
        start = t * hop
        acc[start : start + n_fft] += frames[t] * win
        weight[start : start + n_fft] += win * win
    out = acc / np.maximum(weight, 1e-12)
    pad = n_fft // 2
    if length is None:
        length = (n_frames - 1) * hop
    return out[pad : pad + length]


def _hz_to_mel(freq):
    return 2595.0 * np.log10(1.0 + np.asarray(freq, dtype=np.float64) / 700.0)


def _mel_to_hz(mel):
    return 700.0 * (10.0 ** (np.asarray(mel, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(
    sample_rate: int,
    n_fft: int,
    n_mels: int,
    fmin: float = 0.0,
    fmax: float | None = None,
) -> np.ndarray:
    """Triangular mel filterbank matrix of shape (n_mels, n_fft // 2 + 1).

    Band centers are equally spaced on the HTK mel scale between fmin and
    fmax (default Nyquist); each row is a unit-peak triangle over the FFT
    bin frequencies.
    """
    n_bins = n_fft // 2 + 1
    if n_mels < 1 or n_mels >= n_bins:
        raise InvalidArgumentError(
            f"n_mels must be in [1, {n_bins - 1}], got {n_mels}"
        )
    if fmax is None:
        fmax = sample_rate / 2.0
    if not 0.0 <= fmin < fmax:
        raise InvalidArgumentError(f"bad mel band edges ({fmin}, {fmax})")
    points = _mel_to_hz(
        np.linspace(_hz_to_mel(fmin), _hz_to_mel(fmax), n_mels + 2)
    )
    freqs = np.arange(n_bins, dtype=np.float64) * sample_rate / n_fft
    bank = np.zeros((n_mels, n_bins))
    for m in range(n_mels):
        lower, center, upper = points[m], points[m + 1], points[m + 2]
        rising = (freqs - lower) / max(center - lower, 1e-12)
        falling = (upper - freqs) / max(upper - center, 1e-12)
        bank[m] = np.clip(np.minimum(rising, falling), 0.0, 1.0)
    return bank


def mel_spectrogram(
    audio,
    n_fft: int,
    hop: int,
    n_mels: int,
    *,
    sample_rate: int | None = None,
    window: str = "hann",
    log_floor: float = 1e-5,
) -> np.ndarray:
    """Log-power mel spectrogram, floored at `log_floor` before the log.

    The sample rate comes from the AudioBuffer when one is passed; plain
    arrays need an explicit `sample_rate`.  All-zero audio maps to a
    constant matrix of log(log_floor).
    """
    rate = getattr(audio, "sample_rate", sample_rate)
    if rate is None:
        raise InvalidArgumentError("sample_rate is required for bare arrays")
    power = np.abs(stft(audio, n_fft, hop, window=window)) ** 2
    bands = mel_filterbank(rate, n_fft, n_mels) @ power
    return np.log(np.maximum(bands, log_floor))
