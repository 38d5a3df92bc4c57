"""Independent reference implementations used to cross-check the package.

Everything here is written the slow, obvious way: explicit loops, direct
formulas, itertools enumeration.  None of it imports from sunac, so an
agreement between the two is evidence rather than tautology.
"""

import itertools

import numpy as np


def conv1d_naive(x, weight, bias, stride=1, padding=0, dilation=1):
    """Sliding dot product, one output sample at a time."""
    c_out, c_in, k = weight.shape
    assert x.shape[0] == c_in
    xp = np.pad(x, ((0, 0), (padding, padding)))
    span = dilation * (k - 1) + 1
    n_out = (xp.shape[1] - span) // stride + 1
    out = np.zeros((c_out, n_out))
    for co in range(c_out):
        for t in range(n_out):
            acc = 0.0
            for ci in range(c_in):
                for j in range(k):
                    acc += weight[co, ci, j] * xp[ci, t * stride + j * dilation]
            out[co, t] = acc + (bias[co] if bias is not None else 0.0)
    return out


def conv1d_transposed_naive(x, weight, bias, stride=1, padding=0,
                            dilation=1, output_padding=0):
    """Scatter-add form of the transposed convolution.

    Kernel layout matches the forward direction, (C_out, C_in, K), with
    C_in indexing the channels of x.
    """
    c_out, c_in, k = weight.shape
    assert x.shape[0] == c_in
    n_in = x.shape[1]
    span = dilation * (k - 1) + 1
    full = (n_in - 1) * stride + span + output_padding
    out = np.zeros((c_out, full))
    for ci in range(c_in):
        for t in range(n_in):
            for co in range(c_out):
                for j in range(k):
                    out[co, t * stride + j * dilation] += (
                        weight[co, ci, j] * x[ci, t]
                    )
    n_out = (n_in - 1) * stride - 2 * padding + span + output_padding
    trimmed = out[:, padding:padding + n_out].copy()
    if bias is not None:
        trimmed += bias[:, None]
    return trimmed


def si_sdr_formula(reference, estimate, eps=1e-8, clamp_db=100.0):
    """Textbook scale-invariant SDR with an epsilon guard in the ratio."""
    ref = np.asarray(reference, dtype=np.float64)
    est = np.asarray(estimate, dtype=np.float64)
    alpha = np.dot(est, ref) / np.dot(ref, ref)
    target = alpha * ref
    err = target - est
    num = np.dot(target, target)
    den = np.dot(err, err)
    value = 10.0 * np.log10(num / (den + eps)) if num > 0 else -clamp_db
    return float(np.clip(value, -clamp_db, clamp_db))


def restricted_perms_naive(types):
    """All permutations that only move items within equal-type groups."""
    n = len(types)
    keep = []
    for perm in itertools.permutations(range(n)):
        if all(types[perm[i]] == types[i] for i in range(n)):
            keep.append(tuple(perm))
    return keep


def best_assignment_naive(references, estimates, types, score_fn):
    """Exhaustive search over the restricted permutations."""
    best_perm = None
    best_score = None
    for perm in restricted_perms_naive(types):
        score = sum(score_fn(references[i], estimates[perm[i]])
                    for i in range(len(references)))
        if best_score is None or score > best_score:
            best_score = score
            best_perm = perm
    return best_perm, best_score


def hz_to_mel_htk(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz_htk(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_matrix_naive(n_mels, n_fft, sample_rate):
    """Unit-peak HTK triangles, built point by point."""
    n_bins = n_fft // 2 + 1
    freqs = np.arange(n_bins) * sample_rate / n_fft
    edges = mel_to_hz_htk(
        np.linspace(hz_to_mel_htk(0.0), hz_to_mel_htk(sample_rate / 2.0),
                    n_mels + 2))
    fb = np.zeros((n_mels, n_bins))
    for m in range(n_mels):
        lo, mid, hi = edges[m], edges[m + 1], edges[m + 2]
        for b, f in enumerate(freqs):
            if lo < f <= mid and mid > lo:
                fb[m, b] = (f - lo) / (mid - lo)
            elif mid < f < hi and hi > mid:
                fb[m, b] = (hi - f) / (hi - mid)
    return fb


def power_frames_naive(signal, n_fft, hop_length):
    """Center-padded framing plus an explicit DFT, squared magnitude."""
    x = np.asarray(signal, dtype=np.float64)
    pad = n_fft // 2
    xp = np.pad(x, (pad, pad))
    n_frames = 1 + len(x) // hop_length
    window = np.hanning(n_fft + 1)[:-1]
    n_bins = n_fft // 2 + 1
    out = np.zeros((n_bins, n_frames))
    for t in range(n_frames):
        frame = xp[t * hop_length:t * hop_length + n_fft] * window
        spec = np.fft.rfft(frame)
        out[:, t] = np.abs(spec) ** 2
    return out


def log_mel_naive(signal, n_fft, hop_length, n_mels, sample_rate,
                  floor=1e-5):
    fb = mel_matrix_naive(n_mels, n_fft, sample_rate)
    power = power_frames_naive(signal, n_fft, hop_length)
    return np.log(np.maximum(fb @ power, floor))


def nearest_codes_naive(target, codebooks, n_active):
    """Greedy residual scan, one frame and one entry at a time, float64."""
    d, n_frames = target.shape
    codes = np.zeros((n_active, n_frames), dtype=np.int64)
    quantized = np.zeros((d, n_frames))
    for t in range(n_frames):
        residual = target[:, t].astype(np.float64).copy()
        for layer in range(n_active):
            book = codebooks[layer]
            best_idx = 0
            best_dist = None
            for idx in range(book.shape[0]):
                diff = residual - book[idx]
                dist = float(np.dot(diff, diff))
                if best_dist is None or dist < best_dist:
                    best_dist = dist
                    best_idx = idx
            codes[layer, t] = best_idx
            residual = residual - book[best_idx]
            quantized[:, t] += book[best_idx]
    return codes, quantized


def codes_to_sum_naive(codes, codebooks):
    n_layers, n_frames = codes.shape
    d = codebooks[0].shape[1]
    out = np.zeros((d, n_frames))
    for layer in range(n_layers):
        for t in range(n_frames):
            out[:, t] += codebooks[layer][codes[layer, t]]
    return out


def film_naive(x, prompt, scale_w, scale_b, shift_w, shift_b):
    """Column-by-column affine modulation."""
    d, n_frames = x.shape
    gain = scale_w @ prompt + scale_b
    shift = shift_w @ prompt + shift_b
    out = np.zeros_like(x)
    for t in range(n_frames):
        out[:, t] = x[:, t] + gain * x[:, t] + shift
    return out
