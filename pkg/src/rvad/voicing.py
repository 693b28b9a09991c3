"""Voiced-frame detection: spectral flatness thresholding or autocorrelation pitch."""

from __future__ import annotations

import numpy as np

from .audio_io import AudioBuffer
from .dsp import FrameGrid, Spectrogram, frame_matrix, next_pow2, spectral_flatness

__all__ = ["detect_sft", "sft_voicing", "detect_pitch_autocorr", "count_voiced_in"]

# Frames quieter than this fraction of the loudest frame are never voiced.
ENERGY_GATE_RATIO = 1e-6

# Spectra are evaluated this many frames at a time; keeps the working set in
# small allocator blocks and off the heap's mmap path.
_SFT_CHUNK_FRAMES = 48


def detect_sft(spec: Spectrogram, theta_sft: float = 0.5) -> np.ndarray:
    """Mark frames whose spectral flatness is at or below the threshold as voiced.

    Tonal/harmonic frames have low flatness; noise-like frames sit near 1.0
    and fall through.  Under heavy white noise this detector saturates
    unvoiced, which is the documented failure mode of the fast pipeline.
    """
    if not 0.0 < theta_sft < 1.0:
        raise ValueError("theta_sft must be in (0, 1)")
    return spectral_flatness(spec) <= theta_sft


def sft_voicing(
    audio: AudioBuffer,
    grid: FrameGrid,
    theta_sft: float = 0.5,
    chunk_frames: int = _SFT_CHUNK_FRAMES,
) -> np.ndarray:
    """Chunked equivalent of detect_sft(stft(audio, grid), theta_sft).

    Evaluates the spectrogram a few frames at a time, so arbitrarily long
    files never materialize the full complex spectrum.  Decisions are
    identical to the composed operations.
    """
    if not 0.0 < theta_sft < 1.0:
        raise ValueError("theta_sft must be in (0, 1)")
    if chunk_frames < 1:
        raise ValueError("chunk_frames must be >= 1")
    nfft = next_pow2(grid.frame_len)
    frames = frame_matrix(audio.samples, grid)
    window = np.hamming(grid.frame_len)
    voiced = np.zeros(grid.num_frames, dtype=bool)
    padded = np.zeros((min(chunk_frames, max(grid.num_frames, 1)), nfft))
    for i in range(0, grid.num_frames, chunk_frames):
        rows = frames[i : i + chunk_frames]
        buf = padded[: rows.shape[0]]
        np.multiply(rows, window, out=buf[:, : grid.frame_len])
        chunk = Spectrogram(np.fft.rfft(buf, axis=1), nfft, audio.sample_rate_hz)
        voiced[i : i + rows.shape[0]] = spectral_flatness(chunk) <= theta_sft
    return voiced


def detect_pitch_autocorr(
    audio: AudioBuffer,
    grid: FrameGrid,
    f_min: float = 60.0,
    f_max: float = 400.0,
    rho: float = 0.6,
) -> np.ndarray:
    """Mark frames with a strong normalized autocorrelation peak in the pitch range.

    Per frame, r(tau) = sum x(n)x(n+tau) normalized by the energies of the
    two overlapping stretches is searched over lags fs/f_max .. fs/f_min.
    A frame is voiced when the peak reaches `rho` and the frame is not quiet
    relative to the loudest frame of the utterance.  All-zero frames are
    unvoiced by construction.
    """
    fs = audio.sample_rate_hz
    if not 0.0 < f_min < f_max < fs / 2.0:
        raise ValueError("need 0 < f_min < f_max < sample_rate/2")
    if not 0.0 < rho < 1.0:
        raise ValueError("rho must be in (0, 1)")

    voiced = np.zeros(grid.num_frames, dtype=bool)
    if grid.num_frames == 0:
        return voiced
    frames = frame_matrix(audio.samples, grid)
    energies = np.einsum("ij,ij->i", frames, frames)
    gate = ENERGY_GATE_RATIO * energies.max(initial=0.0)

    flen = grid.frame_len
    lag_lo = int(round(fs / f_max))
    lag_hi = min(int(round(fs / f_min)), flen - 1)
    if lag_lo < 1 or lag_lo > lag_hi:
        return voiced
    lags = np.arange(lag_lo, lag_hi + 1)

    for m in range(grid.num_frames):
        if energies[m] <= 0.0 or energies[m] < gate:
            continue
        f = frames[m]
        corr = np.correlate(f, f, mode="full")[flen - 1 + lag_lo : flen - 1 + lag_hi + 1]
        csum = np.concatenate(([0.0], np.cumsum(f * f)))
        head = csum[flen - lags]  # energy of x(0 .. flen-1-tau)
        tail = csum[flen] - csum[lags]  # energy of x(tau .. flen-1)
        denom = np.sqrt(head * tail)
        valid = denom > 0.0
        if valid.any():
            voiced[m] = (corr[valid] / denom[valid]).max() >= rho
    return voiced


def count_voiced_in(mask: np.ndarray, seg: tuple[int, int]) -> int:
    """Number of voiced frames in the inclusive frame interval `seg`."""
    start, end = seg
    if start > end:
        raise ValueError("empty interval: start > end")
    if start < 0 or end >= len(mask):
        raise ValueError("interval out of range")
    return int(np.count_nonzero(np.asarray(mask, dtype=bool)[start : end + 1]))
