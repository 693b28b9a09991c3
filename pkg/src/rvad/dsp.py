"""Framing, filtering, and spectral primitives shared by the whole pipeline."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.signal import lfilter

from .audio_io import AudioBuffer

__all__ = [
    "FrameGrid",
    "Spectrogram",
    "MAG_FLOOR",
    "highpass",
    "make_grid",
    "frame_matrix",
    "frame_energy",
    "next_pow2",
    "stft",
    "spectral_flatness",
]

# Magnitudes below this are treated as silence when taking logs.
MAG_FLOOR = 1e-10


@dataclass(frozen=True)
class FrameGrid:
    """Frame geometry: frame m covers samples [m*shift, m*shift + frame_len)."""

    frame_len: int
    frame_shift: int
    num_frames: int
    total_samples: int

    def sample_span(self, start_frame: int, end_frame: int) -> tuple[int, int]:
        """Half-open sample range covered by frames start..end inclusive."""
        lo = start_frame * self.frame_shift
        hi = end_frame * self.frame_shift + self.frame_len
        return lo, min(hi, self.total_samples)


@dataclass
class Spectrogram:
    """One-sided complex STFT frames, shape (num_frames, nfft//2 + 1)."""

    frames: np.ndarray
    nfft: int
    sample_rate_hz: int

    @property
    def num_bins(self) -> int:
        return self.nfft // 2 + 1

    @property
    def bin_hz(self) -> float:
        return self.sample_rate_hz / self.nfft


def make_grid(audio: AudioBuffer, frame_len_ms: float = 25.0, frame_shift_ms: float = 10.0) -> FrameGrid:
    """Frame geometry for the buffer, durations rounded to the nearest sample."""
    if not frame_len_ms >= frame_shift_ms > 0:
        raise ValueError("need frame_len_ms >= frame_shift_ms > 0")
    flen = int(round(frame_len_ms * audio.sample_rate_hz / 1000.0))
    shift = int(round(frame_shift_ms * audio.sample_rate_hz / 1000.0))
    total = len(audio)
    num = 0 if total < flen else (total - flen) // shift + 1
    return FrameGrid(flen, shift, num, total)


def highpass(audio: AudioBuffer, cutoff_hz: float = 60.0) -> AudioBuffer:
    """First-order high-pass: y(n) = a*(y(n-1) + x(n) - x(n-1)).

    With a = 1/(1 + 2*pi*fc/fs) this removes DC and rumble below the cutoff
    while leaving the band above it essentially untouched (about -0.2 dB at
    1 kHz for fs = 8 kHz).
    """
    fs = audio.sample_rate_hz
    if fs <= 2 * cutoff_hz:
        raise ValueError("sample rate too low for the chosen cutoff")
    a = 1.0 / (1.0 + 2.0 * np.pi * cutoff_hz / fs)
    y = lfilter([a, -a], [1.0, -a], audio.samples)
    return AudioBuffer(y, fs)


def frame_matrix(samples: np.ndarray, grid: FrameGrid) -> np.ndarray:
    """(num_frames, frame_len) view onto the signal; rows share its memory."""
    if grid.num_frames == 0:
        return np.empty((0, grid.frame_len))
    windows = sliding_window_view(samples, grid.frame_len)
    return windows[:: grid.frame_shift][: grid.num_frames]


def frame_energy(audio: AudioBuffer, grid: FrameGrid) -> np.ndarray:
    """Per-frame energy: plain sum of squared samples, no window or pre-emphasis."""
    frames = frame_matrix(audio.samples, grid)
    return np.einsum("ij,ij->i", frames, frames)


def next_pow2(n: int) -> int:
    """Smallest power of two >= n (and >= 1)."""
    return 1 << max(int(n) - 1, 0).bit_length()


def stft(audio: AudioBuffer, grid: FrameGrid) -> Spectrogram:
    """Hamming-windowed one-sided STFT, frames zero-padded to the next power of two."""
    nfft = next_pow2(grid.frame_len)
    frames = frame_matrix(audio.samples, grid)
    padded = np.zeros((grid.num_frames, nfft))
    np.multiply(frames, np.hamming(grid.frame_len), out=padded[:, : grid.frame_len])
    return Spectrogram(np.fft.rfft(padded, axis=1), nfft, audio.sample_rate_hz)


def spectral_flatness(spec: Spectrogram) -> np.ndarray:
    """Geometric over arithmetic mean of each magnitude spectrum, in [0, 1].

    Close to 1 for noise-like frames and close to 0 for tonal ones.
    Magnitudes are floored so silent frames come out flat (1.0) instead of
    dividing by zero.
    """
    if spec.frames.shape[0] == 0:
        return np.zeros(0)
    mag = np.abs(spec.frames)
    np.maximum(mag, MAG_FLOOR, out=mag)
    arithmetic = np.mean(mag, axis=1)
    np.log(mag, out=mag)
    geometric = np.exp(np.mean(mag, axis=1))
    return np.clip(geometric / arithmetic, 0.0, 1.0)
