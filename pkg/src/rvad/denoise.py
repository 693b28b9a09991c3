"""Two-pass denoising: high-energy segment zeroing, then spectral subtraction
driven by minimum-statistics noise tracking."""

from __future__ import annotations

import numpy as np

from .audio_io import AudioBuffer
from .dsp import FrameGrid, Spectrogram
from .features import FrameFeatures
from .segments import Segment, mask_to_segments
from .voicing import count_voiced_in

__all__ = [
    "detect_high_energy",
    "first_pass_denoise",
    "MinimumStatisticsNoiseEstimator",
    "msne_noise_track",
    "spectral_subtract",
    "lowfreq_suppress",
    "reconstruct",
]

DEFAULT_SMOOTHING = 0.85
DEFAULT_BIAS = 1.5
DEFAULT_WINDOW_FRAMES = 150
DEFAULT_SUBTRACT_FLOOR = 0.002
DEFAULT_LOWFREQ_CUTOFF_HZ = 217.0

_ENVELOPE_FLOOR = 1e-8


def detect_high_energy(
    features: FrameFeatures,
    super_len: int = 200,
    alpha: float = 0.25,
    basis: str = "distance",
) -> list[Segment]:
    """Group frames whose smoothed energy difference tops a per-super-segment threshold.

    The threshold is `alpha` times the super-segment maximum of the smoothed
    difference itself; basis="energy" compares against the frame-energy
    maximum instead.
    """
    if basis not in ("distance", "energy"):
        raise ValueError(f"unknown threshold basis: {basis!r}")
    reference = features.d_smooth if basis == "distance" else features.e
    d_smooth = features.d_smooth
    hot = np.zeros(len(d_smooth), dtype=bool)
    for i in range(0, len(d_smooth), super_len):
        block = slice(i, min(i + super_len, len(d_smooth)))
        theta = alpha * reference[block].max(initial=0.0)
        hot[block] = d_smooth[block] > theta
    return mask_to_segments(hot)


def classify_noise_segments(
    segments: list[Segment],
    voiced_mask: np.ndarray,
    min_pitch_frames: int = 2,
) -> list[Segment]:
    """High-energy segments with too few voiced frames, i.e. the ones to zero."""
    return [seg for seg in segments if count_voiced_in(voiced_mask, seg) <= min_pitch_frames]


def zero_segments(audio: AudioBuffer, grid: FrameGrid, segments: list[Segment]) -> AudioBuffer:
    """Copy of the audio with every sample covered by `segments` set to zero."""
    out = audio.samples.copy()
    for seg in segments:
        lo, hi = grid.sample_span(*seg)
        out[lo:hi] = 0.0
    return AudioBuffer(out, audio.sample_rate_hz)


def first_pass_denoise(
    audio: AudioBuffer,
    grid: FrameGrid,
    segments: list[Segment],
    voiced_mask: np.ndarray,
    min_pitch_frames: int = 2,
) -> tuple[AudioBuffer, list[Segment]]:
    """Zero out high-energy segments that contain too few voiced frames.

    Returns a modified copy of the audio together with the list of segments
    actually zeroed; samples outside those segments are untouched.
    """
    zeroed = classify_noise_segments(segments, voiced_mask, min_pitch_frames)
    return zero_segments(audio, grid, zeroed), zeroed


class MinimumStatisticsNoiseEstimator:
    """Per-bin noise power tracked as a bias-compensated minimum of the
    recursively smoothed periodogram over a sliding window of frames."""

    def __init__(
        self,
        num_bins: int,
        smoothing: float = DEFAULT_SMOOTHING,
        bias: float = DEFAULT_BIAS,
        window_frames: int = DEFAULT_WINDOW_FRAMES,
    ):
        if not 0.0 < smoothing < 1.0:
            raise ValueError("smoothing must be in (0, 1)")
        if bias < 1.0:
            raise ValueError("bias must be >= 1")
        if window_frames < 1:
            raise ValueError("window_frames must be >= 1")
        self.num_bins = num_bins
        self.smoothing = smoothing
        self.bias = bias
        self.window_frames = window_frames
        self.noise_power = np.zeros(num_bins)
        self._p_smooth: np.ndarray | None = None
        self._history = np.zeros((window_frames, num_bins))
        self._filled = 0
        self._pos = 0

    def update(self, periodogram: np.ndarray) -> np.ndarray:
        """Advance by one frame and return the current noise power estimate."""
        p = np.asarray(periodogram, dtype=np.float64)
        if p.shape != (self.num_bins,):
            raise ValueError("periodogram has the wrong number of bins")
        if self._p_smooth is None:
            self._p_smooth = p.copy()
        else:
            self._p_smooth = self.smoothing * self._p_smooth + (1.0 - self.smoothing) * p
        self._history[self._pos] = self._p_smooth
        self._pos = (self._pos + 1) % self.window_frames
        self._filled = min(self._filled + 1, self.window_frames)
        self.noise_power = self.bias * self._history[: self._filled].min(axis=0)
        return self.noise_power.copy()

    def hold(self) -> np.ndarray:
        """Skip a frame (e.g. one zeroed by the first pass) without touching state."""
        return self.noise_power.copy()


def msne_noise_track(
    spec: Spectrogram,
    frozen: np.ndarray | None = None,
    smoothing: float = DEFAULT_SMOOTHING,
    bias: float = DEFAULT_BIAS,
    window_frames: int = DEFAULT_WINDOW_FRAMES,
) -> np.ndarray:
    """Noise power per (frame, bin); `frozen` marks frames that must not update the tracker."""
    estimator = MinimumStatisticsNoiseEstimator(spec.num_bins, smoothing, bias, window_frames)
    power = np.abs(spec.frames) ** 2
    out = np.empty_like(power)
    for m in range(power.shape[0]):
        if frozen is not None and frozen[m]:
            out[m] = estimator.hold()
        else:
            out[m] = estimator.update(power[m])
    return out


def spectral_subtract(
    spec: Spectrogram,
    noise_power: np.ndarray,
    floor: float = DEFAULT_SUBTRACT_FLOOR,
) -> Spectrogram:
    """Power-domain subtraction with a spectral floor, keeping the noisy phase.

    Output power per bin is max(|X|^2 - noise, floor*noise), so it never
    drops below the floor level and never exceeds the observed power plus
    the floor.
    """
    noise_power = np.asarray(noise_power, dtype=np.float64)
    if noise_power.shape != spec.frames.shape:
        raise ValueError("noise power shape does not match the spectrogram")
    power = np.abs(spec.frames) ** 2
    out_power = np.maximum(power - noise_power, floor * noise_power)
    magnitude = np.sqrt(power)
    new_magnitude = np.sqrt(out_power)
    scale = np.divide(new_magnitude, magnitude, out=np.zeros_like(magnitude), where=magnitude > 0)
    out = spec.frames * scale
    # bins with zero input keep zero phase but still honor the floor
    out = np.where(magnitude > 0, out, new_magnitude.astype(complex))
    return Spectrogram(out, spec.nfft, spec.sample_rate_hz)


def lowfreq_suppress(spec: Spectrogram, cutoff_hz: float = DEFAULT_LOWFREQ_CUTOFF_HZ) -> Spectrogram:
    """Zero the bins below `cutoff_hz` in frames dominated by low-frequency energy.

    A frame qualifies when strictly more than half of its spectral energy
    sits in bins below the cutoff (7 bins at 8 kHz with nfft=256).
    """
    k_cut = int(np.ceil(cutoff_hz / spec.bin_hz))
    if k_cut <= 0 or spec.frames.shape[0] == 0:
        return Spectrogram(spec.frames.copy(), spec.nfft, spec.sample_rate_hz)
    power = np.abs(spec.frames) ** 2
    low = power[:, :k_cut].sum(axis=1)
    total = power.sum(axis=1)
    dominated = low > 0.5 * total
    frames = spec.frames.copy()
    frames[dominated, :k_cut] = 0.0
    return Spectrogram(frames, spec.nfft, spec.sample_rate_hz)


def reconstruct(spec: Spectrogram, grid: FrameGrid) -> AudioBuffer:
    """Overlap-add inverse STFT, dividing by the summed squared-window envelope.

    Round-trips the forward transform exactly on covered samples; samples
    past the last full frame come back as zeros.
    """
    if spec.frames.shape[0] != grid.num_frames:
        raise ValueError("spectrogram frame count does not match the grid")
    window = np.hamming(grid.frame_len)
    window_sq = window * window
    signal = np.zeros(grid.total_samples)
    envelope = np.zeros(grid.total_samples)
    time_frames = np.fft.irfft(spec.frames, n=spec.nfft, axis=1)[:, : grid.frame_len]
    for m in range(grid.num_frames):
        lo = m * grid.frame_shift
        signal[lo : lo + grid.frame_len] += time_frames[m] * window
        envelope[lo : lo + grid.frame_len] += window_sq
    return AudioBuffer(signal / np.maximum(envelope, _ENVELOPE_FLOOR), spec.sample_rate_hz)
