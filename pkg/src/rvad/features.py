"""Frame-level SNR features: noise-energy tracking and the weighted energy difference."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ENERGY_FLOOR",
    "FrameFeatures",
    "NoiseEnergyTrack",
    "rank_low_energy",
    "track_noise_energy",
    "posterior_snr_db",
    "log_energy_ratio_db",
    "weighted_energy_difference",
    "central_smooth",
    "compute_features",
]

# Floor for energies entering the log ratio; silence would otherwise be -inf dB.
ENERGY_FLOOR = 1e-12


def rank_low_energy(e: np.ndarray, fraction: float = 0.10) -> float:
    """Energy of the frame ranked at `fraction` of lowest energy (1-based ceil rank)."""
    n = len(e)
    if n == 0:
        raise ValueError("need at least one frame")
    k = int(np.ceil(fraction * n))
    return float(np.sort(e)[max(k - 1, 0)])


@dataclass
class NoiseEnergyTrack:
    """Per-super-segment noise energy, raw and recursively smoothed."""

    e_v: np.ndarray
    e_v_smooth: np.ndarray
    super_len: int
    num_frames: int

    def per_frame(self) -> np.ndarray:
        """Smoothed noise energy expanded to one value per frame."""
        reps = np.full(len(self.e_v_smooth), self.super_len)
        if len(reps):
            reps[-1] = self.num_frames - self.super_len * (len(reps) - 1)
        return np.repeat(self.e_v_smooth, reps)


def track_noise_energy(e: np.ndarray, super_len: int = 200, forget: float = 0.9) -> NoiseEnergyTrack:
    """Track noise energy over super-segments of `super_len` frames.

    Each super-segment contributes the energy ranked at 10% of lowest within
    it; the resulting sequence is exponentially smoothed with the given
    forgetting factor.  A trailing partial super-segment is kept as-is.
    """
    e = np.asarray(e, dtype=np.float64)
    if len(e) == 0:
        raise ValueError("need at least one frame")
    if super_len < 1:
        raise ValueError("super_len must be >= 1")
    e_v = np.array([rank_low_energy(e[i : i + super_len]) for i in range(0, len(e), super_len)])
    smooth = np.empty_like(e_v)
    smooth[0] = e_v[0]
    for p in range(1, len(e_v)):
        smooth[p] = forget * smooth[p - 1] + (1.0 - forget) * e_v[p]
    return NoiseEnergyTrack(e_v, smooth, super_len, len(e))


def log_energy_ratio_db(e, noise) -> np.ndarray:
    """Floored 10*log10(e/noise); accepts arrays or scalars on either side."""
    num = np.maximum(e, ENERGY_FLOOR)
    den = np.maximum(noise, ENERGY_FLOOR)
    return 10.0 * np.log10(num / den)


def posterior_snr_db(e: np.ndarray, track: NoiseEnergyTrack) -> np.ndarray:
    """A posteriori SNR per frame: 10*log10 of frame energy over tracked noise energy."""
    e = np.asarray(e, dtype=np.float64)
    noise = track.per_frame()
    if len(e) != len(noise):
        raise ValueError("energy sequence does not match the noise track")
    return log_energy_ratio_db(e, noise)


def weighted_energy_difference(e: np.ndarray, snr_db: np.ndarray) -> np.ndarray:
    """SNR-weighted energy difference of consecutive frames.

    d(m) = sqrt(|e(m) - e(m-1)| * max(snr_db(m), 0)), with d(0) = 0.  The
    square root keeps the dynamic range manageable and the SNR clamp kills
    the feature wherever a frame sits at or below the noise floor.
    """
    e = np.asarray(e, dtype=np.float64)
    snr_db = np.asarray(snr_db, dtype=np.float64)
    if len(e) != len(snr_db):
        raise ValueError("length mismatch")
    d = np.zeros(len(e))
    if len(e) > 1:
        d[1:] = np.sqrt(np.abs(np.diff(e)) * np.maximum(snr_db[1:], 0.0))
    return d


def central_smooth(x: np.ndarray, n: int) -> np.ndarray:
    """Mean over the window [m-n, m+n], truncated at the sequence edges.

    Edge frames are normalized by the number of in-range entries, so a
    constant sequence stays constant all the way to the boundaries.
    """
    x = np.asarray(x, dtype=np.float64)
    if n < 0:
        raise ValueError("window half-width must be >= 0")
    m = len(x)
    if m == 0 or n == 0:
        return x.copy()
    csum = np.concatenate(([0.0], np.cumsum(x)))
    idx = np.arange(m)
    lo = np.maximum(idx - n, 0)
    hi = np.minimum(idx + n, m - 1)
    return (csum[hi + 1] - csum[lo]) / (hi - lo + 1)


@dataclass
class FrameFeatures:
    """Per-frame energy, a posteriori SNR, and raw/smoothed energy difference."""

    e: np.ndarray
    snr_db: np.ndarray
    d: np.ndarray
    d_smooth: np.ndarray


def compute_features(
    e: np.ndarray,
    super_len: int = 200,
    smooth_n: int = 18,
    forget: float = 0.9,
) -> FrameFeatures:
    """Full feature stack for one utterance's frame energies."""
    track = track_noise_energy(e, super_len, forget)
    snr_db = posterior_snr_db(e, track)
    d = weighted_energy_difference(e, snr_db)
    return FrameFeatures(np.asarray(e, dtype=np.float64), snr_db, d, central_smooth(d, smooth_n))
