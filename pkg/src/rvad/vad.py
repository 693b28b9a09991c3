"""Segment-based VAD: per-segment decisions, post-processing, and orchestration."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import denoise as dn
from .audio_io import AudioBuffer, read_wav
from .dsp import frame_energy, highpass, make_grid, stft
from .features import (
    central_smooth,
    compute_features,
    rank_low_energy,
    weighted_energy_difference,
    log_energy_ratio_db,
)
from .segments import Segment, extend_segments, mask_to_segments, segments_to_mask
from .voicing import detect_pitch_autocorr, sft_voicing

__all__ = ["RvadConfig", "VadResult", "BatchItem", "segment_vad", "post_process", "run_rvad", "run_denoise", "run_batch"]

MIN_SAMPLE_RATE_HZ = 4000

MODES = ("full", "fast")
ENHANCERS = ("none", "msne", "msne-mod")
THRESHOLD_BASES = ("distance", "energy")


@dataclass
class RvadConfig:
    """Every numeric constant of the pipeline, with production defaults."""

    frame_len_ms: float = 25.0
    frame_shift_ms: float = 10.0
    hpf_cutoff_hz: float = 60.0
    super_len: int = 200
    noise_forget: float = 0.9
    smooth_n: int = 18
    alpha: float = 0.25
    min_pitch_frames: int = 2
    ext_frames: int = 60
    beta: float = 0.4
    pp_far_left: int = 33
    pp_far_right: int = 47
    pp_near_left: int = 5
    pp_near_right: int = 12
    energy_ratio: float = 0.05
    theta_sft: float = 0.5
    mode: str = "full"
    enhance: str = "msne"
    he_threshold_basis: str = "distance"
    pitch_f_min: float = 60.0
    pitch_f_max: float = 400.0
    pitch_rho: float = 0.6
    msne_smoothing: float = 0.85
    msne_bias: float = 1.5
    msne_window_frames: int = 150
    subtract_floor: float = 0.002
    lowfreq_cutoff_hz: float = 217.0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.enhance not in ENHANCERS:
            raise ValueError(f"enhance must be one of {ENHANCERS}")
        if self.he_threshold_basis not in THRESHOLD_BASES:
            raise ValueError(f"he_threshold_basis must be one of {THRESHOLD_BASES}")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must be in (0, 1]")
        if self.beta <= 0.0:
            raise ValueError("beta must be positive")
        if not 0.0 < self.theta_sft < 1.0:
            raise ValueError("theta_sft must be in (0, 1)")
        for name in (
            "super_len",
            "smooth_n",
            "min_pitch_frames",
            "ext_frames",
            "pp_far_left",
            "pp_far_right",
            "pp_near_left",
            "pp_near_right",
            "msne_window_frames",
        ):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


@dataclass
class VadResult:
    """Per-frame speech labels, the same decisions as segments, and the denoised audio."""

    labels: np.ndarray
    speech_segments: list[Segment]
    denoised: Optional[AudioBuffer] = None
    frame_shift_ms: float = 10.0
    frame_len_ms: float = 25.0

    @property
    def num_speech_frames(self) -> int:
        return int(np.count_nonzero(self.labels))


def segment_vad(e_seg: np.ndarray, voiced_seg: np.ndarray, beta: float = 0.4, smooth_n: int = 18) -> np.ndarray:
    """Speech/non-speech decision within one extended pitch segment.

    The noise energy is re-estimated locally as the energy ranked at 10% of
    lowest within the segment, the smoothed SNR-weighted energy difference
    is recomputed against it, and a frame is speech when that feature
    strictly exceeds `beta` times its mean over the segment's voiced frames.
    """
    e_seg = np.asarray(e_seg, dtype=np.float64)
    voiced_seg = np.asarray(voiced_seg, dtype=bool)
    if len(e_seg) == 0 or len(e_seg) != len(voiced_seg):
        raise ValueError("segment features empty or mismatched")
    if not voiced_seg.any():
        raise ValueError("extended segment contains no voiced frames")
    noise_e = rank_low_energy(e_seg)
    snr_db = log_energy_ratio_db(e_seg, noise_e)
    d = weighted_energy_difference(e_seg, snr_db)
    d_smooth = central_smooth(d, smooth_n)
    theta = beta * d_smooth[voiced_seg].mean()
    return d_smooth > theta


def post_process(raw_labels: np.ndarray, pitch_segments: list[Segment], e: np.ndarray, cfg: RvadConfig) -> np.ndarray:
    """Hangover-style cleanup around pitch segments plus low-energy segment removal.

    Frames far from every pitch segment (more than `pp_far_left` before the
    next start and more than `pp_far_right` after the previous end) are
    forced non-speech; frames hugging or inside a pitch segment are forced
    speech; finally, speech segments whose mean energy falls below
    `energy_ratio` times the mean over all labeled speech frames are dropped.
    """
    labels = np.asarray(raw_labels, dtype=bool).copy()
    num = len(labels)
    if num == 0:
        return labels
    if not pitch_segments:
        return np.zeros(num, dtype=bool)

    starts = np.asarray([s for s, _ in pitch_segments])
    ends = np.asarray([t for _, t in pitch_segments])
    idx = np.arange(num)
    far = np.iinfo(np.int64).max

    nxt = np.searchsorted(starts, idx, side="left")
    gap_next = np.where(nxt < len(starts), starts[np.minimum(nxt, len(starts) - 1)] - idx, far)
    prv = np.searchsorted(ends, idx, side="right") - 1
    gap_prev = np.where(prv >= 0, idx - ends[np.maximum(prv, 0)], far)

    labels[(gap_next > cfg.pp_far_left) & (gap_prev > cfg.pp_far_right)] = False
    near = (gap_next <= cfg.pp_near_left) | (gap_prev <= cfg.pp_near_right)
    labels[near | segments_to_mask(pitch_segments, num)] = True

    e = np.asarray(e, dtype=np.float64)
    speech_segments = mask_to_segments(labels)
    if speech_segments:
        overall = e[labels].mean()
        for s, t in speech_segments:
            if e[s : t + 1].mean() < cfg.energy_ratio * overall:
                labels[s : t + 1] = False
    return labels


def _voicing_mask(filtered, grid, cfg, override):
    if override is not None:
        mask = np.asarray(override, dtype=bool)
        if len(mask) != grid.num_frames:
            raise ValueError(f"voicing mask has {len(mask)} frames, expected {grid.num_frames}")
        return mask
    if cfg.mode == "fast":
        return sft_voicing(filtered, grid, cfg.theta_sft)
    return detect_pitch_autocorr(filtered, grid, cfg.pitch_f_min, cfg.pitch_f_max, cfg.pitch_rho)


def _second_pass(audio, grid, zeroed_segments, cfg):
    if cfg.enhance == "none":
        return audio, None
    spec = stft(audio, grid)
    frozen = None
    if cfg.enhance == "msne-mod":
        frozen = segments_to_mask(zeroed_segments, grid.num_frames)
    noise = dn.msne_noise_track(spec, frozen, cfg.msne_smoothing, cfg.msne_bias, cfg.msne_window_frames)
    cleaned = dn.spectral_subtract(spec, noise, cfg.subtract_floor)
    if cfg.enhance == "msne-mod":
        cleaned = dn.lowfreq_suppress(cleaned, cfg.lowfreq_cutoff_hz)
    return dn.reconstruct(cleaned, grid), noise


def _front(audio, cfg, voicing):
    """High-pass, first-pass features and zeroing, second-pass enhancement."""
    if audio.sample_rate_hz < MIN_SAMPLE_RATE_HZ:
        raise ValueError(f"sample rate must be >= {MIN_SAMPLE_RATE_HZ} Hz")
    filtered = highpass(audio, cfg.hpf_cutoff_hz)
    grid = make_grid(filtered, cfg.frame_len_ms, cfg.frame_shift_ms)
    if grid.num_frames == 0:
        return filtered, grid, None, None, filtered, None, None
    e1 = frame_energy(filtered, grid)
    feats = compute_features(e1, cfg.super_len, cfg.smooth_n, cfg.noise_forget)
    he_segs = dn.detect_high_energy(feats, cfg.super_len, cfg.alpha, cfg.he_threshold_basis)
    mask = _voicing_mask(filtered, grid, cfg, voicing)
    zeroed = dn.classify_noise_segments(he_segs, mask, cfg.min_pitch_frames)
    cleaned = dn.zero_segments(filtered, grid, zeroed) if zeroed else filtered
    enhanced, noise = _second_pass(cleaned, grid, zeroed, cfg)
    # energies of whatever signal leaves the enabled passes; reuse the
    # first-pass ones when neither pass touched a sample
    e2 = e1 if (enhanced is filtered) else frame_energy(enhanced, grid)
    return filtered, grid, feats, mask, enhanced, noise, e2


def run_rvad(audio: AudioBuffer, cfg: RvadConfig | None = None, voicing: np.ndarray | None = None) -> VadResult:
    """Run the full VAD pipeline on one utterance.

    `voicing` optionally injects an externally computed per-frame voiced
    mask in place of the built-in detectors.  An utterance too short for a
    single frame yields an empty result.
    """
    cfg = cfg or RvadConfig()
    _, grid, _, mask, enhanced, _, e2 = _front(audio, cfg, voicing)
    if grid.num_frames == 0:
        return VadResult(np.zeros(0, dtype=bool), [], enhanced, cfg.frame_shift_ms, cfg.frame_len_ms)

    pitch_segments = mask_to_segments(mask)
    extended = extend_segments(pitch_segments, cfg.ext_frames, grid.num_frames)
    labels = np.zeros(grid.num_frames, dtype=bool)
    for s, t in extended:
        labels[s : t + 1] = segment_vad(e2[s : t + 1], mask[s : t + 1], cfg.beta, cfg.smooth_n)
    labels = post_process(labels, pitch_segments, e2, cfg)
    return VadResult(labels, mask_to_segments(labels), enhanced, cfg.frame_shift_ms, cfg.frame_len_ms)


def run_denoise(
    audio: AudioBuffer, cfg: RvadConfig | None = None, voicing: np.ndarray | None = None
) -> tuple[AudioBuffer, Optional[np.ndarray]]:
    """Both denoising passes only; returns the enhanced audio and the noise
    power track per (frame, bin), None when enhancement is off."""
    cfg = cfg or RvadConfig()
    _, _, _, _, enhanced, noise, _ = _front(audio, cfg, voicing)
    return enhanced, noise


@dataclass
class BatchItem:
    """Outcome for one file of a batch run: a result or an error string."""

    path: str
    result: Optional[VadResult] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


def _process_one(path: str, cfg: RvadConfig) -> VadResult:
    # batches keep labels only: holding every file's denoised audio would
    # grow memory linearly with corpus size
    return replace(run_rvad(read_wav(path), cfg), denoised=None)


def run_batch(paths, cfg: RvadConfig | None = None, workers: int = 1) -> list[BatchItem]:
    """VAD over many files; output order follows the input and per-file
    failures are reported without aborting the batch.

    Batch results carry labels and segments but not the denoised audio; use
    run_rvad or run_denoise when the waveform itself is needed."""
    cfg = cfg or RvadConfig()
    paths = [str(p) for p in paths]
    items: list[BatchItem] = []
    if workers <= 1:
        for path in paths:
            try:
                items.append(BatchItem(path, result=_process_one(path, cfg)))
            except Exception as exc:
                items.append(BatchItem(path, error=f"{type(exc).__name__}: {exc}"))
        return items

    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_process_one, path, cfg) for path in paths]
        for path, future in zip(paths, futures):
            try:
                items.append(BatchItem(path, result=future.result()))
            except Exception as exc:
                items.append(BatchItem(path, error=f"{type(exc).__name__}: {exc}"))
    return items
