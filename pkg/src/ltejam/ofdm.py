"""OFDM modulation with normal cyclic prefix.

Subcarrier ``k`` of the grid maps to FFT bin ``k - n_sc/2`` for the lower
half and ``k - n_sc/2 + 1`` for the upper half; the DC bin stays empty.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .cell_model import SYMBOLS_PER_SLOT, CellConfig, grid_dimensions
from .errors import FramingError

FFT_SIZE = {6: 128, 15: 256, 25: 512, 50: 1024, 75: 1536, 100: 2048}
SUBCARRIER_SPACING_HZ = 15_000


def fft_size(cfg: CellConfig) -> int:
    return FFT_SIZE[cfg.n_prb]


def sample_rate(cfg: CellConfig) -> float:
    """Baseband sample rate in Hz (1.92 MHz at 1.4 MHz bandwidth)."""
    return float(fft_size(cfg) * SUBCARRIER_SPACING_HZ)


def cp_lengths(cfg: CellConfig) -> np.ndarray:
    """Cyclic-prefix length of each of the 140 symbols of a frame."""
    n = fft_size(cfg)
    first, other = 160 * n // 2048, 144 * n // 2048
    per_slot = np.array([first] + [other] * (SYMBOLS_PER_SLOT - 1))
    return np.tile(per_slot, 20)


def symbol_starts(cfg: CellConfig) -> np.ndarray:
    """Sample index (within a frame) where each symbol's useful part begins."""
    n = fft_size(cfg)
    cp = cp_lengths(cfg)
    return np.cumsum(cp) + n * np.arange(cp.size)


def frame_length(cfg: CellConfig) -> int:
    return int(cp_lengths(cfg).sum() + 140 * fft_size(cfg))


@lru_cache(maxsize=None)
def _bins(n_sc: int, n_fft: int) -> np.ndarray:
    k = np.arange(n_sc)
    half = n_sc // 2
    return np.where(k < half, n_fft - half + k, k - half + 1)


def ofdm_modulate(grid) -> np.ndarray:
    """Time-domain samples of a full frame.

    Accepts a :class:`~ltejam.tx.ResourceGrid` or ``(amplitudes, cfg)`` via
    :func:`modulate_array`. The unitary FFT convention is used so that the
    energy per useful symbol equals the energy of its grid column.
    """
    return modulate_array(grid.amplitudes, grid.cfg)


def modulate_array(amplitudes: np.ndarray, cfg: CellConfig) -> np.ndarray:
    n_sc, n_sym, _ = grid_dimensions(cfg)
    amplitudes = np.asarray(amplitudes)
    if amplitudes.shape[-2:] != (n_sc, n_sym):
        raise ValueError(f"grid must be {(n_sc, n_sym)}, got {amplitudes.shape}")
    n = fft_size(cfg)
    lead = amplitudes.shape[:-2]
    freq = np.zeros(lead + (n_sym, n), dtype=complex)
    freq[..., _bins(n_sc, n)] = np.swapaxes(amplitudes, -1, -2)
    useful = np.fft.ifft(freq, axis=-1, norm="ortho")
    cp = cp_lengths(cfg)
    out = np.empty(lead + (frame_length(cfg),), dtype=complex)
    starts = symbol_starts(cfg)
    for c_len in np.unique(cp):
        sel = np.flatnonzero(cp == c_len)
        idx = (starts[sel, None] - c_len) + np.arange(c_len + n)
        src = np.concatenate([useful[..., sel, n - c_len :], useful[..., sel, :]], axis=-1)
        out[..., idx] = src
    return out


def ofdm_demodulate(samples: np.ndarray, cfg: CellConfig, timing_offset: int = 0):
    """Grid of one frame starting ``timing_offset`` samples into ``samples``.

    Raises
    ------
    FramingError
        If the stream does not cover a full frame from ``timing_offset``.
    """
    from .tx import ResourceGrid

    return ResourceGrid(demodulate_array(samples, cfg, timing_offset), cfg)


def demodulate_array(samples: np.ndarray, cfg: CellConfig, timing_offset: int = 0) -> np.ndarray:
    samples = np.asarray(samples)
    n = fft_size(cfg)
    if timing_offset < 0 or samples.shape[-1] < timing_offset + frame_length(cfg):
        raise FramingError(
            f"need {frame_length(cfg)} samples from offset {timing_offset}, got {samples.shape[-1]}"
        )
    idx = timing_offset + symbol_starts(cfg)[:, None] + np.arange(n)
    freq = np.fft.fft(samples[..., idx], axis=-1, norm="ortho")
    n_sc = cfg.n_subcarriers
    return np.swapaxes(freq[..., _bins(n_sc, n)], -1, -2)
