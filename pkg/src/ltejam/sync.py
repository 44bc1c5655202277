"""Cell search: PSS timing/N_ID2 detection followed by SSS cell-id detection."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .cell_model import PSS_SYMBOL, CellConfig, sync_subcarriers
from .ofdm import _bins, cp_lengths, fft_size, frame_length, symbol_starts
from .sequences import generate_pss, sss_hypotheses

# Normalised PSS correlation needed to declare a detection.  A clean PSS
# window scores close to 1; random data windows stay below about 0.15.
DEFAULT_THRESHOLD = 0.35
SYNC_BAND_HZ = 36 * 15_000


@dataclass(frozen=True)
class SyncResult:
    detected: bool
    frame_start: int
    n_id_2: int
    cell_id: int
    peak: float

    def matches(self, cfg: CellConfig, true_start: int = 0, tolerance: int = 2, period: int | None = None) -> bool:
        """True when timing is within ``tolerance`` samples and the cell id is right."""
        if not self.detected or self.cell_id != cfg.cell_id:
            return False
        period = frame_length(cfg) if period is None else period
        d = (self.frame_start - true_start) % period
        return min(d, period - d) <= tolerance


@lru_cache(maxsize=None)
def _pss_templates(cfg: CellConfig) -> np.ndarray:
    n = fft_size(cfg)
    bins = _bins(cfg.n_subcarriers, n)[sync_subcarriers(cfg)]
    freq = np.zeros((3, n), dtype=complex)
    for nid2 in range(3):
        freq[nid2, bins] = generate_pss(nid2)
    return np.fft.ifft(freq, axis=-1, norm="ortho")


@lru_cache(maxsize=None)
def _pss_spectra(cfg: CellConfig, length: int) -> np.ndarray:
    t = np.zeros((3, length), dtype=complex)
    p = _pss_templates(cfg)
    t[:, : p.shape[1]] = p
    return np.conj(np.fft.fft(t, axis=-1))


@lru_cache(maxsize=None)
def _lowpass(cfg: CellConfig, length: int) -> np.ndarray:
    f = np.fft.fftfreq(length, d=1 / (fft_size(cfg) * 15_000))
    return np.abs(f) <= SYNC_BAND_HZ


def acquire_sync_batch(samples: np.ndarray, cfg: CellConfig, threshold: float = DEFAULT_THRESHOLD) -> list[SyncResult]:
    """Cell search on each row of ``samples`` (shape ``(B, n)``).

    The buffer is treated as circular, which matches a periodic frame stream
    observed over one frame period.
    """
    x = np.atleast_2d(np.asarray(samples, dtype=complex))
    batch, length = x.shape
    n = fft_size(cfg)
    spec = np.fft.fft(x, axis=-1) * _lowpass(cfg, length)
    r = np.fft.ifft(spec, axis=-1)
    corr = np.fft.ifft(spec[:, None, :] * _pss_spectra(cfg, length)[None], axis=-1)
    power = np.abs(r) ** 2
    csum = np.concatenate([np.zeros((batch, 1)), np.cumsum(np.concatenate([power, power[:, : n - 1]], axis=1), axis=1)], axis=1)
    e_win = csum[:, n : n + length] - csum[:, :length]
    e_p = np.sum(np.abs(_pss_templates(cfg)[0]) ** 2)
    metric = np.abs(corr) ** 2 / (e_p * np.maximum(e_win, 1e-30))[:, None, :]

    flat = metric.reshape(batch, -1).argmax(axis=1)
    nid2s, taus = np.divmod(flat, length)
    peaks = metric[np.arange(batch), nid2s, taus]

    frame = frame_length(cfg)
    pss_offset = int(symbol_starts(cfg)[PSS_SYMBOL])
    sss_gap = n + int(cp_lengths(cfg)[PSS_SYMBOL])
    bins = _bins(cfg.n_subcarriers, n)[sync_subcarriers(cfg)]
    out = []
    for b in range(batch):
        nid2, tau, peak = int(nid2s[b]), int(taus[b]), float(peaks[b])
        if not peak >= threshold:
            out.append(SyncResult(False, -1, -1, -1, peak))
            continue
        idx = tau + np.arange(n)
        y_p = np.fft.fft(x[b, idx % length], norm="ortho")[bins]
        y_s = np.fft.fft(x[b, (idx - sss_gap) % length], norm="ortho")[bins]
        h = y_p * np.conj(generate_pss(nid2))
        z = y_s * np.conj(h)
        score = sss_hypotheses(nid2) @ z.real
        best = int(score.argmax())
        n_id_1, half = divmod(best, 2)
        start = (tau - pss_offset - half * frame // 2) % frame
        out.append(SyncResult(True, int(start), nid2, 3 * n_id_1 + nid2, peak))
    return out


def acquire_sync(samples: np.ndarray, cfg: CellConfig, threshold: float = DEFAULT_THRESHOLD) -> SyncResult:
    """Find frame timing and cell identity in a buffer of downlink samples.

    Parameters
    ----------
    samples : ndarray
        At least one frame of received baseband samples.
    cfg : CellConfig
        Supplies the bandwidth; the cell id is detected, not assumed.
    threshold : float
        Minimum normalised PSS correlation in [0, 1].

    Returns
    -------
    SyncResult
        ``detected`` is False when no PSS peak passes the threshold.
    """
    samples = np.asarray(samples)
    if samples.ndim != 1 or samples.size < frame_length(cfg):
        raise ValueError("acquire_sync needs a 1-D buffer of at least one frame")
    return acquire_sync_batch(samples[None], cfg, threshold)[0]
