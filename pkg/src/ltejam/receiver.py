"""Software UE: sync, CRS channel estimation, control-channel decoding.

Every reception outcome is recorded as an error flag; nothing here raises for
a failed decode.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .cell_model import (
    Channel,
    CellConfig,
    crs_columns,
    crs_subcarriers,
    grid_dimensions,
    pbch_res,
    control_layout,
)
from .interference import Strategy
from .ofdm import demodulate_array, frame_length
from .sequences import generate_crs, qpsk_llr
from .sync import DEFAULT_THRESHOLD, SyncResult, acquire_sync_batch
from .tx import (
    FramePayload,
    PowerProfile,
    decode_pbch_batch,
    decode_pcfich,
    decode_pdcch,
    pdcch_scrambling,
    pdcch_ue_res,
)


@dataclass(frozen=True)
class ErrorFlags:
    sync_error: bool = False
    pbch_error: bool = False
    pcfich_error: bool = False
    pdcch_error: bool = False

    @property
    def composite_error(self) -> bool:
        return self.sync_error or self.pbch_error or self.pcfich_error or self.pdcch_error


@dataclass(frozen=True, eq=False)
class FrameReport:
    """Reception outcome of one frame.

    ``pcfich_error`` and ``pdcch_error`` hold one entry per subframe; the
    PBCH is carried in subframe 0 only.
    """

    sync: SyncResult
    sync_error: bool
    pbch_error: bool
    pcfich_error: np.ndarray
    pdcch_error: np.ndarray

    def subframe_flags(self, subframe: int) -> ErrorFlags:
        return ErrorFlags(
            sync_error=self.sync_error,
            pbch_error=self.pbch_error and subframe == 0,
            pcfich_error=bool(self.pcfich_error[subframe]),
            pdcch_error=bool(self.pdcch_error[subframe]),
        )

    @property
    def frame_flags(self) -> ErrorFlags:
        return ErrorFlags(
            sync_error=self.sync_error,
            pbch_error=self.pbch_error,
            pcfich_error=bool(self.pcfich_error.any()),
            pdcch_error=bool(self.pdcch_error.any()),
        )


def evaluate_strategy_flag(flags: ErrorFlags, strategy) -> bool:
    """Trial error for a jamming strategy, using the flag that strategy targets."""
    strategy = Strategy(strategy)
    if strategy is Strategy.PSS_SSS:
        return flags.sync_error
    if strategy is Strategy.PDCCH:
        return flags.pdcch_error
    if strategy is Strategy.PBCH:
        return flags.pbch_error
    if strategy is Strategy.PCFICH:
        return flags.pcfich_error
    return flags.composite_error


# --- channel estimation -----------------------------------------------------


@lru_cache(maxsize=None)
def _estimator(cfg: CellConfig):
    """Pilot positions, pilot values and the interpolation operators."""
    n_sc, n_sym, _ = grid_dimensions(cfg)
    cols = crs_columns()
    ks = [crs_subcarriers(cfg, int(c) % 7) for c in cols]
    pilots = np.stack([generate_crs(cfg.cell_id, int(c) // 7, int(c) % 7, cfg) for c in cols])
    # Linear interpolation (constant beyond the edge pilots) is linear in the
    # pilot values, so it can be carried out as a matrix product.
    eye = np.eye(ks[0].size)
    freq = {}
    for kk in ks:
        key = int(kk[0])
        if key not in freq:
            freq[key] = np.stack([np.interp(np.arange(n_sc), kk, e) for e in eye], axis=0)
    f_ops = np.stack([freq[int(kk[0])] for kk in ks])  # (40, n_pilot, n_sc)
    eye_t = np.eye(cols.size)
    t_op = np.stack([np.interp(np.arange(n_sym), cols, e) for e in eye_t], axis=0)  # (40, 140)
    return np.stack(ks), pilots, f_ops, t_op


def estimate_channel(y: np.ndarray, cfg: CellConfig, crs_amplitude: float = 1.0) -> np.ndarray:
    """Least-squares CRS estimate, linearly interpolated over the grid.

    ``y`` has shape ``(..., n_sc, 140)``; the estimate has the same shape.
    """
    ks, pilots, f_ops, t_op = _estimator(cfg)
    cols = crs_columns()
    h_pilot = y[..., ks, cols[:, None]] * np.conj(pilots) / crs_amplitude  # (..., 40, n_pilot)
    h_cols = np.einsum("...cp,cpk->...kc", h_pilot, f_ops)
    return h_cols @ t_op


def equalize(y: np.ndarray, h: np.ndarray, equalizer: str = "zf") -> np.ndarray:
    """Equalised symbols used as soft values by the decoders.

    ``"zf"`` divides by the channel estimate; ``"mrc"`` multiplies by its
    conjugate, which weights each RE by its estimated channel power.
    """
    if equalizer == "zf":
        return y / np.where(np.abs(h) > 1e-12, h, 1e-12)
    if equalizer == "mrc":
        return np.conj(h) * y
    raise ValueError(f"unknown equalizer {equalizer!r}")


# --- reception --------------------------------------------------------------


def _align(samples: np.ndarray, start: int, length: int) -> np.ndarray:
    return samples[(start + np.arange(length)) % samples.shape[-1]]


def receive_frames(
    samples: np.ndarray,
    cfg: CellConfig,
    truths: list[FramePayload],
    power: PowerProfile | None = None,
    true_start: int = 0,
    sync_threshold: float = DEFAULT_THRESHOLD,
    equalizer: str = "zf",
) -> list[FrameReport]:
    """Receive a batch of frames (rows of ``samples``) and score them against ``truths``."""
    power = PowerProfile.uniform() if power is None else power
    x = np.atleast_2d(samples)
    if len(truths) != x.shape[0]:
        raise ValueError("one truth payload per received frame is required")
    n_frame = frame_length(cfg)
    syncs = acquire_sync_batch(x, cfg, sync_threshold)
    ok = np.array([s.matches(cfg, true_start, period=n_frame) for s in syncs])
    reports: list[FrameReport | None] = [None] * len(truths)
    for b in np.flatnonzero(~ok):
        reports[b] = FrameReport(syncs[b], True, True, np.ones(10, bool), np.ones(10, bool))
    good = np.flatnonzero(ok)
    if good.size:
        aligned = np.stack([_align(x[b], syncs[b].frame_start, n_frame) for b in good])
        y = demodulate_array(aligned, cfg)
        h = estimate_channel(y, cfg, power.amplitude(Channel.CRS))
        soft = equalize(y, h, equalizer)
        pbch_err = _pbch_errors(soft, cfg, [truths[b] for b in good])
        cfi_hat, pcfich_err = _pcfich_errors(soft, cfg, [truths[b] for b in good])
        pdcch_err = _pdcch_errors(soft, cfg, [truths[b] for b in good], cfi_hat)
        for i, b in enumerate(good):
            reports[b] = FrameReport(syncs[b], False, bool(pbch_err[i]), pcfich_err[i], pdcch_err[i])
    return reports


def receive_frame(
    composite_samples: np.ndarray,
    cfg: CellConfig,
    truth: FramePayload,
    power: PowerProfile | None = None,
    true_start: int = 0,
) -> ErrorFlags:
    """Frame-level error flags for one received frame.

    Parameters
    ----------
    composite_samples : ndarray
        At least one frame of received samples.
    cfg : CellConfig
        Cell the UE expects to camp on.
    truth : FramePayload
        What the eNB sent.
    power : PowerProfile, optional
        Transmit power profile; only the CRS level is used.
    true_start : int
        Where the frame really begins, for judging the timing estimate.
    """
    return receive_frames(np.asarray(composite_samples)[None], cfg, [truth], power, true_start)[0].frame_flags


def _pbch_errors(soft: np.ndarray, cfg: CellConfig, truths) -> np.ndarray:
    k, c = pbch_res(cfg)
    mibs, segments = decode_pbch_batch(soft[:, k, c], cfg.cell_id)
    sent = np.stack([t.mib_bits for t in truths])
    seg_true = np.array([t.sfn % 4 for t in truths])
    return (segments != seg_true) | np.any(mibs != sent, axis=1)


def _pcfich_errors(soft: np.ndarray, cfg: CellConfig, truths):
    lay = control_layout(cfg)
    sf = np.arange(10)
    cols = 14 * sf[:, None] + lay.pcfich_l.ravel()[None]
    sym = soft[:, lay.pcfich_k.ravel()[None], cols]  # (B, 10, 16)
    cfi_hat = np.stack([decode_pcfich(sym[:, s], cfg.cell_id, s) for s in range(10)], axis=1)
    sent = np.array([t.cfi_value for t in truths])[:, None]
    return cfi_hat, cfi_hat != sent


def _pdcch_errors(soft: np.ndarray, cfg: CellConfig, truths, cfi_hat: np.ndarray) -> np.ndarray:
    batch = soft.shape[0]
    rnti_hat = np.full((batch, 10), -1, dtype=np.int64)
    for cfi in np.unique(cfi_hat):
        try:
            k, l, offset = pdcch_ue_res(cfg, int(cfi))
        except (ValueError, IndexError):
            continue  # the decoded CFI leaves no room for the DCI
        n_bits = 8 * control_layout(cfg, int(cfi)).n_reg
        b_idx, s_idx = np.nonzero(cfi_hat == cfi)
        sym = soft[b_idx[:, None], k[None], 14 * s_idx[:, None] + l[None]]
        llr = qpsk_llr(sym)
        scr = np.stack([pdcch_scrambling(cfg.cell_id, int(s), n_bits) for s in range(10)])
        bit_pos = (offset[:, None] + np.arange(2)).ravel()
        llr = llr * (1 - 2.0 * scr[s_idx][:, bit_pos])
        _, rnti = decode_pdcch(llr)
        rnti_hat[b_idx, s_idx] = rnti
    sent = np.array([t.dci_rnti for t in truths])[:, None]
    return rnti_hat != sent
