"""OFDM jammer waveforms and signal/jammer/noise combining.

Both generators return waveforms normalised so that each active RE carries
unit power, the same as a PDSCH RE of the downlink signal.  The requested
jammer-to-signal ratio is applied once, in :func:`mix_at_jsr`.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .cell_model import (
    Channel,
    CellConfig,
    ChannelMask,
    SYMBOLS_PER_FRAME,
    build_channel_mask,
    crs_subcarrier_offset,
    grid_dimensions,
)
from .errors import FramingError
from .ofdm import frame_length, modulate_array
from .sequences import qpsk


class Strategy(Enum):
    BARRAGE = "Barrage"
    PSS_SSS = "PssSss"
    PDCCH = "Pdcch"
    PBCH = "Pbch"
    PCFICH = "Pcfich"
    CRS = "Crs"
    CRS_SUBCARRIERS = "CrsSubcarriers"
    CUSTOM_MASK = "CustomMask"


class SyncMode(Enum):
    ASYNCHRONOUS = "Asynchronous"
    SYNCHRONOUS = "Synchronous"


TARGET_CHANNEL = {
    Strategy.BARRAGE: Channel.BARRAGE,
    Strategy.PSS_SSS: Channel.PSS_SSS,
    Strategy.PDCCH: Channel.PDCCH,
    Strategy.PBCH: Channel.PBCH,
    Strategy.PCFICH: Channel.PCFICH,
    Strategy.CRS: Channel.CRS,
}

# Targeting a physical channel needs the jammer to know the frame timing.
REQUIRES_SYNC = frozenset({Strategy.PSS_SSS, Strategy.PDCCH, Strategy.PBCH, Strategy.PCFICH, Strategy.CRS})


@dataclass(frozen=True)
class JammerProfile:
    strategy: Strategy
    sync_mode: SyncMode = SyncMode.SYNCHRONOUS
    jsr_re_db: float = 0.0
    timing_offset_samples: int = 0
    duty_cycle: float = 1.0
    subcarrier_mask: frozenset[int] | None = None
    symbol_mask: frozenset[int] | None = None

    def __post_init__(self):
        object.__setattr__(self, "strategy", Strategy(self.strategy))
        object.__setattr__(self, "sync_mode", SyncMode(self.sync_mode))
        if self.strategy in REQUIRES_SYNC and self.sync_mode is not SyncMode.SYNCHRONOUS:
            raise ValueError(f"{self.strategy.value} jamming requires synchronous mode")
        if self.strategy is Strategy.CRS_SUBCARRIERS and self.sync_mode is not SyncMode.ASYNCHRONOUS:
            raise ValueError("CrsSubcarriers jamming is asynchronous")
        if not 0 < self.duty_cycle <= 1:
            raise ValueError(f"duty_cycle must be in (0, 1], got {self.duty_cycle}")
        if not np.isfinite(self.jsr_re_db):
            raise ValueError("jsr_re_db must be finite")
        for name in ("subcarrier_mask", "symbol_mask"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, frozenset(int(v) for v in value))
        if self.strategy is Strategy.CUSTOM_MASK and not self.subcarrier_mask:
            raise ValueError("CustomMask requires a non-empty subcarrier_mask")


def crs_subcarrier_set(cfg: CellConfig) -> frozenset[int]:
    """Every subcarrier that carries CRS in some symbol: ``k = k0, k0+3 (mod 6)``."""
    k0 = crs_subcarrier_offset(cfg.cell_id)
    return frozenset(k for k in range(cfg.n_subcarriers) if k % 3 == k0 % 3)


def _async_subcarriers(profile: JammerProfile, cfg: CellConfig) -> np.ndarray:
    if profile.strategy is Strategy.CRS_SUBCARRIERS:
        ks = crs_subcarrier_set(cfg)
    elif profile.subcarrier_mask is not None:
        ks = profile.subcarrier_mask
    else:
        ks = range(cfg.n_subcarriers)
    ks = np.array(sorted(ks), dtype=np.int64)
    if ks.size == 0:
        raise ValueError("jammer subcarrier mask is empty")
    if ks.min() < 0 or ks.max() >= cfg.n_subcarriers:
        raise ValueError(f"subcarrier mask exceeds 0..{cfg.n_subcarriers - 1}")
    return ks


def duty_cycle_symbols(duty_cycle: float, n_symbols: int = SYMBOLS_PER_FRAME) -> np.ndarray:
    """Boolean on/off pattern spreading ``duty_cycle * n_symbols`` on-symbols evenly."""
    j = np.arange(n_symbols)
    return np.floor((j + 1) * duty_cycle + 1e-9) > np.floor(j * duty_cycle + 1e-9)


def _symbol_selector(profile: JammerProfile) -> np.ndarray:
    on = np.ones(SYMBOLS_PER_FRAME, dtype=bool)
    if profile.symbol_mask is not None:
        on[:] = False
        idx = np.array(sorted(profile.symbol_mask), dtype=np.int64)
        if idx.size == 0 or idx.min() < 0 or idx.max() >= SYMBOLS_PER_FRAME:
            raise ValueError(f"symbol mask must be non-empty within 0..{SYMBOLS_PER_FRAME - 1}")
        on[idx] = True
    return on


def _random_qpsk(rng: np.random.Generator, shape) -> np.ndarray:
    shape = tuple(shape)
    return qpsk(rng.integers(0, 2, size=shape[:-1] + (2 * shape[-1],), dtype=np.uint8))


def make_async_waveform(profile: JammerProfile, cfg: CellConfig, rng: np.random.Generator) -> np.ndarray:
    """One frame of unsynchronised jamming with a random circular start.

    Parameters
    ----------
    profile : JammerProfile
        Must be asynchronous. ``subcarrier_mask`` defaults to the whole band.
    cfg : CellConfig
    rng : numpy.random.Generator
        Source for the QPSK content and the start phase.

    Returns
    -------
    ndarray
        ``frame_length(cfg)`` complex samples with unit power on each active RE.
    """
    if profile.sync_mode is not SyncMode.ASYNCHRONOUS:
        raise ValueError("make_async_waveform needs an asynchronous profile")
    n_sc, n_sym, _ = grid_dimensions(cfg)
    ks = _async_subcarriers(profile, cfg)
    cols = np.flatnonzero(_symbol_selector(profile) & duty_cycle_symbols(profile.duty_cycle, n_sym))
    grid = np.zeros((n_sc, n_sym), dtype=complex)
    grid[np.ix_(ks, cols)] = _random_qpsk(rng, (ks.size, cols.size))
    x = modulate_array(grid, cfg)
    return np.roll(x, int(rng.integers(frame_length(cfg))))


def make_sync_waveform(
    profile: JammerProfile,
    mask: ChannelMask,
    cfg: CellConfig,
    rng: np.random.Generator,
) -> np.ndarray:
    """Frame-aligned jamming of exactly the REs in ``mask``.

    The waveform is delayed by ``profile.timing_offset_samples`` (negative
    values make it arrive early).  Delays within the cyclic prefix keep the
    jammer on its target REs; early arrival leaks into neighbouring REs.
    """
    if profile.sync_mode is not SyncMode.SYNCHRONOUS:
        raise ValueError("make_sync_waveform needs a synchronous profile")
    if mask.cfg != cfg:
        raise ValueError("mask was built for a different cell configuration")
    sel = mask.array.copy()
    sel[:, ~_symbol_selector(profile)] = False
    if profile.subcarrier_mask is not None:
        keep = np.zeros(cfg.n_subcarriers, dtype=bool)
        keep[_async_subcarriers(profile, cfg)] = True
        sel &= keep[:, None]
    grid = np.zeros(sel.shape, dtype=complex)
    grid[sel] = _random_qpsk(rng, (int(sel.sum()),))
    return np.roll(modulate_array(grid, cfg), int(profile.timing_offset_samples))


def make_jammer_waveform(profile: JammerProfile, cfg: CellConfig, rng: np.random.Generator) -> np.ndarray:
    """Dispatch on the profile: synchronous channel targeting or async mask."""
    if profile.sync_mode is SyncMode.ASYNCHRONOUS:
        return make_async_waveform(profile, cfg, rng)
    if profile.strategy in TARGET_CHANNEL:
        mask = build_channel_mask(TARGET_CHANNEL[profile.strategy], cfg)
    else:
        mask = build_channel_mask(Channel.BARRAGE, cfg)
    return make_sync_waveform(profile, mask, cfg, rng)


def mix_at_jsr(
    enb_samples: np.ndarray,
    jammer_samples: np.ndarray,
    jsr_re_db: float,
    noise_floor_db: float = -30.0,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Add the scaled jammer and white Gaussian noise to the downlink signal.

    The jammer is assumed normalised to unit power per active RE, so a gain
    of ``10 ** (jsr_re_db / 20)`` sets the per-RE jammer-to-signal ratio.
    The noise power per RE is ``noise_floor_db`` relative to a unit RE.
    """
    enb_samples = np.asarray(enb_samples)
    jammer_samples = np.asarray(jammer_samples)
    if enb_samples.shape != jammer_samples.shape:
        raise FramingError(f"signal has {enb_samples.shape} samples, jammer {jammer_samples.shape}")
    rng = np.random.default_rng() if rng is None else rng
    sigma = np.sqrt(10 ** (noise_floor_db / 10) / 2)
    noise = sigma * (rng.standard_normal(enb_samples.shape) + 1j * rng.standard_normal(enb_samples.shape))
    return enb_samples + 10 ** (jsr_re_db / 20) * jammer_samples + noise
