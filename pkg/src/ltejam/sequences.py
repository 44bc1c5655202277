"""Pseudo-random and synchronisation sequences (PSS, SSS, CRS, Gold)."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .cell_model import CRS_SLOT_SYMBOLS, CellConfig

_NC = 1600
PSS_ROOTS = (25, 29, 34)
MAX_DL_PRB = 110


@lru_cache(maxsize=4096)
def gold_sequence(c_init: int, length: int) -> np.ndarray:
    """Length-31 Gold sequence ``c(n)``, ``n = 0..length-1``, as uint8.

    The two m-sequences are advanced 28 samples at a time; each block only
    depends on values already computed.
    """
    total = _NC + length
    x1 = np.zeros(total + 31, dtype=np.uint8)
    x2 = np.zeros(total + 31, dtype=np.uint8)
    x1[0] = 1
    x2[:31] = (c_init >> np.arange(31)) & 1
    for n in range(0, total, 28):
        m = min(28, total - n)
        x1[n + 31 : n + 31 + m] = x1[n + 3 : n + 3 + m] ^ x1[n : n + m]
        x2[n + 31 : n + 31 + m] = x2[n + 3 : n + 3 + m] ^ x2[n + 2 : n + 2 + m] ^ x2[n + 1 : n + 1 + m] ^ x2[n : n + m]
    c = x1[_NC:total] ^ x2[_NC:total]
    c.setflags(write=False)
    return c


def qpsk(bits: np.ndarray) -> np.ndarray:
    """Map bit pairs along the last axis to unit-energy QPSK."""
    b = np.asarray(bits, dtype=np.float64).reshape(*np.shape(bits)[:-1], -1, 2)
    return ((1 - 2 * b[..., 0]) + 1j * (1 - 2 * b[..., 1])) / np.sqrt(2)


def qpsk_llr(symbols: np.ndarray) -> np.ndarray:
    """Soft bits (positive means 0) interleaved as ``[re0, im0, re1, ...]``."""
    s = np.asarray(symbols)
    out = np.empty(s.shape[:-1] + (2 * s.shape[-1],))
    out[..., 0::2] = s.real
    out[..., 1::2] = s.imag
    return out


def zadoff_chu(root: int, length: int = 63) -> np.ndarray:
    n = np.arange(length)
    return np.exp(-1j * np.pi * root * n * (n + 1) / length)


@lru_cache(maxsize=None)
def generate_pss(n_id_2: int) -> np.ndarray:
    """62-symbol PSS: the length-63 Zadoff-Chu sequence with its DC term removed."""
    if n_id_2 not in (0, 1, 2):
        raise ValueError(f"n_id_2 must be 0, 1 or 2, got {n_id_2}")
    u = PSS_ROOTS[n_id_2]
    n = np.arange(62)
    m = np.where(n < 31, n, n + 1)
    d = np.exp(-1j * np.pi * u * m * (m + 1) / 63)
    d.setflags(write=False)
    return d


def _m_sequence(taps: tuple[int, ...]) -> np.ndarray:
    x = np.zeros(31, dtype=np.int64)
    x[4] = 1
    for i in range(26):
        x[i + 5] = sum(x[i + t] for t in taps) % 2
    return 1 - 2 * x


_S_TILDE = _m_sequence((2, 0))
_C_TILDE = _m_sequence((3, 0))
_Z_TILDE = _m_sequence((4, 2, 1, 0))


def _sss_indices(n_id_1: int) -> tuple[int, int]:
    q_prime = n_id_1 // 30
    q = (n_id_1 + q_prime * (q_prime + 1) // 2) // 30
    m_prime = n_id_1 + q * (q + 1) // 2
    m0 = m_prime % 31
    m1 = (m0 + m_prime // 31 + 1) % 31
    return m0, m1


@lru_cache(maxsize=None)
def _sss(n_id_1: int, n_id_2: int, subframe: int) -> np.ndarray:
    m0, m1 = _sss_indices(n_id_1)
    n = np.arange(31)
    s0, s1 = _S_TILDE[(n + m0) % 31], _S_TILDE[(n + m1) % 31]
    c0, c1 = _C_TILDE[(n + n_id_2) % 31], _C_TILDE[(n + n_id_2 + 3) % 31]
    z_m0, z_m1 = _Z_TILDE[(n + m0 % 8) % 31], _Z_TILDE[(n + m1 % 8) % 31]
    d = np.empty(62)
    if subframe == 0:
        d[0::2], d[1::2] = s0 * c0, s1 * c1 * z_m0
    else:
        d[0::2], d[1::2] = s1 * c0, s0 * c1 * z_m1
    d.setflags(write=False)
    return d


def generate_sss(cell_id: int, subframe: int) -> np.ndarray:
    """62-symbol SSS (values +-1) for subframe 0 or 5."""
    if not 0 <= cell_id <= 503:
        raise ValueError(f"cell_id must be in 0..503, got {cell_id}")
    if subframe not in (0, 5):
        raise ValueError(f"SSS exists only in subframes 0 and 5, got {subframe}")
    return _sss(cell_id // 3, cell_id % 3, subframe)


@lru_cache(maxsize=None)
def sss_hypotheses(n_id_2: int) -> np.ndarray:
    """All 336 SSS candidates for one ``n_id_2``; row ``2 * n_id_1 + half``."""
    return np.stack([_sss(n1, n_id_2, sf) for n1 in range(168) for sf in (0, 5)])


def crs_c_init(cell_id: int, slot: int, symbol: int) -> int:
    return (1 << 10) * (7 * (slot + 1) + symbol + 1) * (2 * cell_id + 1) + 2 * cell_id + 1


@lru_cache(maxsize=None)
def _crs(cell_id: int, slot: int, symbol: int, n_prb: int) -> np.ndarray:
    c = gold_sequence(crs_c_init(cell_id, slot, symbol), 4 * MAX_DL_PRB)
    r = qpsk(c)
    m = np.arange(2 * n_prb) + MAX_DL_PRB - n_prb
    out = r[m]
    out.setflags(write=False)
    return out


def generate_crs(cell_id: int, slot: int, symbol: int, cfg: CellConfig) -> np.ndarray:
    """Port-0 CRS symbols for slot ``0..19`` and in-slot ``symbol`` (0 or 4).

    Element ``m`` sits on subcarrier ``crs_subcarriers(cfg, symbol)[m]``.
    """
    if symbol not in CRS_SLOT_SYMBOLS:
        raise ValueError(f"symbol {symbol} is not a CRS-bearing symbol")
    if not 0 <= slot < 20:
        raise ValueError(f"slot must be in 0..19, got {slot}")
    if not 0 <= cell_id <= 503:
        raise ValueError(f"cell_id must be in 0..503, got {cell_id}")
    return _crs(cell_id, slot, symbol, cfg.n_prb)
