"""Channel coding: CRC, tail-biting convolutional code, rate matching.

Everything works on the last axis so a batch of code blocks can be encoded
or decoded in one call.  Soft values follow the convention "positive means
bit 0".
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

CRC16_POLY = 0x1021  # D^16 + D^12 + D^5 + 1
TBCC_GENERATORS = (0o133, 0o171, 0o165)
CONSTRAINT_LENGTH = 7
_N_STATES = 1 << (CONSTRAINT_LENGTH - 1)

# Inter-column permutation of the 32-column sub-block interleaver.
SUBBLOCK_PERMUTATION = (
    1, 17, 9, 25, 5, 21, 13, 29, 3, 19, 11, 27, 7, 23, 15, 31,
    0, 16, 8, 24, 4, 20, 12, 28, 2, 18, 10, 26, 6, 22, 14, 30,
)


def _crc_register(bits, poly: int, length: int) -> int:
    reg = 0
    top = 1 << (length - 1)
    mask = (1 << length) - 1
    for b in bits:
        fb = ((reg & top) != 0) ^ int(b)
        reg = (reg << 1) & mask
        if fb:
            reg ^= poly
    return reg


@lru_cache(maxsize=None)
def _crc_matrix(n_bits: int, poly: int, length: int) -> np.ndarray:
    rows = np.zeros((n_bits, length), dtype=np.int64)
    for i in range(n_bits):
        e = np.zeros(n_bits, dtype=np.uint8)
        e[i] = 1
        reg = _crc_register(e, poly, length)
        rows[i] = (reg >> np.arange(length - 1, -1, -1)) & 1
    return rows


def crc(bits: np.ndarray, poly: int = CRC16_POLY, length: int = 16) -> np.ndarray:
    """Parity bits (MSB first) of a zero-initialised CRC over the last axis."""
    bits = np.asarray(bits, dtype=np.int64)
    return ((bits @ _crc_matrix(bits.shape[-1], poly, length)) % 2).astype(np.uint8)


def int_to_bits(value: int, n: int) -> np.ndarray:
    return ((value >> np.arange(n - 1, -1, -1)) & 1).astype(np.uint8)


def bits_to_int(bits: np.ndarray) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.int64)
    return bits @ (1 << np.arange(bits.shape[-1] - 1, -1, -1))


def _generator_taps() -> np.ndarray:
    taps = np.zeros((3, CONSTRAINT_LENGTH), dtype=np.int64)
    for i, g in enumerate(TBCC_GENERATORS):
        taps[i] = (g >> np.arange(CONSTRAINT_LENGTH - 1, -1, -1)) & 1
    return taps


_TAPS = _generator_taps()


def tbcc_encode(bits: np.ndarray) -> np.ndarray:
    """Rate-1/3 tail-biting encoder; returns shape ``(..., 3, K)``."""
    c = np.asarray(bits, dtype=np.int64)
    out = np.zeros(c.shape[:-1] + (3, c.shape[-1]), dtype=np.int64)
    for j in range(CONSTRAINT_LENGTH):
        shifted = np.roll(c, j, axis=-1)
        out += _TAPS[:, j, None] * shifted[..., None, :]
    return (out % 2).astype(np.uint8)


def _trellis():
    # State s holds the previous six inputs, bit j-1 = c[k-j].
    states = np.arange(_N_STATES)
    pred = np.zeros((_N_STATES, 2), dtype=np.int64)
    sign = np.zeros((3, _N_STATES, 2))
    for s_next in states:
        u = s_next & 1
        for m in (0, 1):
            s = (s_next >> 1) | (m << (CONSTRAINT_LENGTH - 2))
            pred[s_next, m] = s
            reg = np.concatenate([[u], (s >> np.arange(CONSTRAINT_LENGTH - 1)) & 1])
            outs = (_TAPS @ reg) % 2
            sign[:, s_next, m] = 1 - 2 * outs
    return pred, sign.reshape(3, -1)


_PRED, _SIGN = _trellis()


def tbcc_decode(llr: np.ndarray, wrap: int | None = None) -> np.ndarray:
    """Maximum-likelihood decoding of tail-biting code blocks.

    Parameters
    ----------
    llr : ndarray, shape (..., 3, K)
        Soft values for the three encoder streams.
    wrap : int, optional
        Length of the circular extension on each side; defaults to
        ``max(K, 42)`` trellis steps.

    Returns
    -------
    ndarray, shape (..., K), uint8
    """
    llr = np.asarray(llr, dtype=np.float64)
    lead = llr.shape[:-2]
    k = llr.shape[-1]
    x = llr.reshape(-1, 3, k)
    batch = x.shape[0]
    wrap = max(k, 42) if wrap is None else wrap
    idx = np.arange(-wrap, k + wrap) % k
    x = x[:, :, idx]
    n_steps = x.shape[-1]
    pm = np.zeros((batch, _N_STATES))
    decisions = np.empty((n_steps, batch, _N_STATES), dtype=np.int8)
    for t in range(n_steps):
        bm = (x[:, :, t] @ _SIGN).reshape(batch, _N_STATES, 2)
        cand = pm[:, _PRED] + bm
        choice = cand[:, :, 1] > cand[:, :, 0]
        decisions[t] = choice
        pm = np.where(choice, cand[:, :, 1], cand[:, :, 0])
        pm -= pm.max(axis=1, keepdims=True)
    state = pm.argmax(axis=1)
    rows = np.arange(batch)
    bits = np.empty((n_steps, batch), dtype=np.uint8)
    for t in range(n_steps - 1, -1, -1):
        bits[t] = state & 1
        state = _PRED[state, decisions[t, rows, state]]
    return bits[wrap : wrap + k].T.reshape(lead + (k,))


@lru_cache(maxsize=None)
def subblock_interleaver(n: int) -> np.ndarray:
    """Read-out order of a 32-column sub-block interleaver.

    Returns indices into the input sequence, ``-1`` marking dummy bits.
    """
    rows = -(-n // 32)
    n_dummy = 32 * rows - n
    y = np.concatenate([np.full(n_dummy, -1), np.arange(n)]).reshape(rows, 32)
    out = y[:, list(SUBBLOCK_PERMUTATION)].T.ravel()
    out.setflags(write=False)
    return out


@lru_cache(maxsize=None)
def rate_match_indices(k: int, e: int) -> np.ndarray:
    """Source index (into the flattened ``(3, K)`` streams) of each output bit."""
    v = subblock_interleaver(k)
    w = np.concatenate([np.where(v >= 0, v + i * k, -1) for i in range(3)])
    w = w[w >= 0]
    out = w[np.arange(e) % w.size]
    out.setflags(write=False)
    return out


def rate_match(coded: np.ndarray, e: int) -> np.ndarray:
    """Circular-buffer rate matching of ``(..., 3, K)`` streams to ``e`` bits."""
    coded = np.asarray(coded)
    k = coded.shape[-1]
    flat = coded.reshape(coded.shape[:-2] + (3 * k,))
    return flat[..., rate_match_indices(k, e)]


@lru_cache(maxsize=None)
def _dematch_matrix(k: int, e: int) -> np.ndarray:
    m = np.zeros((e, 3 * k))
    m[np.arange(e), rate_match_indices(k, e)] = 1.0
    return m


def rate_dematch(llr: np.ndarray, k: int) -> np.ndarray:
    """Combine soft values of repeated bits; punctured bits get zero."""
    llr = np.asarray(llr, dtype=np.float64)
    e = llr.shape[-1]
    out = llr @ _dematch_matrix(k, e)
    return out.reshape(llr.shape[:-1] + (3, k))
