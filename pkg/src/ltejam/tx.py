"""Downlink transmitter: channel encoders and resource-grid population."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from types import MappingProxyType
from typing import Mapping

import numpy as np

from . import coding
from .cell_model import (
    Channel,
    CellConfig,
    build_channel_mask,
    control_layout,
    crs_columns,
    crs_subcarriers,
    grid_dimensions,
    pbch_res,
    sync_subcarriers,
)
from .sequences import generate_crs, generate_pss, generate_sss, gold_sequence, qpsk

MIB_BITS = 24
PBCH_CODED_BITS = 1920  # per 40 ms TTI, normal CP
PBCH_FRAME_BITS = PBCH_CODED_BITS // 4
DCI_PAYLOAD_BITS = 21
DCI_CCE_START = 0
SENT_RNTI = 0x1234

# 36.212 table 5.3.4-1; the CFI=4 row is reserved and not transmitted.
PCFICH_CODEWORDS = {
    cfi: np.array([int(c) for c in (pattern * 11)[:32]], dtype=np.uint8)
    for cfi, pattern in ((1, "011"), (2, "101"), (3, "110"))
}

_BANDWIDTH_CODE = {6: 0, 15: 1, 25: 2, 50: 3, 75: 4, 100: 5}
_PHICH_NG_CODE = {1 / 6: 0, 0.5: 1, 1.0: 2, 2.0: 3}


# --- payload and power ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FramePayload:
    """Everything the transmitter needs to fill one frame.

    ``dci_bits`` holds one DCI payload per subframe, shape ``(10, 21)``.
    ``sfn`` is the system frame number; its two LSBs select the PBCH segment.
    """

    mib_bits: np.ndarray
    cfi_value: int
    dci_rnti: int
    dci_bits: np.ndarray
    pdsch_bits: np.ndarray
    sfn: int = 0

    def __post_init__(self):
        if np.shape(self.mib_bits) != (MIB_BITS,):
            raise ValueError(f"MIB must be {MIB_BITS} bits")
        if self.cfi_value not in PCFICH_CODEWORDS:
            raise ValueError(f"cfi must be 1, 2 or 3, got {self.cfi_value}")
        if not 0 < self.dci_rnti < 1 << 16:
            raise ValueError("RNTI must be a non-zero 16-bit value")
        if np.shape(self.dci_bits) != (10, DCI_PAYLOAD_BITS):
            raise ValueError(f"dci_bits must have shape (10, {DCI_PAYLOAD_BITS})")
        if not 0 <= self.sfn < 1024:
            raise ValueError("sfn must be in 0..1023")


def make_mib(cfg: CellConfig, sfn: int) -> np.ndarray:
    """24-bit MIB: bandwidth, PHICH duration/resource, 8 SFN MSBs, spare."""
    return np.concatenate([
        coding.int_to_bits(_BANDWIDTH_CODE[cfg.n_prb], 3),
        [0],
        coding.int_to_bits(_PHICH_NG_CODE[cfg.phich_ng], 2),
        coding.int_to_bits(sfn >> 2, 8),
        np.zeros(10, dtype=np.uint8),
    ]).astype(np.uint8)


def random_payload(cfg: CellConfig, rng: np.random.Generator, rnti: int = SENT_RNTI) -> FramePayload:
    """Fresh random frame content (SFN, DCI payloads, PDSCH filler)."""
    sfn = int(rng.integers(1024))
    n_pdsch = build_channel_mask(Channel.PDSCH, cfg).n_re
    return FramePayload(
        mib_bits=make_mib(cfg, sfn),
        cfi_value=cfg.cfi,
        dci_rnti=rnti,
        dci_bits=rng.integers(0, 2, size=(10, DCI_PAYLOAD_BITS), dtype=np.uint8),
        pdsch_bits=rng.integers(0, 2, size=2 * n_pdsch, dtype=np.uint8),
        sfn=sfn,
    )


@dataclass(frozen=True)
class PowerProfile:
    """Per-channel RE power relative to a PDSCH RE, in dB."""

    rho_db: Mapping[Channel, float] = field(default_factory=dict)

    def __post_init__(self):
        levels = {ch: 0.0 for ch in Channel}
        levels.update({Channel(k): float(v) for k, v in dict(self.rho_db).items()})
        if levels[Channel.PDSCH] != 0.0:
            raise ValueError("PDSCH is the 0 dB power reference")
        if not all(np.isfinite(v) for v in levels.values()):
            raise ValueError("power levels must be finite")
        levels[Channel.SYNC_REPEAT] = levels[Channel.PSS_SSS]
        object.__setattr__(self, "rho_db", MappingProxyType(levels))

    def amplitude(self, channel: Channel) -> float:
        return 10 ** (self.rho_db[channel] / 20)

    @classmethod
    def uniform(cls) -> "PowerProfile":
        return cls()

    @classmethod
    def measured(cls) -> "PowerProfile":
        """Measured eNB power offsets; PHICH follows the PDCCH."""
        return cls({
            Channel.PSS_SSS: -5.0,
            Channel.PDCCH: -5.0,
            Channel.PHICH: -5.0,
            Channel.PBCH: -2.0,
            Channel.PCFICH: -8.0,
            Channel.CRS: -10.0,
        })


@dataclass(eq=False)
class ResourceGrid:
    amplitudes: np.ndarray
    cfg: CellConfig

    def __post_init__(self):
        n_sc, n_sym, _ = grid_dimensions(self.cfg)
        if self.amplitudes.shape != (n_sc, n_sym):
            raise ValueError(f"grid must be {(n_sc, n_sym)}, got {self.amplitudes.shape}")


# --- encoders ---------------------------------------------------------------


def encode_pbch(mib_bits: np.ndarray, cell_id: int) -> np.ndarray:
    """Encode a MIB into the 960 QPSK symbols of one 40 ms PBCH TTI.

    Frame ``i`` of the TTI carries symbols ``[240 i, 240 (i + 1))``, each of
    which holds four full copies of the 120-bit circular buffer.
    """
    mib_bits = np.asarray(mib_bits, dtype=np.uint8)
    if mib_bits.shape[-1] != MIB_BITS:
        raise ValueError(f"MIB must be {MIB_BITS} bits")
    block = np.concatenate([mib_bits, coding.crc(mib_bits)], axis=-1)
    e = coding.rate_match(coding.tbcc_encode(block), PBCH_CODED_BITS)
    return qpsk(e ^ gold_sequence(cell_id, PBCH_CODED_BITS))


def decode_pbch(soft: np.ndarray, cell_id: int):
    """Decode one frame's 240 PBCH soft symbols.

    Tries the four TTI segment hypotheses and keeps the one whose CRC checks.

    Returns
    -------
    mib : ndarray of 24 bits, or None when no hypothesis passes the CRC
    segment : int, the frame's position within the TTI (or -1)
    """
    mibs, segments = decode_pbch_batch(np.asarray(soft)[None], cell_id)
    return (mibs[0] if segments[0] >= 0 else None), int(segments[0])


def decode_pbch_batch(soft: np.ndarray, cell_id: int):
    from .sequences import qpsk_llr

    llr = qpsk_llr(soft)  # (B, 480)
    c = gold_sequence(cell_id, PBCH_CODED_BITS).reshape(4, PBCH_FRAME_BITS)
    hyp = llr[:, None, :] * (1 - 2 * c.astype(np.float64))[None]  # (B, 4, 480)
    folded = hyp.reshape(hyp.shape[0], 4, 4, 120).sum(axis=2)
    k = MIB_BITS + 16
    streams = coding.rate_dematch(folded, k)
    bits = coding.tbcc_decode(streams)  # (B, 4, 40)
    ok = np.all(coding.crc(bits[..., :MIB_BITS]) == bits[..., MIB_BITS:], axis=-1)
    segments = np.where(ok.any(axis=1), ok.argmax(axis=1), -1)
    chosen = bits[np.arange(bits.shape[0]), np.maximum(segments, 0), :MIB_BITS]
    return chosen, segments


def _pcfich_scrambling(cell_id: int, subframe: int) -> np.ndarray:
    return gold_sequence((subframe + 1) * (2 * cell_id + 1) * 512 + cell_id, 32)


def encode_pcfich(cfi_value: int, cell_id: int = 0, subframe: int = 0) -> np.ndarray:
    """16 QPSK symbols carrying the CFI codeword."""
    if cfi_value not in PCFICH_CODEWORDS:
        raise ValueError(f"cfi must be 1, 2 or 3, got {cfi_value}")
    return qpsk(PCFICH_CODEWORDS[cfi_value] ^ _pcfich_scrambling(cell_id, subframe))


@lru_cache(maxsize=None)
def _pcfich_candidates(cell_id: int, subframe: int) -> np.ndarray:
    return np.stack([encode_pcfich(c, cell_id, subframe) for c in (1, 2, 3)])


def decode_pcfich(soft: np.ndarray, cell_id: int = 0, subframe: int = 0) -> np.ndarray:
    """Maximum-likelihood CFI from 16 soft symbols (any leading batch shape)."""
    metric = np.real(np.asarray(soft) @ _pcfich_candidates(cell_id, subframe).conj().T)
    return metric.argmax(axis=-1) + 1


def encode_pdcch(dci_rnti: int, payload: np.ndarray, aggregation_level: int = 1) -> np.ndarray:
    """DCI coding: RNTI-masked CRC16, TBCC, rate matching to ``72 L`` bits."""
    payload = np.asarray(payload, dtype=np.uint8)
    if payload.shape[-1] != DCI_PAYLOAD_BITS:
        raise ValueError(f"DCI payload must be {DCI_PAYLOAD_BITS} bits")
    parity = coding.crc(payload) ^ coding.int_to_bits(dci_rnti, 16)
    block = np.concatenate([payload, parity], axis=-1)
    return coding.rate_match(coding.tbcc_encode(block), 72 * aggregation_level)


def decode_pdcch(llr: np.ndarray):
    """Decode rate-matched DCI soft bits.

    Returns ``(payload_bits, rnti)``; the RNTI is recovered by XOR-ing the
    received parity with the CRC recomputed over the decoded payload.
    """
    k = DCI_PAYLOAD_BITS + 16
    bits = coding.tbcc_decode(coding.rate_dematch(llr, k))
    payload = bits[..., :DCI_PAYLOAD_BITS]
    rnti = coding.bits_to_int(coding.crc(payload) ^ bits[..., DCI_PAYLOAD_BITS:])
    return payload, rnti


def pdcch_scrambling(cell_id: int, subframe: int, n_bits: int) -> np.ndarray:
    return gold_sequence(subframe * 512 + cell_id, n_bits)


@lru_cache(maxsize=None)
def pdcch_quadruplet_positions(cfg: CellConfig, cfi: int) -> np.ndarray:
    """REG index (in mapping order) that carries each symbol quadruplet."""
    lay = control_layout(cfg, cfi)
    m_quad = lay.n_reg
    w = coding.subblock_interleaver(m_quad)
    w = w[w >= 0]
    shifted = w[(np.arange(m_quad) + cfg.cell_id) % m_quad]
    pos = np.empty(m_quad, dtype=np.int64)
    pos[shifted] = np.arange(m_quad)
    pos.setflags(write=False)
    return pos


@lru_cache(maxsize=None)
def pdcch_ue_res(cfg: CellConfig, cfi: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(k, l, bit_offset)`` of the UE's DCI symbols within a subframe.

    ``bit_offset`` is the position of the symbol's first bit in the
    scrambled PDCCH bit block.
    """
    lay = control_layout(cfg, cfi)
    pos = pdcch_quadruplet_positions(cfg, cfi)
    n_quad = 9 * cfg.pdcch_aggregation_level
    quads = np.arange(9 * DCI_CCE_START, 9 * DCI_CCE_START + n_quad)
    regs = pos[quads]
    k = lay.pdcch_k[regs].ravel()
    l = lay.pdcch_l[regs].ravel()
    return k, l, 8 * quads.repeat(4) + 2 * np.tile(np.arange(4), n_quad)


# --- frame assembly ---------------------------------------------------------


def build_frame(cfg: CellConfig, payload: FramePayload, power: PowerProfile | None = None) -> ResourceGrid:
    """Populate every channel of one downlink frame."""
    power = PowerProfile.uniform() if power is None else power
    n_sc, n_sym, _ = grid_dimensions(cfg)
    g = np.zeros((n_sc, n_sym), dtype=complex)
    cid = cfg.cell_id

    ks = sync_subcarriers(cfg)
    for sf in (0, 5):
        amp = power.amplitude(Channel.PSS_SSS if sf == 0 else Channel.SYNC_REPEAT)
        g[ks, 14 * sf + 5] = amp * generate_sss(cid, sf)
        g[ks, 14 * sf + 6] = amp * generate_pss(cfg.n_id_2)

    a_crs = power.amplitude(Channel.CRS)
    for col in crs_columns():
        slot, l = divmod(int(col), 7)
        g[crs_subcarriers(cfg, l), col] = a_crs * generate_crs(cid, slot, l, cfg)

    seg = payload.sfn % 4
    k, c = pbch_res(cfg)
    pbch = encode_pbch(payload.mib_bits, cid)[240 * seg : 240 * (seg + 1)]
    g[k, c] = power.amplitude(Channel.PBCH) * pbch

    lay = control_layout(cfg)
    n_bits = 8 * lay.n_reg
    pos = pdcch_quadruplet_positions(cfg, cfg.cfi)
    coded = encode_pdcch(payload.dci_rnti, payload.dci_bits, cfg.pdcch_aggregation_level)
    a_pdcch, a_pcfich = power.amplitude(Channel.PDCCH), power.amplitude(Channel.PCFICH)
    phich = power.amplitude(Channel.PHICH) * (1 + 1j) / np.sqrt(2)
    for sf in range(10):
        col0 = 14 * sf
        g[lay.pcfich_k.ravel(), col0 + lay.pcfich_l.ravel()] = a_pcfich * encode_pcfich(payload.cfi_value, cid, sf)
        g[lay.phich_k.ravel(), col0 + lay.phich_l.ravel()] = phich
        bits = np.zeros(n_bits, dtype=np.uint8)
        start = 72 * DCI_CCE_START
        bits[start : start + coded.shape[-1]] = coded[sf]
        quads = qpsk(bits ^ pdcch_scrambling(cid, sf, n_bits)).reshape(-1, 4)
        regs = np.empty_like(quads)
        regs[pos] = quads
        g[lay.pdcch_k.ravel(), col0 + lay.pdcch_l.ravel()] = a_pdcch * regs.ravel()

    pdsch = build_channel_mask(Channel.PDSCH, cfg).array
    g[pdsch] = qpsk(payload.pdsch_bits)
    return ResourceGrid(g, cfg)
