"""Cell configuration and downlink resource-grid geometry.

All grids in this package are ``(n_subcarriers, n_symbols_per_frame)`` arrays
indexed ``[k, 14 * subframe + l]`` for a single antenna port, normal cyclic
prefix, FDD frame.  The helpers here are the single source of truth for where
every physical channel lives; the transmitter, the jammer and the metrics all
derive their RE sets from them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import FrozenSet, NamedTuple

import numpy as np

N_SC_PER_PRB = 12
SYMBOLS_PER_SLOT = 7
SYMBOLS_PER_SUBFRAME = 14
SUBFRAMES_PER_FRAME = 10
SYMBOLS_PER_FRAME = SYMBOLS_PER_SUBFRAME * SUBFRAMES_PER_FRAME

# 3GPP channel bandwidth -> number of downlink PRBs.
BANDWIDTH_PRB = {1.4: 6, 3.0: 15, 5.0: 25, 10.0: 50, 15.0: 75, 20.0: 100}

# CRS-bearing symbols within a slot for antenna port 0 (normal CP).
CRS_SLOT_SYMBOLS = (0, 4)
PBCH_SYMBOLS = (7, 8, 9, 10)  # slot 1 of subframe 0
SSS_SYMBOL = 5
PSS_SYMBOL = 6
SYNC_SUBFRAMES = (0, 5)


class Channel(Enum):
    PSS_SSS = "PSS_SSS"
    PBCH = "PBCH"
    PDCCH = "PDCCH"
    PCFICH = "PCFICH"
    CRS = "CRS"
    PDSCH = "PDSCH"
    BARRAGE = "BARRAGE"
    # Second-half-frame synchronisation burst (subframe 5).  Kept apart from
    # PSS_SSS so that the PSS_SSS target covers one burst per frame.
    SYNC_REPEAT = "SYNC_REPEAT"
    PHICH = "PHICH"


class Periodicity(Enum):
    SUBFRAME = "Subframe"
    FRAME = "Frame"


class OccupancyConvention(Enum):
    """How REs are counted when forming a channel's per-frame occupancy.

    ``PHYSICAL`` counts every RE the channel occupies in a frame.
    ``ONCE_PER_FRAME`` counts the PCFICH once per frame (16 REs) instead of once
    per subframe, giving 0.16 % at 1.4 MHz instead of 1.59 %.
    """

    PHYSICAL = "Physical"
    ONCE_PER_FRAME = "PaperTable3"


CHANNEL_PERIODICITY = {
    Channel.PSS_SSS: Periodicity.FRAME,
    Channel.SYNC_REPEAT: Periodicity.FRAME,
    Channel.PBCH: Periodicity.FRAME,
    Channel.PDCCH: Periodicity.SUBFRAME,
    Channel.PCFICH: Periodicity.SUBFRAME,
    Channel.PHICH: Periodicity.SUBFRAME,
    Channel.CRS: Periodicity.SUBFRAME,
    Channel.PDSCH: Periodicity.SUBFRAME,
    Channel.BARRAGE: Periodicity.SUBFRAME,
}


@dataclass(frozen=True)
class CellConfig:
    """Static cell parameters that fix the whole grid geometry.

    Parameters
    ----------
    cell_id : int
        Physical cell identity, 0..503.
    bandwidth_mhz : float
        One of 1.4, 3, 5, 10, 15, 20.
    cfi : int
        Control format indicator, 1..3.  For ``n_prb <= 10`` the control
        region spans ``cfi + 1`` OFDM symbols, otherwise ``cfi`` symbols.
    phich_ng : float
        PHICH resource parameter N_g (1/6, 1/2, 1 or 2).
    pdcch_aggregation_level : int
        Aggregation level of the single UE-specific DCI (1, 2, 4 or 8 CCEs).
    """

    cell_id: int = 0
    bandwidth_mhz: float = 1.4
    cfi: int = 3
    phich_ng: float = 1.0
    pdcch_aggregation_level: int = 1
    cp: str = "normal"
    duplex: str = "FDD"
    n_antenna_ports: int = 1

    def __post_init__(self):
        bw = float(self.bandwidth_mhz)
        if bw not in BANDWIDTH_PRB:
            raise ValueError(f"unsupported bandwidth {self.bandwidth_mhz} MHz")
        object.__setattr__(self, "bandwidth_mhz", bw)
        if not 0 <= int(self.cell_id) <= 503 or int(self.cell_id) != self.cell_id:
            raise ValueError(f"cell_id must be in 0..503, got {self.cell_id}")
        if self.cfi not in (1, 2, 3):
            raise ValueError(f"cfi must be 1, 2 or 3, got {self.cfi}")
        if self.phich_ng not in (1 / 6, 0.5, 1.0, 2.0):
            raise ValueError(f"phich_ng must be 1/6, 1/2, 1 or 2, got {self.phich_ng}")
        if self.pdcch_aggregation_level not in (1, 2, 4, 8):
            raise ValueError("pdcch_aggregation_level must be 1, 2, 4 or 8")
        if self.cp != "normal" or self.duplex != "FDD" or self.n_antenna_ports != 1:
            raise ValueError("only normal CP, FDD, single antenna port is supported")
        if _n_cce(self.n_prb, self.cfi, self.cell_id, self.phich_ng) < self.pdcch_aggregation_level:
            raise ValueError("control region too small for the requested aggregation level")

    @property
    def n_prb(self) -> int:
        return BANDWIDTH_PRB[self.bandwidth_mhz]

    @property
    def n_subcarriers(self) -> int:
        return N_SC_PER_PRB * self.n_prb

    @property
    def n_id_1(self) -> int:
        return self.cell_id // 3

    @property
    def n_id_2(self) -> int:
        return self.cell_id % 3


class ReCoordinate(NamedTuple):
    subframe: int
    symbol: int
    subcarrier: int

    @property
    def column(self) -> int:
        return SYMBOLS_PER_SUBFRAME * self.subframe + self.symbol


def grid_dimensions(cfg: CellConfig) -> tuple[int, int, int]:
    """Return ``(n_subcarriers, n_symbols_per_frame, n_re_per_frame)``."""
    n_sc = cfg.n_subcarriers
    return n_sc, SYMBOLS_PER_FRAME, n_sc * SYMBOLS_PER_FRAME


def crs_subcarrier_offset(cell_id: int) -> int:
    """First CRS subcarrier ``k0 = cell_id mod 6``."""
    if not 0 <= cell_id <= 503:
        raise ValueError(f"cell_id must be in 0..503, got {cell_id}")
    return cell_id % 6


def n_control_symbols(n_prb: int, cfi: int) -> int:
    return cfi + 1 if n_prb <= 10 else cfi


def central_subcarriers(cfg: CellConfig, n: int = 72) -> np.ndarray:
    """Indices of the ``n`` subcarriers centred on DC."""
    start = cfg.n_subcarriers // 2 - n // 2
    return np.arange(start, start + n)


def sync_subcarriers(cfg: CellConfig) -> np.ndarray:
    """The 62 subcarriers carrying PSS/SSS, ``k = n - 31 + N_sc/2``."""
    return np.arange(62) - 31 + cfg.n_subcarriers // 2


def crs_subcarriers(cfg: CellConfig, slot_symbol: int) -> np.ndarray:
    """Port-0 CRS subcarriers in a CRS-bearing symbol, in increasing ``m``."""
    if slot_symbol not in CRS_SLOT_SYMBOLS:
        raise ValueError(f"symbol {slot_symbol} carries no CRS")
    nu = 0 if slot_symbol == 0 else 3
    shift = (nu + crs_subcarrier_offset(cfg.cell_id)) % 6
    return 6 * np.arange(2 * cfg.n_prb) + shift


def crs_columns() -> np.ndarray:
    """Frame columns of every CRS-bearing symbol."""
    cols = [14 * sf + 7 * slot + l for sf in range(10) for slot in (0, 1) for l in CRS_SLOT_SYMBOLS]
    return np.array(cols)


# --- control region (REG) layout -------------------------------------------


def _symbol0_reg_starts(n_prb: int) -> np.ndarray:
    # 6-RE REGs; two of the six positions are reserved for ports 0 and 1.
    return 6 * np.arange(2 * n_prb)


def _reg_res(k: int, l: int, cell_id: int) -> tuple[int, int, int, int]:
    if l == 0:
        rs = {(k + j) for j in range(6) if (k + j) % 3 == cell_id % 3}
        return tuple(k + j for j in range(6) if (k + j) not in rs)
    return (k, k + 1, k + 2, k + 3)


def _pcfich_reg_starts(n_prb: int, cell_id: int) -> list[int]:
    n_sc = N_SC_PER_PRB * n_prb
    k_bar = (N_SC_PER_PRB // 2) * (cell_id % (2 * n_prb))
    return [(k_bar + (i * n_prb // 2) * (N_SC_PER_PRB // 2)) % n_sc for i in range(4)]


def _n_phich_groups(n_prb: int, ng: float) -> int:
    return math.ceil(ng * n_prb / 8 - 1e-12)


def _phich_reg_starts(n_prb: int, cell_id: int, ng: float) -> list[int]:
    pcfich = set(_pcfich_reg_starts(n_prb, cell_id))
    free = [k for k in _symbol0_reg_starts(n_prb) if k not in pcfich]
    n0 = len(free)
    starts = []
    for group in range(_n_phich_groups(n_prb, ng)):
        for i in range(3):
            starts.append(free[(cell_id + group + (i * n0) // 3) % n0])
    return starts


def _pdcch_reg_list(n_prb: int, cfi: int, cell_id: int, ng: float) -> list[tuple[int, int]]:
    """PDCCH REGs as ``(symbol, start subcarrier)`` in mapping order.

    The order is time-first within each frequency position, skipping REGs
    taken by PCFICH and PHICH.
    """
    used = set(_pcfich_reg_starts(n_prb, cell_id)) | set(_phich_reg_starts(n_prb, cell_id, ng))
    regs = []
    n_sym = n_control_symbols(n_prb, cfi)
    for k in range(N_SC_PER_PRB * n_prb):
        for l in range(n_sym):
            if l == 0:
                if k % 6 == 0 and k not in used:
                    regs.append((l, k))
            elif k % 4 == 0:
                regs.append((l, k))
    return regs


def _n_cce(n_prb: int, cfi: int, cell_id: int, ng: float) -> int:
    return len(_pdcch_reg_list(n_prb, cfi, cell_id, ng)) // 9


@dataclass(frozen=True, eq=False)
class ControlLayout:
    """RE positions of the control channels within one subframe.

    Arrays hold subcarrier indices ``k`` and in-subframe symbol indices
    ``l``; REG arrays have shape ``(n_reg, 4)``.
    """

    cfi: int
    pcfich_k: np.ndarray
    pcfich_l: np.ndarray
    phich_k: np.ndarray
    phich_l: np.ndarray
    pdcch_k: np.ndarray
    pdcch_l: np.ndarray

    @property
    def n_reg(self) -> int:
        return self.pdcch_k.shape[0]

    @property
    def n_cce(self) -> int:
        return self.n_reg // 9


def _reg_arrays(regs, cell_id):
    k = np.array([_reg_res(start, l, cell_id) for l, start in regs], dtype=np.int64).reshape(-1, 4)
    l = np.array([[l] * 4 for l, _ in regs], dtype=np.int64).reshape(-1, 4)
    return k, l


@lru_cache(maxsize=None)
def control_layout(cfg: CellConfig, cfi: int | None = None) -> ControlLayout:
    cfi = cfg.cfi if cfi is None else cfi
    n_prb, cid = cfg.n_prb, cfg.cell_id
    pcfich_k, pcfich_l = _reg_arrays([(0, k) for k in _pcfich_reg_starts(n_prb, cid)], cid)
    phich_k, phich_l = _reg_arrays([(0, k) for k in _phich_reg_starts(n_prb, cid, cfg.phich_ng)], cid)
    pdcch_k, pdcch_l = _reg_arrays(_pdcch_reg_list(n_prb, cfi, cid, cfg.phich_ng), cid)
    for a in (pcfich_k, pcfich_l, phich_k, phich_l, pdcch_k, pdcch_l):
        a.setflags(write=False)
    return ControlLayout(cfi, pcfich_k, pcfich_l, phich_k, phich_l, pdcch_k, pdcch_l)


@lru_cache(maxsize=None)
def pbch_res(cfg: CellConfig) -> tuple[np.ndarray, np.ndarray]:
    """PBCH ``(k, column)`` arrays in mapping order (frequency first).

    REs at RS positions of ports 0-3 are skipped whatever the port count.
    """
    ks, cols = [], []
    k0 = crs_subcarrier_offset(cfg.cell_id)
    for col in PBCH_SYMBOLS:
        for k in central_subcarriers(cfg):
            if col in (7, 8) and k % 3 == k0 % 3:
                continue
            ks.append(k)
            cols.append(col)
    k_arr, c_arr = np.array(ks), np.array(cols)
    k_arr.setflags(write=False)
    c_arr.setflags(write=False)
    return k_arr, c_arr


# --- channel masks ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ChannelMask:
    """Set of REs one channel occupies in one frame.

    ``array`` is a read-only boolean grid; ``coordinates`` gives the same set
    as :class:`ReCoordinate` items.
    """

    channel: Channel
    cfg: CellConfig
    array: np.ndarray
    periodicity: Periodicity

    def __post_init__(self):
        n_sc, n_sym, _ = grid_dimensions(self.cfg)
        if self.array.shape != (n_sc, n_sym) or self.array.dtype != bool:
            raise ValueError("mask array does not match the cell grid")
        self.array.setflags(write=False)

    @property
    def n_re(self) -> int:
        return int(self.array.sum())

    def __len__(self) -> int:
        return self.n_re

    def __contains__(self, re: ReCoordinate) -> bool:
        return bool(self.array[re.subcarrier, re.column])

    @property
    def coordinates(self) -> FrozenSet[ReCoordinate]:
        ks, cols = np.nonzero(self.array)
        return frozenset(ReCoordinate(int(c) // 14, int(c) % 14, int(k)) for k, c in zip(ks, cols))


def mask_from_coordinates(channel: Channel, coords, cfg: CellConfig) -> ChannelMask:
    n_sc, n_sym, _ = grid_dimensions(cfg)
    arr = np.zeros((n_sc, n_sym), dtype=bool)
    for re in coords:
        re = ReCoordinate(*re)
        if not (0 <= re.subframe < 10 and 0 <= re.symbol < 14 and 0 <= re.subcarrier < n_sc):
            raise ValueError(f"{re} outside the grid")
        arr[re.subcarrier, re.column] = True
    return ChannelMask(channel, cfg, arr, CHANNEL_PERIODICITY.get(channel, Periodicity.SUBFRAME))


def _sync_mask(cfg: CellConfig, subframes) -> np.ndarray:
    n_sc, n_sym, _ = grid_dimensions(cfg)
    arr = np.zeros((n_sc, n_sym), dtype=bool)
    ks = sync_subcarriers(cfg)
    for sf in subframes:
        arr[ks, 14 * sf + SSS_SYMBOL] = True
        arr[ks, 14 * sf + PSS_SYMBOL] = True
    return arr


def reserved_mask(cfg: CellConfig) -> np.ndarray:
    """REs that carry nothing: unused RS positions and sync guard bands."""
    n_sc, n_sym, _ = grid_dimensions(cfg)
    arr = np.zeros((n_sc, n_sym), dtype=bool)
    k0 = crs_subcarrier_offset(cfg.cell_id)
    port1 = np.arange(n_sc)[np.arange(n_sc) % 6 == (k0 + 3) % 6]
    for sf in range(SUBFRAMES_PER_FRAME):
        arr[port1, 14 * sf] = True
    centre = central_subcarriers(cfg)
    rs = centre[centre % 3 == k0 % 3]
    arr[rs, 7] = True
    arr[rs, 8] = True
    guard = np.setdiff1d(centre, sync_subcarriers(cfg))
    for sf in SYNC_SUBFRAMES:
        arr[guard, 14 * sf + SSS_SYMBOL] = True
        arr[guard, 14 * sf + PSS_SYMBOL] = True
    arr &= ~_crs_mask(cfg)
    return arr


def _crs_mask(cfg: CellConfig) -> np.ndarray:
    n_sc, n_sym, _ = grid_dimensions(cfg)
    arr = np.zeros((n_sc, n_sym), dtype=bool)
    for col in crs_columns():
        arr[crs_subcarriers(cfg, (col % 14) % 7), col] = True
    return arr


def _control_mask(cfg: CellConfig, which: str) -> np.ndarray:
    n_sc, n_sym, _ = grid_dimensions(cfg)
    arr = np.zeros((n_sc, n_sym), dtype=bool)
    lay = control_layout(cfg)
    k, l = getattr(lay, which + "_k"), getattr(lay, which + "_l")
    for sf in range(SUBFRAMES_PER_FRAME):
        arr[k.ravel(), 14 * sf + l.ravel()] = True
    return arr


@lru_cache(maxsize=None)
def build_channel_mask(channel: Channel, cfg: CellConfig) -> ChannelMask:
    """Every RE ``channel`` occupies in one frame of ``cfg``."""
    if not isinstance(channel, Channel):
        raise ValueError(f"unsupported channel {channel!r}")
    n_sc, n_sym, _ = grid_dimensions(cfg)
    if channel is Channel.BARRAGE:
        arr = np.ones((n_sc, n_sym), dtype=bool)
    elif channel is Channel.CRS:
        arr = _crs_mask(cfg)
    elif channel is Channel.PSS_SSS:
        arr = _sync_mask(cfg, (0,))
    elif channel is Channel.SYNC_REPEAT:
        arr = _sync_mask(cfg, (5,))
    elif channel is Channel.PBCH:
        arr = np.zeros((n_sc, n_sym), dtype=bool)
        k, c = pbch_res(cfg)
        arr[k, c] = True
    elif channel is Channel.PCFICH:
        arr = _control_mask(cfg, "pcfich")
    elif channel is Channel.PHICH:
        arr = _control_mask(cfg, "phich")
    elif channel is Channel.PDCCH:
        arr = _control_mask(cfg, "pdcch")
    else:  # PDSCH
        arr = ~reserved_mask(cfg)
        for other in Channel:
            if other not in (Channel.PDSCH, Channel.BARRAGE):
                arr &= ~build_channel_mask(other, cfg).array
    return ChannelMask(channel, cfg, arr, CHANNEL_PERIODICITY[channel])


def occupancy_fraction(
    mask: ChannelMask,
    cfg: CellConfig,
    convention: OccupancyConvention = OccupancyConvention.PHYSICAL,
) -> float:
    """Fraction of the frame's REs covered by ``mask``."""
    if mask.cfg != cfg:
        raise ValueError("mask was built for a different cell configuration")
    n_re = mask.n_re
    if convention is OccupancyConvention.ONCE_PER_FRAME and mask.channel is Channel.PCFICH:
        n_re //= SUBFRAMES_PER_FRAME
    return n_re / grid_dimensions(cfg)[2]
