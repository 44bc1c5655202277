"""JSR bookkeeping, error rates and denial-of-service thresholds.

All quantities are in dB.  ``rho`` is the power of a target channel's RE
relative to a PDSCH RE.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .cell_model import CellConfig, OccupancyConvention, build_channel_mask, occupancy_fraction
from .interference import TARGET_CHANNEL, Strategy

BANDWIDTHS_MHZ = (1.4, 3.0, 5.0, 10.0, 15.0, 20.0)
REFERENCE_BANDWIDTH_MHZ = 1.4

# Strategies whose target keeps the same RE count at every bandwidth.
FIXED_RE_STRATEGIES = frozenset({Strategy.PSS_SSS, Strategy.PBCH, Strategy.PCFICH})
FULL_BAND_STRATEGIES = frozenset({Strategy.CRS, Strategy.PDCCH, Strategy.BARRAGE})

DEFAULT_STRATEGIES = (
    Strategy.BARRAGE,
    Strategy.PSS_SSS,
    Strategy.PDCCH,
    Strategy.PBCH,
    Strategy.PCFICH,
    Strategy.CRS,
)

# Measured eNB power offsets of each target relative to the PDSCH.
RHO_PDSCH_DB = {
    Strategy.BARRAGE: 0.0,
    Strategy.PSS_SSS: -5.0,
    Strategy.PDCCH: -5.0,
    Strategy.PBCH: -2.0,
    Strategy.PCFICH: -8.0,
    Strategy.CRS: -10.0,
}


class Complexity(Enum):
    VERY_LOW = "VeryLow"
    LOW = "Low"
    MEDIUM = "Medium"
    HIGH = "High"


COMPLEXITY = {
    Strategy.BARRAGE: Complexity.VERY_LOW,
    Strategy.PSS_SSS: Complexity.MEDIUM,
    Strategy.PDCCH: Complexity.MEDIUM,
    Strategy.PBCH: Complexity.LOW,
    Strategy.PCFICH: Complexity.HIGH,
    Strategy.CRS: Complexity.HIGH,
}

# Reference 1.4 MHz JSR_N at denial of service, the input to bandwidth scaling.
REFERENCE_JSR_N_DOS_DB = {
    Strategy.BARRAGE: -10.0,
    Strategy.PSS_SSS: 5.0,
    Strategy.PDCCH: -16.0,
    Strategy.PBCH: -3.0,
    Strategy.PCFICH: -19.0,
    Strategy.CRS: -26.0,
}


@dataclass(frozen=True)
class MetricsPoint:
    jsr_re_db: float
    jsr_f_db: float
    rho_pdsch_db: float
    jsr_n_db: float
    p_err: float
    n_err: int
    n_trial: int


@dataclass(frozen=True)
class DosAssessment:
    strategy: Strategy
    p_err_threshold: float
    jsr_n_dos_db: float | None
    complexity_label: Complexity
    fraction: float = float("nan")

    def __post_init__(self):
        if not 0 < self.p_err_threshold < 1:
            raise ValueError("p_err_threshold must lie in (0, 1)")

    @property
    def reached(self) -> bool:
        return self.jsr_n_dos_db is not None


def jsr_f(jsr_re_db: float, n_tf: float, n_totf: float) -> float:
    """Frame-normalised JSR: ``jsr_re_db + 10 log10(n_tf / n_totf)``."""
    if not 0 < n_tf <= n_totf:
        raise ValueError(f"need 0 < n_tf <= n_totf, got {n_tf}, {n_totf}")
    return jsr_re_db + 10 * math.log10(n_tf / n_totf)


def jsr_n(jsr_f_db: float, rho_pdsch_db: float) -> float:
    return jsr_f_db + rho_pdsch_db


def error_rate(n_err: int, n_trial: int) -> float:
    if n_trial <= 0:
        raise ValueError("n_trial must be positive")
    if not 0 <= n_err <= n_trial:
        raise ValueError(f"n_err must be in 0..{n_trial}, got {n_err}")
    return n_err / n_trial


def metrics_point(jsr_re_db: float, fraction: float, rho_pdsch_db: float, n_err: int, n_trial: int) -> MetricsPoint:
    f_db = jsr_f(jsr_re_db, fraction, 1.0)
    return MetricsPoint(
        jsr_re_db=float(jsr_re_db),
        jsr_f_db=f_db,
        rho_pdsch_db=float(rho_pdsch_db),
        jsr_n_db=jsr_n(f_db, rho_pdsch_db),
        p_err=error_rate(n_err, n_trial),
        n_err=int(n_err),
        n_trial=int(n_trial),
    )


def dos_threshold(curve: Sequence[MetricsPoint], p_err_th: float) -> float | None:
    """JSR_N at which the error rate first reaches ``p_err_th``.

    The crossing is interpolated linearly between the bracketing points.
    Returns None when the curve never reaches the threshold.

    Raises
    ------
    ValueError
        If the curve is empty, not sorted by ``jsr_n_db`` or the threshold is
        outside (0, 1).
    """
    if not curve:
        raise ValueError("curve is empty")
    if not 0 < p_err_th < 1:
        raise ValueError("p_err_th must lie in (0, 1)")
    x = [p.jsr_n_db for p in curve]
    if any(b < a for a, b in zip(x, x[1:])):
        raise ValueError("curve must be sorted by jsr_n_db")
    for i, p in enumerate(curve):
        if p.p_err >= p_err_th:
            if i == 0:
                return p.jsr_n_db
            q = curve[i - 1]
            t = (p_err_th - q.p_err) / (p.p_err - q.p_err)
            return q.jsr_n_db + t * (p.jsr_n_db - q.jsr_n_db)
    return None


def scale_jsr_to_bandwidth(jsr_n_dos_1_4_db: float, bw_mhz: float, strategy) -> float:
    """Required JSR_N at ``bw_mhz`` for a fixed-RE target.

    A fixed number of target REs is a shrinking share of a wider grid, so
    the frame-normalised JSR falls by ``10 log10(bw / 1.4)``.
    """
    strategy = Strategy(strategy)
    if strategy not in FIXED_RE_STRATEGIES:
        raise ValueError(f"{strategy.value} must occupy the whole band; its threshold does not scale")
    bw = float(bw_mhz)
    if bw not in BANDWIDTHS_MHZ:
        raise ValueError(f"unsupported bandwidth {bw_mhz} MHz")
    return jsr_n_dos_1_4_db - 10 * math.log10(bw / REFERENCE_BANDWIDTH_MHZ)


def jsr_at_bandwidth(jsr_n_dos_1_4_db: float, bw_mhz: float, strategy) -> float:
    """Scale fixed-RE strategies; full-band strategies pass through unchanged."""
    strategy = Strategy(strategy)
    if strategy in FIXED_RE_STRATEGIES:
        return scale_jsr_to_bandwidth(jsr_n_dos_1_4_db, bw_mhz, strategy)
    if float(bw_mhz) not in BANDWIDTHS_MHZ:
        raise ValueError(f"unsupported bandwidth {bw_mhz} MHz")
    return jsr_n_dos_1_4_db


def default_thresholds() -> dict[Strategy, float]:
    return {
        Strategy.BARRAGE: 0.1,
        Strategy.PSS_SSS: 0.5,
        Strategy.PDCCH: 0.1,
        Strategy.PBCH: 0.9,
        Strategy.PCFICH: 0.1,
        Strategy.CRS: 0.1,
    }


def strategy_fraction(
    strategy,
    cfg: CellConfig,
    convention: OccupancyConvention = OccupancyConvention.PHYSICAL,
) -> float:
    """Share of the frame's REs the strategy jams (N_T,F / N_tot,F)."""
    strategy = Strategy(strategy)
    if strategy not in TARGET_CHANNEL:
        raise ValueError(f"no target channel for {strategy.value}")
    mask = build_channel_mask(TARGET_CHANNEL[strategy], cfg)
    return occupancy_fraction(mask, cfg, OccupancyConvention(convention))


def bandwidth_curves(
    jsr_n_dos_1_4: Mapping[Strategy, float],
    bandwidths: Iterable[float] = BANDWIDTHS_MHZ,
) -> dict[Strategy, dict[float, float]]:
    bandwidths = tuple(float(b) for b in bandwidths)
    return {
        Strategy(s): {bw: jsr_at_bandwidth(v, bw, s) for bw in bandwidths}
        for s, v in jsr_n_dos_1_4.items()
    }


def bandwidth_conclusions(curves: Mapping[Strategy, Mapping[float, float]]) -> dict[str, bool]:
    """Qualitative comparisons between strategies across bandwidths.

    a: PSS/SSS never beats barrage jamming.
    b: PBCH beats barrage exactly for bandwidths of 10 MHz and up.
    c: PCFICH beats CRS exactly for bandwidths of 10 MHz and up.
    d: CRS beats PDCCH at every bandwidth.
    """
    c = {Strategy(k): v for k, v in curves.items()}
    bws = sorted(c[Strategy.BARRAGE])
    pss, pbch, pcfich = c[Strategy.PSS_SSS], c[Strategy.PBCH], c[Strategy.PCFICH]
    barrage, crs, pdcch = c[Strategy.BARRAGE], c[Strategy.CRS], c[Strategy.PDCCH]
    return {
        "a": all(pss[b] >= barrage[b] for b in bws),
        "b": all((pbch[b] < barrage[b]) == (b >= 10) for b in bws),
        "c": all((pcfich[b] < crs[b]) == (b >= 10) for b in bws),
        "d": all(crs[b] < pdcch[b] for b in bws),
    }
