"""Monte Carlo sweeps of jamming strategies and result emission."""

from __future__ import annotations

import configparser
import csv
import hashlib
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cell_model import Channel, CellConfig, CHANNEL_PERIODICITY, OccupancyConvention, Periodicity
from .interference import TARGET_CHANNEL, JammerProfile, Strategy, SyncMode, make_jammer_waveform, mix_at_jsr
from .metrics import (
    BANDWIDTHS_MHZ,
    COMPLEXITY,
    RHO_PDSCH_DB,
    DEFAULT_STRATEGIES,
    DosAssessment,
    MetricsPoint,
    bandwidth_conclusions,
    bandwidth_curves,
    default_thresholds,
    dos_threshold,
    metrics_point,
    strategy_fraction,
)
from .ofdm import ofdm_modulate
from .receiver import evaluate_strategy_flag, receive_frames
from .tx import PowerProfile, build_frame, random_payload

CSV_COLUMNS = ("strategy", "jsr_re_db", "jsr_f_db", "rho_pdsch_db", "jsr_n_db", "n_err", "n_trial", "p_err")
BATCH_FRAMES = 50
_STRATEGY_CODE = {s: i for i, s in enumerate(Strategy)}


class SpecError(ValueError):
    """An experiment spec is malformed or violates its invariants."""


@dataclass(frozen=True)
class ExperimentSpec:
    cfg: CellConfig = field(default_factory=CellConfig)
    strategies: tuple[Strategy, ...] = DEFAULT_STRATEGIES
    jsr_start_db: float = -30.0
    jsr_stop_db: float = 40.0
    jsr_step_db: float = 2.0
    n_trial: int = 1000
    rng_seed: int = 1
    noise_floor_db: float = -30.0
    timing_offset_samples: int = 0
    occupancy_convention: OccupancyConvention = OccupancyConvention.PHYSICAL
    power_profile: str = "measured"
    output_dir: str = "results"
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "strategies", tuple(Strategy(s) for s in self.strategies))
        object.__setattr__(self, "occupancy_convention", OccupancyConvention(self.occupancy_convention))
        if not self.strategies:
            raise SpecError("at least one strategy is required")
        unknown = [s for s in self.strategies if s not in TARGET_CHANNEL]
        if unknown:
            raise SpecError(f"strategies without a target channel: {[s.value for s in unknown]}")
        if self.n_trial < 1:
            raise SpecError("n_trial must be at least 1")
        if not self.jsr_step_db > 0:
            raise SpecError("jsr_step_db must be positive")
        if not self.jsr_start_db < self.jsr_stop_db:
            raise SpecError("jsr_start_db must be below jsr_stop_db")
        if not 0 <= self.rng_seed < 2**64:
            raise SpecError("rng_seed must be a 64-bit unsigned integer")
        if self.power_profile not in ("measured", "uniform"):
            raise SpecError("power_profile must be 'measured' or 'uniform'")
        if self.workers < 1:
            raise SpecError("workers must be at least 1")

    @property
    def jsr_points(self) -> np.ndarray:
        n = int(math.floor((self.jsr_stop_db - self.jsr_start_db) / self.jsr_step_db + 1e-9)) + 1
        return np.round(self.jsr_start_db + self.jsr_step_db * np.arange(n), 10)

    @property
    def power(self) -> PowerProfile:
        return PowerProfile.measured() if self.power_profile == "measured" else PowerProfile.uniform()

    def to_dict(self) -> dict:
        return {
            "cell_id": self.cfg.cell_id,
            "bandwidth_mhz": self.cfg.bandwidth_mhz,
            "cfi": self.cfg.cfi,
            "pdcch_aggregation_level": self.cfg.pdcch_aggregation_level,
            "strategies": ",".join(s.value for s in self.strategies),
            "jsr_start_db": self.jsr_start_db,
            "jsr_stop_db": self.jsr_stop_db,
            "jsr_step_db": self.jsr_step_db,
            "n_trial": self.n_trial,
            "rng_seed": self.rng_seed,
            "noise_floor_db": self.noise_floor_db,
            "timing_offset_samples": self.timing_offset_samples,
            "occupancy_convention": self.occupancy_convention.value,
            "power_profile": self.power_profile,
            "output_dir": self.output_dir,
        }

    def digest(self) -> str:
        d = self.to_dict()
        d.pop("output_dir")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()


_INT_KEYS = {"cell_id", "cfi", "pdcch_aggregation_level", "n_trial", "rng_seed", "timing_offset_samples", "workers"}
_FLOAT_KEYS = {"bandwidth_mhz", "jsr_start_db", "jsr_stop_db", "jsr_step_db", "noise_floor_db"}
_STR_KEYS = {"strategies", "occupancy_convention", "power_profile", "output_dir"}
_CFG_KEYS = {"cell_id", "bandwidth_mhz", "cfi", "pdcch_aggregation_level"}


def parse_spec_text(text: str) -> ExperimentSpec:
    """Parse ``key = value`` lines (``#`` comments allowed) into a spec.

    Keys left out keep the defaults of :class:`ExperimentSpec`.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    try:
        parser.read_string("[spec]\n" + text)
    except configparser.Error as exc:
        raise SpecError(f"cannot parse spec: {exc}") from exc
    raw = dict(parser["spec"])
    unknown = set(raw) - _INT_KEYS - _FLOAT_KEYS - _STR_KEYS
    if unknown:
        raise SpecError(f"unknown spec keys: {sorted(unknown)}")
    values: dict = {}
    try:
        for key, value in raw.items():
            if key in _INT_KEYS:
                values[key] = int(value, 0)
            elif key in _FLOAT_KEYS:
                values[key] = float(value)
            elif key == "strategies":
                values[key] = tuple(Strategy(v.strip()) for v in value.split(",") if v.strip())
            else:
                values[key] = value.strip()
        cfg = CellConfig(**{k: values.pop(k) for k in list(values) if k in _CFG_KEYS})
        return ExperimentSpec(cfg=cfg, **values)
    except SpecError:
        raise
    except (ValueError, TypeError) as exc:
        raise SpecError(str(exc)) from exc


def load_spec(path) -> ExperimentSpec:
    return parse_spec_text(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    spec: ExperimentSpec
    points: dict[Strategy, tuple[MetricsPoint, ...]]
    assessments: dict[Strategy, DosAssessment]

    @property
    def provenance(self) -> dict:
        return {"spec_sha256": self.spec.digest(), "rng_seed": self.spec.rng_seed, "spec": self.spec.to_dict()}


# --- trial engine -----------------------------------------------------------


def trial_unit(strategy: Strategy) -> Periodicity:
    """Frame trials for frame-periodic targets, subframe trials otherwise."""
    return CHANNEL_PERIODICITY[TARGET_CHANNEL[Strategy(strategy)]]


def jammer_profile(strategy: Strategy, jsr_re_db: float, timing_offset: int = 0) -> JammerProfile:
    mode = SyncMode.ASYNCHRONOUS if strategy is Strategy.BARRAGE else SyncMode.SYNCHRONOUS
    return JammerProfile(strategy, mode, jsr_re_db, timing_offset_samples=timing_offset)


def jammer_level_db(strategy: Strategy, jsr_re_db: float, power: PowerProfile) -> float:
    """Jammer RE power relative to a PDSCH RE.

    ``jsr_re_db`` is measured against the target channel's own RE power, so
    the target's power offset is added back.
    """
    channel = TARGET_CHANNEL[strategy]
    return jsr_re_db + (0.0 if channel is Channel.BARRAGE else power.rho_db[channel])


def frame_rng(seed: int, strategy: Strategy, jsr_index: int, frame_index: int) -> np.random.Generator:
    return np.random.default_rng([seed, _STRATEGY_CODE[strategy], jsr_index, frame_index])


def simulate_frames(spec: ExperimentSpec, strategy: Strategy, jsr_index: int, frame_indices) -> list:
    """Generate, jam and receive the given frames; one report per frame."""
    cfg, power = spec.cfg, spec.power
    jsr_re = float(spec.jsr_points[jsr_index])
    profile = jammer_profile(strategy, jsr_re, spec.timing_offset_samples)
    level = jammer_level_db(strategy, jsr_re, power)
    payloads, rx = [], []
    for f in frame_indices:
        rng = frame_rng(spec.rng_seed, strategy, jsr_index, int(f))
        payload = random_payload(cfg, rng)
        x = ofdm_modulate(build_frame(cfg, payload, power))
        jam = make_jammer_waveform(profile, cfg, rng)
        rx.append(mix_at_jsr(x, jam, level, spec.noise_floor_db, rng))
        payloads.append(payload)
    return receive_frames(np.stack(rx), cfg, payloads, power)


def count_errors(spec: ExperimentSpec, strategy: Strategy, jsr_index: int) -> tuple[int, int]:
    """``(n_err, n_trial)`` for one strategy at one sweep point."""
    per_frame = 1 if trial_unit(strategy) is Periodicity.FRAME else 10
    n_frames = -(-spec.n_trial // per_frame)
    n_err = 0
    trials_left = spec.n_trial
    for lo in range(0, n_frames, BATCH_FRAMES):
        frames = range(lo, min(lo + BATCH_FRAMES, n_frames))
        for report in simulate_frames(spec, strategy, jsr_index, frames):
            if per_frame == 1:
                flags = [report.frame_flags]
            else:
                flags = [report.subframe_flags(s) for s in range(min(10, trials_left))]
            n_err += sum(evaluate_strategy_flag(fl, strategy) for fl in flags)
            trials_left -= len(flags)
    return n_err, spec.n_trial


def _count_task(args):
    spec, strategy, jsr_index = args
    return count_errors(spec, strategy, jsr_index)


def run_experiment(spec: ExperimentSpec, progress=None) -> ExperimentResult:
    """Sweep every strategy over the JSR points of ``spec``.

    The outcome depends only on the spec: every frame draws from its own
    random stream keyed by (seed, strategy, JSR index, frame index), so work
    can be split across processes without changing the counts.
    """
    tasks = [(spec, s, j) for s in spec.strategies for j in range(len(spec.jsr_points))]
    if spec.workers > 1:
        with ProcessPoolExecutor(spec.workers) as pool:
            counts = list(pool.map(_count_task, tasks))
    else:
        counts = []
        for t in tasks:
            counts.append(_count_task(t))
            if progress is not None:
                progress(t[1], float(spec.jsr_points[t[2]]), counts[-1])
    thresholds = default_thresholds()
    points, assessments = {}, {}
    it = iter(counts)
    for s in spec.strategies:
        frac = strategy_fraction(s, spec.cfg, spec.occupancy_convention)
        rho = RHO_PDSCH_DB[s]
        curve = tuple(metrics_point(j, frac, rho, *next(it)) for j in spec.jsr_points)
        points[s] = curve
        assessments[s] = DosAssessment(s, thresholds[s], dos_threshold(curve, thresholds[s]), COMPLEXITY[s], frac)
    return ExperimentResult(spec, points, assessments)


# --- output -----------------------------------------------------------------


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def results_csv(result: ExperimentResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for s, curve in result.points.items():
        for p in curve:
            w.writerow([s.value, _fmt(p.jsr_re_db), _fmt(p.jsr_f_db), _fmt(p.rho_pdsch_db), _fmt(p.jsr_n_db), p.n_err, p.n_trial, _fmt(p.p_err)])
    return buf.getvalue()


def summary_csv(result: ExperimentResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("strategy", "fraction", "p_err_th", "jsr_n_dos", "complexity"))
    for s, a in result.assessments.items():
        dos = "not_reached" if a.jsr_n_dos_db is None else _fmt(a.jsr_n_dos_db)
        w.writerow([s.value, _fmt(a.fraction), a.p_err_threshold, dos, a.complexity_label.value])
    return buf.getvalue()


def bandwidth_csv(curves) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    bws = sorted({bw for c in curves.values() for bw in c})
    w.writerow(["strategy"] + [f"{bw:g}" for bw in bws])
    for s, c in curves.items():
        w.writerow([Strategy(s).value] + [_fmt(c[bw]) for bw in bws])
    return buf.getvalue()


def bandwidth_analysis(thresholds_1_4, bandwidths=BANDWIDTHS_MHZ):
    """Per-strategy JSR_N,DoS versus bandwidth, plus the ordering checks.

    Returns ``(curves, conclusions)``; see :func:`metrics.bandwidth_conclusions`.
    """
    curves = bandwidth_curves(thresholds_1_4, bandwidths)
    needed = {Strategy.BARRAGE, Strategy.PSS_SSS, Strategy.PBCH, Strategy.PCFICH, Strategy.CRS, Strategy.PDCCH}
    conclusions = bandwidth_conclusions(curves) if needed <= set(curves) else {}
    return curves, conclusions


def _check_writable(out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    probe = out / ".write_probe"
    probe.write_text("")
    probe.unlink()


def emit_results(result: ExperimentResult, fmt: str = "csv", output_dir=None) -> list[Path]:
    """Write results, summary, bandwidth table, provenance and plots.

    ``fmt`` is ``"csv"`` or ``"csv+plots"``.
    """
    if fmt not in ("csv", "csv+plots"):
        raise ValueError(f"unsupported output format {fmt!r}")
    out = Path(result.spec.output_dir if output_dir is None else output_dir)
    _check_writable(out)
    files = {
        "results.csv": results_csv(result),
        "summary.csv": summary_csv(result),
        "provenance.json": json.dumps(result.provenance, indent=2, sort_keys=True) + "\n",
    }
    reached = {s: a.jsr_n_dos_db for s, a in result.assessments.items() if a.reached}
    curves, _ = bandwidth_analysis(reached)
    files["bandwidth.csv"] = bandwidth_csv(curves)
    written = []
    for name, text in files.items():
        p = out / name
        p.write_text(text, encoding="utf-8")
        written.append(p)
    if fmt == "csv+plots":
        from .plots import plot_bandwidth, plot_error_rates

        written.append(plot_error_rates(result, out / "error_rate_vs_jsr.png"))
        written.append(plot_bandwidth(curves, out / "jsr_vs_bandwidth.png"))
    return written
