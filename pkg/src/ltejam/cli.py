"""Command line entry point: ``ltejam run | scale | export-iq``."""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from .cell_model import CellConfig
from .experiment import (
    SpecError,
    _check_writable,
    bandwidth_analysis,
    bandwidth_csv,
    emit_results,
    jammer_level_db,
    jammer_profile,
    load_spec,
    run_experiment,
)
from .interference import Strategy, make_jammer_waveform, mix_at_jsr
from .iq import write_iq
from .metrics import BANDWIDTHS_MHZ
from .ofdm import ofdm_modulate, sample_rate
from .tx import PowerProfile, build_frame, random_payload

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_SPEC = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ltejam", description="LTE downlink jamming vulnerability simulator")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run a Monte Carlo sweep from a spec file")
    run.add_argument("spec", help="key = value spec file")
    run.add_argument("--format", default="csv+plots", choices=("csv", "csv+plots"))
    run.add_argument("--output-dir", help="overrides output_dir from the spec")
    run.add_argument("--quiet", action="store_true")

    scale = sub.add_parser("scale", help="scale 1.4 MHz DoS thresholds to other bandwidths")
    scale.add_argument("table", help="CSV with 'strategy' and 'jsr_n_dos' columns")
    scale.add_argument("--bandwidths", default=",".join(f"{b:g}" for b in BANDWIDTHS_MHZ))
    scale.add_argument("--output", help="write the curves here instead of stdout")

    iq = sub.add_parser("export-iq", help="write modulated frames as float32 I/Q")
    iq.add_argument("output")
    iq.add_argument("--bandwidth", type=float, default=1.4)
    iq.add_argument("--cell-id", type=int, default=0)
    iq.add_argument("--frames", type=int, default=1)
    iq.add_argument("--seed", type=int, default=0)
    iq.add_argument("--jammer", choices=[s.value for s in Strategy][:6], help="add this jammer")
    iq.add_argument("--jsr", type=float, default=0.0, help="jammer JSR_RE in dB")
    iq.add_argument("--jammer-only", action="store_true", help="write the jammer waveform alone")
    return p


def _read_table(path: str) -> dict[Strategy, float]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    out = {}
    for row in rows:
        value = row["jsr_n_dos"].strip()
        if value and value != "not_reached":
            out[Strategy(row["strategy"].strip())] = float(value)
    return out


def _cmd_run(args) -> int:
    try:
        spec = load_spec(args.spec)
    except OSError as exc:
        print(f"ltejam: cannot read spec: {exc}", file=sys.stderr)
        return EXIT_IO
    except SpecError as exc:
        print(f"ltejam: invalid spec: {exc}", file=sys.stderr)
        return EXIT_SPEC
    out = Path(args.output_dir or spec.output_dir)
    try:
        _check_writable(out)
    except OSError as exc:
        print(f"ltejam: output directory not writable: {exc}", file=sys.stderr)
        return EXIT_IO

    def progress(strategy, jsr, counts):
        print(f"{strategy.value:>8} JSR_RE {jsr:+6.1f} dB  {counts[0]}/{counts[1]}", file=sys.stderr)

    result = run_experiment(spec, progress=None if args.quiet else progress)
    try:
        files = emit_results(result, args.format, out)
    except OSError as exc:
        print(f"ltejam: cannot write results: {exc}", file=sys.stderr)
        return EXIT_IO
    for f in files:
        print(f)
    return EXIT_OK


def _cmd_scale(args) -> int:
    try:
        bws = [float(b) for b in args.bandwidths.split(",") if b.strip()]
    except ValueError:
        print("ltejam: --bandwidths must be a comma-separated list of numbers", file=sys.stderr)
        return EXIT_USAGE
    try:
        table = _read_table(args.table)
    except OSError as exc:
        print(f"ltejam: cannot read table: {exc}", file=sys.stderr)
        return EXIT_IO
    except (KeyError, ValueError) as exc:
        print(f"ltejam: malformed table: {exc}", file=sys.stderr)
        return EXIT_SPEC
    try:
        curves, conclusions = bandwidth_analysis(table, bws)
    except ValueError as exc:
        print(f"ltejam: {exc}", file=sys.stderr)
        return EXIT_SPEC
    text = bandwidth_csv(curves)
    if args.output:
        try:
            Path(args.output).write_text(text, encoding="utf-8")
        except OSError as exc:
            print(f"ltejam: cannot write output: {exc}", file=sys.stderr)
            return EXIT_IO
    else:
        sys.stdout.write(text)
    for key, ok in conclusions.items():
        print(f"conclusion ({key}): {'holds' if ok else 'fails'}", file=sys.stderr)
    return EXIT_OK


def _cmd_export_iq(args) -> int:
    try:
        cfg = CellConfig(cell_id=args.cell_id, bandwidth_mhz=args.bandwidth)
    except ValueError as exc:
        print(f"ltejam: {exc}", file=sys.stderr)
        return EXIT_SPEC
    if args.frames < 1:
        print("ltejam: --frames must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    rng = np.random.default_rng(args.seed)
    power = PowerProfile.measured()
    chunks = []
    for _ in range(args.frames):
        x = ofdm_modulate(build_frame(cfg, random_payload(cfg, rng), power))
        if args.jammer:
            s = Strategy(args.jammer)
            jam = make_jammer_waveform(jammer_profile(s, args.jsr), cfg, rng)
            level = 10 ** (jammer_level_db(s, args.jsr, power) / 20)
            x = level * jam if args.jammer_only else mix_at_jsr(x, jam, jammer_level_db(s, args.jsr, power), -300.0, rng)
        chunks.append(x)
    try:
        n = write_iq(args.output, np.concatenate(chunks))
    except OSError as exc:
        print(f"ltejam: cannot write IQ file: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"{args.output}: {n} samples at {sample_rate(cfg) / 1e6:g} MS/s, interleaved float32 LE I/Q")
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handler = {"run": _cmd_run, "scale": _cmd_scale, "export-iq": _cmd_export_iq}[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
