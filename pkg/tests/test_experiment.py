import csv
import io
import json

import numpy as np
import pytest

from ltejam.cell_model import CellConfig
from ltejam.cli import main
from ltejam.experiment import (
    CSV_COLUMNS,
    ExperimentSpec,
    SpecError,
    emit_results,
    frame_rng,
    jammer_level_db,
    parse_spec_text,
    results_csv,
    run_experiment,
    summary_csv,
)
from ltejam.interference import Strategy
from ltejam.iq import read_iq
from ltejam.ofdm import frame_length
from ltejam.tx import PowerProfile

SMALL = """
# quick sweep
strategies = Pcfich, Barrage
jsr_start_db = -10
jsr_stop_db = 10
jsr_step_db = 10
n_trial = 20
rng_seed = 7
"""


def test_parse_spec():
    spec = parse_spec_text(SMALL + "cell_id = 5\nbandwidth_mhz = 3\n")
    assert spec.strategies == (Strategy.PCFICH, Strategy.BARRAGE)
    assert spec.cfg == CellConfig(cell_id=5, bandwidth_mhz=3)
    assert list(spec.jsr_points) == [-10, 0, 10]
    assert spec.n_trial == 20 and spec.rng_seed == 7


@pytest.mark.parametrize(
    "text",
    [
        "n_trial = 0",
        "jsr_step_db = -1",
        "jsr_start_db = 5\njsr_stop_db = 0",
        "strategies = Jamming",
        "strategies = CustomMask",
        "cell_id = 504",
        "bandwidth_mhz = 7",
        "colour = red",
        "n_trial = many",
        "this line has no separator",
        "power_profile = loud",
    ],
)
def test_invalid_specs(text):
    with pytest.raises(SpecError):
        parse_spec_text(text)


def test_defaults_are_valid():
    spec = ExperimentSpec()
    assert len(spec.strategies) == 6 and spec.jsr_points[0] == -30 and spec.jsr_points[-1] == 40


def test_jammer_level_uses_target_power():
    power = PowerProfile.measured()
    assert jammer_level_db(Strategy.CRS, 0.0, power) == -10.0
    assert jammer_level_db(Strategy.PBCH, 4.0, power) == 2.0
    assert jammer_level_db(Strategy.BARRAGE, 3.0, power) == 3.0


def test_frame_rng_independent_streams():
    a = frame_rng(1, Strategy.PBCH, 0, 0).random()
    assert a == frame_rng(1, Strategy.PBCH, 0, 0).random()
    assert a != frame_rng(1, Strategy.PBCH, 0, 1).random()
    assert a != frame_rng(1, Strategy.CRS, 0, 0).random()
    assert a != frame_rng(2, Strategy.PBCH, 0, 0).random()


@pytest.fixture(scope="module")
def small_result():
    return run_experiment(parse_spec_text(SMALL))


def test_results_table(small_result):
    rows = list(csv.DictReader(io.StringIO(results_csv(small_result))))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 6
    for r in rows:
        assert int(r["n_trial"]) == 20
        assert float(r["p_err"]) == pytest.approx(int(r["n_err"]) / 20)
    barrage = [float(r["p_err"]) for r in rows if r["strategy"] == "Barrage"]
    assert barrage[-1] == 1.0


def test_summary_table(small_result):
    rows = list(csv.DictReader(io.StringIO(summary_csv(small_result))))
    assert [r["strategy"] for r in rows] == ["Pcfich", "Barrage"]
    assert rows[1]["fraction"] == "1.000000"


def test_rerun_is_byte_identical(small_result, tmp_path):
    again = run_experiment(parse_spec_text(SMALL))
    assert results_csv(again) == results_csv(small_result)
    a = emit_results(small_result, "csv", tmp_path / "a")
    b = emit_results(again, "csv", tmp_path / "b")
    for pa, pb in zip(a, b):
        assert pa.read_bytes() == pb.read_bytes()
    prov = json.loads((tmp_path / "a" / "provenance.json").read_text())
    assert prov["rng_seed"] == 7 and len(prov["spec_sha256"]) == 64


def test_workers_do_not_change_results(small_result):
    spec = parse_spec_text(SMALL + "workers = 2\n")
    assert results_csv(run_experiment(spec)) == results_csv(small_result)


def test_emit_plots(small_result, tmp_path):
    files = emit_results(small_result, "csv+plots", tmp_path)
    names = {f.name for f in files}
    assert {"results.csv", "summary.csv", "bandwidth.csv", "provenance.json"} <= names
    assert any(n.endswith(".png") for n in names)
    with pytest.raises(ValueError):
        emit_results(small_result, "xlsx", tmp_path)


# --- command line -----------------------------------------------------------


def test_cli_run(tmp_path, capsys):
    spec = tmp_path / "s.ini"
    spec.write_text(SMALL)
    assert main(["run", str(spec), "--format", "csv", "--output-dir", str(tmp_path / "out"), "--quiet"]) == 0
    assert (tmp_path / "out" / "results.csv").exists()


def test_cli_exit_codes(tmp_path):
    bad = tmp_path / "bad.ini"
    bad.write_text("n_trial = -3\n")
    assert main(["run", str(bad)]) == 3
    assert main(["run", str(tmp_path / "missing.ini")]) == 2
    blocker = tmp_path / "file"
    blocker.write_text("")
    good = tmp_path / "good.ini"
    good.write_text(SMALL)
    assert main(["run", str(good), "--output-dir", str(blocker / "sub")]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["run"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1


def test_cli_scale(tmp_path, capsys):
    table = tmp_path / "t.csv"
    table.write_text("strategy,jsr_n_dos\n" + "".join(f"{k},{v}\n" for k, v in
                     {"Barrage": -10, "PssSss": 5, "Pdcch": -16, "Pbch": -3, "Pcfich": -19, "Crs": -26}.items()))
    assert main(["scale", str(table)]) == 0
    out = capsys.readouterr()
    rows = {r["strategy"]: r for r in csv.DictReader(io.StringIO(out.out))}
    assert float(rows["PssSss"]["10"]) == pytest.approx(-3.54, abs=0.01)
    assert out.err.count("holds") == 4
    assert main(["scale", str(table), "--bandwidths", "1.4,x"]) == 1
    assert main(["scale", str(tmp_path / "none.csv")]) == 2
    assert main(["scale", str(table), "--bandwidths", "7"]) == 3
    bad = tmp_path / "bad.csv"
    bad.write_text("strategy,threshold\nCrs,-26\n")
    assert main(["scale", str(bad)]) == 3


def test_cli_export_iq(tmp_path):
    out = tmp_path / "f.iq"
    assert main(["export-iq", str(out), "--frames", "2", "--cell-id", "9"]) == 0
    x = read_iq(out)
    assert x.size == 2 * frame_length(CellConfig())
    jam = tmp_path / "j.iq"
    assert main(["export-iq", str(jam), "--jammer", "Pbch", "--jsr", "0", "--jammer-only"]) == 0
    assert np.count_nonzero(np.abs(read_iq(jam)) > 1e-6) > 0
    assert main(["export-iq", str(out), "--frames", "0"]) == 1
    assert main(["export-iq", str(out), "--cell-id", "999"]) == 3
    assert main(["export-iq", str(tmp_path / "nodir" / "x.iq")]) == 2
