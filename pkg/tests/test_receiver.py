import numpy as np
import pytest

from ltejam.cell_model import Channel, CellConfig, build_channel_mask
from ltejam.interference import Strategy, mix_at_jsr
from ltejam.ofdm import demodulate_array, frame_length, ofdm_modulate
from ltejam.receiver import (
    ErrorFlags,
    equalize,
    estimate_channel,
    evaluate_strategy_flag,
    receive_frame,
    receive_frames,
)
from ltejam.tx import FramePayload, PowerProfile, build_frame, random_payload

CFG = CellConfig(cell_id=21)


def composite(payload, rng, power=None, noise_db=-30.0, cfg=CFG):
    x = ofdm_modulate(build_frame(cfg, payload, power))
    return mix_at_jsr(x, np.zeros_like(x), 0.0, noise_db, rng)


def test_flags_composite():
    assert not ErrorFlags().composite_error
    assert ErrorFlags(pbch_error=True).composite_error


@pytest.mark.parametrize(
    "strategy, flags, expected",
    [
        (Strategy.PCFICH, ErrorFlags(pcfich_error=True), True),
        (Strategy.PDCCH, ErrorFlags(), False),
        (Strategy.CRS, ErrorFlags(pbch_error=True), True),
        (Strategy.BARRAGE, ErrorFlags(sync_error=True), True),
        (Strategy.PSS_SSS, ErrorFlags(pdcch_error=True), False),
        (Strategy.PBCH, ErrorFlags(pbch_error=True), True),
    ],
)
def test_strategy_flag(strategy, flags, expected):
    assert evaluate_strategy_flag(flags, strategy) is expected


def test_clean_reception_measured_powers():
    rng = np.random.default_rng(0)
    power = PowerProfile.measured()
    payloads = [random_payload(CFG, rng) for _ in range(20)]
    x = np.stack([composite(p, rng, power) for p in payloads])
    reports = receive_frames(x, CFG, payloads, power)
    assert not any(r.frame_flags.composite_error for r in reports)


def test_wrong_cfi_is_flagged():
    rng = np.random.default_rng(1)
    sent = random_payload(CellConfig(cell_id=21, cfi=2), rng)
    truth = FramePayload(sent.mib_bits, 3, sent.dci_rnti, sent.dci_bits, sent.pdsch_bits, sent.sfn)
    flags = receive_frame(composite(sent, rng, cfg=CellConfig(cell_id=21, cfi=2)), CFG, truth)
    assert flags.pcfich_error and not flags.sync_error


def test_wrong_rnti_is_flagged():
    rng = np.random.default_rng(2)
    sent = random_payload(CFG, rng, rnti=0x1111)
    truth = FramePayload(sent.mib_bits, sent.cfi_value, 0x2222, sent.dci_bits, sent.pdsch_bits, sent.sfn)
    flags = receive_frame(composite(sent, rng), CFG, truth)
    assert flags.pdcch_error and not flags.pcfich_error and not flags.pbch_error


def test_sync_failure_forces_decode_flags():
    rng = np.random.default_rng(3)
    truth = random_payload(CFG, rng)
    noise = rng.standard_normal(frame_length(CFG)) + 1j * rng.standard_normal(frame_length(CFG))
    f = receive_frame(noise, CFG, truth)
    assert f.sync_error and f.pbch_error and f.pcfich_error and f.pdcch_error


def test_wrong_cell_is_sync_error():
    rng = np.random.default_rng(4)
    other = CellConfig(cell_id=22)
    truth = random_payload(other, rng)
    assert receive_frame(composite(truth, rng, cfg=other), CFG, truth).sync_error


def test_deterministic():
    rng = np.random.default_rng(5)
    truth = random_payload(CFG, rng)
    x = composite(truth, rng, noise_db=0.0)
    a = receive_frames(x[None], CFG, [truth])[0]
    b = receive_frames(x[None], CFG, [truth])[0]
    assert a.frame_flags == b.frame_flags
    assert np.array_equal(a.pdcch_error, b.pdcch_error)


def test_subframe_flags():
    rng = np.random.default_rng(6)
    truth = random_payload(CFG, rng)
    r = receive_frames(composite(truth, rng)[None], CFG, [truth])[0]
    assert r.subframe_flags(3) == ErrorFlags()


def test_identity_channel_estimate_and_evm():
    rng = np.random.default_rng(7)
    payload = random_payload(CFG, rng)
    grid = build_frame(CFG, payload).amplitudes
    y = demodulate_array(composite(payload, rng), CFG)
    h = estimate_channel(y, CFG)
    assert np.mean(np.abs(h - 1) ** 2) < 1e-2
    data = build_channel_mask(Channel.PDSCH, CFG).array
    eq = equalize(y, h)
    evm = np.sqrt(np.mean(np.abs(eq[data] - grid[data]) ** 2) / np.mean(np.abs(grid[data]) ** 2))
    assert evm < 0.05


def test_estimator_tracks_a_flat_channel():
    rng = np.random.default_rng(8)
    payload = random_payload(CFG, rng)
    g = 0.5 * np.exp(1j * 0.7)
    x = g * ofdm_modulate(build_frame(CFG, payload))
    h = estimate_channel(demodulate_array(x, CFG), CFG)
    assert np.allclose(h, g)
    assert not receive_frame(x, CFG, payload).composite_error


def test_unknown_equalizer():
    with pytest.raises(ValueError):
        equalize(np.ones(2), np.ones(2), "mmse")
