import numpy as np
import pytest

from ltejam.cell_model import CellConfig
from ltejam.interference import mix_at_jsr
from ltejam.ofdm import frame_length, ofdm_modulate
from ltejam.sync import acquire_sync, acquire_sync_batch
from ltejam.tx import PowerProfile, build_frame, random_payload


def frame(cfg, seed=0, power=None):
    return ofdm_modulate(build_frame(cfg, random_payload(cfg, np.random.default_rng(seed)), power))


@pytest.mark.parametrize("cell_id", [0, 1, 2, 100, 503])
def test_clean_frame(cell_id):
    cfg = CellConfig(cell_id=cell_id)
    r = acquire_sync(frame(cfg), cfg)
    assert r.detected and r.frame_start == 0 and r.cell_id == cell_id
    assert r.n_id_2 == cell_id % 3


def test_prepended_delay():
    cfg = CellConfig(cell_id=0)
    x = np.concatenate([np.zeros(100, dtype=complex), frame(cfg)])
    r = acquire_sync(x, cfg)
    assert abs(r.frame_start - 100) <= 2 and r.cell_id == 0


def test_circular_offset_and_20mhz():
    cfg = CellConfig(cell_id=301, bandwidth_mhz=20)
    x = np.roll(frame(cfg), 12345)
    r = acquire_sync(x, cfg)
    assert r.frame_start == 12345 and r.cell_id == 301


def test_pure_noise_fails():
    cfg = CellConfig()
    rng = np.random.default_rng(1)
    x = rng.standard_normal((20, frame_length(cfg))) + 1j * rng.standard_normal((20, frame_length(cfg)))
    assert not any(r.detected for r in acquire_sync_batch(x, cfg))


def test_snr_10db_timing():
    cfg = CellConfig(cell_id=77)
    power = PowerProfile.measured()
    rng = np.random.default_rng(2)
    hits = 0
    for seed in range(20):
        x = mix_at_jsr(frame(cfg, seed, power), np.zeros(frame_length(cfg)), 0.0, -10.0, rng)
        hits += acquire_sync(x, cfg).matches(cfg)
    assert hits == 20


def test_short_buffer_rejected():
    cfg = CellConfig()
    with pytest.raises(ValueError):
        acquire_sync(np.zeros(100, dtype=complex), cfg)
