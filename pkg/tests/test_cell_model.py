import numpy as np
import pytest

from ltejam.cell_model import (
    BANDWIDTH_PRB,
    Channel,
    CellConfig,
    OccupancyConvention,
    ReCoordinate,
    build_channel_mask,
    control_layout,
    crs_subcarrier_offset,
    grid_dimensions,
    mask_from_coordinates,
    occupancy_fraction,
    reserved_mask,
)

PHYSICAL_CHANNELS = [c for c in Channel if c is not Channel.BARRAGE]


@pytest.mark.parametrize("bw, expected", [(1.4, (72, 140, 10080)), (10, (600, 140, 84000)), (20, (1200, 140, 168000))])
def test_grid_dimensions(bw, expected):
    assert grid_dimensions(CellConfig(bandwidth_mhz=bw)) == expected


@pytest.mark.parametrize("cell_id, k0", [(0, 0), (7, 1), (503, 5)])
def test_crs_offset(cell_id, k0):
    assert crs_subcarrier_offset(cell_id) == k0


@pytest.mark.parametrize("bad", [-1, 504])
def test_crs_offset_domain(bad):
    with pytest.raises(ValueError):
        crs_subcarrier_offset(bad)


def test_config_validation():
    with pytest.raises(ValueError):
        CellConfig(bandwidth_mhz=2.0)
    with pytest.raises(ValueError):
        CellConfig(cell_id=504)
    with pytest.raises(ValueError):
        CellConfig(cfi=4)
    with pytest.raises(ValueError):
        CellConfig(cp="extended")
    assert CellConfig(bandwidth_mhz=3).n_prb == 15


@pytest.mark.parametrize(
    "channel, n_re",
    [(Channel.CRS, 480), (Channel.PSS_SSS, 124), (Channel.BARRAGE, 10080), (Channel.PBCH, 240), (Channel.PCFICH, 160)],
)
def test_mask_counts_1_4(channel, n_re):
    assert build_channel_mask(channel, CellConfig()).n_re == n_re


def test_fractions_1_4():
    cfg = CellConfig()
    frac = lambda ch, conv=OccupancyConvention.PHYSICAL: occupancy_fraction(build_channel_mask(ch, cfg), cfg, conv)
    assert frac(Channel.CRS) == pytest.approx(0.0476, abs=5e-4)
    assert frac(Channel.BARRAGE) == 1.0
    assert frac(Channel.PDCCH) == pytest.approx(0.234, abs=5e-3)
    assert frac(Channel.PCFICH, OccupancyConvention.ONCE_PER_FRAME) == pytest.approx(0.002, abs=5e-4)


def test_fraction_mismatch():
    mask = build_channel_mask(Channel.CRS, CellConfig())
    with pytest.raises(ValueError):
        occupancy_fraction(mask, CellConfig(cell_id=1))


@pytest.mark.parametrize("bw", sorted(BANDWIDTH_PRB))
def test_masks_partition_grid(bw):
    cfg = CellConfig(bandwidth_mhz=bw, cell_id=101)
    total = reserved_mask(cfg).astype(int)
    for ch in PHYSICAL_CHANNELS:
        total += build_channel_mask(ch, cfg).array
    assert np.all(total == 1)


def test_fixed_re_counts_across_bandwidths():
    for ch in (Channel.PSS_SSS, Channel.PBCH, Channel.PCFICH):
        counts = {build_channel_mask(ch, CellConfig(bandwidth_mhz=bw)).n_re for bw in BANDWIDTH_PRB}
        assert len(counts) == 1


@pytest.mark.parametrize("bw", sorted(BANDWIDTH_PRB))
def test_crs_fraction_all_bandwidths(bw):
    cfg = CellConfig(bandwidth_mhz=bw)
    assert occupancy_fraction(build_channel_mask(Channel.CRS, cfg), cfg) == pytest.approx(480 / 10080)


@pytest.mark.parametrize("cell_id", [0, 1, 5, 250])
def test_crs_positions(cell_id):
    cfg = CellConfig(cell_id=cell_id, bandwidth_mhz=5)
    k0 = crs_subcarrier_offset(cell_id)
    for re in build_channel_mask(Channel.CRS, cfg).coordinates:
        assert re.symbol in (0, 4, 7, 11)
        assert re.subcarrier % 6 in (k0, (k0 + 3) % 6)


@pytest.mark.parametrize("bw", [3, 20])
def test_sync_within_central_72(bw):
    cfg = CellConfig(bandwidth_mhz=bw)
    lo = cfg.n_subcarriers // 2 - 36
    ks = np.nonzero(build_channel_mask(Channel.PSS_SSS, cfg).array)[0]
    assert ks.min() >= lo and ks.max() < lo + 72


def test_crs_pbch_disjoint():
    cfg = CellConfig(cell_id=3)
    a = build_channel_mask(Channel.CRS, cfg).coordinates
    b = build_channel_mask(Channel.PBCH, cfg).coordinates
    assert not a & b


def test_coordinates_roundtrip():
    cfg = CellConfig()
    m = build_channel_mask(Channel.PBCH, cfg)
    again = mask_from_coordinates(Channel.PBCH, m.coordinates, cfg)
    assert np.array_equal(again.array, m.array)
    assert ReCoordinate(0, 7, 1) in m
    assert ReCoordinate(0, 7, 0) not in m  # CRS position


def test_control_layout_sizes():
    lay = control_layout(CellConfig())
    assert lay.pcfich_k.shape == (4, 4)
    assert lay.phich_k.shape == (3, 4)
    assert lay.n_cce == 6
