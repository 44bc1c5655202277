import numpy as np
import pytest

from ltejam.cell_model import CellConfig, crs_subcarriers
from ltejam.sequences import (
    generate_crs,
    generate_pss,
    generate_sss,
    gold_sequence,
    qpsk,
    qpsk_llr,
    zadoff_chu,
)


def naive_gold(c_init, length):
    x1 = [1] + [0] * 30
    x2 = [(c_init >> i) & 1 for i in range(31)]
    for n in range(1600 + length):
        x1.append((x1[n + 3] + x1[n]) % 2)
        x2.append((x2[n + 3] + x2[n + 2] + x2[n + 1] + x2[n]) % 2)
    return np.array([(x1[n + 1600] + x2[n + 1600]) % 2 for n in range(length)])


@pytest.mark.parametrize("c_init", [0, 1, 12345, 2**31 - 1])
def test_gold_matches_recursion(c_init):
    assert np.array_equal(gold_sequence(c_init, 300), naive_gold(c_init, 300))


def test_qpsk_roundtrip_signs():
    bits = np.array([0, 0, 0, 1, 1, 0, 1, 1], dtype=np.uint8)
    s = qpsk(bits)
    assert np.allclose(np.abs(s), 1)
    assert np.array_equal(qpsk_llr(s) < 0, bits.astype(bool))


@pytest.mark.parametrize("nid2", [0, 1, 2])
def test_pss_constant_amplitude(nid2):
    assert np.allclose(np.abs(generate_pss(nid2)), 1)


def test_pss_cross_correlation_low():
    a, b = generate_pss(0), generate_pss(1)
    lin = np.abs(np.correlate(a, b, mode="full")) / 62
    cyc = [abs(np.vdot(np.roll(b, k), a)) / 62 for k in range(62)]
    assert lin.max() < 0.3 and max(cyc) < 0.3


def test_zadoff_chu_zero_autocorrelation():
    z = zadoff_chu(25)
    for k in range(1, 63):
        assert abs(np.vdot(np.roll(z, k), z)) / 63 < 1e-6


def test_pss_domain():
    with pytest.raises(ValueError):
        generate_pss(3)


def test_sss_properties():
    assert not np.array_equal(generate_sss(0, 0), generate_sss(0, 5))
    assert not np.array_equal(generate_sss(0, 0), generate_sss(1, 0))
    all_seq = np.array([generate_sss(c, sf) for c in range(504) for sf in (0, 5)])
    assert set(np.unique(all_seq)) == {-1.0, 1.0}
    assert len(np.unique(all_seq, axis=0)) == 1008


def test_sss_domain():
    with pytest.raises(ValueError):
        generate_sss(0, 1)


def test_crs_properties():
    cfg = CellConfig(bandwidth_mhz=10)
    a = generate_crs(0, 3, 4, cfg)
    assert a.size == crs_subcarriers(cfg, 4).size
    assert np.allclose(np.abs(a), 1)
    phase = np.angle(a) / (np.pi / 4)
    assert set(np.round(phase).astype(int)) <= {-3, -1, 1, 3}
    assert np.array_equal(a, generate_crs(0, 3, 4, cfg))
    b = generate_crs(1, 3, 4, cfg)
    assert abs(np.vdot(a, b)) / a.size < 0.3


def test_crs_domain():
    with pytest.raises(ValueError):
        generate_crs(0, 0, 1, CellConfig())


def test_crs_centre_invariant_to_bandwidth():
    # The same pilots sit on the central PRBs whatever the bandwidth.
    small = generate_crs(9, 2, 0, CellConfig(bandwidth_mhz=1.4))
    big = generate_crs(9, 2, 0, CellConfig(bandwidth_mhz=20))
    centre = (big.size - small.size) // 2
    assert np.array_equal(small, big[centre : centre + small.size])
