import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from ltejam import coding


def poly_crc(bits, poly=0x11021, width=16):
    value = int("".join(map(str, bits)) or "0", 2) << width
    while value.bit_length() > width:
        value ^= poly << (value.bit_length() - width - 1)
    return [(value >> (width - 1 - i)) & 1 for i in range(width)]


def test_crc_known_value():
    msg = np.unpackbits(np.frombuffer(b"123456789", dtype=np.uint8))
    assert coding.bits_to_int(coding.crc(msg)) == 0x31C3


@given(st.lists(st.integers(0, 1), min_size=1, max_size=64))
def test_crc_matches_long_division(bits):
    assert coding.crc(np.array(bits)).tolist() == poly_crc(bits)


def test_int_bits_roundtrip():
    assert coding.bits_to_int(coding.int_to_bits(0x1234, 16)) == 0x1234


@pytest.mark.parametrize("k", [37, 40])
def test_tbcc_noiseless_roundtrip(k):
    rng = np.random.default_rng(k)
    bits = rng.integers(0, 2, size=(20, k), dtype=np.uint8)
    assert np.array_equal(coding.tbcc_decode(1 - 2.0 * coding.tbcc_encode(bits)), bits)


def test_tbcc_is_tail_biting():
    # Starting state equals the final state: a rotated input gives a rotated codeword.
    rng = np.random.default_rng(0)
    b = rng.integers(0, 2, size=40)
    assert np.array_equal(coding.tbcc_encode(np.roll(b, 5)), np.roll(coding.tbcc_encode(b), 5, axis=-1))


def test_viterbi_corrects_errors():
    rng = np.random.default_rng(3)
    bits = rng.integers(0, 2, size=(50, 40), dtype=np.uint8)
    llr = 1 - 2.0 * coding.tbcc_encode(bits)
    flip = rng.random(llr.shape) < 0.03
    llr[flip] *= -1
    assert np.mean(coding.tbcc_decode(llr) == bits) > 0.99


def test_subblock_interleaver_is_permutation():
    v = coding.subblock_interleaver(40)
    assert v.size == 64
    assert sorted(v[v >= 0]) == list(range(40))


@settings(max_examples=25, deadline=None)
@given(st.integers(20, 60), st.sampled_from([72, 144, 288, 1920]))
def test_rate_matching_roundtrip(k, e):
    assume(e >= 2 * k)
    rng = np.random.default_rng(k * e)
    bits = rng.integers(0, 2, size=k, dtype=np.uint8)
    coded = coding.tbcc_encode(bits)
    tx = coding.rate_match(coded, e)
    assert tx.size == e
    soft = coding.rate_dematch(1 - 2.0 * tx, k)
    if e >= 3 * k:
        assert np.all(np.sign(soft) == 1 - 2.0 * coded)
    assert np.array_equal(coding.tbcc_decode(soft), bits)


def test_rate_match_repeats_circularly():
    coded = coding.tbcc_encode(np.arange(40) % 2)
    e = coding.rate_match(coded, 1920)
    assert np.array_equal(e[:120], e[120:240])
