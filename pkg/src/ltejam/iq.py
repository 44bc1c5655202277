"""IQ file export: interleaved float32 little-endian I/Q."""

from __future__ import annotations

from pathlib import Path

import numpy as np


def write_iq(path, samples: np.ndarray) -> int:
    """Write complex samples as ``I0 Q0 I1 Q1 ...``; returns the sample count."""
    samples = np.asarray(samples).ravel()
    out = np.empty(2 * samples.size, dtype="<f4")
    out[0::2] = samples.real
    out[1::2] = samples.imag
    Path(path).write_bytes(out.tobytes())
    return samples.size


def read_iq(path) -> np.ndarray:
    raw = np.frombuffer(Path(path).read_bytes(), dtype="<f4")
    if raw.size % 2:
        raise ValueError("IQ file holds an odd number of floats")
    return (raw[0::2] + 1j * raw[1::2]).astype(np.complex64)
