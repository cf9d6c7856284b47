"""Deterministic random substreams on top of the Philox counter-based generator.

Every consumer draws from its own substream keyed by (seed, stream, index), so
results do not depend on the order or the thread in which draws happen:

    key = [seed mod 2**64, (stream << 32) | index]

Normal variates use the Box-Muller transform on Philox uniforms rather than
numpy's ziggurat sampler, pinning the transform alongside the generator.
"""

import numpy as np

# Stream identifiers; manifests from earlier runs refer to these values.
STREAM_HARMONICS = 1
STREAM_WIND = 2
STREAM_SENSORS = 3

_MASK64 = (1 << 64) - 1


def substream(seed: int, stream: int, index: int) -> np.random.Generator:
    """Return an independent generator for one ensemble member or test case."""
    if index < 0 or index >= (1 << 32):
        raise ValueError(f"substream index out of range: {index}")
    key = np.array([int(seed) & _MASK64, ((int(stream) & 0xFFFFFFFF) << 32) | int(index)],
                   dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def box_muller(gen: np.random.Generator, size: int) -> np.ndarray:
    """Draw `size` standard normals from 2*ceil(size/2) uniforms."""
    pairs = (size + 1) // 2
    u = gen.random(2 * pairs)
    u1 = 1.0 - u[:pairs]  # (0, 1], keeps log finite
    u2 = u[pairs:]
    radius = np.sqrt(-2.0 * np.log(u1))
    z = np.concatenate([radius * np.cos(2.0 * np.pi * u2), radius * np.sin(2.0 * np.pi * u2)])
    return z[:size]


def uniform_angles(gen: np.random.Generator, size: int) -> np.ndarray:
    """Uniform phases on [0, 2*pi)."""
    return 2.0 * np.pi * gen.random(size)
