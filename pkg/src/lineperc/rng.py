"""Counter-based uniforms keyed by (seed, replica, axis, plane coordinates).

Every Bernoulli draw of the model is a pure function of its key, so a plane
window can be resampled anywhere, in any order, on any thread, and produce
the same bits.  The mixer is the SplitMix64 finalizer applied once per key
component.
"""

from __future__ import annotations

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
MUL1 = np.uint64(0xBF58476D1CE4E5B9)
MUL2 = np.uint64(0x94D049BB133111EB)
MASK64 = (1 << 64) - 1
_INV_2_53 = 1.0 / float(1 << 53)


def _mix(z):
    # uint64 arithmetic wraps modulo 2**64, which is what the finalizer needs
    z = z + GOLDEN
    z = (z ^ (z >> np.uint64(30))) * MUL1
    z = (z ^ (z >> np.uint64(27))) * MUL2
    return z ^ (z >> np.uint64(31))


def mix64(value: int) -> int:
    """Scalar SplitMix64 finalizer (python ints, for reference and tests)."""
    z = (value + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def key_prefix(seed: int, replica: int, axis: int) -> int:
    """Hash state after absorbing seed, replica and axis."""
    h = mix64(seed & MASK64)
    h = mix64(h ^ (replica & MASK64))
    return mix64(h ^ (axis & MASK64))


def uniform_scalar(seed: int, replica: int, axis: int, coords) -> float:
    """Uniform in [0, 1) for one plane site; slow reference path."""
    h = key_prefix(seed, replica, axis)
    for c in coords:
        h = mix64(h ^ (int(c) & MASK64))
    return (h >> 11) * _INV_2_53


def uniform_grid(seed: int, replica: int, axis: int, ranges) -> np.ndarray:
    """Uniforms on the integer rectangle spanned by ``ranges``.

    Parameters
    ----------
    seed, replica, axis : int
        Key prefix. ``axis`` is 0-based.
    ranges : sequence of (lo, hi)
        Inclusive bounds per plane coordinate, in coordinate order.

    Returns
    -------
    numpy.ndarray
        float64 array of shape ``(hi - lo + 1, ...)`` indexed row-major.
    """
    prefix = np.uint64(key_prefix(seed, replica, axis))
    h = np.full((1,) * len(ranges), prefix, dtype=np.uint64)
    for k, (lo, hi) in enumerate(ranges):
        coords = np.arange(lo, hi + 1, dtype=np.int64).astype(np.uint64)
        shape = [1] * len(ranges)
        shape[k] = coords.size
        h = _mix(h ^ coords.reshape(shape))
    return (h >> np.uint64(11)).astype(np.float64) * _INV_2_53


def uniform_points(seed: int, replica: int, axis: int, points: np.ndarray) -> np.ndarray:
    """Uniforms for an ``(m, k)`` array of plane coordinates."""
    pts = np.asarray(points, dtype=np.int64)
    h = np.full(pts.shape[0], np.uint64(key_prefix(seed, replica, axis)), dtype=np.uint64)
    for k in range(pts.shape[1]):
        h = _mix(h ^ pts[:, k].astype(np.uint64))
    return (h >> np.uint64(11)).astype(np.float64) * _INV_2_53
