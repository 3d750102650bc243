"""Pure-Python/scipy implementations of the compiled kernels.

Selected automatically when the extension module is unavailable, and used
by the test-suite as an independent second implementation.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage


def label_components(bits: np.ndarray):
    """Same contract as the compiled version (scan-order canonical labels)."""
    bits = np.asarray(bits, dtype=bool)
    structure = ndimage.generate_binary_structure(bits.ndim, 1)
    labels, count = ndimage.label(bits, structure=structure)
    labels = labels.astype(np.int32)
    if count == 0:
        return labels, np.zeros(0, dtype=np.int64)
    flat = labels.ravel()
    nz = np.flatnonzero(flat)
    # first occurrence of each label in scan order fixes the numbering
    _, first = np.unique(flat[nz], return_index=True)
    order = np.argsort(first)
    remap = np.zeros(count + 1, dtype=np.int32)
    remap[order + 1] = np.arange(1, count + 1, dtype=np.int32)
    labels = remap[labels]
    sizes = np.bincount(labels.ravel(), minlength=count + 1)[1:].astype(np.int64)
    return labels, sizes


def spans_axis(bits: np.ndarray, axis: int) -> bool:
    bits = np.asarray(bits, dtype=bool)
    if bits.size == 0:
        return False
    labels, _ = label_components(bits)
    low = np.take(labels, 0, axis=axis)
    high = np.take(labels, bits.shape[axis] - 1, axis=axis)
    common = np.intersect1d(low[low > 0], high[high > 0])
    return bool(common.size)


def origin_reach3(w1, w2, w3, R: int):
    w1 = np.asarray(w1, dtype=bool)
    w2 = np.asarray(w2, dtype=bool)
    w3 = np.asarray(w3, dtype=bool)
    side = 2 * R + 1
    if w1.shape != (side, side) or w2.shape != (side, side) or w3.shape != (side, side):
        raise ValueError("plane windows must have side 2R+1")
    if not (w1[R, R] and w2[R, R] and w3[R, R]):
        return -1, 0
    box = w1[None, :, :] & w2[:, None, :] & w3[:, :, None]
    structure = ndimage.generate_binary_structure(3, 1)
    labels, _ = ndimage.label(box, structure=structure)
    comp = labels == labels[R, R, R]
    idx = np.nonzero(comp)
    reach = int(max(np.abs(c - R).max() for c in idx))
    return reach, int(comp.sum())
