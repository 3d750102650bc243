"""Both backends against each other and against flood fill."""

import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lineperc import _fallback, kernels

from oracles import crosses, flood_components

backends = [pytest.param(_fallback, id="python")]
if kernels.compiled is not None:
    backends.append(pytest.param(kernels.compiled, id="compiled"))

shapes = st.lists(st.integers(1, 7), min_size=1, max_size=4).map(tuple)
bitsets = shapes.flatmap(lambda s: arrays(bool, s))


def test_compiled_backend_is_active():
    assert kernels.BACKEND == "compiled", "extension not built; run pip install -e ."


def test_env_var_forces_fallback():
    code = "import lineperc.kernels as k; print(k.BACKEND)"
    env = dict(os.environ, LINEPERC_BACKEND="python")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@pytest.mark.parametrize("impl", backends)
@given(bits=bitsets)
def test_labels_equal_flood_fill(impl, bits):
    labels, sizes = impl.label_components(bits)
    ref, k = flood_components(bits)
    assert np.array_equal(labels, ref)
    assert sizes.size == k
    assert sizes.sum() == bits.sum()
    assert all(sizes[i] == (ref == i + 1).sum() for i in range(k))


@pytest.mark.parametrize("impl", backends)
@given(bits=bitsets, data=st.data())
def test_spans_equal_bfs(impl, bits, data):
    axis = data.draw(st.integers(0, bits.ndim - 1))
    assert impl.spans_axis(bits, axis) == crosses(bits, axis)


def _reach_oracle(w1, w2, w3, R):
    side = 2 * R + 1
    vac = w1[None, :, :] & w2[:, None, :] & w3[:, :, None]
    if not vac[R, R, R]:
        return -1, 0
    labels, _ = flood_components(vac)
    mask = labels == labels[R, R, R]
    idx = np.argwhere(mask) - R
    return int(np.abs(idx).max()), int(mask.sum())


@pytest.mark.parametrize("impl", backends)
@given(R=st.integers(0, 4), seed=st.integers(0, 10_000), p=st.floats(0.4, 1.0))
def test_origin_reach_equals_flood_fill(impl, R, seed, p):
    rng = np.random.default_rng(seed)
    side = 2 * R + 1
    w = [rng.random((side, side)) < p for _ in range(3)]
    reach, size = impl.origin_reach3(*w, R)
    ref_reach, ref_size = _reach_oracle(*w, R)
    assert reach == ref_reach
    if impl is _fallback or reach < R:
        assert size == ref_size


@pytest.mark.skipif(kernels.compiled is None, reason="extension not built")
def test_backends_agree_on_large_box():
    rng = np.random.default_rng(0)
    bits = rng.random((40, 41, 42)) < 0.35
    a = kernels.compiled.label_components(bits)
    b = _fallback.label_components(bits)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
    for axis in range(3):
        assert kernels.compiled.spans_axis(bits, axis) == _fallback.spans_axis(bits, axis)


@pytest.mark.parametrize("impl", backends)
def test_non_contiguous_input(impl):
    bits = np.ones((6, 6, 6), bool)[::2, :, ::-1]
    labels, sizes = impl.label_components(bits)
    assert sizes.tolist() == [bits.size]
