import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lineperc.errors import NoCrossingError, OutOfRangeError
from lineperc.lattice import SeedSpec, sample_plane_window
from lineperc.planar import (
    BOTTOM_TOP,
    LEFT_RIGHT,
    Field2D,
    Rect,
    closed_star_crossing_exists,
    duality_holds,
    is_open_crossing,
    leftmost_bottom_top_crossing,
    lowest_left_right_crossing,
    lowest_two_directed_path,
    open_crossing_exists,
    two_directed_cluster,
    two_directed_survives,
)
from lineperc.verify import duality_suite

from oracles import crosses


@st.composite
def fields(draw, max_side=12, min_side=1):
    n = draw(st.integers(min_side, max_side))
    m = draw(st.integers(min_side, max_side))
    p = draw(st.sampled_from((0.3, 0.5, 0.6, 0.7)))
    seed = draw(st.integers(0, 2**32))
    bits = np.random.default_rng(seed).random((n, m)) < p
    return Field2D(bits, draw(st.integers(-5, 5)), draw(st.integers(-5, 5)))


def full_rect(f):
    return Rect(f.shape[0], f.shape[1], f.a0, f.b0)


class TestCrossings:
    def test_all_open(self):
        f = Field2D(np.ones((5, 4), bool))
        for d in (BOTTOM_TOP, LEFT_RIGHT):
            assert open_crossing_exists(f, Rect(5, 4), d)
        assert not closed_star_crossing_exists(f, Rect(5, 4))

    def test_blocking_row(self):
        bits = np.ones((6, 6), bool)
        bits[:, 3] = False
        assert not open_crossing_exists(bits, Rect(6, 6), BOTTOM_TOP)
        assert open_crossing_exists(bits, Rect(6, 6), LEFT_RIGHT)

    def test_all_closed(self):
        f = Field2D(np.zeros((4, 4), bool))
        assert closed_star_crossing_exists(f, Rect(4, 4))
        assert not open_crossing_exists(f, Rect(4, 4))

    def test_rect_outside_window(self):
        with pytest.raises(OutOfRangeError):
            open_crossing_exists(Field2D(np.ones((3, 3), bool)), Rect(4, 3))

    @given(fields())
    def test_open_crossing_dfs_oracle(self, f):
        r = full_rect(f)
        assert open_crossing_exists(f, r, BOTTOM_TOP) == crosses(f.bits, 1)
        assert open_crossing_exists(f, r, LEFT_RIGHT) == crosses(f.bits, 0)

    @given(fields())
    def test_star_crossing_oracle(self, f):
        r = full_rect(f)
        assert closed_star_crossing_exists(f, r, LEFT_RIGHT) == crosses(~f.bits, 0, diagonal=True)
        assert closed_star_crossing_exists(f, r, BOTTOM_TOP) == crosses(~f.bits, 1, diagonal=True)

    @given(fields(max_side=20), st.data())
    def test_duality(self, f, data):
        n, m = f.shape
        rn, rm = data.draw(st.integers(1, n)), data.draw(st.integers(1, m))
        k = f.a0 + data.draw(st.integers(0, n - rn))
        l = f.b0 + data.draw(st.integers(0, m - rm))
        assert duality_holds(f, Rect(rn, rm, k, l))

    def test_duality_suite(self):
        rep = duality_suite(2000, seed=5)
        assert rep["instances"] == 2000 and rep["violations"] == 0


def lex_first_crossing(bits):
    """DFS over tight self-avoiding bottom-top crossings in lexicographic
    (a, b) order; the first complete one found is the minimum."""
    n, m = bits.shape
    top = m - 1

    def dfs(path, used):
        a, b = path[-1]
        if b == top:
            return list(path)
        for s in sorted(((a - 1, b), (a, b - 1), (a, b + 1), (a + 1, b))):
            if 0 <= s[0] < n and 1 <= s[1] <= top and s not in used and bits[s]:
                used.add(s)
                path.append(s)
                r = dfs(path, used)
                if r:
                    return r
                path.pop()
                used.discard(s)
        return None

    for a in range(n):
        if bits[a, 0]:
            r = dfs([(a, 0)], {(a, 0)})
            if r:
                return r
    return None


class TestCanonicalCrossings:
    def test_all_open_left_column(self):
        f = Field2D(np.ones((4, 5), bool), 2, 3)
        path = leftmost_bottom_top_crossing(f, Rect(4, 5, 2, 3))
        assert path == [(2, b) for b in range(3, 8)]
        low = lowest_left_right_crossing(f, Rect(4, 5, 2, 3))
        assert low == [(a, 3) for a in range(2, 6)]

    def test_single_open_column(self):
        bits = np.zeros((6, 6), bool)
        bits[4, :] = True
        assert leftmost_bottom_top_crossing(bits, Rect(6, 6)) == [(4, b) for b in range(6)]

    def test_absent(self):
        with pytest.raises(NoCrossingError):
            leftmost_bottom_top_crossing(np.zeros((3, 3), bool), Rect(3, 3))

    @given(fields(max_side=8, min_side=2).filter(lambda f: f.bits.mean() > 0.4))
    def test_enumeration_oracle(self, f):
        r = full_rect(f)
        ref = lex_first_crossing(f.bits)
        if ref is None:
            with pytest.raises(NoCrossingError):
                leftmost_bottom_top_crossing(f, r)
            return
        out = leftmost_bottom_top_crossing(f, r)
        assert out == [(a + f.a0, b + f.b0) for a, b in ref]
        assert is_open_crossing(f, r, out, BOTTOM_TOP, tight=True)

    @given(fields(max_side=8, min_side=2).filter(lambda f: f.bits.mean() > 0.4))
    def test_lowest_is_transposed_leftmost(self, f):
        r = full_rect(f)
        ref = lex_first_crossing(f.bits.T)
        if ref is None:
            assert not open_crossing_exists(f, r, LEFT_RIGHT)
            return
        out = lowest_left_right_crossing(f, r)
        assert out == [(b + f.a0, a + f.b0) for a, b in ref]
        assert is_open_crossing(f, r, out, LEFT_RIGHT, tight=True)

    def test_from_plane_field(self):
        fld = sample_plane_window(0.8, SeedSpec(3), 1, [(0, 9), (0, 9)])
        f = Field2D.from_plane(fld)
        if open_crossing_exists(f, Rect(10, 10)):
            assert is_open_crossing(f, Rect(10, 10), leftmost_bottom_top_crossing(fld, Rect(10, 10)))


def enumerate_2directed(bits, origin, depth):
    """All open 2-directed paths (as site lists) of at most ``depth`` steps."""
    out = []
    a0, b0 = origin
    if not bits[a0, b0]:
        return out
    for L in range(depth + 1):
        for dirs in itertools.product((0, 1), repeat=L):
            if any(dirs[i] == dirs[i + 1] == dirs[i + 2] for i in range(L - 2)):
                continue
            a, b, path, ok = a0, b0, [(a0, b0)], True
            for d in dirs:
                a, b = (a + 1, b) if d == 0 else (a, b + 1)
                if not bits[a, b]:
                    ok = False
                    break
                path.append((a, b))
            if ok:
                out.append(path)
    return out


class TestTwoDirected:
    def test_all_open_depth2(self):
        f = Field2D(np.ones((3, 3), bool))
        cl = two_directed_cluster(f, (0, 0), 2)
        assert cl == {(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)}

    def test_no_run_of_three(self):
        f = Field2D(np.ones((4, 4), bool))
        assert (3, 0) not in two_directed_cluster(f, (0, 0), 3)

    def test_origin_closed(self):
        bits = np.ones((4, 4), bool)
        bits[0, 0] = False
        assert two_directed_cluster(bits, (0, 0), 3) == set()
        assert not two_directed_survives(bits, (0, 0), 3)

    def test_window_too_small(self):
        with pytest.raises(OutOfRangeError):
            two_directed_cluster(np.ones((3, 3), bool), (0, 0), 3)

    @given(st.integers(0, 2**32), st.floats(0.4, 0.9), st.integers(0, 10))
    def test_cluster_enumeration_oracle(self, seed, p, depth):
        bits = np.random.default_rng(seed).random((11, 11)) < p
        ref = {s for path in enumerate_2directed(bits, (0, 0), depth) for s in path}
        assert two_directed_cluster(bits, (0, 0), depth) == ref
        full = [q for q in enumerate_2directed(bits, (0, 0), depth) if len(q) == depth + 1]
        assert two_directed_survives(bits, (0, 0), depth) == bool(full)

    @given(st.integers(0, 2**32), st.floats(0.4, 0.9), st.integers(0, 8))
    def test_monotone_in_field_and_depth(self, seed, p, depth):
        u = np.random.default_rng(seed).random((10, 10))
        lo, hi = u < p, u < min(1.0, p + 0.1)
        c = two_directed_cluster(lo, (0, 0), depth)
        assert c <= two_directed_cluster(hi, (0, 0), depth)
        assert c <= two_directed_cluster(lo, (0, 0), depth + 1)

    def test_lowest_all_open_staircase(self):
        depth = 6
        bits = np.ones((depth + 1, depth + 1), bool)
        path = lowest_two_directed_path(bits, (0, 0), depth)
        allp = [q for q in enumerate_2directed(bits, (0, 0), depth) if len(q) == depth + 1]
        envelope = [min(q[t][1] for q in allp) for t in range(depth + 1)]
        assert [s[1] for s in path] == envelope
        assert path == [(0, 0), (1, 0), (2, 0), (2, 1), (3, 1), (4, 1), (4, 2)]

    def test_unique_path(self):
        bits = np.zeros((6, 6), bool)
        route = [(0, 0), (0, 1), (1, 1), (2, 1), (2, 2), (3, 2)]
        for s in route:
            bits[s] = True
        assert lowest_two_directed_path(bits, (0, 0), 5) == route

    def test_unreachable(self):
        bits = np.zeros((4, 4), bool)
        bits[0, 0] = True
        with pytest.raises(NoCrossingError):
            lowest_two_directed_path(bits, (0, 0), 3)

    @given(st.integers(0, 2**32), st.floats(0.5, 0.95), st.integers(1, 8))
    def test_lowest_dominated_by_every_path(self, seed, p, depth):
        bits = np.random.default_rng(seed).random((9, 9)) < p
        allp = [q for q in enumerate_2directed(bits, (0, 0), depth) if len(q) == depth + 1]
        if not allp:
            with pytest.raises(NoCrossingError):
                lowest_two_directed_path(bits, (0, 0), depth)
            return
        path = lowest_two_directed_path(bits, (0, 0), depth)
        assert path in allp
        for q in allp:
            assert all(path[t][1] <= q[t][1] for t in range(depth + 1))
        steps = [(b[0] - a[0], b[1] - a[1]) for a, b in zip(path, path[1:])]
        assert not any(steps[i] == steps[i + 1] == steps[i + 2] for i in range(len(steps) - 2))
