import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lineperc import rng
from lineperc.errors import CapacityError, DomainError, OutOfRangeError
from lineperc.lattice import (
    BoxRegion,
    Configuration,
    ParamVector,
    PlaneField,
    SeedSpec,
    dump_plane_field,
    domination_inequalities,
    load_plane_field,
    materialize,
    pack_bits,
    prob_box_all_vacant,
    sample_plane_fields,
    sample_slice_fields,
    unpack_bits,
    vacancy,
)

probs = st.floats(0.0, 1.0)


def brute_vacancy(config, site):
    """Oracle: product of the stored bits, looked up by hand."""
    out = True
    for i, f in enumerate(config.fields):
        rest = [c for k, c in enumerate(site) if k != i]
        idx = tuple(c - l for c, l in zip(rest, f.lo))
        out = out and bool(f.bits[idx])
    return out


class TestTypes:
    def test_param_vector_validation(self):
        with pytest.raises(DomainError):
            ParamVector((0.5, 0.5))
        with pytest.raises(DomainError):
            ParamVector((0.5, 1.2, 0.5))
        assert ParamVector.diagonal(0.3, 4).p == (0.3,) * 4

    def test_box_geometry(self):
        b = BoxRegion.around_origin(2, 3)
        assert b.volume == 125 and b.side == 5
        assert b.on_boundary((2, 0, 0)) and not b.on_boundary((1, 1, -1))
        assert b.projection_ranges(1) == [(-2, 2), (-2, 2)]
        shifted = BoxRegion((1, 2, 3), 1)
        assert shifted.lo == (0, 1, 2) and shifted.hi == (2, 3, 4)

    def test_field_shape_checked(self):
        from lineperc.errors import LinePercError

        with pytest.raises(LinePercError):
            PlaneField(0, (0, 0), (1, 1), np.ones((3, 2), bool))


class TestSampling:
    def test_all_open(self):
        box = BoxRegion.around_origin(3)
        for f in sample_plane_fields(ParamVector((1, 1, 1)), box, SeedSpec(9)):
            assert f.bits.all()

    def test_all_closed(self):
        box = BoxRegion.around_origin(3, 4)
        for f in sample_plane_fields(ParamVector((0,) * 4), box, SeedSpec(9)):
            assert not f.bits.any()

    def test_windows_cover_projections(self):
        box = BoxRegion((1, -2, 5), 2)
        fields = sample_plane_fields(ParamVector((0.5,) * 3), box, SeedSpec(1))
        for i, f in enumerate(fields):
            assert f.covers(box.projection_ranges(i))
            assert f.volume == 25

    def test_open_fraction_law_of_large_numbers(self):
        # 10^4 replicas at n=16: each plane holds 33^2 sites
        n, reps = 16, 10_000
        box = BoxRegion.around_origin(n)
        total = np.zeros(3)
        for r in range(reps):
            for i, f in enumerate(sample_plane_fields(ParamVector((0.5,) * 3), box, SeedSpec(4, r))):
                total[i] += f.bits.mean()
        tol = 3 * math.sqrt(0.25 / (reps * (2 * n + 1) ** 2))
        assert np.all(np.abs(total / reps - 0.5) < tol)

    def test_deterministic(self):
        box = BoxRegion.around_origin(4)
        a = sample_plane_fields(ParamVector((0.3, 0.6, 0.7)), box, SeedSpec(11, 3))
        b = sample_plane_fields(ParamVector((0.3, 0.6, 0.7)), box, SeedSpec(11, 3))
        assert a == b
        c = sample_plane_fields(ParamVector((0.3, 0.6, 0.7)), box, SeedSpec(11, 4))
        assert a != c

    @given(st.integers(0, 5), st.integers(0, 5), st.integers(-5, 5), st.integers(-5, 5), st.integers(-5, 5))
    def test_nested_and_translated_consistency(self, n, extra, cx, cy, cz):
        params = ParamVector((0.5, 0.4, 0.6))
        small = BoxRegion((cx, cy, cz), n)
        big = BoxRegion((cx, cy, cz), n + extra)
        fs = sample_plane_fields(params, small, SeedSpec(5))
        fb = sample_plane_fields(params, big, SeedSpec(5))
        for i in range(3):
            assert fb[i].restrict(small.projection_ranges(i)) == fs[i]

    def test_uniform_keyed_by_absolute_coordinates(self):
        u = rng.uniform_grid(7, 0, 1, [(-2, 2), (3, 4)])
        assert u[0, 1] == rng.uniform_scalar(7, 0, 1, (-2, 4))
        assert np.all((u >= 0) & (u < 1))

    def test_monotone_coupling_of_bits(self):
        box = BoxRegion.around_origin(5)
        lo = sample_plane_fields(ParamVector((0.4,) * 3), box, SeedSpec(2))
        hi = sample_plane_fields(ParamVector((0.6,) * 3), box, SeedSpec(2))
        for a, b in zip(lo, hi):
            assert np.all(b.bits | ~a.bits)


class TestVacancy:
    def test_all_open_true_and_one_closed_false(self):
        box = BoxRegion.around_origin(1)
        fields = sample_plane_fields(ParamVector((1, 1, 1)), box, SeedSpec(0))
        cfg = Configuration(box, fields)
        assert vacancy(cfg, (0, 0, 0))
        bits = fields[1].bits.copy()
        bits[1, 1] = False  # omega_2 closed at pi_2(0) = (0, 0)
        closed = list(fields)
        closed[1] = PlaneField(1, fields[1].lo, fields[1].hi, bits)
        cfg2 = Configuration(box, closed)
        assert not vacancy(cfg2, (0, 0, 0))
        # the whole line through the origin parallel to e_2 is closed
        assert not any(vacancy(cfg2, (0, y, 0)) for y in (-1, 0, 1))
        assert vacancy(cfg2, (1, 0, 0))

    def test_out_of_box(self):
        cfg = Configuration.sample(ParamVector((1, 1, 1)), BoxRegion.around_origin(1), SeedSpec(0))
        with pytest.raises(OutOfRangeError):
            vacancy(cfg, (2, 0, 0))

    @pytest.mark.parametrize("d", [3, 4])
    def test_matches_brute_force_product(self, d):
        box = BoxRegion.around_origin(2, d)
        cfg = Configuration.sample(ParamVector((0.7,) * d), box, SeedSpec(3))
        for site in itertools.product(range(-2, 3), repeat=d):
            assert vacancy(cfg, site) == brute_vacancy(cfg, site)


class TestMaterialize:
    def test_n0(self):
        cfg = Configuration.sample(ParamVector((0.5,) * 3), BoxRegion((4, 4, 4), 0), SeedSpec(6))
        assert materialize(cfg).shape == (1, 1, 1)
        assert bool(materialize(cfg)[0, 0, 0]) == vacancy(cfg, (4, 4, 4))

    def test_all_open(self):
        cfg = Configuration.sample(ParamVector((1, 1, 1)), BoxRegion.around_origin(3), SeedSpec(6))
        assert materialize(cfg).all()

    def test_naive_loop_oracle(self):
        box = BoxRegion.around_origin(8)
        cfg = Configuration.sample(ParamVector((0.8, 0.7, 0.9)), box, SeedSpec(12))
        bits = materialize(cfg)
        for site in itertools.product(range(-8, 9), repeat=3):
            idx = tuple(c + 8 for c in site)
            assert bits[idx] == brute_vacancy(cfg, site)
        assert materialize(cfg) is bits  # idempotent cache

    def test_capacity(self):
        cfg = Configuration.sample(ParamVector((1, 1, 1)), BoxRegion.around_origin(3), SeedSpec(0), max_sites=100)
        with pytest.raises(CapacityError):
            materialize(cfg)


class TestClosedForms:
    def test_trivial_values(self):
        assert prob_box_all_vacant(ParamVector((1, 1, 1)), 7) == 1.0
        assert prob_box_all_vacant(ParamVector((0.3,) * 3), 0) == pytest.approx(0.3**3)
        # n=2 at 0.9: 75 lines in total
        assert prob_box_all_vacant(ParamVector((0.9,) * 3), 2) == pytest.approx(0.9**75)

    def test_no_underflow(self):
        from lineperc.lattice import log_prob_box_all_vacant

        lp = log_prob_box_all_vacant(ParamVector((0.5,) * 3), 200)
        assert lp == pytest.approx(3 * 401**2 * math.log(0.5))

    def test_mc_oracle(self):
        params, box, reps = ParamVector((0.9,) * 3), BoxRegion.around_origin(2), 20_000
        hits = sum(
            materialize(Configuration.sample(params, box, SeedSpec(21, r))).all() for r in range(reps)
        )
        p = prob_box_all_vacant(params, 2)
        assert abs(hits / reps - p) < 4 * math.sqrt(p * (1 - p) / reps) + 1e-4

    @given(st.lists(st.floats(0.01, 1.0), min_size=3, max_size=3), st.integers(0, 6), st.integers(0, 2), st.floats(0, 0.5))
    def test_monotone(self, p, n, i, bump):
        a = prob_box_all_vacant(ParamVector(p), n)
        q = list(p)
        q[i] = min(1.0, q[i] + bump)
        assert prob_box_all_vacant(ParamVector(q), n) >= a
        assert prob_box_all_vacant(ParamVector(p), n + 1) <= a

    def test_domination_half(self):
        rep = domination_inequalities(ParamVector((0.5,) * 3), 0.5, 1)
        # at n=1 the first display is an equality: 3*9*log 0.5 == 27*log 0.5
        assert not rep.upper_strict
        assert rep.n0 == 2
        for m in range(2, 65):
            assert domination_inequalities(ParamVector((0.5,) * 3), 0.5, m).both_strict

    def test_domination_closed_form_values(self):
        rep = domination_inequalities(ParamVector((0.9,) * 3), 0.9, 1)
        assert rep.upper_lhs == pytest.approx(0.9**27)
        assert rep.upper_rhs == pytest.approx(0.9**27)
        assert rep.lower_lhs == pytest.approx(1 - 0.1**9)
        assert rep.lower_rhs == pytest.approx(1 - 0.1**27)

    def test_domination_near_one(self):
        rep = domination_inequalities(ParamVector((0.5,) * 3), 0.999, 30)
        # lhs rounds to 1.0 in double precision; the logs keep it below 1
        c, e = rep.log_lower
        assert rep.lower_strict and e < c < 0.0

    def test_domination_degenerate(self):
        with pytest.raises(DomainError):
            domination_inequalities(ParamVector((1.0, 0.5, 0.5)), 0.5, 1)


class TestSnapshots:
    def test_pack_layout(self):
        bits = np.zeros(70, bool)
        bits[[0, 3, 64, 69]] = True
        words = pack_bits(bits)
        assert words.dtype == np.dtype("<u8") and words.size == 2
        assert int(words[0]) == 0b1001 and int(words[1]) == (1 | 1 << 5)
        assert np.array_equal(unpack_bits(words, 70), bits)

    @given(st.integers(1, 9), st.integers(1, 9), st.integers(0, 2**64 - 1), st.integers(0, 99))
    def test_roundtrip(self, a, b, seed, replica):
        import tempfile
        from pathlib import Path

        fld = PlaneField(1, (-3, 2), (-3 + a - 1, 2 + b - 1), np.random.default_rng(seed % 1000).random((a, b)) < 0.5)
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "f.lpf"
            dump_plane_field(path, fld, 3, SeedSpec(seed, replica))
            back, d, s = load_plane_field(path)
        assert back == fld and d == 3 and s == SeedSpec(seed, replica)

    def test_golden_file(self, tmp_path):
        fld = PlaneField(2, (0, -1), (1, 1), np.array([[1, 0, 1], [1, 1, 0]], bool))
        dump_plane_field(tmp_path / "g.lpf", fld, 3, SeedSpec(5, 2))
        expected = (
            b"LPF1" + (3).to_bytes(4, "little") + (2).to_bytes(4, "little")
            + (0).to_bytes(8, "little", signed=True) + (1).to_bytes(8, "little", signed=True)
            + (-1).to_bytes(8, "little", signed=True) + (1).to_bytes(8, "little", signed=True)
            + (5).to_bytes(8, "little") + (2).to_bytes(8, "little") + (6).to_bytes(8, "little")
            + (0b011101).to_bytes(8, "little")
        )
        assert (tmp_path / "g.lpf").read_bytes() == expected


class TestSlice:
    def test_slice_matches_d4_configuration(self):
        params = ParamVector((0.8, 0.7, 0.75, 0.9))
        box = BoxRegion.around_origin(3, 4)
        cfg = Configuration.sample(params, box, SeedSpec(8))
        full = materialize(cfg)[:, :, :, 3]
        sl = sample_slice_fields(params, SeedSpec(8), [(-3, 3)] * 3)
        assert np.array_equal(sl.vacancy(), full)

    def test_d3_product_trivial(self):
        sl = sample_slice_fields(ParamVector((0.5,) * 3), SeedSpec(0), [(0, 2)] * 3)
        assert sl.product.all()
