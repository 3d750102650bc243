"""Model parameters, hyperplane fields and the induced vacant set.

A site ``v`` of Z^d is open (vacant) iff for every axis ``i`` the line through
``v`` parallel to ``e_i`` was kept, i.e. iff ``omega_i(pi_i(v)) == 1`` where
``pi_i`` drops coordinate ``i``.  Only the plane windows covering the
projections of a box are ever stored.

Axes are 0-based throughout the code base (axis 0 is ``e_1``).
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import rng
from .errors import CapacityError, DomainError, LinePercError, OutOfRangeError

DEFAULT_MAX_SITES = 1 << 28


@dataclass(frozen=True)
class ParamVector:
    """Dimension and the ``d`` line-retention probabilities."""

    p: tuple[float, ...]

    def __post_init__(self):
        p = tuple(float(x) for x in self.p)
        object.__setattr__(self, "p", p)
        if len(p) < 3:
            raise DomainError(f"dimension must be >= 3, got {len(p)}")
        for x in p:
            if not 0.0 <= x <= 1.0 or math.isnan(x):
                raise DomainError(f"probabilities must lie in [0, 1], got {x}")

    @property
    def d(self) -> int:
        return len(self.p)

    @classmethod
    def diagonal(cls, rho: float, d: int = 3) -> "ParamVector":
        return cls((rho,) * d)


@dataclass(frozen=True)
class BoxRegion:
    """The l-infinity box ``center + [-n, n]^d``."""

    center: tuple[int, ...]
    n: int

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(int(c) for c in self.center))
        if self.n < 0:
            raise DomainError("box radius must be nonnegative")

    @classmethod
    def around_origin(cls, n: int, d: int = 3) -> "BoxRegion":
        return cls((0,) * d, n)

    @property
    def d(self) -> int:
        return len(self.center)

    @property
    def side(self) -> int:
        return 2 * self.n + 1

    @property
    def volume(self) -> int:
        return self.side ** self.d

    @property
    def lo(self) -> tuple[int, ...]:
        return tuple(c - self.n for c in self.center)

    @property
    def hi(self) -> tuple[int, ...]:
        return tuple(c + self.n for c in self.center)

    def contains(self, site: Sequence[int]) -> bool:
        return len(site) == self.d and all(
            abs(int(s) - c) <= self.n for s, c in zip(site, self.center)
        )

    def on_boundary(self, site: Sequence[int]) -> bool:
        """Sites of the box with a nearest neighbour outside it."""
        return self.contains(site) and any(
            abs(int(s) - c) == self.n for s, c in zip(site, self.center)
        )

    def projection_ranges(self, axis: int) -> list[tuple[int, int]]:
        return [(l, h) for k, (l, h) in enumerate(zip(self.lo, self.hi)) if k != axis]


@dataclass(frozen=True)
class SeedSpec:
    """Master seed and replica index; together they key every draw."""

    seed: int
    replica: int = 0

    def __post_init__(self):
        if self.replica < 0:
            raise DomainError("replica index must be nonnegative")
        object.__setattr__(self, "seed", int(self.seed) & rng.MASK64)


@dataclass(frozen=True, eq=False)
class PlaneField:
    """Bernoulli field ``omega_axis`` on a window of the hyperplane ``P_axis``.

    ``lo``/``hi`` are inclusive bounds of the window, one pair per remaining
    coordinate (coordinate ``axis`` removed, order otherwise preserved).
    """

    axis: int
    lo: tuple[int, ...]
    hi: tuple[int, ...]
    bits: np.ndarray

    def __post_init__(self):
        shape = tuple(h - l + 1 for l, h in zip(self.lo, self.hi))
        if self.bits.shape != shape:
            raise LinePercError(f"bit array shape {self.bits.shape} != window {shape}")

    def __eq__(self, other):
        return (
            isinstance(other, PlaneField)
            and self.axis == other.axis
            and self.lo == other.lo
            and self.hi == other.hi
            and np.array_equal(self.bits, other.bits)
        )

    @property
    def volume(self) -> int:
        return int(self.bits.size)

    def covers(self, ranges: Sequence[tuple[int, int]]) -> bool:
        return all(l >= wl and h <= wh for (l, h), wl, wh in zip(ranges, self.lo, self.hi))

    def is_open(self, coords: Sequence[int]) -> bool:
        idx = tuple(int(c) - l for c, l in zip(coords, self.lo))
        if any(i < 0 or i >= s for i, s in zip(idx, self.bits.shape)):
            raise OutOfRangeError(f"plane site {tuple(coords)} outside window")
        return bool(self.bits[idx])

    def restrict(self, ranges: Sequence[tuple[int, int]]) -> "PlaneField":
        if not self.covers(ranges):
            raise OutOfRangeError("restriction window not covered")
        sl = tuple(slice(l - wl, h - wl + 1) for (l, h), wl in zip(ranges, self.lo))
        return PlaneField(
            self.axis,
            tuple(l for l, _ in ranges),
            tuple(h for _, h in ranges),
            self.bits[sl].copy(),
        )


def plane_uniforms(seed: SeedSpec, axis: int, ranges: Sequence[tuple[int, int]]) -> np.ndarray:
    """The per-line uniform draws behind ``omega_axis`` on a window."""
    return rng.uniform_grid(seed.seed, seed.replica, axis, ranges)


def sample_plane_window(
    prob: float, seed: SeedSpec, axis: int, ranges: Sequence[tuple[int, int]]
) -> PlaneField:
    """Sample ``omega_axis`` on an arbitrary window (line kept iff u < p)."""
    ranges = [(int(l), int(h)) for l, h in ranges]
    bits = plane_uniforms(seed, axis, ranges) < prob
    return PlaneField(axis, tuple(l for l, _ in ranges), tuple(h for _, h in ranges), bits)


def sample_plane_fields(params: ParamVector, box: BoxRegion, seed: SeedSpec) -> list[PlaneField]:
    """Sample the ``d`` plane fields whose windows are the projections of ``box``."""
    if box.d != params.d:
        raise DomainError("box dimension does not match parameter vector")
    return [
        sample_plane_window(params.p[i], seed, i, box.projection_ranges(i))
        for i in range(params.d)
    ]


class Configuration:
    """A box together with the plane fields that determine it.

    The site bitset is computed on first request and cached; the object is
    otherwise immutable.
    """

    def __init__(self, box: BoxRegion, fields: Sequence[PlaneField], max_sites: int = DEFAULT_MAX_SITES):
        if len(fields) != box.d:
            raise DomainError("need one plane field per axis")
        for i, f in enumerate(fields):
            if f.axis != i:
                raise DomainError("fields must be ordered by axis")
            if not f.covers(box.projection_ranges(i)):
                raise OutOfRangeError(f"field {i} does not cover the box projection")
        self.box = box
        self.fields = tuple(fields)
        self.max_sites = max_sites
        self._bits = None

    @classmethod
    def sample(cls, params: ParamVector, box: BoxRegion, seed: SeedSpec, **kw) -> "Configuration":
        return cls(box, sample_plane_fields(params, box, seed), **kw)

    @property
    def d(self) -> int:
        return self.box.d

    def vacancy(self, site: Sequence[int]) -> bool:
        """True iff every projection of ``site`` is open."""
        if not self.box.contains(site):
            raise OutOfRangeError(f"site {tuple(site)} outside box")
        for i, f in enumerate(self.fields):
            if not f.is_open([c for k, c in enumerate(site) if k != i]):
                return False
        return True

    def materialize(self) -> np.ndarray:
        """Boolean array over the box, indexed by ``site - box.lo``."""
        if self._bits is None:
            if self.box.volume > self.max_sites:
                raise CapacityError(
                    f"box volume {self.box.volume} exceeds limit {self.max_sites}"
                )
            d = self.d
            out = np.ones((self.box.side,) * d, dtype=bool)
            for i, f in enumerate(self.fields):
                window = f.restrict(self.box.projection_ranges(i)).bits
                out &= np.expand_dims(window, axis=i)
            out.setflags(write=False)
            self._bits = out
        return self._bits


def vacancy(config: Configuration, site: Sequence[int]) -> bool:
    return config.vacancy(site)


def materialize(config: Configuration) -> np.ndarray:
    return config.materialize()


def _log(p: float) -> float:
    return -math.inf if p == 0.0 else math.log(p)


def log_prob_box_all_vacant(params: ParamVector, n: int) -> float:
    if n < 0:
        raise DomainError("n must be nonnegative")
    lines = (2 * n + 1) ** (params.d - 1)
    terms = [lines * _log(p) for p in params.p]
    if any(t == -math.inf for t in terms):
        return -math.inf
    return math.fsum(terms)


def prob_box_all_vacant(params: ParamVector, n: int) -> float:
    """Exact ``P(B(n) subset V) = prod_i p_i^((2n+1)^(d-1))``."""
    return math.exp(log_prob_box_all_vacant(params, n))


@dataclass
class DominationReport:
    n: int
    upper_lhs: float
    upper_rhs: float
    upper_strict: bool
    lower_lhs: float
    lower_rhs: float
    lower_strict: bool
    log_upper: tuple[float, float] = field(repr=False, default=(0.0, 0.0))
    log_lower: tuple[float, float] = field(repr=False, default=(0.0, 0.0))
    n0: int | None = None

    @property
    def both_strict(self) -> bool:
        return self.upper_strict and self.lower_strict


def _domination_at(params: ParamVector, p_bern: float, n: int) -> DominationReport:
    d = params.d
    side = 2 * n + 1
    # P_p(B(n) in V) >= min p_i^(d side^(d-1))  vs  Bernoulli p^(side^d)
    a = d * side ** (d - 1) * math.log(min(params.p))
    b = side ** d * math.log(p_bern)
    # P_p(B(n) meets V) <= 1 - (1 - p_1)^(side^(d-1))  vs  1 - (1 - p)^(side^d)
    # compare the complements: (1-p_1)^... > (1-p)^...  <=>  strict inequality
    c = side ** (d - 1) * math.log1p(-params.p[0])
    e = side ** d * math.log1p(-p_bern)
    return DominationReport(
        n=n,
        upper_lhs=math.exp(a),
        upper_rhs=math.exp(b),
        upper_strict=a > b,
        lower_lhs=-math.expm1(c),
        lower_rhs=-math.expm1(e),
        lower_strict=c > e,
        log_upper=(a, b),
        log_lower=(c, e),
    )


def domination_inequalities(
    params: ParamVector, p_bern: float, n: int, scan_max: int = 64
) -> DominationReport:
    """Evaluate the two non-domination inequalities at ``n``.

    The ``n0`` field holds the smallest ``m <= scan_max`` such that both
    inequalities are strict for every ``m' in [m, scan_max]`` (``None`` if
    they do not both hold at ``scan_max``).  All comparisons are made on the
    logarithms, so exponents of order 10^5 cause no underflow.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    for x in (*params.p, p_bern):
        if x <= 0.0 or x >= 1.0:
            raise DomainError("inequalities degenerate for parameters in {0, 1}")
    report = _domination_at(params, p_bern, n)
    n0 = None
    for m in range(max(scan_max, n), 0, -1):
        if _domination_at(params, p_bern, m).both_strict:
            n0 = m
        else:
            break
    report.n0 = n0
    return report


# -- snapshot files ---------------------------------------------------------

MAGIC = b"LPF1"


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Row-major bits into little-endian uint64 words, last word zero-padded."""
    flat = np.ascontiguousarray(bits, dtype=bool).ravel()
    packed = np.packbits(flat, bitorder="little")
    pad = (-packed.size) % 8
    if pad:
        packed = np.concatenate([packed, np.zeros(pad, dtype=np.uint8)])
    return packed.view("<u8").copy()


def unpack_bits(words: np.ndarray, count: int) -> np.ndarray:
    raw = np.asarray(words, dtype="<u8").view(np.uint8)
    return np.unpackbits(raw, bitorder="little", count=count).astype(bool)


def dump_plane_field(path, fld: PlaneField, d: int, seed: SeedSpec) -> None:
    """Write ``fld`` to a ``LPF1`` snapshot file."""
    header = [MAGIC, struct.pack("<II", d, fld.axis)]
    for l, h in zip(fld.lo, fld.hi):
        header.append(struct.pack("<qq", l, h))
    header.append(struct.pack("<QQQ", seed.seed, seed.replica, fld.volume))
    with open(path, "wb") as fh:
        fh.write(b"".join(header))
        fh.write(pack_bits(fld.bits).tobytes())


def load_plane_field(path) -> tuple[PlaneField, int, SeedSpec]:
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise LinePercError("not a LPF1 snapshot")
    d, axis = struct.unpack_from("<II", data, 4)
    off = 12
    lo, hi = [], []
    for _ in range(d - 1):
        l, h = struct.unpack_from("<qq", data, off)
        lo.append(l)
        hi.append(h)
        off += 16
    seed, replica, nbits = struct.unpack_from("<QQQ", data, off)
    off += 24
    nwords = (nbits + 63) // 64
    words = np.frombuffer(data, dtype="<u8", count=nwords, offset=off)
    shape = tuple(h - l + 1 for l, h in zip(lo, hi))
    bits = unpack_bits(words, nbits).reshape(shape)
    return PlaneField(axis, tuple(lo), tuple(hi), bits), d, SeedSpec(seed, replica)


# -- the three-dimensional slice S = span(e1, e2, e3) -------------------------


@dataclass(frozen=True, eq=False)
class SliceFields:
    """Fields that determine the vacant set on a box of ``S = Z^3 x {0}``.

    ``planes[i]`` is ``omega_i`` (axis ``i < 3``) on the window spanned by the
    two other coordinates among the first three, in increasing axis order.
    ``product`` is the site field ``omega''(v) = prod_{i >= 3} omega_i(pi_i(v))``
    over the box (identically open when ``d == 3``).
    """

    lo: tuple[int, int, int]
    hi: tuple[int, int, int]
    planes: tuple[np.ndarray, np.ndarray, np.ndarray]
    product: np.ndarray

    def vacancy(self) -> np.ndarray:
        w0, w1, w2 = self.planes
        return w0[None, :, :] & w1[:, None, :] & w2[:, :, None] & self.product


def sample_slice_fields(
    params: ParamVector, seed: SeedSpec, ranges: Sequence[tuple[int, int]]
) -> SliceFields:
    """Sample everything needed for vacancy on ``S`` restricted to the box
    ``ranges`` (three inclusive coordinate ranges).  Consistent with
    :func:`sample_plane_fields`: the same draws decide the same lines."""
    ranges = [(int(l), int(h)) for l, h in ranges]
    if len(ranges) != 3:
        raise DomainError("need three coordinate ranges")
    d = params.d
    zeros = [(0, 0)] * (d - 3)
    planes = []
    for i in range(3):
        rest = [r for k, r in enumerate(ranges) if k != i] + zeros
        u = rng.uniform_grid(seed.seed, seed.replica, i, rest)
        planes.append(u.reshape(u.shape[:2]) < params.p[i])
    shape = tuple(h - l + 1 for l, h in ranges)
    product = np.ones(shape, dtype=bool)
    for i in range(3, d):
        rest = list(ranges) + [(0, 0)] * (d - 4)
        u = rng.uniform_grid(seed.seed, seed.replica, i, rest)
        product &= u.reshape(shape) < params.p[i]
    return SliceFields(
        tuple(l for l, _ in ranges), tuple(h for _, h in ranges), tuple(planes), product
    )
