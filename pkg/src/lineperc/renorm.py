"""Block renormalization on the three-dimensional slice.

Coordinates here follow the block construction: sites are ``(x, y, z)``
with ``z`` the height; ``omega_1`` lives on the ``(x, y)`` plane, ``omega_2``
on ``(x, z)`` and ``omega_3`` on ``(y, z)``; ``omega''`` is the product
of the fields of axes 4..d restricted to the slice.  The lattice-core sites
are recovered by :func:`to_lattice`, ``(x, y, z) -> (z, y, x)``, which makes
the lines of ``omega_i`` the lines parallel to ``e_i`` with retention ``p_i``.

Blocks are ``Gamma(j, l, h) = [jn, jn+n-1] x [ln, ln+n-1] x [hn, hn+n-1]``.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .errors import DomainError, NoCrossingError, OutOfRangeError, PathError
from .lattice import ParamVector, SeedSpec, SliceFields, sample_slice_fields
from .paths import LatticePath, band_product, concat, path_product, reversal
from .planar import Field2D, Rect, leftmost_bottom_top_crossing, lowest_left_right_crossing

Planar = list[tuple[int, int]]


def to_lattice(site: Sequence[int]) -> tuple[int, int, int]:
    x, y, z = site
    return (int(z), int(y), int(x))


def from_lattice(site: Sequence[int]) -> tuple[int, int, int]:
    v0, v1, v2 = site[:3]
    return (int(v2), int(v1), int(v0))


# -- parameters and fields ----------------------------------------------------


@dataclass(frozen=True)
class SplitParams:
    """Line parameters ``p' = (p1, p2, p3)`` and site parameter ``p''``."""

    line: tuple[float, float, float]
    site: float


def split_fields(params: ParamVector) -> SplitParams:
    """``p'`` for the slice line process and ``p'' = p_4 ... p_d`` (1 if d = 3)."""
    return SplitParams(tuple(params.p[:3]), math.prod(params.p[3:]) if params.d > 3 else 1.0)


@dataclass(frozen=True, eq=False)
class RenormFields:
    """The four fields on a box ``[x0, x1] x [y0, y1] x [z0, z1]``."""

    omega1: Field2D
    omega2: Field2D
    omega3: Field2D
    site: np.ndarray  # omega'' indexed [x - x0, y - y0, z - z0]
    origin: tuple[int, int, int]

    @classmethod
    def from_slice(cls, sf: SliceFields) -> "RenormFields":
        (z0, y0, x0) = sf.lo
        w0, w1, w2 = sf.planes
        return cls(
            Field2D(w0.T, x0, y0),
            Field2D(w1.T, x0, z0),
            Field2D(w2.T, y0, z0),
            sf.product.transpose(2, 1, 0),
            (x0, y0, z0),
        )

    @classmethod
    def constant(cls, shape: tuple[int, int, int], value: bool = True, origin=(0, 0, 0)) -> "RenormFields":
        X, Y, Z = shape
        x0, y0, z0 = origin
        return cls(
            Field2D(np.full((X, Y), value), x0, y0),
            Field2D(np.full((X, Z), value), x0, z0),
            Field2D(np.full((Y, Z), value), y0, z0),
            np.full(shape, value),
            tuple(origin),
        )

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.site.shape

    def site_open(self, v) -> bool:
        i = tuple(int(c) - o for c, o in zip(v, self.origin))
        if any(k < 0 or k >= s for k, s in zip(i, self.site.shape)):
            raise OutOfRangeError(f"site {tuple(v)} outside the sampled box")
        return bool(self.site[i])

    def omega_open(self, v) -> bool:
        """Full vacancy: all three line fields and ``omega''`` open at ``v``."""
        x, y, z = v
        return (
            self.omega1.is_open(x, y)
            and self.omega2.is_open(x, z)
            and self.omega3.is_open(y, z)
            and self.site_open(v)
        )


def sample_renorm_fields(
    params: ParamVector, seed: SeedSpec, x_range, y_range, z_range
) -> RenormFields:
    """Sample the block fields on a box; consistent with lattice-core draws."""
    sf = sample_slice_fields(params, seed, [tuple(z_range), tuple(y_range), tuple(x_range)])
    return RenormFields.from_slice(sf)


# -- blocks ---------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class BlockCoord:
    j: int
    l: int
    h: int
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("block side must be >= 1")

    @property
    def lo(self) -> tuple[int, int, int]:
        return (self.j * self.n, self.l * self.n, self.h * self.n)

    def contains(self, v) -> bool:
        return all(o <= c <= o + self.n - 1 for c, o in zip(v, self.lo))

    def adjacent(self, other: "BlockCoord") -> bool:
        return (
            self.n == other.n
            and abs(self.j - other.j) + abs(self.l - other.l) + abs(self.h - other.h) == 1
        )

    def shifted(self, dj=0, dl=0, dh=0) -> "BlockCoord":
        return BlockCoord(self.j + dj, self.l + dl, self.h + dh, self.n)


@dataclass(frozen=True)
class GoodBlockWitness:
    """Canonical crossings certifying that a block is good.

    ``xi2``/``zeta2`` are planar ``(x, z)`` site lists, ``xi3``/``zeta3``
    planar ``(y, z)`` lists.
    """

    coord: BlockCoord
    xi2: tuple
    zeta2: tuple
    xi3: tuple
    zeta3: tuple
    site_open: bool = True

    def start(self) -> tuple[int, int, int]:
        return (self.xi2[0][0], self.xi3[0][0], self.xi2[0][1])

    def swapped(self) -> "GoodBlockWitness":
        """Exchange the roles of ``x`` and ``y`` (and of the two planes)."""
        c = self.coord
        return GoodBlockWitness(
            BlockCoord(c.l, c.j, c.h, c.n), self.xi3, self.zeta3, self.xi2, self.zeta2, self.site_open
        )


def _block_rects(coord: BlockCoord):
    n = coord.n
    return (
        Rect(n, 2 * n, coord.j * n, coord.h * n),
        Rect(2 * n, n, coord.j * n, coord.h * n),
        Rect(n, 2 * n, coord.l * n, coord.h * n),
        Rect(2 * n, n, coord.l * n, coord.h * n),
    )


def block_site_window(fields: RenormFields, coord: BlockCoord) -> np.ndarray:
    lo = coord.lo
    i = [c - o for c, o in zip(lo, fields.origin)]
    if any(k < 0 or k + coord.n > s for k, s in zip(i, fields.shape)):
        raise OutOfRangeError(f"block {coord} outside the sampled box")
    return fields.site[i[0] : i[0] + coord.n, i[1] : i[1] + coord.n, i[2] : i[2] + coord.n]


def is_good_block(fields: RenormFields, coord: BlockCoord) -> GoodBlockWitness | None:
    """Witness if the block is good, ``None`` otherwise."""
    b2, a2, b3, a3 = _block_rects(coord)
    for f, r in ((fields.omega2, b2), (fields.omega2, a2), (fields.omega3, b3), (fields.omega3, a3)):
        if not f.covers(r):
            raise OutOfRangeError(f"field window does not cover {r}")
    if not block_site_window(fields, coord).all():
        return None
    try:
        xi2 = leftmost_bottom_top_crossing(fields.omega2, b2)
        zeta2 = lowest_left_right_crossing(fields.omega2, a2)
        xi3 = leftmost_bottom_top_crossing(fields.omega3, b3)
        zeta3 = lowest_left_right_crossing(fields.omega3, a3)
    except NoCrossingError:
        return None
    return GoodBlockWitness(coord, tuple(xi2), tuple(zeta2), tuple(xi3), tuple(zeta3))


# -- bridges ----------------------------------------------------------------------


def _stop(p: Sequence, z: int) -> Planar:
    for i, s in enumerate(p):
        if s[1] == z:
            return list(p[: i + 1])
    return list(p)


def _until_hit(p: Sequence, targets: set) -> Planar:
    for i, s in enumerate(p):
        if s in targets:
            return list(p[: i + 1])
    raise PathError("path never meets its target")


def _travel_to(path: Sequence, start, targets: set) -> Planar:
    """Along ``path`` from ``start`` to the first site of ``targets``,
    forward if that reaches the targets, otherwise backward."""
    i = list(path).index(start)
    for seg in (list(path[i:]), list(path[: i + 1])[::-1]):
        for k, s in enumerate(seg):
            if s in targets:
                return seg[: k + 1]
    raise PathError("crossing does not meet the target path")


def _p2(p: Planar) -> LatticePath:
    return LatticePath([(a, 0, z) for a, z in p])


def _p3(p: Planar) -> LatticePath:
    return LatticePath([(0, b, z) for b, z in p])


def _beta_down(xi_a, xi_b, zeta_b, col: int, n: int, top: int) -> Planar:
    """Descent from the top of ``xi_a`` to the start of ``xi_b`` inside the
    upper block (vertical neighbours)."""
    right = col + n - 1
    b_prime = []
    for s in zeta_b:
        b_prime.append(s)
        if s[0] == right:
            break
    c_prime = _stop(xi_b, top)
    part1 = _until_hit(list(xi_a)[::-1], set(b_prime))
    part2 = _travel_to(b_prime, part1[-1], set(c_prime))
    q = c_prime.index(part2[-1])
    part3 = c_prime[: q + 1][::-1]
    return part1 + part2[1:] + part3[1:]


def _bridge_up(A: GoodBlockWitness, B: GoodBlockWitness) -> LatticePath:
    n = A.coord.n
    top = B.coord.h * n + n - 1
    xi = path_product(_p2(list(A.xi2)), _p3(list(A.xi3)))
    beta2 = _beta_down(A.xi2, B.xi2, B.zeta2, A.coord.j * n, n, top)
    beta3 = _beta_down(A.xi3, B.xi3, B.zeta3, A.coord.l * n, n, top)
    return concat(xi, band_product(_p2(beta2), _p3(beta3)))


def _bridge_right(A: GoodBlockWitness, B: GoodBlockWitness) -> LatticePath:
    """Neighbours with ``j' = j + 1``."""
    n = A.coord.n
    top = A.coord.h * n + n - 1
    c_prime = _stop(B.xi2, top)
    first = _until_hit(_stop(A.xi2, top), set(A.zeta2))
    middle = _travel_to(list(A.zeta2), first[-1], set(c_prime))
    q = c_prime.index(middle[-1])
    alpha2 = first + middle[1:] + c_prime[q + 1 :]
    alpha3 = _stop(A.xi3, top)
    alpha = band_product(_p2(alpha2), _p3(alpha3))
    beta = path_product(_p2(c_prime[::-1]), _p3(alpha3[::-1]))
    return concat(alpha, beta)


def _swap_xy(path: LatticePath) -> LatticePath:
    return LatticePath([(y, x, z) for x, y, z in path], check=False)


def bridge_blocks(A: GoodBlockWitness, B: GoodBlockWitness) -> LatticePath:
    """Path between the crossing starts of two good neighbouring blocks whose
    projections stay on the blocks' canonical crossings."""
    a, b = A.coord, B.coord
    if not a.adjacent(b):
        raise DomainError(f"blocks {a} and {b} are not neighbours")
    if a.n < 2:
        raise DomainError("bridges need block side n >= 2")
    if not (A.site_open and B.site_open):
        raise DomainError("bridges need good blocks")
    dj, dl, dh = b.j - a.j, b.l - a.l, b.h - a.h
    if dh == 1:
        return _bridge_up(A, B)
    if dj == 1:
        return _bridge_right(A, B)
    if dl == 1:
        return _swap_xy(_bridge_right(A.swapped(), B.swapped()))
    return reversal(bridge_blocks(B, A))


def bridge_checks(A: GoodBlockWitness, B: GoodBlockWitness, path: LatticePath) -> dict[str, bool]:
    """Instance checker for the four bridge properties plus step validity."""
    s2 = set(A.xi2) | set(A.zeta2) | set(B.xi2) | set(B.zeta2)
    s3 = set(A.xi3) | set(A.zeta3) | set(B.xi3) | set(B.zeta3)
    sites = path.sites
    return {
        "steps": all(
            sum(abs(p - q) for p, q in zip(u, v)) == 1 for u, v in zip(sites, sites[1:])
        ),
        "item1_contained": all(A.coord.contains(v) or B.coord.contains(v) for v in sites),
        "item2_endpoints": sites[0] == A.start() and sites[-1] == B.start(),
        "item3_pi2": all((x, z) in s2 for x, _, z in sites),
        "item4_pi3": all((y, z) in s3 for _, y, z in sites),
    }


# -- regions and crossings -----------------------------------------------------------


@dataclass(frozen=True)
class RenormRegion:
    """The staircase region ``R(c log k, k)`` of blocks of side ``n``."""

    c: float
    k: int
    n: int = 8

    def __post_init__(self):
        if self.c <= 0 or self.k < 1 or self.n < 1:
            raise DomainError("need c > 0, k >= 1, n >= 1")

    @property
    def width(self) -> int:
        return max(1, math.ceil(self.c * math.log(self.k)))

    def block(self, j: int, h: int) -> BlockCoord:
        return BlockCoord(j // 2, (j + 1) // 2, h, self.n)

    def blocks(self) -> list[BlockCoord]:
        return [self.block(j, h) for h in range(self.k) for j in range(self.width)]

    def block_set(self) -> set[BlockCoord]:
        return set(self.blocks())

    def field_ranges(self):
        """Coordinate ranges the fields must cover (crossing rectangles included)."""
        jmax = max(b.j for b in self.blocks())
        lmax = max(b.l for b in self.blocks())
        n = self.n
        return (0, (jmax + 2) * n - 1), (0, (lmax + 2) * n - 1), (0, (self.k + 1) * n - 1)

    def contains_site(self, v) -> bool:
        n = self.n
        return BlockCoord(v[0] // n, v[1] // n, v[2] // n, n) in self.block_set()


def sample_region_fields(params: ParamVector, seed: SeedSpec, region: RenormRegion) -> RenormFields:
    return sample_renorm_fields(params, seed, *region.field_ranges())


def good_block_grid(fields: RenormFields, region: RenormRegion) -> dict[BlockCoord, GoodBlockWitness | None]:
    return {b: is_good_block(fields, b) for b in region.blocks()}


def good_block_crossing(
    fields: RenormFields, region: RenormRegion, grid: dict | None = None
) -> list[BlockCoord] | None:
    """Bottom-to-top path of good blocks inside the region (BFS, so a
    shortest one), or ``None``."""
    grid = grid if grid is not None else good_block_grid(fields, region)
    good = {b for b, w in grid.items() if w is not None}
    order = region.blocks()
    starts = [b for b in order if b.h == 0 and b in good]
    prev: dict[BlockCoord, BlockCoord | None] = {b: None for b in starts}
    queue = deque(starts)
    while queue:
        b = queue.popleft()
        if b.h == region.k - 1:
            path = [b]
            while prev[path[-1]] is not None:
                path.append(prev[path[-1]])
            return path[::-1]
        for d in ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)):
            nb = b.shifted(*d)
            if nb in good and nb not in prev:
                prev[nb] = b
                queue.append(nb)
    return None


@dataclass
class SpanningPath:
    path: LatticePath
    block_path: list[BlockCoord]
    start_height: int
    end_height: int
    in_region: bool
    partial_open: bool  # omega'' open with omega_2 / omega_3 open projections
    omega_open: bool  # additionally omega_1 open: every site vacant

    @property
    def ok(self) -> bool:
        return self.in_region and self.partial_open


def extract_spanning_path(
    fields: RenormFields,
    region: RenormRegion,
    block_path: Sequence[BlockCoord],
    grid: dict | None = None,
) -> SpanningPath:
    """Concatenate bridges along a good-block crossing."""
    if not block_path:
        raise DomainError("empty block path")
    rs = region.block_set()
    if block_path[0].h != 0 or block_path[-1].h != region.k - 1:
        raise DomainError("block path must run from height 0 to k - 1")
    witnesses = []
    for b in block_path:
        if b not in rs:
            raise DomainError(f"block {b} outside the region")
        w = grid.get(b) if grid is not None else is_good_block(fields, b)
        if w is None:
            raise DomainError(f"block {b} is not good")
        witnesses.append(w)
    for a, b in zip(block_path, block_path[1:]):
        if not a.adjacent(b):
            raise DomainError(f"blocks {a} and {b} are not neighbours")
    if len(witnesses) == 1:
        path = LatticePath([witnesses[0].start()])
    else:
        path = concat(*[bridge_blocks(a, b) for a, b in zip(witnesses, witnesses[1:])])
    partial = all(
        fields.site_open(v) and fields.omega2.is_open(v[0], v[2]) and fields.omega3.is_open(v[1], v[2])
        for v in path
    )
    full = partial and all(fields.omega1.is_open(v[0], v[1]) for v in path)
    return SpanningPath(
        path,
        list(block_path),
        path.first[2],
        path.last[2],
        all(region.contains_site(v) for v in path),
        partial,
        full,
    )


def region_report(fields: RenormFields, region: RenormRegion, with_path: bool = True) -> dict:
    """JSON-ready scan: good/bad grid indexed ``[h][j]`` and the crossing."""
    grid = good_block_grid(fields, region)
    crossing = good_block_crossing(fields, region, grid)
    rows = [
        [grid[region.block(j, h)] is not None for j in range(region.width)] for h in range(region.k)
    ]
    out = {
        "n": region.n,
        "c": region.c,
        "k": region.k,
        "width": region.width,
        "good": rows,
        "good_fraction": float(np.mean(rows)),
        "crossing": None if crossing is None else [[b.j, b.l, b.h] for b in crossing],
    }
    if with_path and crossing is not None:
        sp = extract_spanning_path(fields, region, crossing, grid)
        out["path"] = [list(v) for v in sp.path]
        out["path_omega_open"] = sp.omega_open
    return out


# -- the diagonal plane -------------------------------------------------------------


@dataclass(frozen=True)
class DiagonalPatch:
    """The slab ``{v : v_1 + v_2 + v_3 in {k-1, k, k+1}}`` inside ``B(radius)``
    (lattice coordinates, other coordinates zero)."""

    k: int
    radius: int
    sites: np.ndarray  # Boolean membership mask over the box
    open: np.ndarray  # vacancy restricted to the patch
    cluster_size: int
    reaches_boundary: bool

    @property
    def anchor(self) -> tuple[int, int, int]:
        return (self.k, 0, 0)


def diagonal_plane_patch(fields: SliceFields, k: int, radius: int) -> DiagonalPatch:
    """Induced process on the diagonal patch and the cluster of its anchor
    ``(k, 0, 0)`` under nearest-neighbour adjacency inside the patch."""
    if radius < 0 or abs(k) > radius:
        raise DomainError("need |k| <= radius")
    lo, hi = (-radius,) * 3, (radius,) * 3
    if any(a > b for a, b in zip(fields.lo, lo)) or any(a < b for a, b in zip(fields.hi, hi)):
        raise OutOfRangeError("fields do not cover the patch")
    vac = fields.vacancy()
    off = [-radius - l for l in fields.lo]
    sl = tuple(slice(o, o + 2 * radius + 1) for o in off)
    vac = vac[sl]
    g = np.arange(-radius, radius + 1)
    s = g[:, None, None] + g[None, :, None] + g[None, None, :]
    member = (s >= k - 1) & (s <= k + 1)
    bits = vac & member
    a = (k + radius, radius, radius)
    if not bits[a]:
        return DiagonalPatch(k, radius, member, bits, 0, False)
    labels, sizes = kernels.label_components(bits)
    lab = labels[a]
    comp = labels == lab
    edge = np.zeros_like(comp)
    for ax in range(3):
        idx = [slice(None)] * 3
        idx[ax] = 0
        edge[tuple(idx)] = True
        idx[ax] = -1
        edge[tuple(idx)] = True
    return DiagonalPatch(k, radius, member, bits, int(sizes[lab - 1]), bool((comp & edge).any()))
