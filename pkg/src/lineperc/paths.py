"""Nearest-neighbour paths in Z^3 and the product of a P2-path with a
P3-path.

Heights are the third coordinate.  ``P2`` is the plane ``y = 0`` and ``P3``
the plane ``x = 0``; ``(x, 0, z) x (0, y, z) = (x, y, z)``.

Paths are immutable site tuples.  Concatenations may revisit sites; use
:func:`simplify` (chronological loop erasure) when a self-avoiding path is
needed.
"""

from __future__ import annotations

from typing import Iterable, Sequence

from .errors import PathError

Site = tuple[int, int, int]


class LatticePath(Sequence):
    """Ordered nearest-neighbour site sequence in Z^3."""

    __slots__ = ("sites",)

    def __init__(self, sites: Iterable[Sequence[int]], check: bool = True):
        s = tuple((int(a), int(b), int(c)) for a, b, c in sites)
        if check:
            if not s:
                raise PathError("a path needs at least one site")
            for u, v in zip(s, s[1:]):
                if abs(u[0] - v[0]) + abs(u[1] - v[1]) + abs(u[2] - v[2]) != 1:
                    raise PathError(f"sites {u} and {v} are not nearest neighbours")
        self.sites = s

    def __getitem__(self, i):
        if isinstance(i, slice):
            return LatticePath(self.sites[i], check=False)
        return self.sites[i]

    def __len__(self):
        return len(self.sites)

    def __iter__(self):
        return iter(self.sites)

    def __eq__(self, other):
        if isinstance(other, LatticePath):
            return self.sites == other.sites
        return NotImplemented

    def __hash__(self):
        return hash(self.sites)

    def __repr__(self):
        if len(self.sites) > 6:
            return f"LatticePath({list(self.sites[:3])} ... {self.sites[-1]}, len={len(self)})"
        return f"LatticePath({list(self.sites)})"

    @property
    def first(self) -> Site:
        return self.sites[0]

    @property
    def last(self) -> Site:
        return self.sites[-1]

    def heights(self) -> list[int]:
        return [v[2] for v in self.sites]

    def site_set(self) -> set[Site]:
        return set(self.sites)

    def in_plane(self, plane: int) -> bool:
        """True if the path lies in ``P2`` (``plane=2``) or ``P3`` (``plane=3``)."""
        k = {2: 1, 3: 0}[plane]
        return all(v[k] == 0 for v in self.sites)

    def dumps(self) -> str:
        return "".join(f"{x} {y} {z}\n" for x, y, z in self.sites)

    @classmethod
    def loads(cls, text: str) -> "LatticePath":
        rows = [line.split() for line in text.splitlines() if line.strip()]
        return cls([tuple(int(t) for t in r) for r in rows])


class PlanarPath(LatticePath):
    """A path constrained to ``P2`` (y = 0) or ``P3`` (x = 0)."""

    __slots__ = ("plane",)

    def __init__(self, sites, plane: int, check: bool = True):
        super().__init__(sites, check=check)
        if plane not in (2, 3):
            raise PathError("plane must be 2 or 3")
        self.plane = plane
        if check and not self.in_plane(plane):
            raise PathError(f"path leaves plane P{plane}")


def height(v: Sequence[int]) -> int:
    return int(v[2])


def height_variation(path: LatticePath) -> int:
    """``h(v_m) - h(v_0)``."""
    if len(path) == 0:
        raise PathError("empty path")
    return path.last[2] - path.first[2]


def hitting_time(path: LatticePath, k: int) -> int | None:
    """First index at which the path has height ``k`` (``None`` if never)."""
    for j, v in enumerate(path):
        if v[2] == k:
            return j
    return None


def stop_at_height(path: LatticePath, k: int) -> LatticePath:
    """``path ^ k``: prefix up to the first visit of height ``k`` (whole path if none)."""
    t = hitting_time(path, k)
    return path if t is None else path[: t + 1]


def reversal(path: LatticePath) -> LatticePath:
    return LatticePath(path.sites[::-1], check=False)


def concat(a: LatticePath, *rest: LatticePath) -> LatticePath:
    """``a * b * ...``; each path must start where the previous one ends."""
    sites = list(a.sites)
    for b in rest:
        if sites[-1] != b.first:
            raise PathError(f"cannot concatenate: {sites[-1]} != {b.first}")
        sites.extend(b.sites[1:])
    return LatticePath(sites, check=False)


def juxtapose(a: LatticePath, b: LatticePath) -> LatticePath:
    """Follow ``a`` until it first hits ``b``, then follow ``b`` to its end."""
    first_in_b: dict[Site, int] = {}
    for j, w in enumerate(b.sites):
        first_in_b.setdefault(w, j)
    for i, v in enumerate(a.sites):
        j = first_in_b.get(v)
        if j is not None:
            return LatticePath(a.sites[:i] + b.sites[j:], check=False)
    raise PathError("juxtaposition of disjoint paths")


def simplify(path: LatticePath) -> LatticePath:
    """Chronological loop erasure; keeps both endpoints."""
    out: list[Site] = []
    where: dict[Site, int] = {}
    for v in path.sites:
        j = where.get(v)
        if j is not None:
            for u in out[j + 1 :]:
                del where[u]
            del out[j + 1 :]
        else:
            where[v] = len(out)
            out.append(v)
    return LatticePath(out, check=False)


def is_self_avoiding(path: LatticePath) -> bool:
    return len(set(path.sites)) == len(path)


def site_product(v: Sequence[int], w: Sequence[int]) -> Site:
    """``(x, 0, z) x (0, y, z) = (x, y, z)``."""
    if v[2] != w[2]:
        raise PathError(f"height mismatch in site product: {v[2]} != {w[2]}")
    return (int(v[0]), int(w[1]), int(v[2]))


def pi2(v: Sequence[int]) -> Site:
    return (int(v[0]), 0, int(v[2]))


def pi3(v: Sequence[int]) -> Site:
    return (0, int(v[1]), int(v[2]))


def compatibility_report(g: LatticePath, gp: LatticePath) -> dict[str, bool]:
    """Evaluate the four compatibility conditions separately."""
    if len(g) == 0 or len(gp) == 0:
        raise PathError("empty path")
    c1 = g.in_plane(2) and gp.in_plane(3)
    c2 = g.first[2] == gp.first[2] and g.last[2] == gp.last[2]
    c3 = True
    c4 = True
    for p in (g, gp):
        h = height_variation(p)
        z0 = p.first[2]
        if any((z - z0) * h < 0 for z in p.heights()):
            c3 = False
        if hitting_time(p, p.last[2]) != len(p) - 1:
            c4 = False
    return {"comp_1": c1, "comp_2": c2, "comp_3": c3, "comp_4": c4}


def is_compatible(g: LatticePath, gp: LatticePath) -> bool:
    return all(compatibility_report(g, gp).values())


# -- the product construction ---------------------------------------------
#
# Internally a P2-path is a list of (x, z) pairs and a P3-path a list of
# (y, z) pairs; products are lists of (x, y, z).  Both inputs of _prod are
# compatible, start at a common height and go up (downward pairs are handled
# by mirroring the height).

Planar = list[tuple[int, int]]


def _mirror(p: Planar, z0: int) -> Planar:
    return [(a, 2 * z0 - z) for a, z in p]


def _rev(p: Planar) -> Planar:
    return p[::-1]


def _first_hit(p: Planar, k: int, start: int = 0) -> int | None:
    for j in range(start, len(p)):
        if p[j][1] == k:
            return j
    return None


def _stop(p: Planar, k: int) -> Planar:
    t = _first_hit(p, k)
    return p if t is None else p[: t + 1]


def _join(parts: list[list[Site]]) -> list[Site]:
    out = list(parts[0])
    for q in parts[1:]:
        if out[-1] != q[0]:
            raise AssertionError(f"internal product junction mismatch {out[-1]} != {q[0]}")
        out.extend(q[1:])
    return out


def _prod(g: Planar, gp: Planar) -> list[Site]:
    """Product of a compatible pair with arbitrary sign of variation."""
    z0 = g[0][1]
    h = g[-1][1] - z0
    if h < 0:
        out = _prod_up(_mirror(g, z0), _mirror(gp, z0))
        return [(x, y, 2 * z0 - z) for x, y, z in out]
    return _prod_up(g, gp)


def _prod_up(g: Planar, gp: Planar) -> list[Site]:
    z0 = g[0][1]
    h = g[-1][1] - z0
    if h == 0:
        return [(g[0][0], gp[0][0], z0)]
    if h == 1:
        # horizontal runs at z0 followed by a single up-step
        out = [(a, gp[0][0], z0) for a, _ in g[:-1]]
        xe = g[-2][0]
        out += [(xe, b, z0) for b, _ in gp[1:-1]]
        out.append((xe, gp[-1][0], z0 + 1))
        return out
    top = z0 + h - 1  # the intermediate height h0 (relative h - 1)

    def times(p: Planar) -> list[int]:
        t = [0]
        while True:
            nxt = _first_hit(p, top if len(t) % 2 == 1 else z0, t[-1])
            if nxt is None:
                return t
            t.append(nxt)

    t, tp = times(g), times(gp)
    # the last recorded time is a visit of the intermediate height
    assert len(t) % 2 == 0 and len(tp) % 2 == 0
    pieces = [g[t[j] : t[j + 1] + 1] for j in range(len(t) - 1)]
    piecesp = [gp[tp[j] : tp[j + 1] + 1] for j in range(len(tp) - 1)]
    tail, tailp = g[t[-1] :], gp[tp[-1] :]

    def after_last_base(p: Planar) -> Planar:
        last0 = max(j for j, (_, z) in enumerate(p) if z == z0)
        return p[last0:]

    eta_p = after_last_base(piecesp[0])
    zeta = after_last_base(pieces[-1])
    zeta_p = after_last_base(piecesp[-1])

    parts = [_prod(pieces[0], piecesp[0])]
    for j in range(1, len(pieces)):
        parts.append(_prod(pieces[j], _rev(eta_p) if j % 2 == 1 else eta_p))
    for j in range(1, len(piecesp)):
        parts.append(_prod(_rev(zeta) if j % 2 == 1 else zeta, piecesp[j]))

    def last_two(z: Planar, tl: Planar) -> tuple[Planar, Planar]:
        # back down along zeta to its first point one level above the base,
        # then forward again along zeta and through the tail
        down = _stop(_rev(z), z0 + 1)
        return down, _rev(down) + tl[1:]

    a1, a2 = last_two(zeta, tail)
    b1, b2 = last_two(zeta_p, tailp)
    parts.append(_prod(a1, b1))
    parts.append(_prod(a2, b2))
    return _join(parts)


def _planar(path: LatticePath, plane: int) -> Planar:
    k = 0 if plane == 2 else 1
    return [(v[k], v[2]) for v in path.sites]


def path_product(g: LatticePath, gp: LatticePath, check: bool = True) -> LatticePath:
    """The path ``g x gp`` from ``g_0 x gp_0`` to ``g_m x gp_m'``.

    Its projections onto ``P2`` and ``P3`` are contained in ``g`` and
    ``gp`` respectively.  Raises :class:`PathError` on incompatible input.
    """
    if check:
        rep = compatibility_report(g, gp)
        if not all(rep.values()):
            bad = [k for k, ok in rep.items() if not ok]
            raise PathError(f"paths are not compatible ({', '.join(bad)} fails)")
    return LatticePath(_prod(_planar(g, 2), _planar(gp, 3)), check=False)


def _band_up(g: Planar, gp: Planar) -> list[Site]:
    s, e = g[0][1], g[-1][1]
    if e == s:
        out = [(a, gp[0][0], s) for a, _ in g]
        out += [(g[-1][0], b, s) for b, _ in gp[1:]]
        return out
    te, tpe = _first_hit(g, e), _first_hit(gp, e)
    head, headp = g[: te + 1], gp[: tpe + 1]
    parts = [_prod(head, headp)]
    x_fix = g[te][0]
    # remainder of gp, with the P2 coordinate parked at g(te)
    parts.append(_excursions(gp[tpe:], _rev(head), x_fix, second=True))
    y_fix = gp[-1][0]
    parts.append(_excursions(g[te:], _rev(gp), y_fix, second=False))
    return _join(parts)


def _excursions(rem: Planar, partner_down: Planar, fixed: int, second: bool) -> list[Site]:
    """Walk ``rem`` (starting and ending at its top height, never above)
    while the other coordinate sits at ``fixed``; every excursion below the
    top is matched with a descent/ascent along ``partner_down``."""
    e = rem[0][1]

    def site(a, b, z):
        return (b, a, z) if second else (a, b, z)

    out = [site(rem[0][0], fixed, e)]
    i = 0
    while i < len(rem) - 1:
        if rem[i + 1][1] == e:
            out.append(site(rem[i + 1][0], fixed, e))
            i += 1
            continue
        j = _first_hit(rem, e, i + 1)
        exc = rem[i : j + 1]
        m = min(z for _, z in exc)
        tm = _first_hit(exc, m)
        down, up = exc[: tm + 1], exc[tm:]
        d_partner = _stop(partner_down, m)
        # the partner may revisit the top height, so the ascent pairing is
        # only a band pair in general
        if second:
            seg = _join([_band(d_partner, down), _band(_rev(d_partner), up)])
        else:
            seg = _join([_band(down, d_partner), _band(up, _rev(d_partner))])
        out.extend(seg[1:])
        i = j
    return out


def band_product(g: LatticePath, gp: LatticePath) -> LatticePath:
    """Product of two planar paths with common start height ``s`` and end
    height ``e`` that both stay in the closed band between ``s`` and ``e``.

    This weaker precondition than compatibility allows returns to the end
    height before the final site.  Projections are contained in the inputs.
    """
    if not (g.in_plane(2) and gp.in_plane(3)):
        raise PathError("band product needs a P2-path and a P3-path")
    s, e = g.first[2], g.last[2]
    if gp.first[2] != s or gp.last[2] != e:
        raise PathError("band product needs equal start and end heights")
    lo, hi = min(s, e), max(s, e)
    for p in (g, gp):
        if any(z < lo or z > hi for z in p.heights()):
            raise PathError("band product inputs must stay between start and end heights")
    return LatticePath(_band(_planar(g, 2), _planar(gp, 3)), check=False)


def _band(a: Planar, b: Planar) -> list[Site]:
    s, e = a[0][1], a[-1][1]
    if e < s:
        out = _band_up(_mirror(a, s), _mirror(b, s))
        return [(x, y, 2 * s - z) for x, y, z in out]
    return _band_up(a, b)


def product_checks(g: LatticePath, gp: LatticePath, out: LatticePath) -> dict[str, bool]:
    """Instance checker for the product postconditions."""
    steps_ok = all(
        sum(abs(p - q) for p, q in zip(u, v)) == 1 for u, v in zip(out.sites, out.sites[1:])
    )
    p2 = {pi2(v) for v in out}
    p3 = {pi3(v) for v in out}
    gs, gps = g.site_set(), gp.site_set()
    return {
        "start": out.first == site_product(g.first, gp.first),
        "end": out.last == site_product(g.last, gp.last),
        "steps": steps_ok,
        "pi2_subset": p2 <= gs,
        "pi3_subset": p3 <= gps,
        "pi2_equal": p2 == gs,
        "pi3_equal": p3 == gps,
        "simplified_self_avoiding": is_self_avoiding(simplify(out)),
    }
