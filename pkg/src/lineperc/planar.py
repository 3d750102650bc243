"""Two-dimensional crossing machinery on a single plane field.

Planar coordinates are ``(a, b)``: ``a`` is horizontal and ``b`` vertical.
For ``omega_2`` on ``P2`` this is ``(x, z)``; for ``omega_3`` on ``P3`` it
is ``(y, z)``.  The rectangle ``R(n, m; k, l)`` holds the sites with
``k <= a <= k + n - 1`` and ``l <= b <= l + m - 1``.

Crossings returned by the canonical selectors are *tight*: they touch the
starting side only at their first site and the target side only at their
last site, and they are self-avoiding.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import DomainError, NoCrossingError, OutOfRangeError
from .lattice import PlaneField

BOTTOM_TOP = "bottom-top"
LEFT_RIGHT = "left-right"
_CROSS4 = ndimage.generate_binary_structure(2, 1)
_STAR8 = ndimage.generate_binary_structure(2, 2)


@dataclass(frozen=True)
class Rect:
    """``R(n, m; k, l)``: width ``n``, height ``m``, lower-left corner ``(k, l)``."""

    n: int
    m: int
    k: int = 0
    l: int = 0

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise DomainError("rectangle sides must be >= 1")

    @property
    def a_range(self) -> tuple[int, int]:
        return self.k, self.k + self.n - 1

    @property
    def b_range(self) -> tuple[int, int]:
        return self.l, self.l + self.m - 1

    def contains(self, site) -> bool:
        a, b = site
        return self.k <= a < self.k + self.n and self.l <= b < self.l + self.m


@dataclass(frozen=True)
class Field2D:
    """Boolean field on a planar window; ``bits[a - a0, b - b0]``."""

    bits: np.ndarray
    a0: int = 0
    b0: int = 0

    @classmethod
    def from_plane(cls, field: PlaneField) -> "Field2D":
        if field.bits.ndim != 2:
            raise DomainError("planar tools need a 2-dimensional window")
        return cls(field.bits, field.lo[0], field.lo[1])

    @property
    def shape(self) -> tuple[int, int]:
        return self.bits.shape

    def covers(self, rect: Rect) -> bool:
        A, B = self.bits.shape
        return (
            rect.k >= self.a0
            and rect.l >= self.b0
            and rect.k + rect.n <= self.a0 + A
            and rect.l + rect.m <= self.b0 + B
        )

    def window(self, rect: Rect) -> np.ndarray:
        if not self.covers(rect):
            raise OutOfRangeError(f"{rect} not inside the field window")
        i, j = rect.k - self.a0, rect.l - self.b0
        return self.bits[i : i + rect.n, j : j + rect.m]

    def is_open(self, a: int, b: int) -> bool:
        i, j = a - self.a0, b - self.b0
        if not (0 <= i < self.bits.shape[0] and 0 <= j < self.bits.shape[1]):
            raise OutOfRangeError(f"site {(a, b)} outside window")
        return bool(self.bits[i, j])

    def transpose(self) -> "Field2D":
        return Field2D(self.bits.T, self.b0, self.a0)


def _as_field(field) -> Field2D:
    if isinstance(field, Field2D):
        return field
    if isinstance(field, PlaneField):
        return Field2D.from_plane(field)
    return Field2D(np.asarray(field, dtype=bool))


def _crosses(mask: np.ndarray, structure, axis: int) -> bool:
    labels, count = ndimage.label(mask, structure=structure)
    if count == 0:
        return False
    lo = np.take(labels, 0, axis=axis)
    hi = np.take(labels, mask.shape[axis] - 1, axis=axis)
    return bool(np.intersect1d(lo[lo > 0], hi[hi > 0]).size)


def _axis(direction: str) -> int:
    if direction == BOTTOM_TOP:
        return 1
    if direction == LEFT_RIGHT:
        return 0
    raise DomainError(f"unknown direction {direction!r}")


def open_crossing_exists(field, rect: Rect, direction: str = BOTTOM_TOP) -> bool:
    """Open nearest-neighbour crossing of ``rect`` in ``direction``."""
    return _crosses(_as_field(field).window(rect), _CROSS4, _axis(direction))


def closed_star_crossing_exists(field, rect: Rect, direction: str = LEFT_RIGHT) -> bool:
    """Closed crossing of ``rect`` under 8-neighbour (sup-norm) adjacency."""
    return _crosses(~_as_field(field).window(rect), _STAR8, _axis(direction))


def duality_holds(field, rect: Rect) -> bool:
    """Open bottom-top crossing XOR closed left-right *-crossing."""
    f = _as_field(field)
    return open_crossing_exists(f, rect, BOTTOM_TOP) != closed_star_crossing_exists(
        f, rect, LEFT_RIGHT
    )


def _can_finish(open_: np.ndarray, start: tuple[int, int], blocked: set, top: int) -> bool:
    """BFS: from ``start`` reach row ``top`` through open, unblocked sites
    of rows ``1..top`` (row 0 is the starting side)."""
    if start[1] == top:
        return True
    n = open_.shape[0]
    seen = {start}
    queue = deque([start])
    while queue:
        a, b = queue.popleft()
        for na, nb in ((a - 1, b), (a + 1, b), (a, b - 1), (a, b + 1)):
            if not (0 <= na < n and 1 <= nb <= top):
                continue
            s = (na, nb)
            if s in seen or s in blocked or not open_[na, nb]:
                continue
            if nb == top:
                return True
            seen.add(s)
            queue.append(s)
    return False


def _leftmost_local(open_: np.ndarray) -> list[tuple[int, int]] | None:
    """Lexicographically minimal tight self-avoiding bottom-top crossing of
    the whole array (local coordinates), or ``None``."""
    n, m = open_.shape
    top = m - 1
    for a in range(n):
        if not open_[a, 0]:
            continue
        if top == 0:
            return [(a, 0)]
        path = [(a, 0)]
        used = {(a, 0)}
        ok = True
        while path[-1][1] != top:
            ca, cb = path[-1]
            nxt = None
            # candidate order is lexicographic in (a, b)
            for s in sorted(((ca - 1, cb), (ca, cb - 1), (ca, cb + 1), (ca + 1, cb))):
                sa, sb = s
                if not (0 <= sa < n and 1 <= sb <= top) or s in used or not open_[sa, sb]:
                    continue
                if _can_finish(open_, s, used, top):
                    nxt = s
                    break
            if nxt is None:  # cannot happen once the first site is feasible
                ok = False
                break
            path.append(nxt)
            used.add(nxt)
        if ok:
            return path
        # the starting site is infeasible; try the next one
    return None


def _first_feasible_start(open_: np.ndarray) -> np.ndarray:
    """Starting sites (row 0) that admit a tight crossing."""
    n, m = open_.shape
    if m == 1:
        return open_[:, 0].copy()
    inner = open_.copy()
    inner[:, 0] = False
    labels, _ = ndimage.label(inner, structure=_CROSS4)
    good = set(np.unique(labels[:, m - 1][labels[:, m - 1] > 0]).tolist())
    out = np.zeros(n, dtype=bool)
    for a in range(n):
        if open_[a, 0] and labels[a, 1] in good:
            out[a] = True
    return out


def leftmost_bottom_top_crossing(field, rect: Rect) -> list[tuple[int, int]]:
    """Canonical open bottom-top crossing: the lexicographically smallest
    site sequence (sites compared as ``(a, b)``) among tight self-avoiding
    crossings.  Raises :class:`NoCrossingError` if none exists."""
    f = _as_field(field)
    win = f.window(rect)
    feasible = _first_feasible_start(win)
    if not feasible.any():
        raise NoCrossingError(f"no open bottom-top crossing of {rect}")
    restricted = win.copy()
    restricted[:, 0] = feasible
    path = _leftmost_local(restricted)
    assert path is not None
    return [(a + rect.k, b + rect.l) for a, b in path]


def lowest_left_right_crossing(field, rect: Rect) -> list[tuple[int, int]]:
    """Canonical open left-right crossing: lexicographically smallest site
    sequence with sites compared as ``(b, a)``."""
    f = _as_field(field).transpose()
    path = leftmost_bottom_top_crossing(f, Rect(rect.m, rect.n, rect.l, rect.k))
    return [(a, b) for b, a in path]


def is_open_crossing(field, rect: Rect, path, direction: str = BOTTOM_TOP, tight: bool = False) -> bool:
    """Check that ``path`` is an open nearest-neighbour crossing of ``rect``."""
    f = _as_field(field)
    if not path:
        return False
    for u, v in zip(path, path[1:]):
        if abs(u[0] - v[0]) + abs(u[1] - v[1]) != 1:
            return False
    if not all(rect.contains(s) and f.is_open(*s) for s in path):
        return False
    ax = _axis(direction)
    lo, hi = (rect.a_range if ax == 0 else rect.b_range)
    coords = [s[ax] for s in path]
    if coords[0] != lo or coords[-1] != hi:
        return False
    if tight:
        if len(set(path)) != len(path):
            return False
        if len(path) > 1 and (lo in coords[1:] or hi in coords[:-1]):
            return False
    return True


# -- 2-directed percolation ---------------------------------------------------
#
# Steps are e1 = (1, 0) and e2 = (0, 1); no straight run exceeds 2 steps.


def _check_window(f: Field2D, origin, depth: int) -> None:
    a, b = origin
    if depth < 0:
        raise DomainError("depth must be nonnegative")
    if not f.covers(Rect(depth + 1, depth + 1, a, b)):
        raise OutOfRangeError("window too small for the requested depth")


def _directed_levels(f: Field2D, origin, depth: int):
    """Forward reachability by level.  ``levels[t][(dir, run)]`` is a Boolean
    vector over ``i`` = number of e1 steps among the first ``t``."""
    a0, b0 = origin
    i0, j0 = a0 - f.a0, b0 - f.b0
    bits = f.bits
    levels = []
    if not bits[i0, j0]:
        return levels
    levels.append(None)  # level 0: the origin, no direction yet
    for t in range(1, depth + 1):
        i = np.arange(t + 1)
        openv = bits[i0 + i, j0 + t - i]
        cur = {}
        prev = levels[-1]
        if prev is None:
            z = np.zeros(t + 1, dtype=bool)
            e1 = z.copy()
            e1[1] = True
            e2 = z.copy()
            e2[0] = True
            cur[(1, 1)] = e1 & openv
            cur[(1, 2)] = z.copy()
            cur[(2, 1)] = e2 & openv
            cur[(2, 2)] = z.copy()
        else:
            def shift(v):  # e1 step: i -> i + 1
                out = np.zeros(t + 1, dtype=bool)
                out[1:] = v
                return out

            def keep(v):  # e2 step: i unchanged
                out = np.zeros(t + 1, dtype=bool)
                out[:-1] = v
                return out

            cur[(1, 1)] = shift(prev[(2, 1)] | prev[(2, 2)]) & openv
            cur[(1, 2)] = shift(prev[(1, 1)]) & openv
            cur[(2, 1)] = keep(prev[(1, 1)] | prev[(1, 2)]) & openv
            cur[(2, 2)] = keep(prev[(2, 1)]) & openv
        levels.append(cur)
        if not any(v.any() for v in cur.values()):
            break
    return levels


def two_directed_cluster(field, origin, depth: int) -> set[tuple[int, int]]:
    """Sites reachable from ``origin`` by open 2-directed paths of at most
    ``depth`` steps (the origin included when open)."""
    f = _as_field(field)
    _check_window(f, origin, depth)
    a0, b0 = origin
    levels = _directed_levels(f, origin, depth)
    out: set[tuple[int, int]] = set()
    for t, lev in enumerate(levels):
        if lev is None:
            out.add((a0, b0))
            continue
        mask = np.zeros(t + 1, dtype=bool)
        for v in lev.values():
            mask |= v
        out.update((a0 + int(i), b0 + t - int(i)) for i in np.flatnonzero(mask))
    return out


def two_directed_survives(field, origin, depth: int) -> bool:
    """Some open 2-directed path of exactly ``depth`` steps starts at ``origin``."""
    f = _as_field(field)
    _check_window(f, origin, depth)
    levels = _directed_levels(f, origin, depth)
    if len(levels) < depth + 1:
        return False
    if depth == 0:
        return True
    return any(v.any() for v in levels[depth].values())


def lowest_two_directed_path(field, origin, depth: int) -> list[tuple[int, int]]:
    """The lowest open 2-directed path of ``depth`` steps.

    Built step by step, preferring a horizontal step ``e1`` whenever the
    resulting state can still be extended to the full depth; this makes the
    sequence of vertical coordinates lexicographically minimal among all
    open 2-directed paths of that length.
    """
    f = _as_field(field)
    _check_window(f, origin, depth)
    levels = _directed_levels(f, origin, depth)
    if len(levels) < depth + 1 or (depth > 0 and not any(v.any() for v in levels[depth].values())):
        raise NoCrossingError("no open 2-directed path reaches the requested depth")
    a0, b0 = origin
    i0, j0 = a0 - f.a0, b0 - f.b0
    bits = f.bits
    # backward feasibility: alive[t][(dir, run)][i] = can extend to depth
    alive = [None] * (depth + 1)
    if depth > 0:
        alive[depth] = {k: v.copy() for k, v in levels[depth].items()}
        for t in range(depth - 1, 0, -1):
            nxt = alive[t + 1]
            cur = {}
            for (d, r), v in levels[t].items():
                ok = np.zeros(t + 1, dtype=bool)
                # e1 step allowed unless a run of two e1 steps is in progress
                if not (d == 1 and r == 2):
                    ok |= nxt[(1, 2 if d == 1 else 1)][1:]
                if not (d == 2 and r == 2):
                    ok |= nxt[(2, 2 if d == 2 else 1)][:-1]
                cur[(d, r)] = v & ok
            alive[t] = cur
    path = [(a0, b0)]
    state = None
    i = 0
    for t in range(1, depth + 1):
        options = []
        for d in (1, 2):
            if state is not None and state == (d, 2):
                continue
            run = state[1] + 1 if state is not None and state[0] == d else 1
            ni = i + 1 if d == 1 else i
            if alive[t][(d, run)][ni]:
                options.append((d, run, ni))
        d, run, i = options[0]
        state = (d, run)
        path.append((a0 + i, b0 + t - i))
    return path
