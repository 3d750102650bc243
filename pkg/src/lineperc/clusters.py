"""Connected components of the vacant set inside a box and the observables
built on them: origin-to-boundary connection, the truncated-connectivity
proxy, spanning clusters and the ranked density vector.

Boundaries are free (no wrapping).  The origin always means the site
``0`` of Z^d, so the observables below require a box centred at the origin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DomainError, OutOfRangeError
from .lattice import BoxRegion, Configuration, ParamVector, SeedSpec, sample_plane_window


@dataclass(frozen=True)
class ClusterLabeling:
    """Component labels over a box.

    Attributes
    ----------
    labels : ndarray of int32
        0 on closed sites, otherwise 1..K numbered by first site in scan order.
    sizes : ndarray of int64
        ``sizes[k-1]`` is the number of sites carrying label ``k``.
    touches : ndarray of bool, shape (K, 2d)
        ``touches[k-1, 2a]`` / ``touches[k-1, 2a+1]``: component ``k`` meets
        the low / high face orthogonal to axis ``a``.
    """

    box: BoxRegion
    labels: np.ndarray
    sizes: np.ndarray
    touches: np.ndarray

    @property
    def count(self) -> int:
        return int(self.sizes.size)

    @property
    def volume(self) -> int:
        return self.box.volume

    def label_at(self, site) -> int:
        if not self.box.contains(site):
            raise OutOfRangeError(f"site {tuple(site)} outside box")
        idx = tuple(int(s) - l for s, l in zip(site, self.box.lo))
        return int(self.labels[idx])

    def spanning(self, axis: int) -> np.ndarray:
        """Labels (1-based) of components touching both faces of ``axis``."""
        mask = self.touches[:, 2 * axis] & self.touches[:, 2 * axis + 1]
        return np.flatnonzero(mask) + 1

    def boundary_touching(self) -> np.ndarray:
        return np.flatnonzero(self.touches.any(axis=1)) + 1


def _face_touches(labels: np.ndarray, count: int) -> np.ndarray:
    d = labels.ndim
    touches = np.zeros((count, 2 * d), dtype=bool)
    for a in range(d):
        for side, index in ((0, 0), (1, labels.shape[a] - 1)):
            face = np.take(labels, index, axis=a)
            present = np.unique(face[face > 0])
            touches[present - 1, 2 * a + side] = True
    return touches


def label_array(box: BoxRegion, bits: np.ndarray) -> ClusterLabeling:
    labels, sizes = kernels.label_components(bits)
    return ClusterLabeling(box, labels, sizes, _face_touches(labels, sizes.size))


def label_clusters(config: Configuration) -> ClusterLabeling:
    """Exact nearest-neighbour components of the materialized box."""
    return label_array(config.box, config.materialize())


def _check_origin_box(config: Configuration, radius: int) -> None:
    if any(config.box.center):
        raise DomainError("origin observables need a box centred at the origin")
    if radius > config.box.n:
        raise OutOfRangeError(f"radius {radius} exceeds box radius {config.box.n}")


def origin_reach(config: Configuration, radius: int) -> int:
    """Largest sup-norm reached by the origin cluster inside ``B(radius)``.

    Returns ``-1`` when the origin is closed; the value is capped at
    ``radius`` (so ``reach == radius`` means the cluster touches
    ``dB(radius)``).
    """
    _check_origin_box(config, radius)
    if radius < 0:
        raise DomainError("radius must be nonnegative")
    if config.d == 3:
        ranges = [(-radius, radius)] * 2
        w = [f.restrict(ranges).bits for f in config.fields]
        return kernels.origin_reach3(w[0], w[1], w[2], radius)[0]
    off = config.box.n - radius
    sub = config.materialize()[(slice(off, off + 2 * radius + 1),) * config.d]
    centre = (radius,) * config.d
    if not sub[centre]:
        return -1
    labels, _ = kernels.label_components(sub)
    idx = np.nonzero(labels == labels[centre])
    return int(max(np.abs(c - radius).max() for c in idx))


def origin_connects_to_boundary(config: Configuration, n: int) -> bool:
    """The event {0 <-> dB(n)} evaluated inside ``B(n)``."""
    return origin_reach(config, n) >= n


def truncated_connectivity_event(config: Configuration, n: int, N: int) -> bool:
    """Origin reaches ``dB(n)`` but not ``dB(N)`` (finite proxy of 0 -/-> inf)."""
    if not 0 <= n < N:
        raise DomainError(f"need 0 <= n < N, got n={n}, N={N}")
    r = origin_reach(config, N)
    return n <= r < N


def sample_origin_reach(params: ParamVector, seed: SeedSpec, radius: int) -> int:
    """Origin-cluster reach for a fresh d=3 sample, storing only plane windows.

    One call answers {0 <-> dB(n)} for every ``n <= radius`` at once, and the
    truncated event for every pair ``n < N = radius``.
    """
    if params.d != 3:
        box = BoxRegion.around_origin(radius, params.d)
        return origin_reach(Configuration.sample(params, box, seed), radius)
    ranges = [(-radius, radius)] * 2
    w = [sample_plane_window(params.p[i], seed, i, ranges).bits for i in range(3)]
    return kernels.origin_reach3(w[0], w[1], w[2], radius)[0]


def spanning_component_count(config: Configuration, axis: int) -> int:
    """Number of components touching both faces orthogonal to ``axis``."""
    if not 0 <= axis < config.d:
        raise DomainError("axis out of range")
    return int(label_clusters(config).spanning(axis).size)


def box_spans(config: Configuration, axis: int) -> bool:
    """Existence of an open path between the two faces orthogonal to ``axis``."""
    return kernels.spans_axis(config.materialize(), axis)


@dataclass(frozen=True)
class DensityVector:
    """Ranked densities (component size / box volume) of proxy-infinite clusters."""

    values: tuple[float, ...]
    classifier: str

    def __post_init__(self):
        v = self.values
        if any(a < b for a, b in zip(v, v[1:])):
            raise ValueError("densities must be nonincreasing")

    @property
    def rho1(self) -> float:
        return self.values[0] if self.values else 0.0

    def __len__(self):
        return len(self.values)


def density_vector(
    config: Configuration,
    classifier: str = "spanning",
    top_k: int | None = None,
    labeling: ClusterLabeling | None = None,
) -> DensityVector:
    """Ranked densities of components classified as infinite proxies.

    ``classifier="spanning"`` keeps components spanning the box along at
    least one axis; ``"boundary"`` keeps every component touching the box
    boundary.
    """
    lab = labeling if labeling is not None else label_clusters(config)
    if classifier == "spanning":
        keep = np.zeros(lab.count, dtype=bool)
        for a in range(config.d):
            keep |= lab.touches[:, 2 * a] & lab.touches[:, 2 * a + 1]
    elif classifier == "boundary":
        keep = lab.touches.any(axis=1)
    else:
        raise DomainError(f"unknown classifier {classifier!r}")
    dens = np.sort(lab.sizes[keep])[::-1] / lab.volume
    if top_k is not None:
        dens = dens[:top_k]
    return DensityVector(tuple(float(x) for x in dens), classifier)
