"""Monte Carlo experiments over the model's observables.

Replica ``r`` of an experiment with master seed ``s`` always uses
``SeedSpec(s, r)``; records over disjoint replica ranges merge exactly, so
results never depend on how work was split or scheduled.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from . import kernels
from .clusters import density_vector, label_clusters, sample_origin_reach
from .errors import DomainError, SpecMismatchError
from .lattice import (
    BoxRegion,
    Configuration,
    ParamVector,
    SeedSpec,
    sample_plane_window,
    sample_plane_fields,
)
from .planar import BOTTOM_TOP, Field2D, Rect, open_crossing_exists, two_directed_survives
from .renorm import RenormRegion, good_block_crossing, sample_region_fields

OBSERVABLES = (
    "connection",
    "truncated",
    "crossing",
    "good-block-crossing",
    "two-directed",
    "planar-crossing",
    "density",
)
PLANAR_OBSERVABLES = ("two-directed", "planar-crossing")
CROSSING_AXIS = 2  # spanning of B(L) is measured along e_3


@dataclass(frozen=True)
class ExperimentSpec:
    """One Monte Carlo experiment.

    ``p`` holds the line parameters (its length is the dimension).  Planar
    observables use ``p[0]`` as the site density of a single planar field.
    Geometry fields not used by the observable are ignored but still hashed.
    """

    p: tuple[float, ...]
    observable: str
    replicas: int
    master_seed: int = 0
    n: int | None = None
    N: int | None = None
    kappa: int = 4
    L: int | None = None
    block_n: int = 8
    c: float = 2.0
    k: int | None = None
    depth: int | None = None
    first_replica: int = 0

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(float(x) for x in self.p))
        if self.observable not in OBSERVABLES:
            raise DomainError(f"unknown observable {self.observable!r}")
        if self.replicas < 0 or self.first_replica < 0:
            raise DomainError("replica counts must be nonnegative")
        if self.observable not in PLANAR_OBSERVABLES:
            ParamVector(self.p)
        self._check_geometry()

    def _check_geometry(self):
        obs = self.observable
        need = {
            "connection": ("n",),
            "truncated": ("n",),
            "crossing": ("L",),
            "planar-crossing": ("L",),
            "density": ("L",),
            "good-block-crossing": ("k",),
            "two-directed": ("depth",),
        }[obs]
        for name in need:
            v = getattr(self, name)
            if v is None or v < (1 if name != "n" else 0):
                raise DomainError(f"observable {obs!r} needs a valid {name}")
        if obs == "truncated" and not self.n < self.big_n:
            raise DomainError("truncated connectivity needs n < N")

    @property
    def d(self) -> int:
        return len(self.p)

    @property
    def big_n(self) -> int:
        return self.N if self.N is not None else self.kappa * (self.n or 0)

    @property
    def params(self) -> ParamVector:
        return ParamVector(self.p)

    def hash_fields(self) -> dict:
        out = asdict(self)
        del out["replicas"], out["first_replica"]
        out["N"] = self.big_n if self.observable == "truncated" else self.N
        return out

    @property
    def spec_hash(self) -> str:
        blob = json.dumps(self.hash_fields(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def with_p(self, p: Sequence[float]) -> "ExperimentSpec":
        return replace(self, p=tuple(p))

    def diagonal(self, rho: float) -> "ExperimentSpec":
        return self.with_p((rho,) * self.d)


@dataclass(frozen=True)
class EstimateRecord:
    """Mergeable sufficient statistics of a Bernoulli (or size) observable.

    For the ``density`` observable ``sum_x``/``sum_x2`` accumulate the size
    of the largest spanning component (exact integers) and ``scale`` is the
    box volume; ``successes`` then counts replicas with at most one spanning
    component.
    """

    spec_hash: str
    master_seed: int
    ranges: tuple[tuple[int, int], ...]
    trials: int
    successes: int
    sum_x: int = 0
    sum_x2: int = 0
    scale: int = 1
    wall_time: float = field(default=0.0, compare=False)

    @property
    def estimate(self) -> float:
        return self.successes / self.trials if self.trials else float("nan")

    @property
    def stderr(self) -> float:
        """Wald standard error ``sqrt(p (1 - p) / trials)``."""
        if not self.trials:
            return float("nan")
        p = self.estimate
        return math.sqrt(p * (1.0 - p) / self.trials)

    def wilson(self, z: float = 1.96) -> tuple[float, float]:
        return wilson_interval(self.successes, self.trials, z)

    @property
    def mean_x(self) -> float:
        return self.sum_x / (self.trials * self.scale) if self.trials else float("nan")

    @property
    def stderr_x(self) -> float:
        t = self.trials
        if t < 2:
            return float("nan")
        m = self.sum_x / t
        var = (self.sum_x2 - t * m * m) / (t - 1)
        return math.sqrt(max(var, 0.0) / t) / self.scale


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval; sensible even with 0 or ``trials`` successes."""
    if trials == 0:
        return (0.0, 1.0)
    p = successes / trials
    den = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / den
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / den
    return (max(0.0, centre - half), min(1.0, centre + half))


def empty_record(spec: ExperimentSpec) -> EstimateRecord:
    return EstimateRecord(spec.spec_hash, spec.master_seed, (), 0, 0)


def _normalize(ranges) -> tuple[tuple[int, int], ...]:
    out: list[list[int]] = []
    for a, b in sorted(r for r in ranges if r[1] > r[0]):
        if out and a < out[-1][1]:
            raise SpecMismatchError("overlapping replica ranges")
        if out and a == out[-1][1]:
            out[-1][1] = b
        else:
            out.append([a, b])
    return tuple((a, b) for a, b in out)


def merge(records: Iterable[EstimateRecord]) -> EstimateRecord:
    """Sum records over disjoint replica ranges of the same spec."""
    records = list(records)
    nonempty = [r for r in records if r.trials]
    if not nonempty:
        return records[0] if records else EstimateRecord("", 0, (), 0, 0)
    base = nonempty[0]
    for r in nonempty[1:]:
        if r.spec_hash != base.spec_hash or r.master_seed != base.master_seed or r.scale != base.scale:
            raise SpecMismatchError("records belong to different experiments")
    ranges = _normalize([rg for r in nonempty for rg in r.ranges])
    return EstimateRecord(
        base.spec_hash,
        base.master_seed,
        ranges,
        sum(r.trials for r in nonempty),
        sum(r.successes for r in nonempty),
        sum(r.sum_x for r in nonempty),
        sum(r.sum_x2 for r in nonempty),
        base.scale,
        sum(r.wall_time for r in nonempty),
    )


# -- per-replica evaluation ----------------------------------------------------


def _planar_field(p: float, seed: SeedSpec, side: int) -> Field2D:
    f = sample_plane_window(p, seed, 0, [(0, side - 1), (0, side - 1)])
    return Field2D(f.bits, 0, 0)


def evaluate_replica(spec: ExperimentSpec, replica: int) -> tuple[int, int]:
    """Outcome of one replica: ``(success, size)``; size is only used by the
    density observable."""
    seed = SeedSpec(spec.master_seed, replica)
    obs = spec.observable
    if obs == "connection":
        return int(sample_origin_reach(spec.params, seed, spec.n) >= spec.n), 0
    if obs == "truncated":
        r = sample_origin_reach(spec.params, seed, spec.big_n)
        return int(spec.n <= r < spec.big_n), 0
    if obs == "crossing":
        box = BoxRegion.around_origin(spec.L // 2, spec.d)
        conf = Configuration(box, sample_plane_fields(spec.params, box, seed))
        return int(kernels.spans_axis(conf.materialize(), CROSSING_AXIS)), 0
    if obs == "density":
        box = BoxRegion.around_origin(spec.L // 2, spec.d)
        conf = Configuration(box, sample_plane_fields(spec.params, box, seed))
        lab = label_clusters(conf)
        spanning = sorted({int(x) for a in range(spec.d) for x in lab.spanning(a)})
        size = max((int(lab.sizes[x - 1]) for x in spanning), default=0)
        return int(len(spanning) <= 1), size
    if obs == "good-block-crossing":
        region = RenormRegion(spec.c, spec.k, spec.block_n)
        fields = sample_region_fields(spec.params, seed, region)
        return int(good_block_crossing(fields, region) is not None), 0
    if obs == "two-directed":
        f = _planar_field(spec.p[0], seed, spec.depth + 1)
        return int(two_directed_survives(f, (0, 0), spec.depth)), 0
    if obs == "planar-crossing":
        f = _planar_field(spec.p[0], seed, spec.L)
        return int(open_crossing_exists(f, Rect(spec.L, spec.L), BOTTOM_TOP)), 0
    raise DomainError(obs)


def default_threads() -> int:
    env = os.environ.get("LINEPERC_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise DomainError(f"bad LINEPERC_THREADS value {env!r}") from exc
    return os.cpu_count() or 1


def _scale(spec: ExperimentSpec) -> int:
    if spec.observable == "density":
        return BoxRegion.around_origin(spec.L // 2, spec.d).volume
    return 1


def run_experiment(spec: ExperimentSpec, threads: int | None = None) -> EstimateRecord:
    """Run replicas ``first_replica .. first_replica + replicas - 1``."""
    t0 = time.perf_counter()
    reps = range(spec.first_replica, spec.first_replica + spec.replicas)
    threads = threads or default_threads()
    if threads > 1 and len(reps) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(lambda r: evaluate_replica(spec, r), reps))
    else:
        outcomes = [evaluate_replica(spec, r) for r in reps]
    ranges = ((reps.start, reps.stop),) if len(reps) else ()
    return EstimateRecord(
        spec.spec_hash,
        spec.master_seed,
        ranges,
        len(outcomes),
        sum(s for s, _ in outcomes),
        sum(x for _, x in outcomes),
        sum(x * x for _, x in outcomes),
        _scale(spec),
        time.perf_counter() - t0,
    )


def run_chunks(spec: ExperimentSpec, chunk: int, threads: int | None = None,
               done: Iterable[tuple[int, int]] = (),
               callback: Callable[[EstimateRecord], None] | None = None) -> EstimateRecord:
    """Run ``spec`` in replica batches of size ``chunk`` skipping ranges in
    ``done``; ``callback`` sees every new batch record (for persistence)."""
    done_set = set(tuple(r) for r in done)
    records = []
    start = spec.first_replica
    stop = start + spec.replicas
    for a in range(start, stop, chunk):
        b = min(a + chunk, stop)
        if (a, b) in done_set:
            continue
        rec = run_experiment(replace(spec, first_replica=a, replicas=b - a), threads)
        records.append(rec)
        if callback:
            callback(rec)
    return merge(records) if records else empty_record(spec)


# -- curves sharing one exploration per replica ----------------------------------


def reach_samples(params: ParamVector, radius: int, replicas: int, master_seed: int,
                  first_replica: int = 0) -> np.ndarray:
    """Origin-cluster reach (capped at ``radius``) for each replica."""
    return np.array(
        [sample_origin_reach(params, SeedSpec(master_seed, r), radius)
         for r in range(first_replica, first_replica + replicas)],
        dtype=np.int64,
    )


def connection_curve(params: ParamVector, ns: Sequence[int], replicas: int, master_seed: int,
                     reach: np.ndarray | None = None) -> list[EstimateRecord]:
    """Records of {0 <-> dB(n)} for every ``n`` from one exploration per replica.

    Each record equals ``run_experiment`` of the corresponding single-``n``
    spec (the event is decided inside ``B(n)``)."""
    r = reach if reach is not None else reach_samples(params, max(ns), replicas, master_seed)
    out = []
    for n in ns:
        spec = ExperimentSpec(params.p, "connection", replicas, master_seed, n=n)
        out.append(EstimateRecord(spec.spec_hash, master_seed, ((0, replicas),), replicas,
                                  int((r >= n).sum())))
    return out


def truncated_curve(params: ParamVector, ns: Sequence[int], replicas: int, master_seed: int,
                    kappa: int = 4, reach: np.ndarray | None = None) -> list[EstimateRecord]:
    """Records of the truncated event with ``N = kappa * n`` for every ``n``."""
    R = kappa * max(ns)
    r = reach if reach is not None else reach_samples(params, R, replicas, master_seed)
    out = []
    for n in ns:
        spec = ExperimentSpec(params.p, "truncated", replicas, master_seed, n=n, kappa=kappa)
        hits = int(((r >= n) & (r < kappa * n)).sum())
        out.append(EstimateRecord(spec.spec_hash, master_seed, ((0, replicas),), replicas, hits))
    return out


def monotone_coupling_violations(rho_lo: float, rho_hi: float, n: int, replicas: int,
                                 master_seed: int, d: int = 3) -> int:
    """Replicas where {0 <-> dB(n)} holds at ``rho_lo`` but not at ``rho_hi``
    under shared uniforms (must be zero)."""
    if rho_lo > rho_hi:
        raise DomainError("need rho_lo <= rho_hi")
    lo = reach_samples(ParamVector.diagonal(rho_lo, d), n, replicas, master_seed)
    hi = reach_samples(ParamVector.diagonal(rho_hi, d), n, replicas, master_seed)
    return int(((lo >= n) & (hi < n)).sum())


# -- decay fits --------------------------------------------------------------------


@dataclass(frozen=True)
class DecayFit:
    """Least-squares fits of ``log P`` against ``n`` and ``log n``."""

    psi: float
    exp_intercept: float
    exp_rss: float
    exp_r2: float
    alpha: float
    power_intercept: float
    power_rss: float
    power_r2: float

    @property
    def preferred(self) -> str:
        return "exponential" if self.exp_rss <= self.power_rss else "power"

    @property
    def margin(self) -> float:
        """Ratio of the larger to the smaller residual sum of squares."""
        lo, hi = sorted((self.exp_rss, self.power_rss))
        return hi / lo if lo > 0 else math.inf

    def exp_predict(self, n) -> np.ndarray:
        return np.exp(self.exp_intercept - self.psi * np.asarray(n, dtype=float))

    def power_predict(self, n) -> np.ndarray:
        return np.exp(self.power_intercept) * np.asarray(n, dtype=float) ** (-self.alpha)


def _linfit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float, float]:
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, icpt), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + icpt)
    rss = float(resid @ resid)
    tss = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - rss / tss if tss > 0 else 1.0
    return float(slope), float(icpt), rss, r2


def fit_decay(ns: Sequence[float], estimates: Sequence[float]) -> DecayFit:
    """Fit ``P(n) = A exp(-psi n)`` and ``P(n) = A' n^(-alpha)``."""
    n = np.asarray(ns, dtype=float)
    p = np.asarray(estimates, dtype=float)
    if n.size < 4 or n.size != p.size:
        raise DomainError("need at least 4 points")
    if (p <= 0).any():
        raise DomainError("zero estimates cannot be fitted; raise the replica count")
    if (n <= 0).any():
        raise DomainError("support must be positive")
    y = np.log(p)
    s1, i1, rss1, r21 = _linfit(n, y)
    s2, i2, rss2, r22 = _linfit(np.log(n), y)
    return DecayFit(-s1, i1, rss1, r21, -s2, i2, rss2, r22)


# -- critical points -------------------------------------------------------------


@dataclass
class BisectResult:
    interval: tuple[float, float]
    bracketed: bool
    records: list[tuple[float, EstimateRecord]]
    target: float

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.interval[0] + self.interval[1])

    @property
    def width(self) -> float:
        return self.interval[1] - self.interval[0]


def bisect_critical(spec: ExperimentSpec, rho_range: tuple[float, float], target: float = 0.5,
                    tol: float = 0.005, threads: int | None = None) -> BisectResult:
    """Bisect the diagonal parameter ``rho`` on an increasing observable.

    At each ``rho`` the observable is estimated with ``spec.replicas``
    replicas (shared seeds, hence coupled draws).  If the endpoints do not
    bracket ``target`` the range is returned unchanged with
    ``bracketed=False``.
    """
    lo, hi = map(float, rho_range)
    if not 0.0 <= lo < hi <= 1.0:
        raise DomainError("need 0 <= lo < hi <= 1")
    records = []

    def f(rho):
        rec = run_experiment(spec.diagonal(rho), threads)
        records.append((rho, rec))
        return rec.estimate

    flo, fhi = f(lo), f(hi)
    if not (flo < target <= fhi):
        return BisectResult((lo, hi), False, records, target)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) < target:
            lo = mid
        else:
            hi = mid
    return BisectResult((lo, hi), True, records, target)


def estimate_two_directed_pc(depth: int, tol: float = 0.01, replicas: int = 400,
                             master_seed: int = 0, rho_range=(0.5, 1.0), target: float = 0.5,
                             threads: int | None = None) -> BisectResult:
    """Bisect the site density at which 2-directed survival to ``depth``
    crosses ``target``."""
    if depth < 16:
        raise DomainError("depth must be >= 16")
    spec = ExperimentSpec((rho_range[1],), "two-directed", replicas, master_seed, depth=depth)
    return bisect_critical(spec, rho_range, target, tol, threads)


# -- density statistics ----------------------------------------------------------


@dataclass(frozen=True)
class DensityStats:
    rho1: tuple[float, ...]
    spanning_counts: tuple[int, ...]

    @property
    def mean(self) -> float:
        return float(np.mean(self.rho1))

    @property
    def stderr(self) -> float:
        return float(np.std(self.rho1, ddof=1) / math.sqrt(len(self.rho1)))

    @property
    def at_most_one_fraction(self) -> float:
        return float(np.mean([c <= 1 for c in self.spanning_counts]))


def density_statistics(params: ParamVector, L: int, seeds: Sequence[int], axis: int | None = None) -> DensityStats:
    """Largest spanning density and spanning-component counts per seed.

    ``axis=None`` counts components spanning along any axis."""
    rhos, counts = [], []
    for s in seeds:
        box = BoxRegion.around_origin(L // 2, params.d)
        conf = Configuration(box, sample_plane_fields(params, box, SeedSpec(s, 0)))
        lab = label_clusters(conf)
        rhos.append(density_vector(conf, "spanning", labeling=lab).rho1)
        if axis is None:
            counts.append(len({int(x) for a in range(params.d) for x in lab.spanning(a)}))
        else:
            counts.append(int(lab.spanning(axis).size))
    return DensityStats(tuple(rhos), tuple(counts))
