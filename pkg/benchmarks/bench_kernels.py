"""Compare the compiled kernels with the pure-Python (scipy) fallback.

Run ``python3 benchmarks/bench_kernels.py``.  Both backends are imported
side by side; outputs are checked for equality before timing.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from lineperc import _fallback
from lineperc.lattice import BoxRegion, Configuration, ParamVector, SeedSpec, sample_plane_fields

try:
    from lineperc import _kernels
except ImportError:  # pragma: no cover - extension not built
    _kernels = None


def configuration(side_radius: int, rho: float, seed: int = 0) -> np.ndarray:
    params = ParamVector((rho,) * 3)
    box = BoxRegion.around_origin(side_radius, 3)
    return Configuration(box, sample_plane_fields(params, box, SeedSpec(seed, 0))).materialize()


def windows(radius: int, rho: float, seed: int = 0):
    rng = np.random.default_rng(seed)
    side = 2 * radius + 1
    out = tuple(rng.random((side, side)) < rho for _ in range(3))
    for w in out:  # keep the origin open so the search does real work
        w[radius, radius] = True
    return out


def bench(fn, repeat: int) -> float:
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--radii", default="16,32,64")
    ap.add_argument("--rho", type=float, default=0.64)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _kernels is None:
        raise SystemExit("compiled extension not available; build with pip install -e .")

    print(f"{'kernel':<16}{'side':>6}{'compiled ms':>14}{'fallback ms':>14}{'speedup':>10}")
    for r in map(int, args.radii.split(",")):
        bits = configuration(r, args.rho)
        lc, sc = _kernels.label_components(bits)
        lf, sf = _fallback.label_components(bits)
        assert np.array_equal(lc, lf) and np.array_equal(sc, sf)
        assert _kernels.spans_axis(bits, 2) == _fallback.spans_axis(bits, 2)
        w = windows(r, args.rho)
        rc, rf = _kernels.origin_reach3(*w, r), _fallback.origin_reach3(*w, r)
        assert rc[0] == rf[0]
        rows = [
            ("label", lambda: _kernels.label_components(bits), lambda: _fallback.label_components(bits)),
            ("spans", lambda: _kernels.spans_axis(bits, 2), lambda: _fallback.spans_axis(bits, 2)),
            ("origin_reach", lambda: _kernels.origin_reach3(*w, r), lambda: _fallback.origin_reach3(*w, r)),
        ]
        for name, fc, ff in rows:
            tc, tf = bench(fc, args.repeat), bench(ff, args.repeat)
            print(f"{name:<16}{2 * r + 1:>6}{1e3 * tc:>14.2f}{1e3 * tf:>14.2f}{tf / tc:>10.1f}")


if __name__ == "__main__":
    main()
