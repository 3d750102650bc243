"""Randomised instance suites for the path product, the block bridges and
planar duality.  Each suite returns a JSON-ready report with violation
counts and the first counterexample found."""

from __future__ import annotations

import random

import numpy as np

from .lattice import ParamVector, SeedSpec
from .paths import LatticePath, path_product, product_checks
from .planar import Field2D, Rect, duality_holds
from .renorm import (
    BlockCoord,
    RenormFields,
    bridge_blocks,
    bridge_checks,
    is_good_block,
    sample_renorm_fields,
)

NEIGHBOURS = ((0, 0, 1), (0, 0, -1), (1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0))
REQUIRED_PRODUCT_KEYS = ("start", "end", "steps", "pi2_subset", "pi3_subset")


def random_compatible_path(rnd: random.Random, plane: int, h: int, max_len: int,
                           z0: int = 0, a0: int = 0) -> LatticePath:
    """Random planar path climbing ``h >= 0`` levels from height ``z0``:
    it stays in ``[z0, z0 + h - 1]`` and reaches ``z0 + h`` at its last site."""
    if h == 0:
        pts = [(a0, z0)]
    else:
        while True:
            target = rnd.randint(h + 1, max(h + 1, max_len))
            a, z = a0, z0
            pts = [(a, z)]
            while len(pts) < max_len:
                if z == z0 + h - 1 and (len(pts) + 1 >= target or rnd.random() < 0.15):
                    pts.append((a, z + 1))
                    break
                da, dz = rnd.choice(((1, 0), (-1, 0), (0, 1), (0, -1)))
                if z0 <= z + dz <= z0 + h - 1:
                    a, z = a + da, z + dz
                    pts.append((a, z))
            if pts[-1][1] == z0 + h:
                break
    sites = [(a, 0, z) if plane == 2 else (0, a, z) for a, z in pts]
    return LatticePath(sites)


def random_compatible_pair(rnd: random.Random, max_h: int = 4, max_len: int = 40):
    h = rnd.randint(0, max_h)
    sign = rnd.choice((1, -1))
    z0 = rnd.randint(-3, 3)
    g = random_compatible_path(rnd, 2, h, max_len, 0, rnd.randint(-3, 3))
    gp = random_compatible_path(rnd, 3, h, max_len, 0, rnd.randint(-3, 3))

    def place(p):
        return LatticePath([(x, y, z0 + sign * z) for x, y, z in p])

    return place(g), place(gp)


def path_product_suite(instances: int = 1000, seed: int = 0, max_h: int = 4, max_len: int = 40) -> dict:
    rnd = random.Random(seed)
    violations = 0
    equal = 0
    first = None
    for _ in range(instances):
        g, gp = random_compatible_pair(rnd, max_h, max_len)
        out = path_product(g, gp)
        c = product_checks(g, gp, out)
        if not all(c[k] for k in REQUIRED_PRODUCT_KEYS):
            violations += 1
            if first is None:
                first = {"gamma": g.dumps(), "gamma_prime": gp.dumps(), "checks": c}
        equal += c["pi2_equal"] and c["pi3_equal"]
    return {
        "suite": "path-product",
        "instances": instances,
        "violations": violations,
        "equality_rate": equal / instances if instances else None,
        "first_counterexample": first,
    }


def _case_name(d) -> str:
    axis = "jlh"[[i for i, v in enumerate(d) if v][0]]
    return f"{axis}{'+' if sum(d) > 0 else '-'}"


def bridge_suite(n: int = 2, instances: int = 100, seed: int = 0, all_open: bool = False,
                 p: float = 0.8, max_attempts: int = 100000) -> dict:
    """Check bridges for all six neighbour directions around block (1,1,1)."""
    counts = {_case_name(d): 0 for d in NEIGHBOURS}
    violations = 0
    first = None
    base = BlockCoord(1, 1, 1, n)
    params = ParamVector((1.0, p, p))
    attempts = 0

    def check(fields):
        nonlocal violations, first
        A = is_good_block(fields, base)
        if A is None:
            return
        for d in NEIGHBOURS:
            name = _case_name(d)
            if counts[name] >= instances:
                continue
            B = is_good_block(fields, base.shifted(*d))
            if B is None:
                continue
            path = bridge_blocks(A, B)
            c = bridge_checks(A, B, path)
            counts[name] += 1
            if not all(c.values()):
                violations += 1
                if first is None:
                    first = {"case": name, "checks": c, "path": path.dumps()}

    if all_open:
        check(RenormFields.constant((5 * n,) * 3))
    else:
        while min(counts.values()) < instances and attempts < max_attempts:
            fields = sample_renorm_fields(params, SeedSpec(seed, attempts), *[(0, 5 * n - 1)] * 3)
            attempts += 1
            check(fields)
    return {
        "suite": "bridge",
        "n": n,
        "all_open": all_open,
        "instances_per_case": counts,
        "attempts": attempts,
        "violations": violations,
        "first_counterexample": first,
    }


def duality_suite(instances: int = 10000, seed: int = 0, max_side: int = 20,
                  ps=(0.3, 0.5, 0.7)) -> dict:
    rng = np.random.default_rng(seed)
    violations = 0
    first = None
    for _ in range(instances):
        n, m = (int(v) for v in rng.integers(1, max_side + 1, size=2))
        p = float(rng.choice(ps))
        bits = rng.random((n, m)) < p
        if not duality_holds(Field2D(bits), Rect(n, m)):
            violations += 1
            if first is None:
                first = {"p": p, "bits": bits.astype(int).tolist()}
    return {"suite": "duality", "instances": instances, "violations": violations,
            "first_counterexample": first}
