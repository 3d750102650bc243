"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 runtime error (including
failed verifications and non-bracketing bisections).
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import logging
import sys
from dataclasses import asdict, replace
from pathlib import Path

from . import __version__
from .errors import LinePercError, SpecMismatchError
from .estimators import (
    OBSERVABLES,
    PLANAR_OBSERVABLES,
    EstimateRecord,
    ExperimentSpec,
    bisect_critical,
    default_threads,
    fit_decay,
    merge,
    run_chunks,
)
from .lattice import BoxRegion, ParamVector, SeedSpec, dump_plane_field, load_plane_field, sample_plane_fields
from .plotting import decay_svg
from .renorm import RenormRegion, region_report, sample_region_fields
from .verify import bridge_suite, duality_suite, path_product_suite

log = logging.getLogger("lineperc")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


class ConfigError(Exception):
    pass


def csv_columns(d: int) -> list[str]:
    return (
        ["spec_hash", "d"]
        + [f"p{i + 1}" for i in range(d)]
        + ["observable", "n", "N", "L", "block_n", "c", "k", "replicas", "successes",
           "estimate", "stderr", "master_seed"]
    )


def csv_row(spec: ExperimentSpec, rec: EstimateRecord) -> dict:
    def opt(v):
        return "" if v is None else v

    row = {"spec_hash": spec.spec_hash, "d": spec.d}
    row.update({f"p{i + 1}": repr(p) for i, p in enumerate(spec.p)})
    density = spec.observable == "density"
    row.update(
        observable=spec.observable,
        n=opt(spec.n),
        N=opt(spec.big_n if spec.observable == "truncated" else spec.N),
        L=opt(spec.L),
        block_n=spec.block_n,
        c=repr(spec.c),
        k=opt(spec.k),
        replicas=rec.trials,
        successes=rec.successes,
        estimate=repr(rec.mean_x if density else rec.estimate),
        stderr=repr(rec.stderr_x if density else rec.stderr),
        master_seed=spec.master_seed,
    )
    return row


def write_csv(path: str | None, rows: list[tuple[ExperimentSpec, EstimateRecord]]) -> None:
    if not rows:
        return
    d = max(s.d for s, _ in rows)
    fh = open(path, "w", newline="") if path else sys.stdout
    try:
        w = csv.DictWriter(fh, fieldnames=csv_columns(d), lineterminator="\n", restval="")
        w.writeheader()
        for spec, rec in rows:
            w.writerow(csv_row(spec, rec))
    finally:
        if path:
            fh.close()


# -- argument handling -------------------------------------------------------------

SPEC_KEYS = ("d", "p", "obs", "n", "N", "kappa", "L", "block_n", "c", "k", "depth", "replicas", "seed")


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in str(text).replace(" ", "").split(",") if t]
    except ValueError as exc:
        raise ConfigError(f"cannot parse number list {text!r}") from exc


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in str(text).replace(" ", "").split(",") if t]
    except ValueError as exc:
        raise ConfigError(f"cannot parse integer list {text!r}") from exc


def apply_config(args: argparse.Namespace) -> argparse.Namespace:
    """Fill unset options from ``--config`` (INI file, one experiment per
    section).  Command-line flags take precedence."""
    if not getattr(args, "config", None):
        return args
    cp = configparser.ConfigParser()
    if not cp.read(args.config):
        raise ConfigError(f"cannot read config file {args.config}")
    section = args.section or (cp.sections()[0] if cp.sections() else None)
    if section is None or section not in cp:
        raise ConfigError(f"section {section!r} not found in {args.config}")
    for key, value in cp[section].items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            raise ConfigError(f"unknown config key {key!r}")
        if getattr(args, attr) is None:
            setattr(args, attr, value)
    return args


def _params(args) -> tuple[float, ...]:
    if args.p is None:
        raise ConfigError("--p is required")
    p = _floats(args.p)
    planar = getattr(args, "obs", None) in PLANAR_OBSERVABLES
    if args.d is not None:
        d = int(args.d)
    elif len(p) == 1 and not planar:
        d = 3
    else:
        d = len(p)
    if len(p) == 1 and d > 1:
        p = p * d
    if len(p) != d:
        raise ConfigError(f"--p has {len(p)} entries but --d is {d}")
    return tuple(p)


def _opt_int(v):
    return None if v is None or v == "" else int(v)


def build_spec(args, p=None) -> ExperimentSpec:
    if args.obs is None:
        raise ConfigError("--obs is required")
    try:
        return ExperimentSpec(
            p=p if p is not None else _params(args),
            observable=args.obs,
            replicas=int(args.replicas if args.replicas is not None else 100),
            master_seed=int(args.seed if args.seed is not None else 0),
            n=_opt_int(args.n),
            N=_opt_int(args.N),
            kappa=int(args.kappa if args.kappa is not None else 4),
            L=_opt_int(args.L),
            block_n=int(args.block_n if args.block_n is not None else 8),
            c=float(args.c if args.c is not None else 2.0),
            k=_opt_int(args.k),
            depth=_opt_int(args.depth),
        )
    except (LinePercError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _threads(args) -> int:
    return int(args.threads) if args.threads else default_threads()


# -- persistence -------------------------------------------------------------------


def read_log(path: Path, spec: ExperimentSpec) -> list[EstimateRecord]:
    """Completed batches for ``spec`` from an append-only JSON-lines log."""
    if not path.exists():
        return []
    recs, others = [], 0
    for line in path.read_text().splitlines():
        if not line.strip():
            continue
        obj = json.loads(line)
        if obj.get("spec_hash") != spec.spec_hash:
            others += 1
            continue
        r = obj["record"]
        r["ranges"] = tuple(tuple(x) for x in r["ranges"])
        recs.append(EstimateRecord(**r))
    if others and not recs:
        raise SpecMismatchError(f"log {path} holds results of a different experiment")
    return recs


def run_logged(spec: ExperimentSpec, args) -> EstimateRecord:
    """Run with batch persistence; on ``--resume`` skip logged batches."""
    chunk = int(args.chunk) if args.chunk else max(1, spec.replicas)
    logpath = Path(args.log) if args.log else None
    previous = []
    if logpath and args.resume:
        previous = read_log(logpath, spec)
    done = [rg for r in previous for rg in r.ranges]

    def persist(rec: EstimateRecord):
        if logpath:
            with open(logpath, "a") as fh:
                fh.write(json.dumps({"spec_hash": spec.spec_hash, "spec": asdict(spec),
                                     "record": asdict(rec)}, sort_keys=True) + "\n")

    new = run_chunks(spec, chunk, _threads(args), done, persist)
    recs = previous + ([new] if new.trials else [])
    # keep only batches inside the requested replica range
    lo, hi = spec.first_replica, spec.first_replica + spec.replicas
    recs = [r for r in recs if all(lo <= a and b <= hi for a, b in r.ranges)]
    return merge(recs) if recs else new


# -- subcommands -------------------------------------------------------------------


def cmd_estimate(args) -> int:
    spec = build_spec(args)
    rec = run_logged(spec, args)
    write_csv(args.out, [(spec, rec)])
    return EXIT_OK


def cmd_scan(args) -> int:
    if args.p is None:
        args.p = "0.5"
    base = build_spec(args)
    if args.rho:
        grid = [(r,) * base.d for r in _floats(args.rho)]
    elif args.grid:
        grid = [tuple(_floats(g)) for g in args.grid.split(";") if g.strip()]
    else:
        raise ConfigError("scan needs --rho or --grid")
    rows = []
    for p in grid:
        try:
            spec = base.with_p(p)
        except LinePercError as exc:
            raise ConfigError(str(exc)) from exc
        rows.append((spec, run_logged(spec, args)))
    write_csv(args.out, rows)
    return EXIT_OK


def cmd_bisect(args) -> int:
    if args.p is None:
        args.p = "0.5"
    spec = build_spec(args)
    lo, hi = _floats(args.range)
    res = bisect_critical(spec, (lo, hi), float(args.target), float(args.tol), _threads(args))
    report = {
        "observable": spec.observable,
        "L": spec.L,
        "depth": spec.depth,
        "target": res.target,
        "bracketed": res.bracketed,
        "interval": list(res.interval),
        "midpoint": res.midpoint,
        "points": [{"rho": r, "successes": rec.successes, "trials": rec.trials,
                    "estimate": rec.estimate, "stderr": rec.stderr} for r, rec in res.records],
    }
    text = json.dumps(report, indent=2)
    if args.json:
        Path(args.json).write_text(text + "\n")
    print(text)
    if args.out:
        write_csv(args.out, [(spec.diagonal(r), rec) for r, rec in res.records])
    if not res.bracketed:
        log.error("range %s does not bracket the target %s", args.range, args.target)
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_decay_fit(args) -> int:
    p = _params(args)
    ns = _ints(args.ns)
    rows = []
    for n in ns:
        a = argparse.Namespace(**vars(args))
        a.n = n
        spec = build_spec(a, p)
        rows.append((spec, run_logged(spec, args)))
    write_csv(args.out, rows)
    est = [r.estimate for _, r in rows]
    err = [r.stderr for _, r in rows]
    report = {"ns": ns, "estimates": est, "stderr": err}
    code = EXIT_OK
    try:
        fit = fit_decay(ns, est)
        report["fit"] = asdict(fit) | {"preferred": fit.preferred, "margin": fit.margin}
        fits = {"exponential": list(fit.exp_predict(ns)), "power": list(fit.power_predict(ns))}
    except LinePercError as exc:
        report["fit_error"] = str(exc)
        fits = {}
        code = EXIT_RUNTIME
    if args.svg and any(e > 0 for e in est):
        Path(args.svg).write_text(decay_svg(ns, est, err, fits, title=f"{args.obs} p={p}"))
    text = json.dumps(report, indent=2)
    if args.json:
        Path(args.json).write_text(text + "\n")
    print(text)
    return code


def cmd_verify_lemma(args) -> int:
    seed = int(args.seed or 0)
    if args.suite == "path-product":
        rep = path_product_suite(int(args.instances or 1000), seed, int(args.max_h), int(args.max_len))
    elif args.suite == "bridge":
        rep = bridge_suite(int(args.n or 2), int(args.instances or 100), seed, args.all_open)
    else:
        rep = duality_suite(int(args.instances or 10000), seed)
    text = json.dumps(rep, indent=2)
    if args.json:
        Path(args.json).write_text(text + "\n")
    print(text)
    return EXIT_OK if rep["violations"] == 0 else EXIT_RUNTIME


def cmd_renorm_scan(args) -> int:
    p = _params(args)
    try:
        params = ParamVector(p)
        region = RenormRegion(float(args.c or 2.0), int(args.k or 16), int(args.block_n or 8))
    except LinePercError as exc:
        raise ConfigError(str(exc)) from exc
    reps = int(args.replicas or 10)
    seed = int(args.seed or 0)
    hits, good = 0, []
    first = None
    for r in range(reps):
        fields = sample_region_fields(params, SeedSpec(seed, r), region)
        rep = region_report(fields, region, with_path=bool(args.dump_path) and first is None)
        hits += rep["crossing"] is not None
        good.append(rep["good_fraction"])
        if first is None:
            first = rep
    out = {
        "p": list(p), "n": region.n, "c": region.c, "k": region.k, "replicas": reps,
        "crossing_frequency": hits / reps, "mean_good_fraction": sum(good) / reps,
        "first_replica": first,
    }
    if args.dump_path and first and "path" in first:
        Path(args.dump_path).write_text("".join(f"{x} {y} {z}\n" for x, y, z in first["path"]))
    text = json.dumps(out, indent=2)
    if args.json:
        Path(args.json).write_text(text + "\n")
    print(text)
    return EXIT_OK


def cmd_dump(args) -> int:
    p = _params(args)
    params = ParamVector(p)
    # radius n, or the box B(L // 2) used by the crossing and density observables
    radius = int(args.L) // 2 if args.L else int(args.n or 4)
    box = BoxRegion.around_origin(radius, params.d)
    seed = SeedSpec(int(args.seed or 0), int(args.replica or 0))
    fields = sample_plane_fields(params, box, seed)
    axis = int(args.axis)
    if not 0 <= axis < params.d:
        raise ConfigError("axis out of range")
    dump_plane_field(args.out, fields[axis], params.d, seed)
    return EXIT_OK


def cmd_load(args) -> int:
    fld, d, seed = load_plane_field(args.file)
    print(json.dumps({"d": d, "axis": fld.axis, "lo": fld.lo, "hi": fld.hi, "seed": seed.seed,
                      "replica": seed.replica, "bits": int(fld.volume),
                      "open_fraction": float(fld.bits.mean())}, indent=2))
    return EXIT_OK


# -- parser ------------------------------------------------------------------------


def _spec_options(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("experiment")
    g.add_argument("--d", help="dimension (default: length of --p, or 3 for a single value)")
    g.add_argument("--p", help="comma-separated line parameters (one value = diagonal)")
    g.add_argument("--obs", choices=OBSERVABLES, help="observable")
    g.add_argument("--n", help="radius n of B(n)")
    g.add_argument("--N", help="outer radius for the truncated event (default kappa*n)")
    g.add_argument("--kappa", help="N = kappa * n when --N is absent (default 4)")
    g.add_argument("--L", help="box side for crossing/density observables")
    g.add_argument("--block-n", dest="block_n", help="renormalization block side (default 8)")
    g.add_argument("--c", help="region width constant (default 2.0)")
    g.add_argument("--k", help="region height in blocks")
    g.add_argument("--depth", help="2-directed depth")
    g.add_argument("--replicas", help="number of replicas")
    g.add_argument("--seed", help="master seed")
    r = p.add_argument_group("run")
    r.add_argument("--threads", help="worker threads (default: LINEPERC_THREADS or CPU count)")
    r.add_argument("--config", help="INI file with one experiment per section")
    r.add_argument("--section", help="config section to use (default: first)")
    r.add_argument("--out", help="CSV output path (default: stdout)")
    r.add_argument("--log", help="append-only JSON-lines result log")
    r.add_argument("--chunk", help="replicas per logged batch")
    r.add_argument("--resume", action="store_true", help="skip batches already in --log")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lineperc", description="Bernoulli line percolation experiments")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="estimate one observable")
    _spec_options(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("scan", help="sweep a parameter grid")
    _spec_options(p)
    p.add_argument("--rho", help="comma-separated diagonal values")
    p.add_argument("--grid", help="semicolon-separated parameter vectors")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("bisect", help="locate a critical point on the diagonal")
    _spec_options(p)
    p.add_argument("--range", required=True, help="lo,hi")
    p.add_argument("--tol", default="0.005")
    p.add_argument("--target", default="0.5")
    p.add_argument("--json", help="write the report here as well")
    p.set_defaults(func=cmd_bisect)

    p = sub.add_parser("decay-fit", help="estimate a curve over n and fit decay laws")
    _spec_options(p)
    p.add_argument("--ns", required=True, help="comma-separated radii")
    p.add_argument("--svg", help="SVG plot path")
    p.add_argument("--json", help="fit report path")
    p.set_defaults(func=cmd_decay_fit)

    p = sub.add_parser("verify-lemma", help="randomised construction checks")
    p.add_argument("suite", choices=("path-product", "bridge", "duality"))
    p.add_argument("--instances")
    p.add_argument("--seed")
    p.add_argument("--max-h", dest="max_h", default="4")
    p.add_argument("--max-len", dest="max_len", default="40")
    p.add_argument("--n", help="block side for the bridge suite")
    p.add_argument("--all-open", dest="all_open", action="store_true")
    p.add_argument("--json")
    p.set_defaults(func=cmd_verify_lemma)

    p = sub.add_parser("renorm-scan", help="good-block grids and crossings")
    _spec_options(p)
    p.add_argument("--dump-path", dest="dump_path", help="write the first extracted path (x y z lines)")
    p.add_argument("--json")
    p.set_defaults(func=cmd_renorm_scan)

    p = sub.add_parser("dump", help="write a plane-field snapshot")
    _spec_options(p)
    p.add_argument("--axis", default="0")
    p.add_argument("--replica", default="0")
    p.set_defaults(func=cmd_dump)

    p = sub.add_parser("load", help="summarise a plane-field snapshot")
    p.add_argument("file")
    p.set_defaults(func=cmd_load)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        apply_config(args)
        return args.func(args)
    except (ConfigError, SpecMismatchError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except KeyboardInterrupt:
        log.error("interrupted; completed batches are in the log, rerun with --resume")
        return EXIT_RUNTIME
    except (LinePercError, OSError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
