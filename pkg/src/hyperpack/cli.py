"""Command-line front end.

Subcommands: ``bounds``, ``tau``, ``simulate``, ``verify``, ``cohn-zhao`` and
``replay``. Numbers are printed in log scale unless ``--linear`` is given.
Exit codes: 0 success, 1 scientific-check failure, 2 usage or config
error, 3 resource refusal (including ``--linear`` overflow).
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, bounds, packing, verify
from .errors import ConfigError, DimensionError, DomainError, NoRootError, ResourceError

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3
# largest x with exp(x) finite in double precision
LINEAR_LIMIT = math.log(sys.float_info.max)

BOUNDS_HEADER = ["m", "R", "epsilon", "log_L", "log_main", "tau", "log_delta", "log_lambda", "notes"]
LINEAR_HEADER = ["m", "R", "epsilon", "L", "main", "tau", "delta", "lambda", "notes"]
LOG_FIELDS = ("log_L", "log_main", "log_delta", "log_lambda")


class UsageError(Exception):
    pass


@dataclass
class RunManifest:
    command: str
    params: dict
    argv: list
    seed: int | None
    version: str = __version__
    started: str = ""
    finished: str = ""
    outputs: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


def _now():
    return datetime.now(timezone.utc).isoformat()


# -- parsing ----------------------------------------------------------------

def parse_grid(text: str, integer: bool = False) -> list:
    """Comma list ``a,b,c`` or geometric range ``start:stop:count``."""
    text = (text or "").strip()
    if not text:
        raise UsageError("empty grid")
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise UsageError(f"range must be start:stop:count, got {text!r}")
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
            if count < 1 or start <= 0 or stop <= 0:
                raise UsageError(f"range needs positive endpoints and count, got {text!r}")
            values = np.geomspace(start, stop, count).tolist()
        else:
            values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse grid {text!r}: {exc}") from None
    if not values:
        raise UsageError("empty grid")
    if integer:
        values = [int(round(v)) for v in values]
    return values


def _pool_map(workers: int):
    if workers <= 1:
        return contextlib.nullcontext(map)
    pool = ProcessPoolExecutor(max_workers=workers)

    @contextlib.contextmanager
    def managed():
        with pool:
            yield pool.map
    return managed()


def _linearize(value):
    if value is None:
        return None
    if value > LINEAR_LIMIT:
        raise OverflowError(f"exp({value:.6g}) overflows a double")
    return math.exp(value)


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_csv(fh, header, rows):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_csv_cell(row[k]) for k in header])


# -- commands ---------------------------------------------------------------

def _bounds_cell(job):
    m, R, eps = job
    return bounds.compute_row(m, R, eps).as_dict()


def cmd_bounds(args, manifest):
    ms = parse_grid(args.m, integer=True)
    Rs = parse_grid(args.R)
    jobs = [(m, R, args.epsilon) for m in ms for R in Rs]
    with _pool_map(args.workers) as mapper:
        rows = list(mapper(_bounds_cell, jobs))
    header = BOUNDS_HEADER
    if args.linear:
        header = LINEAR_HEADER
        rows = [{**{k: r[k] for k in ("m", "R", "epsilon", "tau", "notes")},
                 **{k[4:]: _linearize(r[k]) for k in LOG_FIELDS}} for r in rows]
    return header, rows, EXIT_OK


def _tau_cell(job):
    m, R = job
    row = {"m": m, "R": R, "tau": None, "lo": None, "hi": None, "q": None, "notes": ""}
    try:
        lo, hi = bounds.bracket_tau(m, R)
    except NoRootError:
        row["notes"] = "no-root"
        return row
    row.update(tau=0.5 * (lo + hi), lo=lo, hi=hi)
    if R < m:
        row["q"] = bounds.check_claim_basic(m, R, row["tau"]).q
    return row


def cmd_tau(args, manifest):
    jobs = [(m, R) for m in parse_grid(args.m, integer=True) for R in parse_grid(args.R)]
    with _pool_map(args.workers) as mapper:
        rows = list(mapper(_tau_cell, jobs))
    return ["m", "R", "tau", "lo", "hi", "q", "notes"], rows, EXIT_OK


def cmd_cohn_zhao(args, manifest):
    codes = bounds.read_code_table(args.codes)
    rows = []
    for m in parse_grid(args.m, integer=True):
        val = bounds.cohn_zhao_bound_log(m, codes)
        rows.append({"m": m, "log_bound": val,
                     "bound": math.exp(val) if val <= LINEAR_LIMIT else None})
    return ["m", "log_bound", "bound"], rows, EXIT_OK


def _config_from_args(args) -> packing.SimConfig:
    return packing.SimConfig(m=args.m, R=args.R, L=args.L, lam=args.lam,
                             target_degree=args.target_degree, seed=args.seed,
                             degree_cap=args.degree_cap, codegree_cap=args.codegree_cap,
                             mc_samples=args.mc_samples)


def cmd_simulate(args, manifest):
    config = _config_from_args(args)
    result = packing.run_pipeline(config)
    payload = result.to_dict()
    payload["config"] = asdict(config)
    if args.points:
        packing.write_points_csv(args.points, result)
        manifest.outputs.append(str(args.points))
    code = EXIT_OK if result.packing_valid else EXIT_FAIL
    return None, payload, code


def cmd_verify(args, manifest):
    with _pool_map(args.workers) as mapper:
        checks = verify.run_suite(args.suite, args.seed, map_fn=mapper)
    passed = all(c.passed for c in checks)
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {args.suite}.{c.name} margin={c.margin:.6g}",
              file=sys.stderr)
    payload = {"suite": args.suite, "seed": args.seed, "passed": passed,
               "checks": [c.to_dict() for c in checks]}
    return None, payload, EXIT_OK if passed else EXIT_FAIL


# -- output -----------------------------------------------------------------

def _emit(args, manifest, header, payload):
    """Write CSV (``header`` given) or JSON, to ``--out`` or stdout."""
    fmt = getattr(args, "format", "json") if header is not None else "json"
    out = Path(args.out) if args.out else None
    if out is not None:
        manifest.outputs.insert(0, str(out))
    manifest.finished = _now()
    if fmt == "csv":
        buf = io.StringIO()
        _write_csv(buf, header, payload)
        text = buf.getvalue()
    else:
        body = {"rows": payload} if header is not None else dict(payload)
        body["manifest"] = manifest.to_dict()
        text = json.dumps(body, indent=2) + "\n"
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", newline="") as fh:
        fh.write(text)
    with open(str(out) + ".manifest.json", "w") as fh:
        json.dump(manifest.to_dict(), fh, indent=2)
        fh.write("\n")


def _add_common(p, seed=False, workers=True, fmt=True):
    p.add_argument("--out", help="output path (default stdout); a manifest is written beside it")
    if fmt:
        p.add_argument("--format", choices=("csv", "json"), default="csv")
    if workers:
        p.add_argument("--workers", type=int, default=1, help="process pool size")
    if seed:
        p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hyperpack", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"hyperpack {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="tabulate packing-density bounds over an (m, R) grid")
    p.add_argument("--m", required=True, help="dimensions: comma list or start:stop:count")
    p.add_argument("--R", required=True, help="radii: comma list or start:stop:count")
    p.add_argument("--epsilon", type=float, default=bounds.DEFAULT_EPSILON)
    p.add_argument("--linear", action="store_true", help="print linear values (exit 3 on overflow)")
    _add_common(p)

    p = sub.add_parser("tau", help="solve for the threshold distance tau")
    p.add_argument("--m", required=True)
    p.add_argument("--R", required=True)
    _add_common(p)

    p = sub.add_parser("simulate", help="run the random packing pipeline")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--R", type=float, required=True)
    p.add_argument("--L", type=float, required=True, help="sampling radius, must exceed 4R")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--lambda", dest="lam", type=float)
    g.add_argument("--target-degree", type=float)
    p.add_argument("--degree-cap", type=float)
    p.add_argument("--codegree-cap", type=float)
    p.add_argument("--mc-samples", type=int, default=20_000)
    p.add_argument("--points", help="also write the sampled points as CSV")
    _add_common(p, seed=True, workers=False, fmt=False)

    p = sub.add_parser("verify", help="run a numerical verification suite")
    p.add_argument("suite", choices=verify.SUITES)
    _add_common(p, seed=True, fmt=False)

    p = sub.add_parser("cohn-zhao", help="upper bound from a spherical-code table")
    p.add_argument("--m", required=True)
    p.add_argument("--codes", required=True, help="CSV with header theta,log_A")
    _add_common(p, workers=False)

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest")
    p.add_argument("--out", help="redirect the replayed output")
    return parser


COMMANDS = {
    "bounds": cmd_bounds,
    "tau": cmd_tau,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "cohn-zhao": cmd_cohn_zhao,
}


def _replay_argv(args) -> list:
    with open(args.manifest) as fh:
        data = json.load(fh)
    if "manifest" in data:
        data = data["manifest"]
    argv = list(data["argv"])
    # drop any recorded --out and substitute the requested one
    cleaned, skip = [], False
    for tok in argv:
        if skip:
            skip = False
            continue
        if tok == "--out":
            skip = True
            continue
        if tok.startswith("--out="):
            continue
        cleaned.append(tok)
    if args.out:
        cleaned += ["--out", args.out]
    return cleaned


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "replay":
        try:
            return main(_replay_argv(args))
        except (OSError, KeyError, json.JSONDecodeError) as exc:
            print(f"error: cannot read manifest: {exc}", file=sys.stderr)
            return EXIT_USAGE

    params = {k: v for k, v in vars(args).items() if k != "command"}
    manifest = RunManifest(command=args.command, params=params, argv=argv,
                           seed=getattr(args, "seed", None), started=_now())
    try:
        header, payload, code = COMMANDS[args.command](args, manifest)
        _emit(args, manifest, header, payload)
        return code
    except (UsageError, ConfigError, DimensionError, DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ResourceError, OverflowError) as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
