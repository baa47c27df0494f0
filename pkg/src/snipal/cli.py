"""Command line front end: ``snipal solve``, ``snipal generate`` and ``snipal bench``.

Exit codes: 0 converged (or success), 1 input error, 2 not converged or a
benchmark instance failed.
"""
from __future__ import annotations

import argparse
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
import json
import logging
from pathlib import Path
import sys
import time

import numpy as np

from .admm import AdmmConfig
from .alm import InnerSolverFailure, SnipalConfig, SolverTrace
from .estimator import LINSYS_CHOICES, solve_lp
from .instances import GeneratorSpec, load_problem, write_mps, write_native
from .ssn import SsnConfig

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_INPUT, EXIT_NOT_CONVERGED = 0, 1, 2

TABLE_COLUMNS = ("k", "itssn", "itkrylov", "eta_p", "eta_d", "eta_c", "eta", "pobj", "dobj", "sigma", "tau", "time")

# bare words accepted in a generator spec, mapped to parameter settings
_FLAG_WORDS = {
    "complete": ("edge_prob", 1.0),
    "structured": ("structured", True),
    "all_rotations": ("all_rotations", True),
    "rotations": ("all_rotations", True),
}


class InputError(ValueError):
    pass


def _parse_value(text: str):
    low = text.lower()
    if low in ("true", "yes"):
        return True
    if low in ("false", "no"):
        return False
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def parse_gen_spec(tokens, seed: int = 0) -> GeneratorSpec:
    """``["transport", "s=100", "t=150"]`` -> :class:`GeneratorSpec`."""
    if not tokens:
        raise InputError("empty generator spec")
    params = {}
    for tok in tokens[1:]:
        if "=" in tok:
            k, v = tok.split("=", 1)
            if not k:
                raise InputError(f"bad generator parameter {tok!r}")
            params[k.replace("-", "_")] = _parse_value(v)
        elif tok.lower() in _FLAG_WORDS:
            k, v = _FLAG_WORDS[tok.lower()]
            params[k] = v
        else:
            raise InputError(f"bad generator parameter {tok!r}; expected key=value")
    if "seed" in params:
        seed = int(params.pop("seed"))
    try:
        return GeneratorSpec(tokens[0], params, seed)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _build(spec: GeneratorSpec):
    try:
        return spec.build()
    except TypeError as exc:
        raise InputError(f"invalid parameters for {spec.family}: {exc}") from exc
    except ValueError as exc:
        raise InputError(f"{spec.family}: {exc}") from exc


@dataclass
class RunRecord:
    """Everything needed to audit one solve; serializes losslessly to JSON."""

    problem: dict
    config: dict
    status: str
    kkt: dict
    trace: dict
    wall_time: float
    peak_memory_mb: float | None
    dims: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunRecord":
        return cls(**json.loads(text))

    @property
    def solver_trace(self) -> SolverTrace:
        return SolverTrace.from_dict(self.trace)


def peak_memory_mb() -> float | None:
    try:
        import resource
    except ImportError:
        return None
    rss = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    return rss / (1024.0 * 1024.0) if sys.platform == "darwin" else rss / 1024.0


def _fmt_row(row) -> str:
    return (f"{row.k:4d} {row.itssn:6d} {row.itkrylov:8d} {row.eta_p:9.2e} {row.eta_d:9.2e} {row.eta_c:9.2e} "
            f"{row.eta:9.2e} {row.pobj:16.9e} {row.dobj:16.9e} {row.sigma:9.2e} {row.tau:9.2e} {row.time:8.2f}")


def _table_header() -> str:
    return (f"{'k':>4} {'itssn':>6} {'itkrylov':>8} {'eta_p':>9} {'eta_d':>9} {'eta_c':>9} {'eta':>9} "
            f"{'pobj':>16} {'dobj':>16} {'sigma':>9} {'tau':>9} {'time':>8}")


def _config_from(args) -> tuple[SnipalConfig, AdmmConfig]:
    tol = args.tol
    if tol is None:
        tol = 1e-6 if args.preset == "miplib" else 1e-8
    try:
        cfg = SnipalConfig(sigma0=args.sigma0, tau0=args.tau0, sigma_growth=args.sigma_growth,
                           tau_decay=args.tau_decay, kkt_tol=tol, max_outer=args.max_outer,
                           ssn=replace(SsnConfig(), linsys=args.linsys))
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    return cfg, AdmmConfig()


def _load(args):
    if args.gen:
        spec = parse_gen_spec(args.gen, args.seed)
        return _build(spec), {"generator": spec.to_dict()}
    if args.input is None:
        raise InputError("give an input file or --gen FAMILY key=value ...")
    path = Path(args.input)
    if not path.is_file():
        raise InputError(f"no such file: {path}")
    try:
        return load_problem(path), {"path": str(path)}
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def run_solve(prob, identity: dict, cfg: SnipalConfig, warmstart: str, admm_cfg: AdmmConfig,
              callback=None) -> RunRecord:
    t0 = time.perf_counter()
    res = solve_lp(prob, cfg, warmstart, admm_cfg, callback)
    wall = time.perf_counter() - t0
    config = {"snipal": asdict(cfg), "warmstart": warmstart, "admm": asdict(admm_cfg)}
    return RunRecord(identity, config, res.status, res.kkt.as_dict(), res.trace.to_dict(), wall,
                     peak_memory_mb(), {"m": prob.m, "n": prob.n, "nnz": int(prob.A.nnz)},
                     list(res.warnings))


def cmd_solve(args) -> int:
    try:
        prob, identity = _load(args)
        cfg, admm_cfg = _config_from(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    out = sys.stdout
    if args.log == "table":
        print(f"# m={prob.m} n={prob.n} nnz={prob.A.nnz} tol={cfg.kkt_tol:g}", file=out)
        print(_table_header(), file=out)
        callback = lambda row: print(_fmt_row(row), file=out, flush=True)
    elif args.log == "json":
        callback = lambda row: print(json.dumps({"event": "iteration", **asdict(row)}), file=out, flush=True)
    else:
        callback = None
    try:
        rec = run_solve(prob, identity, cfg, args.warmstart, admm_cfg, callback)
    except InnerSolverFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    if args.log == "table":
        k = rec.kkt
        print(f"# status={rec.status} iter={len(rec.trace['rows'])} "
              f"(itssn={sum(r['itssn'] for r in rec.trace['rows'])}) eta={k['eta']:.3e} "
              f"pobj={k['pobj']:.12e} dobj={k['dobj']:.12e} time={rec.wall_time:.2f}s", file=out)
    elif args.log == "json":
        print(json.dumps({"event": "result", "status": rec.status, "wall_time": rec.wall_time, **rec.kkt}),
              file=out)
    for w in rec.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if args.out:
        Path(args.out).write_text(rec.to_json() + "\n")
    return EXIT_OK if rec.status == "converged" else EXIT_NOT_CONVERGED


def cmd_generate(args) -> int:
    try:
        spec = parse_gen_spec(args.spec, args.seed)
        prob = _build(spec)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    fmt = args.format
    if fmt is None:
        fmt = "mps" if args.out and args.out.lower().endswith(".mps") else "native"
    if args.out:
        if fmt == "mps":
            write_mps(prob, args.out, name=spec.family)
        else:
            write_native(prob, args.out)
    print(f"family={spec.family} seed={spec.seed} m={prob.m} n={prob.n} nnz={prob.A.nnz}")
    return EXIT_OK


def _bench_one(item):
    """Worker for one manifest entry; never raises."""
    idx, entry, defaults = item
    name = entry.get("name", f"#{idx}")
    t0 = time.perf_counter()
    try:
        opts = {**defaults, **entry.get("config", {})}
        if "gen" in entry:
            g = entry["gen"]
            spec = g if isinstance(g, list) else [g["family"], *[f"{k}={v}" for k, v in g.get("params", {}).items()]]
            seed = g.get("seed", 0) if isinstance(g, dict) else opts.get("seed", 0)
            prob = _build(parse_gen_spec(spec, seed))
        elif "path" in entry:
            prob = load_problem(entry["path"])
        else:
            raise InputError("manifest entry needs 'gen' or 'path'")
        cfg = SnipalConfig(kkt_tol=float(opts.get("tol", 1e-8)), max_outer=int(opts.get("max_outer", 200)),
                           sigma0=opts.get("sigma0"), tau0=float(opts.get("tau0", 1.0)),
                           sigma_growth=float(opts.get("sigma_growth", 5.0)),
                           tau_decay=float(opts.get("tau_decay", 0.5)),
                           ssn=replace(SsnConfig(), linsys=opts.get("linsys", "auto")))
        res = solve_lp(prob, cfg, opts.get("warmstart", "none"))
        return {"index": idx, "name": name, "m": prob.m, "n": prob.n, "iter": res.iterations,
                "itssn": res.trace.total_ssn, "itkrylov": res.trace.total_krylov,
                "time": time.perf_counter() - t0, "eta": res.kkt.eta, "pobj": res.kkt.pobj,
                "status": res.status, "error": None}
    except Exception as exc:  # recorded, the sweep continues
        return {"index": idx, "name": name, "m": None, "n": None, "iter": None, "itssn": None,
                "itkrylov": None, "time": time.perf_counter() - t0, "eta": None, "pobj": None,
                "status": "failed", "error": f"{type(exc).__name__}: {exc}"}


def _bench_line(r) -> str:
    if r["status"] == "failed":
        return f"{r['name']:<24} {'-':>7} {'-':>8} {'-':>12} {'-':>9} {r['time']:8.2f} {'-':>9}  failed: {r['error']}"
    it = f"{r['iter']} ({r['itssn']})"
    return (f"{r['name']:<24} {r['m']:>7} {r['n']:>8} {it:>12} {r['itkrylov']:>9} {r['time']:8.2f} "
            f"{r['eta']:9.2e}  {r['status']}")


def cmd_bench(args) -> int:
    path = Path(args.manifest)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read manifest {path}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if isinstance(doc, list):
        doc = {"instances": doc}
    if not isinstance(doc, dict) or not isinstance(doc.get("instances", []), list):
        print("error: manifest must be a list of instances or {\"instances\": [...]}", file=sys.stderr)
        return EXIT_INPUT
    defaults = doc.get("defaults", {})
    items = [(i, e, defaults) for i, e in enumerate(doc.get("instances", []))]
    if args.workers > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(_bench_one, items))
    else:
        rows = [_bench_one(it) for it in items]
    rows.sort(key=lambda r: r["index"])
    if args.log == "json":
        for r in rows:
            print(json.dumps(r))
    else:
        print(f"{'name':<24} {'m':>7} {'n':>8} {'iter (itssn)':>12} {'itkrylov':>9} {'time':>8} {'eta':>9}")
        for r in rows:
            print(_bench_line(r))
    if args.out:
        Path(args.out).write_text(json.dumps(rows, indent=1) + "\n")
    failed = [r for r in rows if r["status"] != "converged"]
    return EXIT_NOT_CONVERGED if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="snipal", description="Semismooth Newton proximal ALM LP solver.")
    p.add_argument("-v", "--verbose", action="count", default=0, help="more logging on stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve an LP from a file or a generator")
    s.add_argument("input", nargs="?", help="MPS file or native .json container")
    s.add_argument("--gen", nargs="+", metavar="SPEC", help="generator family followed by key=value parameters")
    s.add_argument("--tol", type=float, default=None, help="KKT tolerance (default 1e-8; 1e-6 with --preset miplib)")
    s.add_argument("--preset", choices=["default", "miplib"], default="default")
    s.add_argument("--sigma0", type=float, default=None)
    s.add_argument("--tau0", type=float, default=1.0)
    s.add_argument("--sigma-growth", type=float, default=5.0)
    s.add_argument("--tau-decay", type=float, default=0.5)
    s.add_argument("--warmstart", choices=["admm", "none"], default="none")
    s.add_argument("--linsys", choices=sorted(LINSYS_CHOICES), default="auto")
    s.add_argument("--max-outer", type=int, default=200)
    s.add_argument("--seed", type=int, default=0, help="generator seed")
    s.add_argument("--out", help="write the RunRecord JSON here")
    s.add_argument("--log", choices=["table", "json", "quiet"], default="table")
    s.set_defaults(func=cmd_solve)

    g = sub.add_parser("generate", help="write a generated instance to disk")
    g.add_argument("spec", nargs="+", help="family followed by key=value parameters")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", help="output path (.mps for MPS, anything else native JSON)")
    g.add_argument("--format", choices=["native", "mps"], default=None)
    g.set_defaults(func=cmd_generate)

    b = sub.add_parser("bench", help="run a JSON sweep manifest")
    b.add_argument("manifest")
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--out", help="write the result rows as JSON here")
    b.add_argument("--log", choices=["table", "json"], default="table")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; report those as input errors
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if getattr(args, "max_outer", 0) is not None and getattr(args, "max_outer", 0) < 0:
        print("error: --max-outer must be nonnegative", file=sys.stderr)
        return EXIT_INPUT
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
