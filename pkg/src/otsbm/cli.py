"""``otsbm`` command line: validate, generate, tighten, solve, oracle, bench."""
from __future__ import annotations

import argparse
import datetime as _dt
import json
import os
import sys
import tempfile
from importlib import resources
from pathlib import Path

from . import __version__
from .bench import OracleError, brute_force_ots, curves_csv, records_csv, run_benchmark
from .graph import DisconnectedNetworkError
from .model import InstanceError, Network, generate_instances, load_network, read_bounds, render_network, \
    validate_network, write_bounds
from .optcore import NumericalFailure, solve_milp
from .optcore.kernel import KERNEL_NAME
from .optcore.lp import FEAS_TOL, PIVOT_TOL
from .optcore.milp import INT_TOL
from .otsbuild import AggregateInfeasible, build_ots_milp
from .tighten import TighteningConfig, TighteningError, initial_bounds, run_algorithm1

DOMAIN_ERRORS = (InstanceError, OSError, TighteningError, OracleError, AggregateInfeasible,
                 DisconnectedNetworkError, NumericalFailure, ValueError)


def write_atomic(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def resolve_network(spec: str) -> Network:
    """Load an instance file, or a bundled fixture by name (``tri3``, ``ring4``)."""
    if os.path.exists(spec):
        return load_network(spec)
    bundled = resources.files("otsbm") / "data" / f"{spec}.json"
    if bundled.is_file():
        from .model import parse_network
        return parse_network(bundled.read_text(encoding="utf-8"))
    raise FileNotFoundError(f"network file not found: {spec}")


def banner(args, method: str = "-", gap: float | None = None) -> None:
    stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    seed = getattr(args, "seed", None)
    gap_txt = "-" if gap is None else repr(gap)
    print(f"# otsbm {__version__} {stamp} cmd={args.command} seed={seed} method={method} kernel={KERNEL_NAME} "
          f"tol[feas={FEAS_TOL:g} pivot={PIVOT_TOL:g} int={INT_TOL:g} gap={gap_txt}]", file=sys.stderr)


def _config(method: str, cost_bound: str, iters: int) -> TighteningConfig:
    text = method.strip().upper()
    if text in ("NONE", "SP-OC") or "(" in text or text.count("-") == 2:
        return TighteningConfig.from_label(text, iters)
    tag = "H" if cost_bound == "heuristic" else "N"
    return TighteningConfig.from_label(f"{text}-{tag}", iters)


def cmd_validate(args) -> int:
    banner(args)
    net = resolve_network(args.network)
    problems = validate_network(net)
    for p in problems:
        print(f"violation: {p}")
    if problems:
        return 1
    print(f"ok: {net.name} ({len(net.buses)} buses, {len(net.lines)} lines, "
          f"{len(net.switchable_ids)} switchable)")
    return 0


def cmd_generate(args) -> int:
    banner(args)
    base = resolve_network(args.base)
    for inst in generate_instances(base, args.seed, args.count):
        write_atomic(Path(args.out) / f"{inst.name}.json", render_network(inst))
    print(f"wrote {args.count} instances to {args.out}")
    return 0


def cmd_tighten(args) -> int:
    cfg = _config(args.method, args.cost_bound, args.iters)
    banner(args, cfg.label)
    net = resolve_network(args.network)
    report = run_algorithm1(net, cfg)
    text = write_bounds(report.bounds)
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    dm, dl = report.snapshots[-1]
    print(f"method {cfg.label}  cost_cap {report.cost_cap!r}  dM {dm:.2f}%  dL {dl:.2f}%  "
          f"T_bnd {report.t_bnd_s:.3f}s  pinned_closed {sorted(report.pinned_closed)}  "
          f"pinned_open {sorted(report.pinned_open)}", file=sys.stderr if not args.out else sys.stdout)
    return 0


def cmd_solve(args) -> int:
    net = resolve_network(args.network)
    if args.bounds:
        with open(args.bounds, encoding="utf-8") as fh:
            bounds = read_bounds(fh.read(), net)
    else:
        bounds = initial_bounds(net)
    banner(args, bounds.method_label or "SP-OC", args.gap)
    out = solve_milp(build_ots_milp(net, bounds), args.time_limit, args.gap)
    result = {
        "network": net.name,
        "method_label": bounds.method_label or "SP-OC",
        "status": out.status,
        "objective": out.objective,
        "best_bound": out.best_bound,
        "gap": out.gap,
        "node_count": out.node_count,
        "topology": {lid: int(round(out.values[f"x[{lid}]"])) for lid in net.switchable_ids} if out.values else {},
        "dispatch": {str(b.id): out.values[f"p[{b.id}]"] for b in net.buses} if out.values else {},
    }
    print(f"status {out.status}")
    print(f"objective {out.objective!r}")
    print(f"nodes {out.node_count}  wall {out.wall_time_s:.3f}s", file=sys.stderr)
    if args.out:
        write_atomic(args.out, json.dumps(result, indent=2) + "\n")
    return 0


def cmd_oracle(args) -> int:
    banner(args)
    net = resolve_network(args.network)
    cost, topo = brute_force_ots(net)
    print(f"objective {cost!r}")
    doc = {"network": net.name, "objective": cost, "topology": topo}
    if args.out:
        write_atomic(args.out, json.dumps(doc, indent=2) + "\n")
    return 0


def cmd_bench(args) -> int:
    methods = [_config(tok, args.cost_bound, args.iters) for tok in args.methods.split(",") if tok.strip()]
    banner(args, ",".join(m.label for m in methods), args.gap)
    paths = sorted(Path(args.instances).glob("*.json"))
    if not paths:
        raise FileNotFoundError(f"no instance files (*.json) in {args.instances}")
    instances = [load_network(p) for p in paths]
    if args.bounds_dir:
        Path(args.bounds_dir).mkdir(parents=True, exist_ok=True)
    result = run_benchmark(instances, methods, args.time_limit, args.gap, args.jobs, args.bounds_dir)
    write_atomic(args.out, records_csv(result.records))
    if args.curve:
        write_atomic(args.curve, curves_csv(result.curves))
    if args.summary:
        write_atomic(args.summary, result.summary)
    sys.stdout.write(result.summary)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="otsbm", description=__doc__)
    parser.add_argument("--version", action="version", version=f"otsbm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check an instance file")
    p.add_argument("network")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("generate", help="random spanning subgraphs and perturbed demands")
    p.add_argument("--base", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    def tighten_flags(q):
        q.add_argument("--cost-bound", choices=["naive", "heuristic"], default="heuristic")
        q.add_argument("--iters", type=int, default=4)

    p = sub.add_parser("tighten", help="run the bound tightening and write a bounds file")
    p.add_argument("--network", required=True)
    p.add_argument("--method", default="bt-rc", help="sp-oc | sp-rc | bt-oc | bt-rc (or a label like BT-RC-H(4))")
    tighten_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_tighten)

    p = sub.add_parser("solve", help="solve the switching MILP")
    p.add_argument("--network", required=True)
    p.add_argument("--bounds")
    p.add_argument("--time-limit", type=float, default=3600.0)
    p.add_argument("--gap", type=float, default=1e-4)
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", help="enumerate every topology")
    p.add_argument("--network", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("bench", help="benchmark tightening methods over an instance directory")
    p.add_argument("--instances", required=True)
    p.add_argument("--methods", default="sp-oc,bt-rc")
    tighten_flags(p)
    p.add_argument("--time-limit", type=float, default=3600.0)
    p.add_argument("--gap", type=float, default=1e-4)
    p.add_argument("--out", required=True)
    p.add_argument("--curve")
    p.add_argument("--summary")
    p.add_argument("--bounds-dir")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse usage errors exit with 2
        return int(exc.code or 0)
    try:
        return args.func(args)
    except DOMAIN_ERRORS as exc:
        print(f"otsbm: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
