"""Command-line front end.

    fracnehari solve --config run.ini [--seed N] [--out DIR] [--verbose]
    fracnehari fibering --config run.ini --field random:42 [--dump-phi phi.csv]
    fracnehari lambda0 --config run.ini
    fracnehari validate-kernel --config run.ini

Exit codes: 0 success, 1 error (bad config, zero field, ...), 2 partial
result (one branch failed, estimation failure, kernel check failure).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, load_config
from .fibering import FiberingError, Lambda0Error, critical_points, estimate_lambda0, phi
from .functional import reduced_integrals
from .kernel import check_admissible
from .solver import solve_both

EXIT_OK, EXIT_ERROR, EXIT_PARTIAL = 0, 1, 2


def _dump_json(record) -> str:
    return json.dumps(record, indent=2, sort_keys=True)


def write_field_csv(path: Path, nodes: np.ndarray, values: np.ndarray) -> None:
    names = ["x", "y"][: nodes.shape[1]]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([*names, "value"])
        for pt, v in zip(nodes, values):
            writer.writerow([repr(float(c)) for c in pt] + [repr(float(v))])


def read_field_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][-1].strip() != "value":
        raise ValueError(f"{path}: expected a header ending in 'value'")
    return np.array([float(row[-1]) for row in rows[1:] if row])


def _table(rows) -> str:
    width = max(len(str(k)) for k, _ in rows)
    return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)


def _fmt(x) -> str:
    return "-" if x is None else f"{x:.10g}" if isinstance(x, float) else str(x)


def _resolve_lambda(cfg: RunConfig):
    """Problem spec at the configured lambda and the lambda0 estimate (or None + reason)."""
    spec = cfg.problem_spec()
    try:
        est = estimate_lambda0(spec, cfg.sampler)
        err = None
    except Lambda0Error as exc:
        est, err = None, str(exc)
    if cfg.problem.lam is None:
        if est is None:
            raise ConfigError(f"lambda_factor needs a lambda0 estimate: {err}")
        spec = spec.with_lambda(cfg.problem.lambda_factor * est.lambda0)
    return spec, est, err


def cmd_solve(cfg: RunConfig, out_dir: Path, verbose: bool) -> int:
    spec, est, err = _resolve_lambda(cfg)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        result = solve_both(spec, cfg.solver, est, verbose=verbose)
    out_dir.mkdir(parents=True, exist_ok=True)
    record = {
        "result": result.summary(),
        "lambda": spec.lam,
        "lambda0_error": err,
        "seed": cfg.seed,
        "config": cfg.echo(),
    }
    if "csv" in cfg.output.formats:
        for name, run in (("u_plus", result.u_plus), ("u_minus", result.u_minus)):
            if run is not None:
                write_field_csv(out_dir / f"{name}.csv", spec.mesh.nodes, run.field.values)
    if "json" in cfg.output.formats:
        (out_dir / "result.json").write_text(_dump_json(record) + "\n")
    rows = [("status", result.status), ("lambda", _fmt(spec.lam)),
            ("lambda0 estimate", _fmt(None if est is None else est.lambda0))]
    for name, run in (("plus", result.u_plus), ("minus", result.u_minus)):
        if run is not None:
            rows += [(f"J(u_{name})", _fmt(run.energy)), (f"residual {name}", _fmt(run.residual))]
        rows.append((f"{name} branch", result.branch_status[name]))
    rows += [("distinctness", _fmt(result.distinctness)), ("wall time [s]", f"{result.wall_time:.3f}")]
    print(_table(rows))
    return EXIT_OK if result.status == "converged" else EXIT_PARTIAL


def _field_from_source(cfg: RunConfig, spec, source: str) -> np.ndarray:
    if source.startswith("random:"):
        seed = int(source.split(":", 1)[1])
        return np.random.default_rng(seed).random(spec.mesh.size)
    values = read_field_csv(source)
    if values.shape != (spec.mesh.size,):
        raise ValueError(f"{source}: {values.size} values for a mesh of {spec.mesh.size} nodes")
    return values


def cmd_fibering(cfg: RunConfig, source: str, dump_phi: Path | None, out_dir: Path | None) -> int:
    spec, est, _ = _resolve_lambda(cfg)
    u = _field_from_source(cfg, spec, source)
    ri = reduced_integrals(spec, u)
    try:
        report = critical_points(ri, spec.params)
    except FiberingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    record = report.as_dict()
    record.update(
        lam=spec.lam,
        delta=None if est is None else est.delta,
        lambda0=None if est is None else est.lambda0,
    )
    rows = [("case", report.case.label), ("A", _fmt(ri.A)), ("B", _fmt(ri.B)), ("D", _fmt(ri.D)),
            ("status", report.status)]
    rows += [(f"root {k + 1}", f"t = {rt.t:.12g} ({rt.kind.value}), phi = {rt.phi:.10g}")
             for k, rt in enumerate(report.roots)]
    rows += [("t*", _fmt(report.t_star)), ("F(t*)", _fmt(report.F_at_t_star)),
             ("delta", _fmt(record["delta"])), ("lambda0", _fmt(record["lambda0"]))]
    rows += [("note", n) for n in report.notes]
    print(_table(rows))
    print(_dump_json(record))
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "fibering.json").write_text(_dump_json(record) + "\n")
    if dump_phi is not None:
        top = 2.0 * max([rt.t for rt in report.roots] + [report.t_star or 0.0, 1.0])
        with open(dump_phi, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "phi"])
            for t in np.linspace(0.0, top, 401):
                writer.writerow([repr(float(t)), repr(phi(ri, spec.params, float(t)))])
    return EXIT_OK


def cmd_lambda0(cfg: RunConfig, out_dir: Path | None) -> int:
    spec = cfg.problem_spec()
    try:
        est = estimate_lambda0(spec, cfg.sampler)
    except Lambda0Error as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARTIAL
    record = est.as_dict()
    print(_table([(k, _fmt(v)) for k, v in record.items()]))
    print(_dump_json(record))
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "lambda0.json").write_text(_dump_json(record) + "\n")
    return EXIT_OK


def cmd_validate_kernel(cfg: RunConfig, out_dir: Path | None) -> int:
    report = check_admissible(cfg.kernel_spec())
    record = report.as_dict()
    print(_table([(k, _fmt(v)) for k, v in record.items()]))
    print(_dump_json(record))
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "kernel_check.json").write_text(_dump_json(record) + "\n")
    return EXIT_OK if report.admissible else EXIT_PARTIAL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracnehari", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, type=Path, help="run configuration file")
        p.add_argument("--seed", type=int, help="override [run] seed")
        p.add_argument("--out", type=Path, help="output directory (overrides [output] directory)")
        p.add_argument("--verbose", action="store_true", help="emit iteration traces")

    common(sub.add_parser("solve", help="compute both non-negative solutions"))
    p = sub.add_parser("fibering", help="fibering-map report for one field")
    common(p)
    p.add_argument("--field", default="random:42", help="random:SEED or a CSV file (x[,y],value)")
    p.add_argument("--dump-phi", type=Path, help="write phi(t) samples to this CSV")
    common(sub.add_parser("lambda0", help="estimate the lambda0 threshold"))
    common(sub.add_parser("validate-kernel", help="check the kernel conditions"))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = cfg.with_seed(args.seed)
        out_dir = args.out or Path(cfg.output.directory)
        if args.command == "solve":
            return cmd_solve(cfg, out_dir, args.verbose or cfg.output.verbosity > 0)
        if args.command == "fibering":
            return cmd_fibering(cfg, args.field, args.dump_phi, args.out)
        if args.command == "lambda0":
            return cmd_lambda0(cfg, args.out)
        return cmd_validate_kernel(cfg, args.out)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
