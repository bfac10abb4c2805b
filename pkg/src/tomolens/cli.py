"""Command-line entry point: ``tomolens <command> ...``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from itertools import combinations
from pathlib import Path

import numpy as np

from . import fixtures as fx
from .figures import embed_triangle, error_disks_svg
from .noise import DEFAULT_K, DEFAULT_RESCALE, TABLE_DEVIATION_MULTIPLE, error_report
from .protocols import CATALOG_LABELS, build_protocol, catalog_state, two_qubit_ket
from .qmetrics import density_to_dict, pure_density, read_density_json, trace_distance
from .reconstruct import (
    ObservationVector,
    assemble_observations,
    read_count_csv,
    reconstruct_all,
    reconstruct_state,
)
from .simulate import SimulationConfig, run_trials


class CLIError(Exception):
    pass


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _observations(protocol, counts_path, rounding, fixture_dir):
    """(label, ObservationVector) pairs from a count CSV, or from the reference tables."""
    if counts_path:
        tables = [t for t in read_count_csv(counts_path) if build_protocol(t.protocol_name) is protocol]
        if not tables:
            raise CLIError(f"{counts_path} has no counts for protocol {protocol.name}")
        return [(t.state_label, t) for t in tables]
    fix = fx.load_fixtures(fixture_dir)
    return [(f"psi_{n}", fix.observation(protocol.code, n)) for n in range(1, fx.N_STATES + 1)]


# ---------------------------------------------------------------- commands

def cmd_protocol_info(args) -> int:
    p = build_protocol(args.name)
    if args.format == "json":
        print(json.dumps(p.to_dict() | {"kappa": p.kappa}, indent=1))
        return 0
    print(f"protocol {p.name} ({len(p)} rows)")
    for i, row in enumerate(p.rows, start=1):
        print(f"  {i:2d} {row.label:14s} {row.assembly.value}")
    denom = 4 if np.any(np.abs(p.A) % 1 > 0) else 1
    print(f"A = 1/{denom} x" if denom > 1 else "A =")
    for r in p.A:
        print("  " + " ".join(f"{int(round(v * denom)):3d}" for v in r))
    print(f"kappa = {p.kappa:.6f}")
    return 0


def cmd_reconstruct(args) -> int:
    p = build_protocol(args.protocol)
    pairs = _observations(p, args.counts, args.rounding, args.fixtures)
    items = reconstruct_all(p, [o for _, o in pairs], args.rounding, labels=[lab for lab, _ in pairs])
    results = []
    for it in items:
        rec = {"state": it.state_label}
        if it.ok:
            rec["rho"] = density_to_dict(it.reconstruction.rho)
            rec["residual_norm"] = round(it.reconstruction.residual_norm, 10)
        else:
            rec["error"] = it.error
        results.append(rec)
    if args.out_dir:
        d = Path(args.out_dir)
        d.mkdir(parents=True, exist_ok=True)
        for rec in results:
            if "rho" in rec:
                (d / f"rho_{p.code}_{rec['state']}.json").write_text(json.dumps(rec["rho"]) + "\n")
    _emit(json.dumps({"protocol": p.name, "states": results}, indent=1) + "\n", args.out)
    return 0 if all(it.ok for it in items) else 1


def cmd_analyze(args) -> int:
    p = build_protocol(args.protocol)
    reports = []
    for label, item in _observations(p, args.counts, args.rounding, args.fixtures):
        obs = item if isinstance(item, ObservationVector) else assemble_observations(p, item, args.rounding)
        rec = reconstruct_state(p.A, obs, label)
        reports.append(
            error_report(p.A, obs, rec, args.rescale, args.k, args.deviation_multiple, p.name, label).to_dict()
        )
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(reports[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(reports)
        _emit(buf.getvalue(), args.out)
    else:
        _emit(json.dumps(reports, indent=1) + "\n", args.out)
    return 0


def resolve_state(text: str) -> tuple[str, np.ndarray]:
    """A catalog index (1-17), a catalog or projector label, or a density JSON file."""
    if text.isdigit():
        n = int(text)
        return f"psi_{n}", pure_density(catalog_state(n))
    if text in CATALOG_LABELS:
        return text, pure_density(catalog_state(CATALOG_LABELS.index(text) + 1))
    path = Path(text)
    if path.suffix == ".json" or path.exists():
        return path.stem, read_density_json(path)
    try:
        return text, pure_density(two_qubit_ket(text))
    except ValueError:
        raise CLIError(f"cannot interpret state {text!r}") from None


def cmd_simulate(args) -> int:
    label, rho = resolve_state(args.state)
    cfg = SimulationConfig(
        flux=args.flux, seed=args.seed, trials=args.trials, rescale=args.rescale,
        deviation_multiple=args.deviation_multiple, rounding=args.rounding,
    )
    report = run_trials(rho, build_protocol(args.protocol), cfg, label)
    _emit(report.to_jsonl(), args.out)
    return 0


def cmd_compare(args) -> int:
    mats = [read_density_json(p) for p in args.recon]
    names = args.labels or [Path(p).stem for p in args.recon]
    if len(names) != len(mats):
        raise CLIError("--labels must name every input")
    rows = [
        {"a": names[i], "b": names[j], "trace_distance": round(trace_distance(mats[i], mats[j]), 10)}
        for i, j in combinations(range(len(mats)), 2)
    ]
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=["a", "b", "trace_distance"], lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        sys.stdout.write(buf.getvalue())
    else:
        print(json.dumps(rows, indent=1))
    if args.svg:
        if len(mats) != 3 or not args.radii or len(args.radii) != 3:
            raise CLIError("--svg needs exactly three inputs (O, S, M order) and three --radii")
        o, s, m = mats
        emb = embed_triangle(trace_distance(o, s), trace_distance(o, m), trace_distance(s, m))
        radii = dict(zip("OSM", args.radii))
        Path(args.svg).write_text(error_disks_svg(emb, radii, half_radius=not args.no_half))
    return 0


def cmd_validate_fixtures(args) -> int:
    root = Path(args.dir) if args.dir else fx.default_fixture_dir()
    problems = fx.verify_manifest(root)
    for msg in problems:
        print(f"FAIL manifest: {msg}")
    if not problems:
        print("PASS manifest")
    fix = fx.load_fixtures(root)
    checks = fx.golden_run(fix)
    for c in checks:
        print(c.line())
    rep = fx.validate_fixtures(fix)
    print(f"consistency: {rep.checks - len(rep.violations)}/{rep.checks} checks clean")
    for v in rep.violations:
        print(f"  note: {v}")
    return 0 if not problems and all(c.passed for c in checks) else 1


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tomolens", description="Two-qubit linear-inversion tomography.")
    sub = ap.add_subparsers(dest="command", required=True)

    def fixtures_opt(p):
        p.add_argument("--fixtures", help="fixture directory for reference observation vectors")

    def rounding_opt(p):
        p.add_argument("--rounding", choices=["floor", "trunc"], default="floor",
                       help="rounding of halved count differences")

    pr = sub.add_parser("protocol", help="inspect a protocol")
    prs = pr.add_subparsers(dest="action", required=True)
    pi = prs.add_parser("info", help="rows, coefficient matrix and condition number")
    pi.add_argument("name")
    pi.add_argument("--format", choices=["text", "json"], default="text")
    pi.set_defaults(func=cmd_protocol_info)

    rc = sub.add_parser("reconstruct", help="reconstruct density matrices from counts")
    rc.add_argument("--protocol", required=True)
    rc.add_argument("--counts", help="count CSV; omit to use the reference observation vectors")
    rc.add_argument("--out")
    rc.add_argument("--out-dir", help="also write one density JSON per state here")
    rounding_opt(rc)
    fixtures_opt(rc)
    rc.set_defaults(func=cmd_reconstruct)

    an = sub.add_parser("analyze", help="error radius and probable error band per state")
    an.add_argument("--protocol", required=True)
    an.add_argument("--counts")
    an.add_argument("--rescale", type=float, default=DEFAULT_RESCALE)
    an.add_argument("--k", type=float, default=round(DEFAULT_K, 4))
    an.add_argument("--deviation-multiple", type=float, default=TABLE_DEVIATION_MULTIPLE)
    an.add_argument("--format", choices=["json", "csv"], default="json")
    an.add_argument("--out")
    rounding_opt(an)
    fixtures_opt(an)
    an.set_defaults(func=cmd_analyze)

    sm = sub.add_parser("simulate", help="Monte Carlo coverage of the error radius")
    sm.add_argument("--state", required=True, help="catalog index, label, or density JSON file")
    sm.add_argument("--protocol", required=True)
    sm.add_argument("--flux", type=float, default=5000.0)
    sm.add_argument("--trials", type=int, default=500)
    sm.add_argument("--seed", type=int, default=0)
    sm.add_argument("--rescale", type=float, default=DEFAULT_RESCALE)
    sm.add_argument("--deviation-multiple", type=float, default=TABLE_DEVIATION_MULTIPLE)
    sm.add_argument("--out")
    rounding_opt(sm)
    sm.set_defaults(func=cmd_simulate)

    cp = sub.add_parser("compare", help="pairwise trace distances, optional error-disk SVG")
    cp.add_argument("--recon", nargs="+", required=True)
    cp.add_argument("--labels", nargs="+")
    cp.add_argument("--radii", nargs="+", type=float)
    cp.add_argument("--svg")
    cp.add_argument("--no-half", action="store_true", help="omit the dashed R/2 disks")
    cp.add_argument("--format", choices=["json", "csv"], default="json")
    cp.set_defaults(func=cmd_compare)

    vf = sub.add_parser("validate-fixtures", help="reproduce every reference table")
    vf.add_argument("--dir")
    vf.set_defaults(func=cmd_validate_fixtures)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CLIError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
