"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 concept cap exceeded.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from .core import DimensionReport
from .fca import (
    DEFAULT_CONCEPT_CAP,
    ConceptOverflowError,
    contranominal_scale,
    fca_profile,
    nominal_scale,
    summarize_concepts,
)
from .core import delta as integrate_delta
from .io import (
    ParseError,
    RunConfig,
    emit_profile_csv,
    emit_report_json,
    emit_study_csv,
    parse_csv_context,
    parse_cxt,
    parse_point_csv,
    sha256_hex,
)
from .metric import MetricKind, analyze_distances, chavez_id, scaling_study

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_OVERFLOW = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}\n{self.format_usage()}")


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _int_list(text: str) -> list:
    try:
        vals = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text!r}") from None
    if not vals or any(v < 1 for v in vals):
        raise argparse.ArgumentTypeError("dimensions must be positive integers")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="obsdiam", description="Intrinsic dimension via observable diameters.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def outputs(sp):
        sp.add_argument("--profile-out", help="write the ObsDiam profile as CSV")
        sp.add_argument("--report-out", help="write the JSON report here instead of stdout")

    pts = sub.add_parser("points", help="point cloud CSV with distance features")
    pts.add_argument("file")
    pts.add_argument("--metric", default="euclidean", choices=[m.value for m in MetricKind])
    pts.add_argument("--no-normalize", action="store_true", help="skip diameter normalization")
    pts.add_argument("--chavez", action="store_true", help="also report the Chavez ID")
    pts.add_argument("--chavez-exclude-diagonal", action="store_true",
                     help="drop zero-distance (x, x) pairs from the Chavez statistics")
    pts.add_argument("--levy", action="store_true", help="also report the Levy defect")
    outputs(pts)

    ctx = sub.add_parser("context", help="formal context (.cxt or CSV)")
    ctx.add_argument("file")
    ctx.add_argument("--format", choices=["cxt", "csv"], default=None,
                     help="input format (default: from the file extension)")
    ctx.add_argument("--cap", type=_positive_int, default=DEFAULT_CONCEPT_CAP)
    outputs(ctx)

    sc = sub.add_parser("scale", help="built-in nominal / contranominal scale")
    sc.add_argument("--kind", choices=["nominal", "contranominal"], required=True)
    sc.add_argument("--n", type=_positive_int, required=True)
    sc.add_argument("--cap", type=_positive_int, default=DEFAULT_CONCEPT_CAP)
    outputs(sc)

    st = sub.add_parser("study", help="Delta across dimensions for sampled spheres or hypercubes")
    st.add_argument("kind", choices=["sphere", "hypercube"])
    st.add_argument("--dims", type=_int_list, default=[8, 16, 32, 64])
    st.add_argument("--count", type=_positive_int, default=1500)
    st.add_argument("--seed", type=int, default=0)
    st.add_argument("--out", help="write the CSV here instead of stdout")
    return p


def _write(data: bytes, path: Optional[str]) -> None:
    if path is None:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        Path(path).write_bytes(data)


def _run_points(args) -> int:
    raw = Path(args.file).read_bytes()
    cloud = parse_point_csv(raw)
    cfg = RunConfig(
        input_kind="points_csv", input_path=args.file, input_sha256=sha256_hex(raw),
        metric=args.metric, normalize=not args.no_normalize, chavez=args.chavez,
        include_diagonal=not args.chavez_exclude_diagonal, levy=args.levy,
        profile_out=args.profile_out, report_out=args.report_out,
    )
    res = analyze_distances(cloud, cfg.metric, normalize=cfg.normalize, levy=cfg.levy)
    cid = None
    if cfg.chavez:
        if cloud.n_points < 2:
            raise ValueError("Chavez ID needs at least two points")
        cid = chavez_id(cloud, cfg.metric, cfg.include_diagonal)
    report = DimensionReport.from_delta(
        res.delta, chavez_id=cid, chavez_computed=cfg.chavez, levy_defect=res.levy_defect,
        n_points=cloud.n_points, n_features=cloud.n_points,
    )
    if cfg.profile_out:
        _write(emit_profile_csv(res.profile), cfg.profile_out)
    _write(emit_report_json(report, cfg), cfg.report_out)
    return EXIT_OK


def _context_report(ctx, cfg: RunConfig) -> int:
    summary = summarize_concepts(ctx, cfg.cap)
    prof = fca_profile(summary, ctx.n_objects, ctx.n_attributes)
    report = DimensionReport.from_delta(
        integrate_delta(prof), n_points=ctx.n_attributes, n_features=summary.total
    )
    if cfg.profile_out:
        _write(emit_profile_csv(prof), cfg.profile_out)
    _write(emit_report_json(report, cfg), cfg.report_out)
    return EXIT_OK


def _run_context(args) -> int:
    raw = Path(args.file).read_bytes()
    fmt = args.format or ("csv" if args.file.lower().endswith(".csv") else "cxt")
    ctx = parse_cxt(raw) if fmt == "cxt" else parse_csv_context(raw)
    cfg = RunConfig(
        input_kind=f"context_{fmt}", input_path=args.file, input_sha256=sha256_hex(raw),
        cap=args.cap, profile_out=args.profile_out, report_out=args.report_out,
    )
    return _context_report(ctx, cfg)


def _run_scale(args) -> int:
    ctx = nominal_scale(args.n) if args.kind == "nominal" else contranominal_scale(args.n)
    cfg = RunConfig(
        input_kind="builtin_scale", scale_kind=args.kind, scale_n=args.n, cap=args.cap,
        profile_out=args.profile_out, report_out=args.report_out,
    )
    return _context_report(ctx, cfg)


def _run_study(args) -> int:
    rows = scaling_study(args.kind, args.dims, args.count, args.seed)
    _write(emit_study_csv(rows), args.out)
    return EXIT_OK


_COMMANDS = {"points": _run_points, "context": _run_context, "scale": _run_scale, "study": _run_study}


def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(str(exc))
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except ConceptOverflowError as exc:
        sys.stderr.write(f"obsdiam: {exc}\n")
        return EXIT_OVERFLOW
    except (ParseError, ValueError, OSError) as exc:
        sys.stderr.write(f"obsdiam: {exc}\n")
        return EXIT_DATA


def main() -> None:
    raise SystemExit(cli_main())
