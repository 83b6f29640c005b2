"""Command-line driver: catalog listing, field rendering, verification,
and analytics over files.

Exit codes: 0 success (all requested checks pass), 1 verification failure,
2 usage error, 3 singular or degenerate input.  Every failure path prints a
one-line ``error: ...`` reason to stderr.  Output files are written
atomically (temp file + rename) and are byte-identical across runs for
identical inputs.
"""

from __future__ import annotations

import argparse
import math
import os
import re
import sys
import tempfile

import numpy as np

from . import __version__
from .ansatz import check_admissibility
from .auxiliary import consistency_c1_c2, derive
from .calculus import Stencil
from .catalog import build_case, case_names
from .field import (
    analyze_extrema,
    decay_profile,
    estimate_period,
    sample_field,
    to_csv,
    to_pgm16,
)
from .specfile import SpecFileError, load_spec
from .verify import (
    CONSISTENCY_GATE,
    bilinear_residuals,
    pde_phi_convergence,
    pde_residuals,
    singularity_scan,
)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_DEGENERATE = 3

ALL_CHECKS = ("bilinear2", "bilinear1", "pde2", "pde1", "consistency",
              "admissibility")

# intensity grids whose largest value falls below this are degenerate
DEGENERATE_LEVEL = 1e-14


class UsageError(Exception):
    pass


class DegenerateInput(Exception):
    pass


class CheckFailure(Exception):
    pass


_PI_FORM = re.compile(
    r"^\s*(?P<sign>[+-]?)\s*(?P<coef>\d+(?:\.\d*)?)?\s*\*?\s*pi"
    r"\s*(?:/\s*(?P<div>\d+(?:\.\d*)?))?\s*$", re.IGNORECASE)


def parse_time(text: str) -> float:
    """Decimal literal or pi expression: ``pi``, ``pi/4``, ``2pi/3``, ``-pi``."""
    m = _PI_FORM.match(text)
    if m:
        val = math.pi * float(m.group("coef") or 1.0)
        if m.group("div"):
            val /= float(m.group("div"))
        return -val if m.group("sign") == "-" else val
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"cannot parse time {text!r}") from None


def parse_window(text: str):
    parts = text.split(":")
    if len(parts) != 4:
        raise UsageError(f"window must be x0:x1:y0:y1, got {text!r}")
    try:
        x0, x1, y0, y1 = (float(p) for p in parts)
    except ValueError:
        raise UsageError(f"window must be numeric, got {text!r}") from None
    if not (x1 > x0 and y1 > y0):
        raise UsageError("window bounds must be increasing")
    return (x0, x1), (y0, y1)


def _atomic_write(path: str, data: bytes):
    parent = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=parent, prefix=".dsfield-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _resolve_spec(args):
    """(spec, window, valid_mask, label) from --case or --spec."""
    if bool(args.case) == bool(args.spec):
        raise UsageError("give exactly one of --case or --spec")
    if args.case:
        try:
            entry = build_case(args.case)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        window = entry.window
        mask = entry.valid_mask
        spec, label = entry.spec, entry.name
    else:
        try:
            spec = load_spec(args.spec)
        except (OSError, SpecFileError) as exc:
            raise UsageError(f"cannot load spec file: {exc}") from None
        window, mask, label = ((-8.0, 8.0), (-8.0, 8.0)), None, args.spec
    if args.window:
        window = parse_window(args.window)
    return spec, window, mask, label


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--case", help="catalog case name")
    p.add_argument("--spec", help="solution spec file (INI schema)")
    p.add_argument("--window", help="x0:x1:y0:y1; use --window=-8:8:-8:8 for "
                                    "negative bounds (defaults to the case window)")


# ---------------------------------------------------------------------------
# subcommands


def _cmd_catalog(args) -> int:
    for name in case_names():
        e = build_case(name)
        c = e.spec.coeffs
        (x0, x1), (y0, y1) = e.window
        print(f"{name}")
        print(f"  coefficients: a0={c.a0:g} a1={c.a1:g} a2={c.a2:g} a3={c.a3:g}"
              f" (det={c.det:g})")
        print(f"  profiles: p={e.spec.p.family} q={e.spec.q.family}")
        print(f"  window: {x0:g}:{x1:g}:{y0:g}:{y1:g}")
        print(f"  reference times: {', '.join(f'{t:g}' for t in e.reference_times)}")
        if e.degenerate_times:
            print(f"  degenerate times: "
                  f"{', '.join(f'{t:g}' for t in e.degenerate_times)} (+ k*pi)")
        for note in e.notes:
            print(f"  note: {note}")
    return EXIT_OK


def _cmd_render(args) -> int:
    spec, window, mask, label = _resolve_spec(args)
    t = parse_time(args.t)
    aux = derive(spec) if args.which == "phi" else None
    grid = sample_field(spec, aux, args.which, window, t, args.res, args.res,
                        valid_mask=mask)
    if args.which == "U":
        top = float(np.max(np.abs(grid.valid_values()), initial=0.0))
        if top < DEGENERATE_LEVEL:
            raise DegenerateInput(
                f"degenerate: intensity identically zero for {label} at t={t:g}")
    if args.format == "csv":
        _atomic_write(args.out, to_csv(grid))
    else:
        data, sidecar = to_pgm16(grid)
        _atomic_write(args.out, data)
        _atomic_write(args.out + ".txt", sidecar.encode("ascii"))
    print(f"wrote {args.out}")
    return EXIT_OK


def _check_lines(report, threshold):
    status = "pass"
    if not report.applicable:
        status = "skipped"
    elif not (report.max_abs < threshold):
        status = "fail"
    lines = [
        (f"check.{report.check_name}.max_abs", f"{report.max_abs:.6e}"),
        (f"check.{report.check_name}.mean_abs", f"{report.mean_abs:.6e}"),
        (f"check.{report.check_name}.samples", str(report.samples)),
        (f"check.{report.check_name}.threshold", f"{threshold:.1e}"),
        (f"check.{report.check_name}.status", status),
    ]
    if report.notes:
        lines.append((f"check.{report.check_name}.notes", report.notes))
    return status, lines


def _cmd_verify(args) -> int:
    spec, window, mask, label = _resolve_spec(args)
    t = parse_time(args.t)
    requested = [c.strip() for c in args.checks.split(",") if c.strip()]
    unknown = [c for c in requested if c not in ALL_CHECKS]
    if unknown:
        raise UsageError(f"unknown checks {unknown}; valid: {', '.join(ALL_CHECKS)}")
    tol = args.tol
    tol_pde = args.tol_pde
    aux = derive(spec)

    lines = [("case", label), ("t", f"{t:.17g}"),
             ("window", f"{window[0][0]:g}:{window[0][1]:g}"
                        f":{window[1][0]:g}:{window[1][1]:g}"),
             ("res", str(args.res))]
    statuses = {}

    if "bilinear2" in requested or "bilinear1" in requested:
        r2, r1 = bilinear_residuals(spec, aux, window, t, args.res,
                                    valid_mask=mask,
                                    check_line1="bilinear1" in requested)
        if "bilinear2" in requested:
            statuses["bilinear2"], new = _check_lines(r2, tol)
            lines += new
        if "bilinear1" in requested and r1 is not None:
            statuses["bilinear1"], new = _check_lines(r1, tol_pde)
            lines += new

    if "pde1" in requested:
        r1, _ = pde_residuals(spec, aux, window, t, min(args.res, 48),
                              Stencil(2, 2, args.h), valid_mask=mask,
                              checks=("line1",))
        statuses["pde1"], new = _check_lines(r1, tol_pde)
        lines += new

    if "pde2" in requested:
        coarse, fine, order = pde_phi_convergence(spec, window, t,
                                                  min(args.res, 24),
                                                  Stencil(2, 2, 1e-2),
                                                  valid_mask=mask)
        ok = math.isfinite(order) and abs(order - 2.0) <= 0.3
        statuses["pde2"] = "pass" if ok else "fail"
        lines += [
            ("check.pde2.mean_abs_h", f"{coarse.mean_abs:.6e}"),
            ("check.pde2.mean_abs_h2", f"{fine.mean_abs:.6e}"),
            ("check.pde2.observed_order", f"{order:.3f}"),
            ("check.pde2.nominal_order", "2"),
            ("check.pde2.status", statuses["pde2"]),
        ]

    if "consistency" in requested:
        zr = sorted(np.abs([window[0][0], window[0][1], window[1][0], window[1][1]]))
        span = zr[-1] * math.sqrt(2.0)
        probes = np.linspace(-span, span, 65)
        rep = consistency_c1_c2(spec, aux, probes, probes, t)
        if not rep.applicable:
            statuses["consistency"] = "skipped"
            lines += [("check.consistency.status", "skipped"),
                      ("check.consistency.notes", rep.note)]
        else:
            ok = rep.max_variation < args.tol_consistency
            statuses["consistency"] = "pass" if ok else "fail"
            lines += [
                ("check.consistency.c1_variation", f"{rep.c1_variation:.6e}"),
                ("check.consistency.c2_variation", f"{rep.c2_variation:.6e}"),
                ("check.consistency.threshold", f"{args.tol_consistency:.1e}"),
                ("check.consistency.status", statuses["consistency"]),
            ]

    if "admissibility" in requested:
        rep = check_admissibility(spec, window, t, (args.res, args.res),
                                  valid_mask=mask)
        scan = singularity_scan(spec, window, t, args.res, valid_mask=mask)
        ok = rep.verdict == "admissible"
        statuses["admissibility"] = "pass" if ok else "fail"
        lines += [
            ("check.admissibility.verdict", rep.verdict),
            ("check.admissibility.min_abs_f", f"{rep.min_abs_f:.6e}"),
            ("check.admissibility.sign_changes", str(rep.sign_changes)),
            ("check.admissibility.sign_violations", str(rep.sign_violations)),
            ("check.admissibility.pole_intervals",
             str(len(scan.pole_intervals_zeta) + len(scan.pole_intervals_eta))),
            ("check.admissibility.status", statuses["admissibility"]),
        ]

    overall = "pass" if all(s in ("pass", "skipped") for s in statuses.values()) else "fail"
    lines.append(("overall", overall))
    text = "".join(f"{k}: {v}\n" for k, v in lines)
    if args.out:
        _atomic_write(args.out, text.encode("utf-8"))
    else:
        sys.stdout.write(text)
    if overall != "pass":
        failed = [k for k, s in statuses.items() if s == "fail"]
        raise CheckFailure(f"checks failed: {', '.join(failed)}")
    return EXIT_OK


def _cmd_analyze(args) -> int:
    spec, window, mask, label = _resolve_spec(args)
    chosen = [name for name, flag in (("period", args.period),
                                      ("decay", args.decay),
                                      ("peaks", args.peaks)) if flag]
    if len(chosen) != 1:
        raise UsageError("give exactly one of --period, --decay, --peaks")
    lines = [("case", label)]

    if args.period:
        parts = args.period.split(":")
        if len(parts) != 3:
            raise UsageError("--period wants t0:t1:n")
        t0, t1 = parse_time(parts[0]), parse_time(parts[1])
        n_t = int(parts[2])
        res = estimate_period(spec, window, (t0, t1), n_t, args.statistic,
                              grid_n=args.res, valid_mask=mask)
        lines += [
            ("statistic", args.statistic),
            ("period", "none" if res.estimated_period is None
             else f"{res.estimated_period:.17g}"),
            ("resolution", f"{res.period_resolution:.17g}"),
        ]
        if res.estimated_period is None and res.best_candidate is not None:
            lines.append(("best_candidate", f"{res.best_candidate:.17g}"))
    elif args.decay:
        times = [parse_time(v) for v in args.decay.split(",")]
        res = decay_profile(spec, window, times, grid_n=args.res, valid_mask=mask)
        for t, mx in res.decay_series:
            lines.append((f"max_at_t_{t:g}", f"{mx:.17g}"))
    else:
        t = parse_time(args.t)
        grid = sample_field(spec, None, "U", window, t, args.res, args.res,
                            valid_mask=mask)
        res = analyze_extrema(grid)
        lines += [
            ("t", f"{t:.17g}"),
            ("grid_max", f"{res.global_max:.17g}"),
            ("grid_max_at", f"{res.global_max_location[0]:.17g},"
                            f"{res.global_max_location[1]:.17g}"),
            ("local_maxima", str(len(res.local_maxima))),
        ]
        for i, pk in enumerate(res.local_maxima):
            lines.append((f"peak_{i}", f"{pk.value:.17g} at {pk.x:.17g},{pk.y:.17g}"))

    text = "".join(f"{k}: {v}\n" for k, v in lines)
    if args.out:
        _atomic_write(args.out, text.encode("utf-8"))
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dsfield",
        description="Evaluate, render and verify separable wave-envelope "
                    "solutions of the coupled (2+1)-dimensional system.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("catalog", help="list the built-in excitation cases")

    rp = sub.add_parser("render", help="sample a field and write it to a file")
    _add_common(rp)
    rp.add_argument("--t", required=True, help="time (decimal or pi form)")
    rp.add_argument("--out", required=True)
    rp.add_argument("--format", choices=("csv", "pgm16"), default="csv")
    rp.add_argument("--which", choices=("U", "phi", "bilinear2", "pde2"),
                    default="U")
    rp.add_argument("--res", type=int, default=128)

    vp = sub.add_parser("verify", help="run residual checks, write a report")
    _add_common(vp)
    vp.add_argument("--t", required=True)
    vp.add_argument("--checks", default="bilinear2,consistency,admissibility")
    vp.add_argument("--tol", type=float, default=1e-10,
                    help="threshold for algebraic-identity checks")
    vp.add_argument("--tol-pde", type=float, default=1e-6, dest="tol_pde",
                    help="threshold for end-to-end equation checks")
    vp.add_argument("--tol-consistency", type=float, default=CONSISTENCY_GATE,
                    dest="tol_consistency")
    vp.add_argument("--h", type=float, default=1e-3)
    vp.add_argument("--res", type=int, default=64)
    vp.add_argument("--out", default=None)

    ap = sub.add_parser("analyze", help="periods, peak decay, extrema counts")
    _add_common(ap)
    ap.add_argument("--period", help="t0:t1:n scan range")
    ap.add_argument("--decay", help="comma-separated times")
    ap.add_argument("--peaks", action="store_true")
    ap.add_argument("--t", default="0")
    ap.add_argument("--statistic", choices=("global_max", "L2"),
                    default="global_max")
    ap.add_argument("--res", type=int, default=96)
    ap.add_argument("--out", default=None)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handlers = {"catalog": _cmd_catalog, "render": _cmd_render,
                "verify": _cmd_verify, "analyze": _cmd_analyze}
    try:
        if getattr(args, "res", None) is not None and args.res < 8:
            raise UsageError("resolution must be at least 8")
        return handlers[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DegenerateInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except CheckFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFY_FAILED
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE if "singular" in str(exc) else EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
