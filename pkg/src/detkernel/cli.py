"""Command-line interface: ``detkernel <command> [options]``.

Exit codes: 0 success, 1 mathematical mismatch (a residual or oracle
comparison above threshold), 2 usage or configuration error, 3 internal
assertion failure.

Output goes to ``--output`` if given, else to ``$DETKERNEL_OUTPUT_DIR/<command>.<ext>``
when that variable is set, else to stdout.  Every output starts with a
header recording the version, the configuration and the seed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .errors import DetKernelError, InternalError, MathematicalMismatch, PoleError
from .identities import IDENTITY_IDS, run_identity_suite
from .kernels import SpectralParameter
from .plancherel import (
    Calibration,
    HarmonicExpansion,
    calibrate,
    coefficient_signed,
    default_calibration,
    inner_product,
    oracle_projection,
    positivity_map,
    sobolev_norm_sq,
    sobolev_order,
)
from .signatures import GroupFamily, enumerate_signatures
from .unipotent import classify_O_unipotent, o_unipotent_limit, unipotent_report

OUTPUT_DIR_ENV = "DETKERNEL_OUTPUT_DIR"
EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3

_NEG_VALUE = re.compile(r"^-(\d|\.\d|inf)")


class UsageError(Exception):
    pass


def fmt(x: float) -> str:
    """17 significant digits: parsing the string gives back ``x`` exactly."""
    return format(float(x), ".17g")


def parse_range(text: str) -> tuple[float, float]:
    """``"a..b"`` with ``a < b``."""
    try:
        lo, hi = (float(v) for v in text.split(".."))
    except ValueError:
        raise UsageError(f"expected a range like -3..1, got {text!r}") from None
    if not lo < hi:
        raise UsageError(f"empty range {text!r}")
    return lo, hi


def cell_centres(lo: float, hi: float, step: float) -> list[float]:
    """Centres of the cells of width ``step`` tiling ``[lo, hi]``."""
    if step <= 0:
        raise UsageError("--step must be positive")
    count = int(round((hi - lo) / step))
    if count < 1 or not math.isclose(count * step, hi - lo, rel_tol=1e-9, abs_tol=1e-12):
        raise UsageError(f"step {step} does not tile [{lo}, {hi}]")
    return [lo + (i + 0.5) * step for i in range(count)]


def normalize_argv(argv: Sequence[str]) -> list[str]:
    """Glue negative values onto their option (``--sigma -3..1`` -> ``--sigma=-3..1``)."""
    out = list(argv)
    i = 0
    merged: list[str] = []
    while i < len(out):
        tok = out[i]
        nxt = out[i + 1] if i + 1 < len(out) else None
        if tok.startswith("--") and "=" not in tok and nxt is not None and _NEG_VALUE.match(nxt):
            merged.append(f"{tok}={nxt}")
            i += 2
        else:
            merged.append(tok)
            i += 1
    return merged


# ---------------------------------------------------------------------------
# helpers


def _family(args) -> GroupFamily:
    try:
        return GroupFamily(args.family, args.rank)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _parameter(args, family: GroupFamily) -> SpectralParameter:
    if family.kind == "U":
        if args.sigma is None or args.tau is None:
            raise UsageError("the U family needs --sigma and --tau")
        return SpectralParameter.unitary(family.rank, float(args.sigma), float(args.tau))
    if args.lam is None:
        raise UsageError(f"the {family.kind} family needs --lam")
    return SpectralParameter(family, lam=float(args.lam))


def _calibration(args) -> Calibration:
    path = getattr(args, "calibration", None)
    if path is None:
        print("WARNING: no --calibration file given; running UNCALIBRATED with kappa = 1. "
              "Pass --calibration builtin for the committed constants.", file=sys.stderr)
        return Calibration.unit()
    if path == "builtin":
        return default_calibration()
    try:
        return Calibration.from_file(path)
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot read calibration file {path!r}: {exc}") from None


def _config(args) -> dict:
    skip = {"func", "command"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _header(args) -> dict:
    return {"tool": "detkernel", "version": __version__, "command": args.command,
            "config": _config(args), "seed": args.seed}


def _destination(args, ext: str) -> Path | None:
    if args.output:
        return Path(args.output)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base:
        return Path(base) / f"{args.command}.{ext}"
    return None


def _emit(args, text: str, ext: str) -> None:
    dest = _destination(args, ext)
    if dest is None:
        sys.stdout.write(text)
        return
    dest.parent.mkdir(parents=True, exist_ok=True)
    dest.write_text(text)


def _emit_json(args, payload: dict) -> None:
    doc = {"header": _header(args), **payload}
    _emit(args, json.dumps(doc, indent=2) + "\n", "json")


def _emit_csv(args, columns: Sequence[str], rows: Sequence[Sequence]) -> None:
    buf = io.StringIO()
    h = _header(args)
    buf.write(f"# {h['tool']} {h['version']}\n")
    buf.write(f"# command: {h['command']}\n")
    buf.write(f"# config: {json.dumps(h['config'], sort_keys=True)}\n")
    buf.write(f"# seed: {h['seed']}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(v) if isinstance(v, float) else v for v in r])
    _emit(args, buf.getvalue(), "csv")


def read_csv(text: str) -> list[dict]:
    """Parse an emitted CSV (header comments skipped)."""
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def _param_string(p: SpectralParameter) -> str:
    return ";".join(f"{k}={fmt(v)}" for k, v in p.as_dict().items())


# ---------------------------------------------------------------------------
# commands


def cmd_coeffs(args) -> int:
    fam = _family(args)
    p = _parameter(args, fam)
    cal = _calibration(args)
    rows = []
    for sig in enumerate_signatures(fam, args.bound):
        try:
            v = coefficient_signed(p, sig, cal)
        except PoleError as exc:
            raise UsageError(f"{p} lies on a pole of the closed form: {exc}") from None
        rows.append([fam.kind, fam.rank, _param_string(p), ";".join(map(str, sig.parts)),
                     float(v.value), float(v.log_magnitude), v.sign])
    _emit_csv(args, ["family", "rank", "parameters", "signature", "coefficient",
                     "log_magnitude", "sign"], rows)
    return EXIT_OK


def cmd_verify_identities(args) -> int:
    ids = args.identities or list(IDENTITY_IDS)
    unknown = set(ids) - set(IDENTITY_IDS)
    if unknown:
        raise UsageError(f"unknown identities {sorted(unknown)}; choose from {IDENTITY_IDS}")
    rows = run_identity_suite(args.n_max, args.instances, args.seed, args.gap, ids)
    _emit_csv(args, ["identity_id", "n", "max_residual", "instances"],
              [[r.identity_id, r.n, float(r.max_residual), r.instances] for r in rows])
    worst = max(r.max_residual for r in rows)
    if worst > args.threshold:
        print(f"max residual {worst:.3g} exceeds {args.threshold:g}", file=sys.stderr)
        return EXIT_MISMATCH
    return EXIT_OK


def cmd_oracle_compare(args) -> int:
    fam = _family(args)
    p = _parameter(args, fam)
    cal = _calibration(args)
    rows = []
    worst = 0.0
    for sig in enumerate_signatures(fam, args.bound):
        closed = coefficient_signed(p, sig, cal).value
        oracle = oracle_projection(p, sig)
        diff = abs(closed - oracle)
        worst = max(worst, diff)
        rows.append([";".join(map(str, sig.parts)), float(closed), float(oracle.real),
                     float(oracle.imag), float(diff)])
    _emit_csv(args, ["signature", "closed_form", "oracle_re", "oracle_im", "abs_diff"], rows)
    if worst > args.tolerance:
        print(f"max |closed - oracle| = {worst:.3g} exceeds {args.tolerance:g}", file=sys.stderr)
        return EXIT_MISMATCH
    return EXIT_OK


def cmd_positivity_map(args) -> int:
    fam = _family(args)
    cal = _calibration(args)
    if fam.kind == "U":
        if args.sigma is None or args.tau is None:
            raise UsageError("the U family needs --sigma and --tau ranges")
        sigmas = cell_centres(*parse_range(args.sigma), args.step)
        taus = cell_centres(*parse_range(args.tau), args.step)
    else:
        if args.lam is None:
            raise UsageError(f"the {fam.kind} family needs a --lam range")
        sigmas, taus = cell_centres(*parse_range(args.lam), args.step), None
    cells = positivity_map(fam, sigmas, taus, args.bound, cal)
    _emit_json(args, {"family": fam.kind, "rank": fam.rank, "cells": cells})
    return EXIT_OK


def cmd_sobolev(args) -> int:
    try:
        q = HarmonicExpansion.from_json(json.loads(Path(args.expansion).read_text()))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read expansion {args.expansion!r}: {exc}") from None
    out: dict = {"family": q.family.kind, "rank": q.family.rank, "terms": len(q.terms)}
    if q.family.kind == "U" and args.sigma is not None and args.tau is not None:
        p = SpectralParameter.unitary(q.family.rank, float(args.sigma), float(args.tau))
        s = sobolev_order(p.sigma, p.tau, p.rank) if args.s is None else args.s
        out["kernel_form"] = inner_product(q, q, p, _calibration(args)).real
    elif args.s is None:
        raise UsageError("give --s, or --sigma and --tau for a U-family expansion")
    else:
        s = args.s
    out["s"] = s
    out["sobolev_norm_sq"] = sobolev_norm_sq(q, s)
    _emit_json(args, out)
    return EXIT_OK


def cmd_unipotent(args) -> int:
    fam = _family(args)
    cal = _calibration(args)
    if fam.kind == "U":
        if not 1 <= args.alpha <= fam.rank - 1:
            raise UsageError(f"--alpha must lie in [1, {fam.rank - 1}] for U({fam.rank})")
        report = unipotent_report(fam.rank, args.alpha, args.bound, cal)
    elif fam.kind == "O":
        if not 1 <= args.alpha <= fam.rank:
            raise UsageError(f"--alpha must lie in [1, {fam.rank}] for the O family")
        rows, signs = [], set()
        for sig in enumerate_signatures(fam, args.bound):
            lim = o_unipotent_limit(args.alpha, sig, cal)
            survivor = classify_O_unipotent(args.alpha, sig)
            if (lim != 0.0) != survivor:
                raise InternalError(f"{sig}: survivor rule and coefficient limit disagree")
            if lim:
                signs.add(int(np.sign(lim)))
            rows.append({"parts": list(sig.parts), "survivor": survivor, "limit": lim})
        report = {"family": "O", "rank": fam.rank, "alpha": args.alpha, "bound": args.bound,
                  "signatures": rows,
                  "survivors": {"signs": sorted(signs), "sign_constant": len(signs) <= 1}}
    else:
        raise UsageError("the unipotent report covers the U and O families")
    _emit_json(args, report)
    return EXIT_OK


def cmd_calibrate(args) -> int:
    doc = calibrate(max_rank=args.max_rank, families=args.families)
    doc = {"header": _header(args), **doc}
    _emit(args, json.dumps(doc, indent=2) + "\n", "json")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="detkernel", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"detkernel {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", help="output file (default: stdout or $%s)" % OUTPUT_DIR_ENV)
    common.add_argument("--seed", type=int, default=0)

    def family_opts(p, params=True, ranges=False):
        p.add_argument("--family", choices=["U", "O", "Sp"], required=True)
        p.add_argument("--rank", type=int, required=True)
        kind = str if ranges else float
        if params:
            p.add_argument("--sigma", type=kind)
            p.add_argument("--tau", type=kind)
            p.add_argument("--lam", type=kind)
        p.add_argument("--calibration",
                       help="calibration JSON, or 'builtin' for the committed constants")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coeffs", parents=[common], help="closed-form coefficient table (CSV)")
    family_opts(p)
    p.add_argument("--bound", type=int, default=5)
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("verify-identities", parents=[common], help="determinant identity residuals (CSV)")
    p.add_argument("--n-max", type=int, default=6)
    p.add_argument("--instances", type=int, default=500)
    p.add_argument("--gap", type=float, default=1e-2)
    p.add_argument("--threshold", type=float, default=1e-9)
    p.add_argument("--identities", nargs="+")
    p.set_defaults(func=cmd_verify_identities)

    p = sub.add_parser("oracle-compare", parents=[common], help="closed form vs adaptive quadrature (CSV)")
    family_opts(p)
    p.add_argument("--bound", type=int, default=4)
    p.add_argument("--tolerance", type=float, default=1e-7)
    p.set_defaults(func=cmd_oracle_compare)

    p = sub.add_parser("positivity-map", parents=[common], help="grid of positivity verdicts (JSON)")
    family_opts(p, ranges=True)
    p.add_argument("--step", type=float, default=0.25)
    p.add_argument("--bound", type=int)
    p.set_defaults(func=cmd_positivity_map)

    p = sub.add_parser("sobolev", parents=[common], help="norms of an expansion file (JSON)")
    p.add_argument("--expansion", required=True)
    p.add_argument("--s", type=float)
    p.add_argument("--sigma", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--calibration")
    p.set_defaults(func=cmd_sobolev)

    p = sub.add_parser("unipotent", parents=[common], help="blow-up report at an integer point (JSON)")
    family_opts(p, params=False)
    p.add_argument("--alpha", type=int, required=True)
    p.add_argument("--bound", type=int, default=6)
    p.set_defaults(func=cmd_unipotent)

    p = sub.add_parser("calibrate", parents=[common], help="fit the calibration constants (JSON)")
    p.add_argument("--max-rank", type=int, default=2)
    p.add_argument("--families", nargs="+", default=["U", "O", "Sp"], choices=["U", "O", "Sp"])
    p.set_defaults(func=cmd_calibrate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    argv = normalize_argv(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (MathematicalMismatch, InternalError) as exc:
        print(f"internal check failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (DetKernelError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # pragma: no cover - last-resort diagnostics
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
