"""Command-line interface: ``superstable {find,verify,certify,entropy-scan,report}``.

Exit codes: 0 success, 1 usage or configuration error, 2 a grid cell could
not be resolved, 3 the precision ladder was exhausted, 4 a pair failed
transversality or certification.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import dynamics, entropy, symbolic
from .errors import DegreeBlowup, DominanceViolation, PrecisionExhausted, SignUndecidable, WindowTooCoarse
from .interval import DEFAULT_PRECISION, MAX_PRECISION, RationalExponent

logger = logging.getLogger("superstable")

OUTPUT_DIR_ENV = "SUPERSTABLE_OUTPUT_DIR"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RESOLUTION = 2
EXIT_PRECISION = 3
EXIT_FAILED = 4

# Largest period certified by default, per denominator q.  Degrees grow
# roughly like p^(n-2) q^(n-3); beyond these the elimination is not desk-scale.
DESK_PERIOD = {1: 8, 2: 5, 3: 4}
DESK_PERIOD_DEFAULT = 3

RESIDUAL_TOLERANCE = 1e-8


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    r: RationalExponent
    max_period: int = 3
    precision_bits: int = DEFAULT_PRECISION
    grid_resolution: int | None = None
    grid_step: float = 0.02
    iterates: int = entropy.DEFAULT_N
    term_cap: int = symbolic.DEFAULT_TERM_CAP
    residual_tolerance: float = RESIDUAL_TOLERANCE
    output_path: str | None = None
    format: str = "json"

    def validate(self):
        if self.max_period < 0:
            raise UsageError("--max-period must be non-negative")
        if self.precision_bits < 53 or self.precision_bits > MAX_PRECISION:
            raise UsageError(f"--precision-bits must be in [53, {MAX_PRECISION}]")
        if self.grid_resolution is not None and self.grid_resolution <= 0:
            raise UsageError("--grid-resolution must be positive")
        if not self.grid_step > 0:
            raise UsageError("--grid-step must be positive")
        if self.iterates < 2:
            raise UsageError("--iterates must be at least 2")
        if self.format not in ("json", "csv"):
            raise UsageError("--format must be json or csv")
        return self


def _config(args) -> RunConfig:
    try:
        r = RationalExponent.parse(args.r) if args.r is not None else None
    except ValueError as exc:
        raise UsageError(f"invalid --r {args.r!r}: {exc}") from None
    cfg = RunConfig(r=r)
    for name in ("max_period", "precision_bits", "grid_resolution", "grid_step", "iterates", "term_cap", "format"):
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
    cfg.output_path = args.out
    return cfg.validate()


# --------------------------------------------------------------------------
# commands (pure: config in, serialisable data out)


def cmd_find(cfg: RunConfig):
    result = dynamics.find_all(cfg.r, cfg.max_period, cfg.grid_resolution, cfg.precision_bits)
    return {
        "r": cfg.r.to_dict(),
        "max_period": cfg.max_period,
        "pairs": [p.to_dict() for p in result.pairs],
        "warnings": result.warnings,
    }


def _pairs(cfg: RunConfig, pairs_doc):
    if pairs_doc is None:
        if cfg.r is None:
            raise UsageError("give --r or a pairs file from 'find'")
        return dynamics.find_all(cfg.r, cfg.max_period, cfg.grid_resolution, cfg.precision_bits).pairs
    try:
        return [dynamics.PeriodicPair.from_dict(d) for d in pairs_doc["pairs"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed pairs file: {exc}") from None


def _verify_one(pair):
    try:
        report = dynamics.verify_transversality(pair)
    except (PrecisionExhausted, SignUndecidable) as exc:
        raise PrecisionExhausted(f"pair n={pair.n} c~{float(pair.c)!r}: {exc}") from exc
    out = report.to_dict()
    out["status"] = "ok" if out["transversal"] and out["identity_holds"] else "failed"
    return out


def cmd_verify(cfg: RunConfig, pairs_doc=None):
    pairs = _pairs(cfg, pairs_doc)
    return {"reports": [_verify_one(p) for p in pairs]}


def _certify_one(cfg: RunConfig, pair, desk_caps=False):
    base = {"n": pair.n, "signs": list(pair.signs), "r": pair.r.to_dict()}
    if pair.trivial:
        return {**base, "status": "skipped", "reason": "period 1 (c = 0) is trivial"}
    if desk_caps and pair.n > DESK_PERIOD.get(pair.r.q, DESK_PERIOD_DEFAULT):
        return {**base, "status": "skipped", "reason": "beyond desk-scale period for this q"}
    precision = max(symbolic.WITNESS_PRECISION, cfg.precision_bits)
    try:
        cert = symbolic.certify(pair.r, pair.n, pair.signs, pair, cfg.term_cap, precision)
    except DegreeBlowup as exc:
        return {**base, "status": "skipped", "reason": str(exc)}
    except DominanceViolation as exc:
        return {**base, "status": "failed", "reason": str(exc)}
    out = cert.to_dict()
    out["P_text"] = str(cert.poly())
    ok = cert.monic and cert.residual.contains_zero() and float(cert.residual.hi) < cfg.residual_tolerance
    out["status"] = "ok" if ok else "failed"
    return out


def cmd_certify(cfg: RunConfig, pairs_doc=None):
    pairs = _pairs(cfg, pairs_doc)
    return {"certificates": [_certify_one(cfg, p) for p in pairs]}


def cmd_entropy(cfg: RunConfig):
    return entropy.monotonicity_scan(cfg.r, cfg.grid_step, cfg.iterates, cfg.precision_bits)


def _scan_doc(scan):
    return {
        "N": scan.N,
        "step": repr(scan.step),
        "max_violation": repr(scan.max_violation),
        "rows": [
            {"c": format(row.c, ".20g"), "entropy": repr(row.entropy), "laps": row.laps}
            for row in scan.rows
        ],
    }


def cmd_report(cfg: RunConfig, with_entropy=True):
    found = dynamics.find_all(cfg.r, cfg.max_period, cfg.grid_resolution, cfg.precision_bits)
    entries = []
    for pair in found.pairs:
        trans = _verify_one(pair)
        cert = _certify_one(cfg, pair, desk_caps=True)
        status = "failed" if "failed" in (trans["status"], cert["status"]) else "ok"
        entries.append(
            {"pair": pair.to_dict(), "transversality": trans, "certificate": cert, "status": status}
        )
    doc = {
        "r": cfg.r.to_dict(),
        "max_period": cfg.max_period,
        "pairs": entries,
        "warnings": found.warnings,
    }
    # max_period 0 asks for an empty report
    if with_entropy and cfg.max_period > 0:
        doc["entropy"] = _scan_doc(cmd_entropy(cfg))
    return doc


def failed(doc) -> bool:
    """True when any entry of a verify/certify/report document failed."""
    items = doc.get("reports") or doc.get("certificates") or doc.get("pairs") or []
    return any(item.get("status") == "failed" for item in items)


# --------------------------------------------------------------------------
# output


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _pairs_csv(doc) -> str:
    lines = ["n,c_lo,c_hi,signs"]
    for p in doc["pairs"]:
        lines.append(f"{p['n']},{p['c_lo']},{p['c_hi']},{' '.join(str(s) for s in p['signs'])}")
    return "\n".join(lines) + "\n"


def _resolve_out(path, default_name):
    base = os.environ.get(OUTPUT_DIR_ENV)
    if path is None:
        return Path(base) / default_name if base else None
    if path == "-":
        return None
    p = Path(path)
    return Path(base) / p if base and not p.is_absolute() else p


def _emit(text, cfg: RunConfig, default_name):
    target = _resolve_out(cfg.output_path, default_name)
    if target is None:
        sys.stdout.write(text)
    else:
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text)
        logger.info("wrote %s", target)


def _load(path):
    if path is None:
        return None
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None


# --------------------------------------------------------------------------
# argument parsing


def build_parser():
    parser = _Parser(prog="superstable", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, needs_r=True):
        p.add_argument("--r", required=needs_r, help="exponent p/q with p > q >= 1, e.g. 3/2")
        p.add_argument("--precision-bits", type=int, help=f"working precision (default {DEFAULT_PRECISION})")
        p.add_argument("--out", help=f"output file ('-' for stdout; relative to ${OUTPUT_DIR_ENV} if set)")
        p.add_argument("--format", choices=("json", "csv"))

    def search(p):
        p.add_argument("--max-period", type=int, help="largest period to search (default 3)")
        p.add_argument("--grid-resolution", type=int, help="samples per period search")

    p = sub.add_parser("find", help="locate superstable parameters")
    common(p)
    search(p)

    for name, text in (("verify", "certify transversality"), ("certify", "build monic certificates")):
        p = sub.add_parser(name, help=text)
        common(p, needs_r=False)
        search(p)
        p.add_argument("pairs", nargs="?", help="JSON from 'find' (otherwise pairs are searched)")
        if name == "certify":
            p.add_argument("--term-cap", type=int, help="abort eliminations past this many terms")

    p = sub.add_parser("entropy-scan", help="lap-number entropy over the parameter window")
    common(p)
    p.add_argument("--grid-step", type=float, help="parameter spacing (default 0.02)")
    p.add_argument("--iterates", type=int, help=f"number of iterates N (default {entropy.DEFAULT_N})")

    p = sub.add_parser("report", help="pairs, transversality, certificates and entropy in one JSON")
    common(p)
    search(p)
    p.add_argument("--grid-step", type=float, help="entropy parameter spacing (default 0.02)")
    p.add_argument("--iterates", type=int, help=f"number of iterates N (default {entropy.DEFAULT_N})")
    p.add_argument("--term-cap", type=int, help="abort eliminations past this many terms")
    p.add_argument("--skip-entropy", action="store_true", help="omit the entropy scan")
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = _config(args)
        cmd = args.command
        if cmd == "find":
            doc = cmd_find(cfg)
            text = _pairs_csv(doc) if cfg.format == "csv" else dumps(doc)
            _emit(text, cfg, "pairs." + cfg.format)
            return EXIT_OK
        if cmd == "entropy-scan":
            scan = cmd_entropy(cfg)
            fmt = args.format or "csv"
            text = scan.to_csv() if fmt == "csv" else dumps(_scan_doc(scan))
            _emit(text, cfg, "entropy." + fmt)
            return EXIT_OK
        if cfg.format == "csv":
            raise UsageError(f"{cmd} only writes JSON")
        if cmd == "verify":
            doc = cmd_verify(cfg, _load(args.pairs))
        elif cmd == "certify":
            doc = cmd_certify(cfg, _load(args.pairs))
        else:
            doc = cmd_report(cfg, with_entropy=not args.skip_entropy)
        _emit(dumps(doc), cfg, f"{cmd}.json")
        return EXIT_FAILED if failed(doc) else EXIT_OK
    except UsageError as exc:
        print(f"superstable: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except WindowTooCoarse as exc:
        print(f"superstable: grid too coarse: {exc}", file=sys.stderr)
        return EXIT_RESOLUTION
    except (PrecisionExhausted, SignUndecidable) as exc:
        print(f"superstable: precision exhausted: {exc}", file=sys.stderr)
        return EXIT_PRECISION


def main(argv=None):
    sys.exit(run(argv))
