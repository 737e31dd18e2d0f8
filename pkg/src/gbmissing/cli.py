"""Command-line harness.

Every command writes one report (JSON by default) that embeds the tool
version and the fully resolved configuration. Exit status is 0 on success,
1 for invalid arguments and 2 for resource, numeric or format failures; in
the error cases a JSON object describing the failure is printed to stderr.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .approximant import ApproximantParams, d4sharp_window, envelope_constant, mean_ratio, prop33_compare
from .arith import SieveWindow, build_window, read_window, write_window
from .digitset import DigitSystem, RestrictedSet, ap_discrepancy, l1_estimate
from .dissection import CircleParams
from .errors import DomainError, FormatError, GBError
from .goldbach import scan
from .verify import SUITES

COMMANDS = ("sieve", "scan", "arcs", "l1", "discrepancy", "approx-check", "verify")
CACHE_ENV = "GBSEED_CACHE_DIR"


@dataclass
class RunConfig:
    command: str
    X: int = 10**6
    H: int = 10**4
    base: int = 10
    digit: int = 7
    epsilon: float = 0.27
    r4_override: float | None = None
    log_exponent: str = "auto"
    qmax: int = 50
    grid: int = 0
    seed: int = 0
    lo: int = 1
    out_path: str | None = None
    format: str = "json"
    suites: list[str] = field(default_factory=list)

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise DomainError(f"unknown command {self.command!r}")
        if self.format not in ("json", "csv"):
            raise DomainError("format must be json or csv")
        if self.command == "sieve" and not self.out_path:
            raise DomainError("sieve needs --out for the window file")
        if self.command in ("scan", "arcs", "approx-check", "sieve") and not 1 <= self.H <= self.X:
            raise DomainError("need 1 <= H <= X")
        if self.command in ("scan", "l1", "discrepancy"):
            DigitSystem(self.base, self.digit)
        if not self.epsilon > 0:
            raise DomainError("epsilon must be positive")
        if self.qmax < 1:
            raise DomainError("qmax must be >= 1")
        for name in self.suites:
            if name not in SUITES:
                raise DomainError(f"unknown verify suite {name!r}")

    def circle(self) -> CircleParams:
        if self.log_exponent == "auto":
            return CircleParams.auto(self.X, self.H, self.epsilon)
        return CircleParams(self.X, self.H, self.epsilon, log_exponent=float(self.log_exponent))

    def approximant(self) -> ApproximantParams:
        return ApproximantParams.build(self.X, self.epsilon, self.r4_override)


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit with status 2
        raise DomainError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gbmissing", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"gbmissing {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, out=True):
        sp.add_argument("--x", dest="X", type=int, default=10**6)
        sp.add_argument("--h", dest="H", type=int, default=10**4)
        sp.add_argument("--epsilon", type=float, default=0.27)
        if out:
            sp.add_argument("--out", dest="out_path")
            sp.add_argument("--format", choices=("json", "csv"), default="json")

    def digits(sp):
        sp.add_argument("--base", type=int, default=10)
        sp.add_argument("--digit", type=int, default=7)

    sp = sub.add_parser("sieve", help="sieve a window [x, x+h] and write it in GBSV1 format")
    common(sp)

    sp = sub.add_parser("scan", help="Goldbach scan over the missing-digit set in (x, x+h]")
    common(sp)
    digits(sp)
    sp.add_argument("--log-exponent", default="auto")
    sp.add_argument("--r4", dest="r4_override", type=float)
    sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("arcs", help="Farey arcs and major windows as CSV or JSON")
    common(sp)
    sp.add_argument("--log-exponent", default="auto")

    sp = sub.add_parser("l1", help="L1 norm of the normalised Fourier transform on [lo, x]")
    common(sp)
    digits(sp)
    sp.add_argument("--lo", type=int, default=1)
    sp.add_argument("--grid", type=int, default=0, help="grid size (default: next power of two >= 4(x+1))")

    sp = sub.add_parser("discrepancy", help="AP discrepancy of the missing-digit set in [1, x]")
    common(sp)
    digits(sp)
    sp.add_argument("--qmax", type=int, default=50)

    sp = sub.add_parser("approx-check", help="d4sharp against d4 and the main-term comparison")
    common(sp)
    sp.add_argument("--r4", dest="r4_override", type=float)

    sp = sub.add_parser("verify", help="run the exact-identity suites")
    sp.add_argument("--out", dest="out_path")
    sp.add_argument("--suite", dest="suites", action="append", default=[], choices=sorted(SUITES))
    sp.set_defaults(format="json")
    return p


def parse_config(argv: list[str] | None) -> RunConfig:
    ns = vars(build_parser().parse_args(argv))
    known = {f for f in RunConfig.__dataclass_fields__}
    cfg = RunConfig(**{k: v for k, v in ns.items() if k in known and v is not None})
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# window cache
# ---------------------------------------------------------------------------

def cache_roundtrip(window: SieveWindow, path) -> SieveWindow:
    """Write then read back a window; the result must equal the input bit for bit."""
    write_window(window, path)
    back = read_window(path)
    if not back == window:
        raise FormatError(f"round trip through {path} changed the window")
    return back


def cached_window(start: int, length: int) -> SieveWindow:
    """build_window, reusing a GBSV1 file under $GBSEED_CACHE_DIR when set."""
    root = os.environ.get(CACHE_ENV)
    if not root:
        return build_window(start, length)
    path = Path(root) / f"window_{start}_{length}.gbsv"
    if path.exists():
        return read_window(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    w = build_window(start, length)
    tmp = path.with_suffix(".tmp")
    write_window(w, tmp)
    tmp.replace(path)
    return w


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _envelope(cfg: RunConfig, result: dict) -> dict:
    return {"tool": "gbmissing", "version": __version__, "command": cfg.command, "config": asdict(cfg),
            "backend": kernels.BACKEND, "result": result}


def cmd_sieve(cfg: RunConfig):
    w = build_window(cfg.X, cfg.H + 1)
    cache_roundtrip(w, cfg.out_path)
    digest = hashlib.sha256(Path(cfg.out_path).read_bytes()).hexdigest()
    result = {"start": w.start, "length": w.length, "psi_increment": float(np.sum(w.lam)),
              "primes": int(np.sum(w.is_prime)), "d4_sum": int(np.sum(w.d4)), "sha256": digest}
    return _envelope(cfg, result), None


def cmd_scan(cfg: RunConfig):
    params = cfg.circle()
    approx = cfg.approximant()
    window = cached_window(1, cfg.X + cfg.H)
    rep = scan(DigitSystem(cfg.base, cfg.digit), cfg.X, cfg.H, params, approx, window=window)
    if cfg.format == "csv":
        return None, rep.to_csv()
    doc = rep.to_dict()
    doc["config"] = asdict(cfg)
    doc["tolerances"] = {"exceptional_split_fraction_target": 0.01}
    return doc, None


def cmd_arcs(cfg: RunConfig):
    params = cfg.circle()
    d = params.dissection()
    if cfg.format == "csv":
        return None, d.to_csv()
    result = {"circle": params.to_dict(), "arcs": len(d), "tiling_error": d.tiling_error(),
              "containment_error": d.containment_error(), "tolerance": 1e-12,
              "table": [asdict(a) for a in d]}
    return _envelope(cfg, result), None


def cmd_l1(cfg: RunConfig):
    s = RestrictedSet(DigitSystem(cfg.base, cfg.digit), cfg.lo, cfg.X)
    grid = cfg.grid or 1 << math.ceil(math.log2(4 * (cfg.X + 1)))
    cfg.grid = grid
    est = l1_estimate(s, grid)
    if cfg.format == "csv":
        return None, est.to_csv()
    return _envelope(cfg, est.to_dict()), None


def cmd_discrepancy(cfg: RunConfig):
    rep = ap_discrepancy(DigitSystem(cfg.base, cfg.digit), cfg.X, cfg.qmax)
    if cfg.format == "csv":
        return None, rep.to_csv()
    return _envelope(cfg, rep.to_dict()), None


def cmd_approx_check(cfg: RunConfig):
    approx = cfg.approximant()
    vals = d4sharp_window(cfg.X, cfg.H, approx)
    window = cached_window(cfg.X, cfg.H + 1)
    gaps = {}
    for q, a, beta in ((1, 1, 0.0), (2, 1, 0.0)):
        rep = prop33_compare(q, a, beta, cfg.X, cfg.H, approx, values=vals)
        gaps[f"{q}/{a}/{beta}"] = rep.to_dict()
    result = {"R4": approx.R4, "cutoff": approx.cutoff, "mean_ratio": mean_ratio(window.d4, vals),
              "envelope_constant": envelope_constant(approx), "prop33": gaps,
              "prop33_relative_gap_target": 0.05}
    return _envelope(cfg, result), None


def cmd_verify(cfg: RunConfig):
    names = cfg.suites or list(SUITES)
    results = [SUITES[n]().to_dict() for n in names]
    return _envelope(cfg, {"suites": results, "passed": all(r["passed"] for r in results)}), None


HANDLERS = {"sieve": cmd_sieve, "scan": cmd_scan, "arcs": cmd_arcs, "l1": cmd_l1, "discrepancy": cmd_discrepancy,
            "approx-check": cmd_approx_check, "verify": cmd_verify}


def _emit(doc: dict | None, text: str | None, cfg: RunConfig) -> None:
    if text is None:
        text = json.dumps(doc, indent=1, sort_keys=True, default=_json_default) + "\n"
    if cfg.out_path and cfg.command != "sieve":
        Path(cfg.out_path).write_text(text)
    else:
        sys.stdout.write(text)


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def run(cfg: RunConfig) -> int:
    doc, text = HANDLERS[cfg.command](cfg)
    _emit(doc, text, cfg)
    if cfg.command == "verify" and not doc["result"]["passed"]:
        return 1
    return 0


def exit_code(err: Exception) -> int:
    return 1 if isinstance(err, DomainError) else 2


def main(argv: list[str] | None = None) -> int:
    try:
        cfg = parse_config(argv)
        return run(cfg)
    except (GBError, OSError) as err:
        kind = getattr(err, "kind", "io")
        sys.stderr.write(json.dumps({"error": {"kind": kind, "message": str(err)}}, ensure_ascii=False) + "\n")
        return exit_code(err)


if __name__ == "__main__":
    sys.exit(main())
