"""Batch command-line front-end.

Subcommands:
  profile        solve/evaluate a profile and write t,a1,a2,a3
  trace          write the twistor trace, line data and transcendent files
  verify         run the verification suite for one n, emit the report JSON
  pvi-integrate  propagate the transcendent with the direct PVI integrator

Output is deterministic (17 significant digits, fixed column order) and
written atomically (temp file + rename).  Exit codes: 0 success, 1 invalid
configuration, 2 solver non-convergence, 3 I/O failure; verification
failures also exit 2 with the report on stdout.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence, PainleveInstantonError
from .instanton import duality_residual, DualitySign
from .isomonodromy import extract_y, jimbo_miwa_params, make_family
from .painleve import (PviSample, pvi_integrate, pvi_residual,
                       select_delta_variant)
from .report import build_verification_report, default_tolerances, profile_for
from .stepper import fd_weights
from .twistor import mu_pair, trace_csv_row

log = logging.getLogger("painleve_instanton")


@dataclass
class RunConfig:
    command: str
    n: int = 3
    t_min: float = 0.05
    t_max: float = 0.95
    samples: int = 101
    fmt: str = "csv"
    out: str | None = None
    tol: float | None = None
    delta_variant: str = "auto"

    def validate(self):
        if not 0.0 < self.t_min < self.t_max < 1.0:
            raise ValueError("need 0 < t-min < t-max < 1")
        if self.samples < 5:
            raise ValueError("samples must be >= 5")
        if self.n < 1 or self.n % 2 == 0:
            raise ValueError("n must be a positive odd label")
        if self.fmt not in ("csv", "json"):
            raise ValueError("format must be csv or json")
        if self.delta_variant not in ("auto", "intro", "theorem"):
            raise ValueError("delta-variant must be auto, intro or theorem")


def _atomic_write(path, text):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(cfg, text, suffix=""):
    if cfg.out is None:
        sys.stdout.write(text)
        return
    path = cfg.out + suffix
    _atomic_write(path, text)
    log.info("wrote %s", path)


def cmd_profile(cfg):
    prof = profile_for(cfg.n)
    ts = prof.sample_ts(cfg.t_min, cfg.t_max, cfg.samples)
    text = prof.to_csv(ts) if cfg.fmt == "csv" else prof.to_json(ts) + "\n"
    _emit(cfg, text)
    return 0


def cmd_trace(cfg):
    prof = profile_for(cfg.n)
    ts = prof.sample_ts(cfg.t_min, cfg.t_max, cfg.samples)
    fam = make_family(prof, ts, gauge="line")

    twistor_lines = ["t,x_re,x_im,trA0sq,trA1sq,trAxsq,trAinfsq"]
    for F in fam.samples:
        twistor_lines.append(trace_csv_row(F))

    mu_lines = ["t,mu_plus,mu_minus,mu_product"]
    for t in ts:
        mp, mm = mu_pair(t)
        mu_lines.append(",".join(f"{v:.17g}" for v in (t, mp, mm, mp * mm)))

    ys = np.array([extract_y(F, "plus") for F in fam.samples])
    sample = PviSample(ts=ts, xs=fam.xs, ys=ys)
    params = jimbo_miwa_params(fam.samples[len(fam) // 2], "plus")
    residuals = [float("nan")] * len(ts)
    for k in range(2, len(ts) - 2):
        residuals[k] = abs(pvi_residual(sample, params, k))

    if cfg.fmt == "json":
        payload = {
            "params": params.as_dict(),
            "delta_variant": select_delta_variant(params.delta.real, cfg.n),
            "twistor": [F.to_json_dict() for F in fam.samples],
            "mu": [{"t": float(t), "mu_plus": mp, "mu_minus": mm}
                   for t, (mp, mm) in zip(ts, (mu_pair(t) for t in ts))],
            "pvi": [{"t": float(sample.ts[k]),
                     "x_re": float(sample.xs[k].real),
                     "x_im": float(sample.xs[k].imag),
                     "y_re": float(sample.ys[k].real),
                     "y_im": float(sample.ys[k].imag),
                     "residual_abs": residuals[k]} for k in range(len(ts))],
        }
        _emit(cfg, json.dumps(payload) + "\n")
        return 0
    if cfg.out is None:
        raise ValueError("csv trace needs --out (three files are written)")
    _emit(cfg, "\n".join(twistor_lines) + "\n", suffix=".twistor.csv")
    _emit(cfg, "\n".join(mu_lines) + "\n", suffix=".mu.csv")
    _emit(cfg, sample.to_csv(residuals), suffix=".pvi.csv")
    return 0


def cmd_verify(cfg):
    report = build_verification_report(cfg.n, t_min=cfg.t_min, t_max=cfg.t_max,
                                       samples=cfg.samples, tol_override=cfg.tol)
    if cfg.delta_variant != "auto" and report["delta_variant"] != cfg.delta_variant:
        report["passed"] = False
        report["checks"]["delta_variant_preference"] = False
    text = json.dumps(report, indent=2) + "\n"
    _emit(cfg, text)
    if cfg.out is not None:
        sys.stdout.write(("PASS" if report["passed"] else "FAIL") + "\n")
    return 0 if report["passed"] else 2


def cmd_pvi_integrate(cfg):
    prof = profile_for(cfg.n)
    ts = np.linspace(cfg.t_min, cfg.t_max, cfg.samples)
    fam = make_family(prof, ts, gauge="line")
    ys = np.array([extract_y(F, "plus") for F in fam.samples])
    params = jimbo_miwa_params(fam.samples[len(fam) // 2], "plus")
    xs = fam.xs.real

    w1 = fd_weights(xs[:5], xs[2], 1)
    y, yp = ys[2], np.dot(w1, ys[:5])
    rows = ["t,x_re,x_im,y_re,y_im,residual_abs"]
    x = xs[2]
    rows.append(",".join(f"{v:.17g}" for v in (ts[2], x, 0.0, y.real, y.imag, 0.0)))
    for k in range(3, len(xs)):
        y, yp = pvi_integrate(params, x, y, yp, xs[k])
        x = xs[k]
        rows.append(",".join(f"{v:.17g}" for v in (
            ts[k], x, 0.0, y.real, y.imag, abs(y - ys[k]))))
    _emit(cfg, "\n".join(rows) + "\n")
    return 0


_COMMANDS = {
    "profile": cmd_profile,
    "trace": cmd_trace,
    "verify": cmd_verify,
    "pvi-integrate": cmd_pvi_integrate,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="painleve-instanton",
        description="Invariant instanton profiles, isomonodromic residue "
                    "families and Painleve VI verification.")
    sub = parser.add_subparsers(dest="command", required=True)
    # verification suites default to the finite-difference-friendly window
    windowed = {"verify": (0.5, 201), "pvi-integrate": (0.5, 201)}
    for name in _COMMANDS:
        t_min, samples = windowed.get(name, (0.05, 101))
        p = sub.add_parser(name)
        p.add_argument("--n", type=int, default=3)
        p.add_argument("--t-min", type=float, default=t_min)
        p.add_argument("--t-max", type=float, default=0.95)
        p.add_argument("--samples", type=int, default=samples)
        p.add_argument("--format", dest="fmt", choices=("csv", "json"),
                       default="csv")
        p.add_argument("--out", default=None)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--delta-variant", dest="delta_variant",
                       choices=("auto", "intro", "theorem"), default="auto")
    return parser


def main(argv=None):
    level = os.environ.get("PAINLEVE_INSTANTON_LOG", "error").upper()
    logging.basicConfig(level=getattr(logging, level, logging.ERROR))
    args = build_parser().parse_args(argv)
    cfg = RunConfig(command=args.command, n=args.n, t_min=args.t_min,
                    t_max=args.t_max, samples=args.samples, fmt=args.fmt,
                    out=args.out, tol=args.tol,
                    delta_variant=args.delta_variant)
    try:
        cfg.validate()
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    try:
        return _COMMANDS[cfg.command](cfg)
    except NoConvergence as exc:
        print(json.dumps({"error": "NoConvergence", "detail": str(exc)}),
              file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    except PainleveInstantonError as exc:
        print(json.dumps({"error": type(exc).__name__, "detail": str(exc)}),
              file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
