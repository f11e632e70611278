"""``bellcv`` command-line interface.

Exit codes: 0 success, 1 usage or I/O error, 2 degenerate parameters,
3 no threshold crossing, 4 verification failure.
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import io
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import analytic, checks, montecarlo
from .errors import DegenerateConditioning, NoCrossing, RangeError
from .model import ExperimentParams, standard_phases

EXIT_OK, EXIT_USAGE, EXIT_DEGENERATE, EXIT_NO_CROSSING, EXIT_VERIFY = 0, 1, 2, 3, 4

SWEEP_COLUMNS = ["r", "reflectance", "eta", "psi", "p_pp", "E", "b_chsh", "b_ch", "p34", "status"]
ETA_COLUMNS = ["eta", "b_chsh"]
SAMPLE_COLUMNS = ["setting", "phi_sum", "n_pp", "n_pm", "n_mp", "n_mm"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("BELLCV_THREADS", "1")))
    except ValueError:
        return 1


def pmap(fn, items):
    """Order-preserving map, threaded up to BELLCV_THREADS workers."""
    items = list(items)
    n = min(_threads(), len(items)) or 1
    if n == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


@dataclass(frozen=True)
class RunConfig:
    command: str
    options: dict = field(default_factory=dict)
    out: Optional[str] = None

    def header(self) -> str:
        opts = " ".join(f"{k}={v}" for k, v in sorted(self.options.items()))
        return f"# bellcv {self.command} {opts} threads={_threads()}"


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bellcv", description="CHSH/CH statistics for click-conditioned homodyne detection")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    pi4 = math.pi / 4

    sp = sub.add_parser("point", help="closed-form statistics at one parameter point")
    sp.add_argument("--r", type=float, required=True)
    sp.add_argument("--reflectance", type=float, required=True)
    sp.add_argument("--eta", type=float, default=1.0)
    sp.add_argument("--psi", type=float, default=pi4)

    sp = sub.add_parser("sweep", help="B_CHSH over an (r, R) grid, as CSV")
    sp.add_argument("--r-min", type=float, default=0.05)
    sp.add_argument("--r-max", type=float, default=2.0)
    sp.add_argument("--r-steps", type=int, default=60)
    sp.add_argument("--reflectance-min", type=float, default=0.5)
    sp.add_argument("--reflectance-max", type=float, default=0.999)
    sp.add_argument("--reflectance-steps", type=int, default=60)
    sp.add_argument("--eta", type=float, default=1.0)
    sp.add_argument("--psi", type=float, default=pi4)
    sp.add_argument("--out", default="-")

    sp = sub.add_parser("eta-scan", help="B_CHSH versus detector efficiency, as CSV")
    sp.add_argument("--r", type=float, default=0.6)
    sp.add_argument("--reflectance", type=float, default=0.9891)
    sp.add_argument("--psi", type=float, default=pi4)
    sp.add_argument("--eta-min", type=float, default=0.05)
    sp.add_argument("--eta-steps", type=int, default=20)
    sp.add_argument("--out", default="-")

    for name, text in (("threshold", "smallest r with B_CHSH = 2"), ("argmax", "r maximizing B_CHSH")):
        sp = sub.add_parser(name, help=text)
        sp.add_argument("--reflectance", type=float, required=True)
        sp.add_argument("--eta", type=float, default=1.0)
        sp.add_argument("--psi", type=float, default=pi4)

    sp = sub.add_parser("verify", help="closed form vs Fock-space oracle")
    sp.add_argument("--level", choices=["fast", "full"], default="fast")

    sp = sub.add_parser("sample", help="Monte-Carlo CHSH estimate from sampled homodyne records")
    sp.add_argument("--r", type=float, required=True)
    sp.add_argument("--reflectance", type=float, required=True)
    sp.add_argument("--eta", type=float, default=1.0)
    sp.add_argument("--psi", type=float, default=pi4)
    sp.add_argument("--n", type=int, default=100_000)
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--out", default="-")
    return p


def parse_config(argv: Optional[Sequence[str]] = None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    opts = {k: v for k, v in vars(ns).items() if k not in ("command", "out")}
    for k, v in opts.items():
        if isinstance(v, float) and not math.isfinite(v):
            raise UsageError(f"--{k.replace('_', '-')} must be finite")
        if k.endswith("steps") and v < 1:
            raise UsageError(f"--{k.replace('_', '-')} must be at least 1")
    if ns.command == "sample" and ns.n < 100:
        raise UsageError("--n must be at least 100")
    return RunConfig(ns.command, opts, getattr(ns, "out", None))


@contextlib.contextmanager
def _csv_target(path: str):
    if path == "-":
        yield sys.stdout
        return
    try:
        fh = open(path, "w", newline="", encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from exc
    with fh:
        yield fh


def _write_csv(path: str, columns, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    with _csv_target(path) as fh:
        fh.write(buf.getvalue())


def _say(cfg: RunConfig, text: str) -> None:
    # keep stdout clean when it carries CSV
    stream = sys.stderr if cfg.out == "-" else sys.stdout
    print(text, file=stream)


def cmd_point(cfg: RunConfig) -> int:
    o = cfg.options
    params = ExperimentParams(o["r"], o["reflectance"], o["eta"])
    res = analytic.bell_result(params, standard_phases(o["psi"]))
    print(cfg.header())
    for label, value in (("P++(psi)", res.p_pp), ("E(psi)", res.e_corr), ("B_CHSH", res.b_chsh),
                         ("B_CH", res.b_ch), ("p34", res.p34)):
        print(f"{label:<9s} = {value:.10g}")
    print("CHSH violated" if res.b_chsh > 2 else "CHSH not violated")
    return EXIT_OK


def sweep_rows(points) -> list[list[str]]:
    rows = []
    for pt in points:
        if pt.result is None:
            vals = ["nan"] * 5
        else:
            res = pt.result
            vals = [_fmt(v) for v in (res.p_pp, res.e_corr, res.b_chsh, res.b_ch, res.p34)]
        rows.append([_fmt(pt.r), _fmt(pt.reflectance), _fmt(pt.eta), _fmt(pt.psi), *vals, pt.status])
    return rows


def cmd_sweep(cfg: RunConfig) -> int:
    o = cfg.options
    r_grid = np.linspace(o["r_min"], o["r_max"], o["r_steps"])
    refl_grid = np.linspace(o["reflectance_min"], o["reflectance_max"], o["reflectance_steps"])
    _say(cfg, cfg.header())
    rows_by_r = pmap(lambda r: analytic.sweep([r], refl_grid, o["eta"], o["psi"]), r_grid)
    points = [pt for row in rows_by_r for pt in row]
    _write_csv(cfg.out, SWEEP_COLUMNS, sweep_rows(points))
    n_bad = sum(pt.result is None for pt in points)
    n_viol = sum(pt.result is not None and pt.result.b_chsh > 2 for pt in points)
    _say(cfg, f"# {len(points)} cells, {n_viol} violating, {n_bad} degenerate")
    return EXIT_OK


def cmd_eta_scan(cfg: RunConfig) -> int:
    o = cfg.options
    phases = standard_phases(o["psi"])
    etas = np.linspace(o["eta_min"], 1.0, o["eta_steps"])
    _say(cfg, cfg.header())
    rows = [[_fmt(eta), _fmt(analytic.bell_chsh(ExperimentParams(o["r"], o["reflectance"], eta), phases))]
            for eta in etas]
    _write_csv(cfg.out, ETA_COLUMNS, rows)
    return EXIT_OK


def cmd_threshold(cfg: RunConfig) -> int:
    o = cfg.options
    xtol = 1e-7
    t0 = time.perf_counter()
    r_star = analytic.threshold_r(o["reflectance"], o["eta"], o["psi"], xtol=xtol)
    print(cfg.header())
    print(f"r_star = {r_star:.10g}  (bisection xtol {xtol:g}, {time.perf_counter() - t0:.3f} s)")
    return EXIT_OK


def cmd_argmax(cfg: RunConfig) -> int:
    o = cfg.options
    tol = 1e-8
    t0 = time.perf_counter()
    r_max, b_max = analytic.argmax_r(o["reflectance"], o["eta"], o["psi"], tol=tol)
    print(cfg.header())
    print(f"r_max = {r_max:.10g}  b_max = {b_max:.10g}  (golden-section rtol {tol:g},"
          f" {time.perf_counter() - t0:.3f} s)")
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    level = cfg.options["level"]
    print(cfg.header())
    t0 = time.perf_counter()
    suite = checks.fast_suite() if level == "fast" else checks.full_suite()
    results = checks.run_checks(suite, pmap=pmap)
    for res in results:
        print(res.line())
    failed = [res.name for res in results if not res.passed]
    print(f"# {len(results) - len(failed)}/{len(results)} checks passed in {time.perf_counter() - t0:.1f} s")
    if failed:
        print("verification failed: " + "; ".join(failed), file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_sample(cfg: RunConfig) -> int:
    o = cfg.options
    params = ExperimentParams(o["r"], o["reflectance"], o["eta"])
    phases = standard_phases(o["psi"])
    _say(cfg, cfg.header())
    est = montecarlo.estimate_bell(params, phases, o["n"], o["seed"])
    rows = [[label, _fmt(s), *map(str, c)]
            for (label, *_), s, c in zip(phases.settings(), est.phi_sums, est.counts)]
    _write_csv(cfg.out, SAMPLE_COLUMNS, rows)
    exact = analytic.bell_chsh(params, phases)
    _say(cfg, f"b_chsh_hat = {est.b_chsh_hat:.6f} +/- {est.stderr:.6f}  (closed form {exact:.6f},"
              f" p34 = {analytic.p_joint_click(params):.6g})")
    return EXIT_OK


COMMANDS = {
    "point": cmd_point,
    "sweep": cmd_sweep,
    "eta-scan": cmd_eta_scan,
    "threshold": cmd_threshold,
    "argmax": cmd_argmax,
    "verify": cmd_verify,
    "sample": cmd_sample,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        cfg = parse_config(argv)
        return COMMANDS[cfg.command](cfg)
    except SystemExit as exc:  # argparse usage errors and --help
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"bellcv: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DegenerateConditioning as exc:
        print(f"bellcv: degenerate parameters: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except RangeError as exc:
        print(f"bellcv: parameter out of range: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NoCrossing as exc:
        print(f"bellcv: no crossing: {exc}", file=sys.stderr)
        return EXIT_NO_CROSSING


if __name__ == "__main__":
    sys.exit(main())
