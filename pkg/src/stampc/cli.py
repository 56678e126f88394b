"""Command-line entry point: ``stampc run|compare|estimate-only|verify-terminal``."""

from __future__ import annotations

import argparse
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from .estimator import TriggerTrace, update_efss
from .mpc import verify_terminal_assumption
from .scheduler import ControllerFault
from .sim.cart import cart_problem
from .sim.closed_loop import run_closed_loop
from .sim.config import ConfigError, load_config, with_overrides
from .sim.export import export, read_trace, trace_csv
from .uncertainty import Efss, bounded_rate_model

log = logging.getLogger("stampc")


def _run(args) -> int:
    rc = with_overrides(load_config(args.config), seed=args.seed, mode=args.mode,
                        out_dir=args.out)
    try:
        result = run_closed_loop(rc.sim)
    except ControllerFault as exc:
        dump = Path(rc.out_dir) / "fault_trace.csv"
        dump.parent.mkdir(parents=True, exist_ok=True)
        dump.write_text(trace_csv(exc.diagnostics.get("trace", [])), encoding="utf-8")
        print(f"controller fault: {exc} (trace so far in {dump})", file=sys.stderr)
        return 3
    csv_path, met_path = export(result.trace, result.metrics, rc.out_dir,
                                stem=rc.sim.mode)
    m = result.metrics
    print(f"{rc.sim.mode}: J_p={m.J_p:.4f} avg_sampling_time={m.average_sampling_time:.4f} "
          f"triggers={m.trigger_count} violations={m.constraint_violations}")
    print(f"wrote {csv_path} and {met_path}")
    return 0


def _compare(args) -> int:
    rc = load_config(args.config)
    rows = []
    for mode in ("adaptive", "robust"):
        m = run_closed_loop(with_overrides(rc, mode=mode).sim).metrics
        rows.append((mode, m))
    print(f"{'mode':<10} {'J_p':>10} {'avg T_s':>8} {'triggers':>8} {'viol':>5}")
    for mode, m in rows:
        print(f"{mode:<10} {m.J_p:>10.4f} {m.average_sampling_time:>8.4f} "
              f"{m.trigger_count:>8d} {m.constraint_violations:>5d}")
    return 0


def _estimate_only(args) -> int:
    rc = load_config(args.config)
    path = Path(args.trace) if args.trace else Path(rc.out_dir) / "adaptive_trace.csv"
    cols = read_trace(path)
    plant = cart_problem(rc.sim.cart, rc.sim.N).plant
    model = bounded_rate_model(plant.v_prior, rc.sim.rate)
    xs = np.column_stack([cols["x1"], cols["x2"]])
    us = cols["u"].reshape(-1, 1)
    trig = np.flatnonzero(cols["trigger"] == 1)
    efss = Efss.initial(plant.v_prior)
    misses = 0
    print(f"{'t':>4} {'efss_lo':>12} {'efss_hi':>12} {'v_true':>12} ok")
    for k, t in enumerate(trig):
        if k > 0:
            s = trig[k - 1]
            efss = update_efss(efss, TriggerTrace(int(s), int(t), us[s:t], xs[s], xs[t]),
                               model, plant).efss
        hull = efss.hull()
        ok = efss.contains(np.array([cols["v_true"][t]]))
        misses += int(not ok)
        print(f"{int(t):>4} {hull.lower[0]:>12.6f} {hull.upper[0]:>12.6f} "
              f"{cols['v_true'][t]:>12.6f} {'yes' if ok else 'NO'}")
    return 0 if misses == 0 else 1


def _verify_terminal(args) -> int:
    rc = load_config(args.config)
    rep = verify_terminal_assumption(cart_problem(rc.sim.cart, rc.sim.N),
                                     samples=args.samples, seed=rc.sim.seed)
    for key, value in rep.summary().items():
        print(f"{key} = {value}")
    for pt, excess in rep.failures[:args.show]:
        print(f"failure x=({pt[0]:.6f}, {pt[1]:.6f}) excess={excess:.6g}")
    return 0 if rep.input_ok and rep.boundary_pass_fraction >= 0.99 else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stampc")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True)

    r = sub.add_parser("run", help="closed-loop run, writes CSV trace and metrics")
    r.add_argument("--config", required=True)
    r.add_argument("--seed", type=int)
    r.add_argument("--mode", choices=("adaptive", "robust"))
    r.add_argument("--out")
    r.set_defaults(func=_run)

    c = sub.add_parser("compare", help="adaptive vs robust summary")
    c.add_argument("--config", required=True)
    c.set_defaults(func=_compare)

    e = sub.add_parser("estimate-only", help="replay a logged trace through the estimator")
    e.add_argument("--config", required=True)
    e.add_argument("--trace", help="CSV trace (default: <out_dir>/adaptive_trace.csv)")
    e.set_defaults(func=_estimate_only)

    t = sub.add_parser("verify-terminal", help="sampled terminal-ingredient check")
    t.add_argument("--config", required=True)
    t.add_argument("--samples", type=int, default=10000)
    t.add_argument("--show", type=int, default=10, help="failures to print")
    t.set_defaults(func=_verify_terminal)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if not args.verbose:
        warnings.simplefilter("ignore", RuntimeWarning)
    try:
        return args.func(args)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
