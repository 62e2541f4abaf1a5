"""Command-line front end.

Exit codes: 0 success, 1 invalid configuration, 2 numerical-consistency
failure (closed form, quadrature and simulation disagree), 3 I/O error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import sop_closed_form, sop_quadrature
from .model import db_to_linear, validate, with_overrides
from .montecarlo import McConfig, estimate_sop
from .power import compute_power_allocation
from .scenarios import random_params
from .sweep import ConfigError, emit_csv, load_config, parse_config, preset_names, preset_text, run_sweep

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INCONSISTENT = 2
EXIT_IO = 3

CLOSED_VS_QUAD_TOL = 1e-8
MC_SIGMAS = 4.0


def _mc_z(reference: float, mc_hat: float, trials: int) -> float:
    """Standardised distance of a simulated frequency from a reference probability."""
    sigma = math.sqrt(reference * (1.0 - reference) / trials)
    if sigma == 0.0:
        return 0.0 if mc_hat == reference else math.inf
    return abs(mc_hat - reference) / sigma


def _spec_from_args(args):
    if getattr(args, "preset", None):
        return parse_config(preset_text(args.preset))
    return load_config(args.config)


def cmd_eval(args) -> int:
    spec = _spec_from_args(args)
    params = spec.base
    if args.pt_db is not None:
        params = validate(with_overrides(params, gamma_T=db_to_linear(args.pt_db)))
    mc = spec.mc or McConfig()
    if args.trials is not None or args.seed is not None:
        mc = McConfig(trials=args.trials or mc.trials, seed=mc.seed if args.seed is None else args.seed)

    alloc = compute_power_allocation(params)
    print(f"gamma_T = {params.primary.gamma_T:.6g}  xi = {alloc.xi:.6g}  "
          f"gamma_S = {alloc.gamma_S:.6g}  feasible = {alloc.feasible}")
    breakdown = sop_closed_form(params, alloc)
    print(f"rho = {breakdown.rho:.12g}" + ("  (extended precision)" if breakdown.extended_precision else ""))
    if breakdown.per_k:
        print(f"{'k':>3} {'A_k':>14} {'B_k':>14} {'a_k':>12} {'b':>12} {'c_k':>12} {'I1_k':>14} {'I2_k':>14}")
        for t in breakdown.per_k:
            print(f"{t.k:>3} {t.A:>14.6e} {t.B:>14.6e} {t.a:>12.5g} {t.b:>12.5g} {t.c:>12.5g} "
                  f"{t.I1:>14.6e} {t.I2:>14.6e}")
    quad = sop_quadrature(params, alloc)
    est = estimate_sop(params, alloc, mc, workers=args.workers)
    z = _mc_z(breakdown.sop, est.sop_hat, est.trials)
    print(f"SOP closed form  : {breakdown.sop:.12g}")
    print(f"SOP quadrature   : {quad:.12g}   |diff| = {abs(quad - breakdown.sop):.3g}")
    print(f"SOP Monte Carlo  : {est.sop_hat:.12g}   95% CI [{est.ci95[0]:.6g}, {est.ci95[1]:.6g}]  "
          f"trials = {est.trials}  seed = {est.seed}  z = {z:.2f}")
    if abs(quad - breakdown.sop) >= CLOSED_VS_QUAD_TOL or z > MC_SIGMAS:
        print("numerical consistency check FAILED", file=sys.stderr)
        return EXIT_INCONSISTENT
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = _spec_from_args(args)
    if spec.axis is None:
        raise ConfigError([("sweep", "configuration has no sweep section")])
    if args.trials is not None or args.seed is not None:
        base_mc = spec.mc or McConfig()
        spec = replace(spec, mc=McConfig(trials=args.trials or base_mc.trials,
                                         seed=base_mc.seed if args.seed is None else args.seed))
    result = run_sweep(spec, workers=args.workers)
    emit_csv(result, args.out)
    if args.meta:
        Path(args.meta).write_text(json.dumps(result.metadata, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"{result.axis} sweep: {len(result.rows)} points -> {args.out}")
    for row in result.rows:
        values = [f"{name}={v:.6g}" for name, v in (("analytic", row.sop_analytic),
                                                       ("quadrature", row.sop_quadrature),
                                                       ("mc", row.sop_mc)) if v is not None]
        note = "" if row.feasible else "  (secondary silent)"
        errors = "".join(f"  [{m} failed: {msg}]" for m, msg in row.errors.items())
        print(f"  {row.axis_value:>8g}  " + "  ".join(values) + note + errors)
    return EXIT_OK


def selftest(tuples: int, seed: int, trials: int, k_max: int = 8, out=None) -> bool:
    """Triple-agreement check on random scenarios; True when it passes.

    Closed form and quadrature must agree to ``1e-8`` on every tuple; the
    simulated frequency may leave the 4-sigma band on at most 2.5% of them.
    """
    out = out or sys.stdout
    rng = np.random.default_rng(seed)
    worst_gap = 0.0
    mc_misses = 0
    for i in range(tuples):
        params = random_params(rng, k_max=k_max)
        alloc = compute_power_allocation(params)
        closed = sop_closed_form(params, alloc).sop
        quad = sop_quadrature(params, alloc)
        est = estimate_sop(params, alloc, McConfig(trials=trials, seed=seed + i))
        gap = abs(closed - quad)
        worst_gap = max(worst_gap, gap)
        z = _mc_z(closed, est.sop_hat, trials)
        mc_misses += z > MC_SIGMAS
        if gap >= CLOSED_VS_QUAD_TOL:
            print(f"tuple {i}: closed form {closed!r} vs quadrature {quad!r}", file=out)
    allowed = math.floor(0.025 * tuples)
    ok = worst_gap < CLOSED_VS_QUAD_TOL and mc_misses <= allowed
    print(f"{tuples} tuples: max |closed - quadrature| = {worst_gap:.3g}; "
          f"Monte Carlo outside {MC_SIGMAS:g} sigma on {mc_misses} (allowed {allowed}) -> "
          f"{'PASS' if ok else 'FAIL'}", file=out)
    return ok


def cmd_selftest(args) -> int:
    return EXIT_OK if selftest(args.tuples, args.seed, args.trials) else EXIT_INCONSISTENT


def cmd_presets(args) -> int:
    for name in preset_names():
        desc = json.loads(preset_text(name)).get("description", "")
        print(f"{name:<24} {desc}")
        if args.export:
            target = Path(args.export)
            target.mkdir(parents=True, exist_ok=True)
            (target / f"{name}.json").write_text(preset_text(name), encoding="utf-8")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="backhaul-sop", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def source(p):
        group = p.add_mutually_exclusive_group(required=True)
        group.add_argument("--config", help="JSON configuration file")
        group.add_argument("--preset", help="name of a bundled configuration (see 'presets')")
        p.add_argument("--trials", type=int, help="override mc.trials")
        p.add_argument("--seed", type=int, help="override mc.seed")
        p.add_argument("--workers", type=int, default=1, help="parallel workers (results do not depend on it)")

    p = sub.add_parser("eval", help="evaluate one scenario with all three methods")
    source(p)
    p.add_argument("--pt-db", type=float, help="override the primary transmit SNR in dB")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="run a parameter sweep and write CSV")
    source(p)
    p.add_argument("--out", required=True, help="CSV destination")
    p.add_argument("--meta", help="optional JSON file for run metadata (config echo, seed, version, time)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("selftest", help="closed form vs quadrature vs Monte Carlo on random scenarios")
    p.add_argument("--tuples", type=int, default=200)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--trials", type=int, default=100_000)
    p.set_defaults(func=cmd_selftest)

    p = sub.add_parser("presets", help="list bundled figure configurations")
    p.add_argument("--export", help="also copy the preset files into this directory")
    p.set_defaults(func=cmd_presets)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        # ConfigError, ValidationError and bad McConfig overrides
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except KeyError as exc:
        print(f"invalid configuration: {exc.args[0]}", file=sys.stderr)
        return EXIT_INVALID
    except ArithmeticError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
