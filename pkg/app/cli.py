#!/usr/bin/env python3
"""
ALE-SBM CLI: configured runs, convergence sweeps and analytic self-checks.

USAGE:
  python -m app.cli run configs/kidder.ini                 # One run: VTK snapshots, report.json, conservation.csv
  python -m app.cli run configs/kidder.ini --output out/k  # Override the output directory

  python -m app.cli sweep configs/manufactured_sweep.ini   # Convergence table (JSON, CSV, Excel)

  python -m app.cli verify                                 # Manufactured residual, Kidder identities
  python -m app.cli cases                                  # List cases and their parameters
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

# Ensure project root is on path
sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from app.cases.metrics import kidder_identities, manufactured_residual
from app.cases.registry import case_names, case_parameters
from app.config import LOG_LEVEL, THREADS
from app.data.loader import load_config
from app.errors import SolverError

VERIFY_TOLERANCES = {
    "manufactured residual": 1e-6,
    "kidder entropy": 1e-10,
    "kidder similarity": 1e-10,
    "kidder h(t_f) - 1/2": 1e-10,
}


def _banner(title: str) -> None:
    print("\n" + "=" * 70)
    print(f"  ALE-SBM — {title}")
    print("=" * 70)


def cmd_run(args) -> int:
    """Run one configured case."""
    from app.runner import run_case

    _banner("RUN")
    config = load_config(args.config)
    if args.output:
        config = config.model_copy(update={"output_dir": Path(args.output)})
    print(f"\n  Case:   {config.case}  (M={config.degree}, CFL={config.cfl})")
    print(f"  Mesh:   {config.mesh.label()}")
    print(f"  Output: {config.output_dir}")

    report = run_case(config)

    print(f"\n  Steps: {report.steps}   t = {report.final_time:.6g}   cells = {report.n_cells}")
    if report.errors is not None:
        print(f"  L2 error  rho = {report.errors.rho:.4e}   u = {report.errors.u:.4e}")
    if report.entropy_deviation is not None:
        print(f"  max |S - S0| = {report.entropy_deviation:.4e}")
    print(f"  max mass drift = {report.max_mass_drift:.3e}")
    print("=" * 70 + "\n")
    return 0


def cmd_sweep(args) -> int:
    """Run a convergence sweep over the configured mesh list."""
    from app.runner import convergence_sweep

    _banner("CONVERGENCE SWEEP")
    config = load_config(args.config)
    if args.output:
        config = config.model_copy(update={"output_dir": Path(args.output)})
    n = len(config.sweep)
    print(f"\n  Case: {config.case}  (M={config.degree})   meshes: {n}   workers: {args.jobs}")
    for i, recipe in enumerate(config.sweep, 1):
        print(f"  [{i}/{n}] {recipe.label()}")

    data = convergence_sweep(config, n_jobs=args.jobs)

    print(f"\n  {'Mesh':<34}{'h':>11}{'L2 rho':>12}{'order':>8}{'L2 u':>12}{'order':>8}")
    print("  " + "-" * 85)
    for row in data["rows"]:
        ro = "" if row["rho_order"] is None else f"{row['rho_order']:.2f}"
        uo = "" if row["u_order"] is None else f"{row['u_order']:.2f}"
        print(f"  {row['mesh'][:33]:<34}{row['grid_size']:>11.3e}{row['rho_error']:>12.4e}{ro:>8}"
              f"{row['u_error']:>12.4e}{uo:>8}")
    print(f"\n  Output: {Path(config.output_dir).resolve()}")
    print("=" * 70 + "\n")
    return 0


def run_verify() -> dict[str, float]:
    """Analytic self-checks; returns name -> max residual."""
    kidder = kidder_identities()
    return {
        "manufactured residual": manufactured_residual(),
        "kidder entropy": kidder["entropy"],
        "kidder similarity": kidder["similarity"],
        "kidder h(t_f) - 1/2": kidder["h_final"],
    }


def cmd_verify(args) -> int:
    """Analytic self-checks of the exact solutions."""
    _banner("VERIFY")
    results = run_verify()
    failed = 0
    print(f"\n  {'Check':<28}{'residual':>14}{'tolerance':>12}  status")
    print("  " + "-" * 62)
    for name, value in results.items():
        ok = value <= VERIFY_TOLERANCES[name]
        failed += not ok
        print(f"  {name:<28}{value:>14.3e}{VERIFY_TOLERANCES[name]:>12.0e}  {'PASS' if ok else 'FAIL'}")
    print(f"\n  {len(results) - failed}/{len(results)} checks passed")
    print("=" * 70 + "\n")
    return 1 if failed else 0


def cmd_cases(args) -> int:
    """List the registered cases."""
    _banner("CASES")
    for name in case_names():
        print(f"  {name:<22}{', '.join(case_parameters(name))}")
    print()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="ALE-SBM: high-order direct ALE finite volume solver with shifted boundary corrections",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    subparsers = parser.add_subparsers(dest="command", help="Command")

    run_parser = subparsers.add_parser("run", help="Run one configured case")
    run_parser.add_argument("config", help="Path to the run configuration (.ini)")
    run_parser.add_argument("--output", help="Output directory (overrides [run] output_dir)")
    run_parser.set_defaults(func=cmd_run)

    sweep_parser = subparsers.add_parser("sweep", help="Convergence sweep over [sweep] meshes")
    sweep_parser.add_argument("config", help="Path to the sweep configuration (.ini)")
    sweep_parser.add_argument("--output", help="Output directory (overrides [run] output_dir)")
    sweep_parser.add_argument("--jobs", type=int, default=THREADS, help=f"Parallel runs (default {THREADS})")
    sweep_parser.set_defaults(func=cmd_sweep)

    verify_parser = subparsers.add_parser("verify", help="Analytic self-checks")
    verify_parser.set_defaults(func=cmd_verify)

    cases_parser = subparsers.add_parser("cases", help="List available cases")
    cases_parser.set_defaults(func=cmd_cases)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=LOG_LEVEL, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help()
        return 0
    try:
        return args.func(args)
    except SolverError as exc:
        print(f"\n  ERROR {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
