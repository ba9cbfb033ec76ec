"""Command-line entry point ``nhsta``.

Exit codes: 0 success, 1 configuration error, 2 physics failure (every sweep
point failed, or a single run could not be completed).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .adiabatic import adiabaticity_profile, imaginary_gap_profile
from .config import RunConfig, dump_config, load_config
from .counterterm import (PerturbationSplit, convergence_radius, exact_counterterm,
                          perturbative_counterterm, series_counterterm)
from .dynamics import ExperimentSpec, run_experiment
from .errors import ConfigError, NHSTAError
from .linalg import eigen_path
from .sweeps import emit_grid, pulse_snapshot, run_sweep

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_PHYSICS = 2

DEFAULT_SAMPLES = 601

log = logging.getLogger("nhsta")


def _fmt(v) -> str:
    v = float(v)
    return "" if math.isnan(v) else repr(v)


def _write_csv(path, header, rows):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _write_sidecar(path, payload):
    Path(path).with_suffix(".json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _times(cfg: RunConfig, samples):
    return np.linspace(cfg.t_start_ns, cfg.t_end_ns, samples)


def _base_payload(cfg: RunConfig, args):
    return {"config": dump_config(cfg), "pulse_rad_per_ns": pulse_snapshot(cfg.pulse()),
            "seed": args.seed}


def cmd_simulate(cfg: RunConfig, args) -> int:
    spec = ExperimentSpec(cfg.model(), cfg.counterterm, counterterm_source=cfg.design_model(),
                          order=cfg.series_order, suppress_real_offdiag=cfg.suppress_real_offdiag,
                          initial_branch=cfg.initial_branch or None, window=cfg.window,
                          cfg=cfg.integrator())
    traj = run_experiment(spec)
    rows = zip(traj.times, traj.states[:, 0].real, traj.states[:, 0].imag,
               traj.states[:, 1].real, traj.states[:, 1].imag, traj.p1, traj.p2,
               traj.raw_norm, traj.inst_fidelity)
    _write_csv(args.out, ["t_ns", "re_a", "im_a", "re_b", "im_b", "p1", "p2", "raw_norm",
                          "inst_fidelity"], rows)
    payload = _base_payload(cfg, args)
    payload.update(branch=traj.meta.get("branch"), n_evals=traj.n_evals,
                   final_p1=traj.final_p1)
    _write_sidecar(args.out, payload)
    print(f"final P1 = {traj.final_p1:.6f}, min eigenstate fidelity = {traj.inst_fidelity.min():.6f}")
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, args) -> int:
    grid = run_sweep(cfg.sweep_spec(), workers=args.workers)
    grid.meta["seed"] = args.seed
    emit_grid(grid, args.out)
    finite = grid.fidelity[~np.isnan(grid.fidelity)]
    if finite.size == 0:
        print("every sweep point failed", file=sys.stderr)
        return EXIT_PHYSICS
    print(f"{finite.size}/{grid.fidelity.size} points, fidelity in [{finite.min():.6f}, {finite.max():.6f}]")
    return EXIT_OK


def cmd_eigen(cfg: RunConfig, args) -> int:
    model = cfg.model()
    times = _times(cfg, args.samples)
    path = eigen_path([model.matrix(t) for t in times])
    rows = ((t, es.e_plus.real, es.e_plus.imag, es.e_minus.real, es.e_minus.imag,
             (es.e_plus - es.e_minus).imag) for t, es in zip(times, path))
    _write_csv(args.out, ["t_ns", "re_e_plus", "im_e_plus", "re_e_minus", "im_e_minus", "im_gap"], rows)
    _write_sidecar(args.out, _base_payload(cfg, args))
    return EXIT_OK


def cmd_check_adiabatic(cfg: RunConfig, args) -> int:
    model = cfg.model()
    times = _times(cfg, args.samples)
    metrics = adiabaticity_profile(model, times)
    gaps = imaginary_gap_profile(model, times)
    rows = ((m.t, m.condition_value, g, m.exp_weight) for m, g in zip(metrics, gaps))
    _write_csv(args.out, ["t_ns", "condition_value", "im_gap", "exp_weight"], rows)
    _write_sidecar(args.out, _base_payload(cfg, args))
    return EXIT_OK


def cmd_compare(cfg: RunConfig, args) -> int:
    model = cfg.model()
    split = PerturbationSplit.constant(model)
    n = cfg.series_order
    abs_j = abs(cfg.J)
    rows = []
    for t in _times(cfg, args.samples):
        exact = exact_counterterm(model, t)
        pert = perturbative_counterterm(split, model, t, check=False)
        series = series_counterterm(model, n, t, check=False)
        ne = np.linalg.norm(exact)
        rows.append((t, ne, np.linalg.norm(pert), np.linalg.norm(series),
                     np.linalg.norm(pert - exact) / ne, np.linalg.norm(series - exact) / ne,
                     convergence_radius(model, t), abs_j))
    _write_csv(args.out, ["t_ns", "norm_exact", "norm_pert", "norm_series_N", "rel_dev_pert",
                          "rel_dev_series", "radius", "abs_J"], rows)
    payload = _base_payload(cfg, args)
    payload["series_order"] = n
    _write_sidecar(args.out, payload)
    return EXIT_OK


COMMANDS = {
    "simulate": (cmd_simulate, "integrate one run and write its trajectory"),
    "sweep": (cmd_sweep, "final-state fidelity over a two-parameter grid"),
    "eigen": (cmd_eigen, "instantaneous eigenvalues along the window"),
    "check-adiabatic": (cmd_check_adiabatic, "adiabaticity measure and imaginary gap"),
    "compare-counterterms": (cmd_compare, "exact vs perturbative vs series counterterms"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, type=Path, help="INI configuration file")
    common.add_argument("--out", required=True, type=Path, help="output CSV (JSON sidecar alongside)")
    common.add_argument("--workers", type=int, default=1, help="worker processes for sweeps")
    common.add_argument("--seed", type=int, default=0, help="recorded in outputs; physics is deterministic")
    common.add_argument("--samples", type=int, default=DEFAULT_SAMPLES,
                        help="time samples for eigen/check-adiabatic/compare-counterterms")
    common.add_argument("-v", "--verbose", action="store_true")
    parser = argparse.ArgumentParser(prog="nhsta", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.samples < 2:
        print("configuration error: --samples must be at least 2", file=sys.stderr)
        return EXIT_CONFIG
    handler = COMMANDS[args.command][0]
    try:
        return handler(cfg, args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NHSTAError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return EXIT_PHYSICS


if __name__ == "__main__":
    sys.exit(main())
