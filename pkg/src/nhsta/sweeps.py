"""Fidelity heatmaps over two pulse parameters.

Each grid point is an independent :func:`~nhsta.dynamics.run_experiment`; points
run in a process pool and are collected in grid order, so the output does not
depend on the number of workers. Axis values are given in the customary
``2 pi x f`` units and converted per parameter.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .dynamics import ExperimentSpec, IntegratorConfig, fidelity, run_experiment
from .errors import ConfigInvalid, NHSTAError
from .hamiltonians import DEFAULT_WINDOW, TWO_PI, PulseParams, build_preset
from .counterterm import KINDS

log = logging.getLogger(__name__)

# factor taking the quoted number to rad/ns (or rad^2/ns^2)
AXIS_UNITS = {
    "omega0": TWO_PI,
    "chirp_x": TWO_PI**2,
    "chirp_y": TWO_PI**2,
    "omega_l": TWO_PI,
    "gamma1": TWO_PI * 1e-3,
    "gamma2": TWO_PI * 1e-3,
}

PRESET_NAMES = ("gaussian", "rwa", "atomlight", "general")


@dataclass(frozen=True)
class AxisRange:
    lo: float
    hi: float
    count: int

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.count)


@dataclass(frozen=True)
class SweepSpec:
    """Two-parameter fidelity sweep.

    ``x_param`` and ``y_param`` name :class:`PulseParams` fields; ranges are in
    quoted units (GHz, GHz^2, MHz). ``design_preset`` selects the model the
    counterterm is built for and defaults to ``preset``.
    """

    x_param: str = "chirp_x"
    y_param: str = "chirp_y"
    x_range: AxisRange = AxisRange(0.25, 0.35, 21)
    y_range: AxisRange = AxisRange(0.0045, 0.0055, 21)
    fixed: PulseParams = field(default_factory=PulseParams.reference)
    preset: str = "gaussian"
    design_preset: str | None = None
    counterterm_kind: str = "exact"
    order: int = 0
    suppress_real_offdiag: bool = False
    check: bool = True
    psi0: tuple = (0j, 1 + 0j)
    target: tuple = (1 + 0j, 0j)
    window: tuple = DEFAULT_WINDOW
    cfg: IntegratorConfig = IntegratorConfig()
    theta1: float | None = None
    theta2: float | None = None

    def violations(self) -> list[str]:
        out = []
        for axis, name, rng in (("x", self.x_param, self.x_range), ("y", self.y_param, self.y_range)):
            if name not in AXIS_UNITS:
                out.append(f"{axis}_param {name!r} is not one of {sorted(AXIS_UNITS)}")
            if rng.count < 2:
                out.append(f"{axis} count must be at least 2, got {rng.count}")
            if not rng.lo < rng.hi:
                out.append(f"{axis} range needs lo < hi, got [{rng.lo}, {rng.hi}]")
        if self.x_param == self.y_param:
            out.append("x_param and y_param must differ")
        for label, name in (("preset", self.preset), ("design_preset", self.design_preset)):
            if name is not None and name not in PRESET_NAMES:
                out.append(f"{label} {name!r} is not one of {PRESET_NAMES}")
        if self.counterterm_kind not in KINDS:
            out.append(f"counterterm {self.counterterm_kind!r} is not one of {KINDS}")
        if not np.any(np.asarray(self.target)):
            out.append("target must be a nonzero vector")
        if not self.window[0] < self.window[1]:
            out.append("window needs t_start < t_end")
        return out

    def validate(self):
        bad = self.violations()
        if bad:
            raise ConfigInvalid(bad)

    def point_params(self, x, y) -> PulseParams:
        return replace(self.fixed, **{self.x_param: x * AXIS_UNITS[self.x_param],
                                      self.y_param: y * AXIS_UNITS[self.y_param]})

    def experiment(self, x, y) -> ExperimentSpec:
        pulse = self.point_params(x, y)
        model = build_model(self.preset, pulse, self.window, self.theta1, self.theta2)
        source = None
        if self.design_preset is not None and self.design_preset != self.preset:
            source = build_model(self.design_preset, pulse, self.window, self.theta1, self.theta2)
        return ExperimentSpec(model, self.counterterm_kind, counterterm_source=source,
                              order=self.order, suppress_real_offdiag=self.suppress_real_offdiag,
                              check=self.check, psi0=self.psi0, cfg=self.cfg,
                              track_fidelity=False)

    def snapshot(self) -> dict:
        """JSON-ready description of the sweep."""
        d = asdict(self)
        d["fixed"] = pulse_snapshot(self.fixed)
        d["psi0"] = [[complex(c).real, complex(c).imag] for c in self.psi0]
        d["target"] = [[complex(c).real, complex(c).imag] for c in self.target]
        d["window"] = list(self.window)
        cfg = d["cfg"]
        cfg["max_step"] = None if math.isinf(cfg["max_step"]) else cfg["max_step"]
        return d


def pulse_snapshot(p: PulseParams) -> dict:
    out = {}
    for k, v in asdict(p).items():
        if callable(v):
            out[k] = repr(v)
        elif isinstance(v, complex):
            out[k] = [v.real, v.imag]
        else:
            out[k] = v
    return out


def build_model(preset, pulse, window=DEFAULT_WINDOW, theta1=None, theta2=None):
    """Preset model, with ``general`` meaning the full Gaussian element functions
    differentiated numerically."""
    if preset == "general":
        return _general_gaussian(pulse, window)
    return build_preset(preset, pulse, theta1=theta1, theta2=theta2, window=window)


def _general_gaussian(pulse, window):
    from .hamiltonians import general_model, gaussian_chirped_model

    full = gaussian_chirped_model(pulse, window)
    fns = tuple((lambda t, i=i: full.evaluate(t)[i]) for i in range(4))
    return general_model(fns, label="general", window=window)


@dataclass
class FidelityGrid:
    """Final-state fidelities; ``fidelity[i, j]`` belongs to ``(x_values[i], y_values[j])``."""

    x_values: np.ndarray
    y_values: np.ndarray
    fidelity: np.ndarray
    meta: dict = field(default_factory=dict)
    errors: list = field(default_factory=list)

    @property
    def nan_points(self) -> list:
        idx = np.argwhere(np.isnan(self.fidelity))
        return [[int(i), int(j)] for i, j in idx]


def _evaluate_point(args):
    spec, x, y = args
    try:
        traj = run_experiment(spec.experiment(x, y))
        return fidelity(traj.final_state, spec.target), None
    except (NHSTAError, FloatingPointError, ValueError) as exc:
        return math.nan, f"{type(exc).__name__}: {exc}"


def run_sweep(spec: SweepSpec, workers: int = 1) -> FidelityGrid:
    """Evaluate every grid point; failures become NaN with a logged reason.

    Raises
    ------
    ConfigInvalid
        If the spec is inconsistent; raised before any point is run.
    """
    spec.validate()
    xs = spec.x_range.values()
    ys = spec.y_range.values()
    tasks = [(spec, float(x), float(y)) for x in xs for y in ys]
    if workers is None or workers <= 1:
        results = [_evaluate_point(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_evaluate_point, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    values = np.array([r[0] for r in results], dtype=float).reshape(len(xs), len(ys))
    errors = []
    for (_, x, y), (_, err) in zip(tasks, results):
        if err is not None:
            log.warning("sweep point (%r, %r) failed: %s", x, y, err)
            errors.append({"x": x, "y": y, "error": err})
    return FidelityGrid(xs, ys, values, meta=spec.snapshot(), errors=errors)


def _fmt(v) -> str:
    return "" if math.isnan(v) else repr(float(v))


def grid_csv(grid: FidelityGrid) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y", "fidelity"])
    for i, x in enumerate(grid.x_values):
        for j, y in enumerate(grid.y_values):
            w.writerow([_fmt(x), _fmt(y), _fmt(grid.fidelity[i, j])])
    return buf.getvalue()


def sidecar_path(path) -> Path:
    return Path(path).with_suffix(".json")


def emit_grid(grid: FidelityGrid, path) -> Path:
    """Write the long-format CSV and its JSON sidecar; returns the sidecar path."""
    path = Path(path)
    path.write_text(grid_csv(grid))
    side = {
        "shape": [len(grid.x_values), len(grid.y_values)],
        "nan_points": grid.nan_points,
        "errors": grid.errors,
        "meta": grid.meta,
    }
    sp = sidecar_path(path)
    sp.write_text(json.dumps(side, indent=2, sort_keys=True) + "\n")
    return sp


def load_grid(path) -> FidelityGrid:
    """Inverse of :func:`emit_grid`."""
    path = Path(path)
    side = json.loads(sidecar_path(path).read_text())
    nx, ny = side["shape"]
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))[1:]
    vals = np.array([[float(c) if c != "" else math.nan for c in row] for row in rows])
    xs = vals[::ny, 0].copy()
    ys = vals[:ny, 1].copy()
    fid = vals[:, 2].reshape(nx, ny)
    return FidelityGrid(xs, ys, fid, meta=side["meta"], errors=side["errors"])
