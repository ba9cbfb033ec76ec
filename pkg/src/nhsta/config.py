"""INI run configuration.

Frequencies are written as the customary quoted numbers (``omega0_ghz = 0.01``
means 2 pi x 0.01 GHz) and converted to rad/ns when a model is built. ``J`` is
read directly as an angular frequency in rad/ns.

Sections and keys::

    [pulse]      omega0_ghz* x_ghz2* y_ghz2* omegaL_ghz gamma1_mhz gamma2_mhz J_re_ghz J_im_ghz
    [model]      preset theta1 theta2 counterterm design_preset series_order
                 suppress_real_offdiag initial_branch
    [window]     t_start_ns t_end_ns
    [integrator] rel_tol abs_tol dense_output_every_ns method
    [sweep]      x_param y_param x_lo x_hi x_count y_lo y_hi y_count target

Keys marked * are required.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, fields
from pathlib import Path

from .counterterm import KINDS
from .dynamics import IntegratorConfig
from .errors import ParseError, ValidationError
from .hamiltonians import PulseParams
from .sweeps import AXIS_UNITS, PRESET_NAMES, AxisRange, SweepSpec, build_model

TARGETS = {"ground": (1 + 0j, 0j), "excited": (0j, 1 + 0j)}


# key -> (type, default); default None marks a required key
SCHEMA = {
    "pulse": {
        "omega0_ghz": (float, None),
        "x_ghz2": (float, None),
        "y_ghz2": (float, None),
        "omegaL_ghz": (float, 0.0),
        "gamma1_mhz": (float, 0.0),
        "gamma2_mhz": (float, 0.0),
        "J_re_ghz": (float, 0.0),
        "J_im_ghz": (float, 0.0),
    },
    "model": {
        "preset": (str, "gaussian"),
        "theta1": (float, 2.0 + 0.5 * math.pi),
        "theta2": (float, 2.0 + 0.5 * math.pi),
        "counterterm": (str, "exact"),
        "design_preset": (str, ""),
        "series_order": (int, 10),
        "suppress_real_offdiag": (bool, False),
        "initial_branch": (str, ""),
    },
    "window": {
        "t_start_ns": (float, -3.0),
        "t_end_ns": (float, 3.0),
    },
    "integrator": {
        "rel_tol": (float, 1e-10),
        "abs_tol": (float, 1e-12),
        "dense_output_every_ns": (float, 0.002),
        "method": (str, "RK45"),
    },
    "sweep": {
        "x_param": (str, "chirp_x"),
        "y_param": (str, "chirp_y"),
        "x_lo": (float, 0.25),
        "x_hi": (float, 0.35),
        "x_count": (int, 21),
        "y_lo": (float, 0.0045),
        "y_hi": (float, 0.0055),
        "y_count": (int, 21),
        "target": (str, "ground"),
    },
}

_BOOLS = {"true": True, "yes": True, "on": True, "1": True,
          "false": False, "no": False, "off": False, "0": False}


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration in quoted units (converted on use)."""

    omega0_ghz: float
    x_ghz2: float
    y_ghz2: float
    omegaL_ghz: float = 0.0
    gamma1_mhz: float = 0.0
    gamma2_mhz: float = 0.0
    J_re_ghz: float = 0.0
    J_im_ghz: float = 0.0
    preset: str = "gaussian"
    theta1: float = 2.0 + 0.5 * math.pi
    theta2: float = 2.0 + 0.5 * math.pi
    counterterm: str = "exact"
    design_preset: str = ""
    series_order: int = 10
    suppress_real_offdiag: bool = False
    initial_branch: str = ""
    t_start_ns: float = -3.0
    t_end_ns: float = 3.0
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    dense_output_every_ns: float = 0.002
    method: str = "RK45"
    x_param: str = "chirp_x"
    y_param: str = "chirp_y"
    x_lo: float = 0.25
    x_hi: float = 0.35
    x_count: int = 21
    y_lo: float = 0.0045
    y_hi: float = 0.0055
    y_count: int = 21
    target: str = "ground"

    @property
    def J(self) -> complex:
        return complex(self.J_re_ghz, self.J_im_ghz)

    @property
    def window(self) -> tuple:
        return (self.t_start_ns, self.t_end_ns)

    def pulse(self) -> PulseParams:
        return PulseParams.from_quoted_units(self.omega0_ghz, self.x_ghz2, self.y_ghz2,
                                            self.omegaL_ghz, self.gamma1_mhz, self.gamma2_mhz,
                                            J=self.J)

    def integrator(self) -> IntegratorConfig:
        return IntegratorConfig(rel_tol=self.rel_tol, abs_tol=self.abs_tol,
                                dense_output_every=self.dense_output_every_ns, method=self.method)

    def model(self, preset=None):
        return build_model(preset or self.preset, self.pulse(), self.window, self.theta1, self.theta2)

    def design_model(self):
        if self.design_preset and self.design_preset != self.preset:
            return self.model(self.design_preset)
        return None

    def sweep_spec(self) -> SweepSpec:
        return SweepSpec(
            x_param=self.x_param, y_param=self.y_param,
            x_range=AxisRange(self.x_lo, self.x_hi, self.x_count),
            y_range=AxisRange(self.y_lo, self.y_hi, self.y_count),
            fixed=self.pulse(), preset=self.preset,
            design_preset=self.design_preset or None,
            counterterm_kind=self.counterterm, order=self.series_order,
            suppress_real_offdiag=self.suppress_real_offdiag,
            target=TARGETS[self.target], window=self.window, cfg=self.integrator(),
            theta1=self.theta1, theta2=self.theta2,
        )


def _key_line(text, section, key):
    """1-based line of ``key`` inside ``[section]``, or None."""
    current = None
    pat = re.compile(r"^\s*" + re.escape(key) + r"\s*[=:]")
    for n, line in enumerate(text.splitlines(), start=1):
        m = re.match(r"^\s*\[([^\]]+)\]", line)
        if m:
            current = m.group(1).strip()
        elif current == section and pat.match(line):
            return n
    return None


def _convert(kind, raw, section, key, text):
    raw = raw.strip()
    try:
        if kind is bool:
            return _BOOLS[raw.lower()]
        if kind is int:
            return int(raw)
        if kind is float:
            value = float(raw)
            if not math.isfinite(value):
                raise ValueError("not finite")
            return value
        return raw
    except (KeyError, ValueError):
        raise ParseError(f"cannot read {raw!r} as {kind.__name__}",
                         line=_key_line(text, section, key), key=f"{section}.{key}") from None


def _parser():
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    cp.optionxform = str
    return cp


def parse_config(text: str, source="<string>") -> RunConfig:
    """Parse and validate INI text.

    Raises
    ------
    ParseError
        Malformed syntax or an unreadable value (carries line and key).
    ValidationError
        Every missing/unknown key and out-of-range value, collected together.
    """
    cp = _parser()
    try:
        cp.read_string(text, source=str(source))
    except configparser.MissingSectionHeaderError as exc:
        raise ParseError("missing section header", line=exc.lineno) from None
    except configparser.DuplicateOptionError as exc:
        raise ParseError(f"duplicate key in [{exc.section}]", line=exc.lineno,
                         key=f"{exc.section}.{exc.option}") from None
    except configparser.DuplicateSectionError as exc:
        raise ParseError(f"duplicate section [{exc.section}]", line=exc.lineno) from None
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else None
        raise ParseError("malformed line", line=lineno) from None

    violations = []
    values = {}
    for section in cp.sections():
        if section not in SCHEMA:
            violations.append(f"unknown section [{section}]")
            continue
        for key in cp[section]:
            if key not in SCHEMA[section]:
                violations.append(f"unknown key {section}.{key}")
    for section, keys in SCHEMA.items():
        for key, (kind, default) in keys.items():
            if cp.has_option(section, key):
                values[key] = _convert(kind, cp[section][key], section, key, text)
            elif default is None:
                violations.append(f"missing required key {section}.{key}")
            else:
                values[key] = default
    if violations:
        raise ValidationError(violations)
    cfg = RunConfig(**values)
    violations = validate(cfg)
    if violations:
        raise ValidationError(violations)
    return cfg


def validate(cfg: RunConfig) -> list[str]:
    out = []
    if cfg.x_ghz2 <= 0:
        out.append("pulse.x_ghz2 must be positive")
    for key in ("omega0_ghz", "gamma1_mhz", "gamma2_mhz"):
        if getattr(cfg, key) < 0:
            out.append(f"pulse.{key} must be non-negative")
    if cfg.preset not in PRESET_NAMES:
        out.append(f"model.preset {cfg.preset!r} is not one of {PRESET_NAMES}")
    if cfg.design_preset and cfg.design_preset not in PRESET_NAMES:
        out.append(f"model.design_preset {cfg.design_preset!r} is not one of {PRESET_NAMES}")
    if cfg.counterterm not in KINDS:
        out.append(f"model.counterterm {cfg.counterterm!r} is not one of {KINDS}")
    if cfg.series_order < 0:
        out.append("model.series_order must be non-negative")
    if cfg.initial_branch not in ("", "+", "-"):
        out.append("model.initial_branch must be '+', '-' or empty")
    if not cfg.t_start_ns < cfg.t_end_ns:
        out.append("window.t_start_ns must be below window.t_end_ns")
    for key in ("rel_tol", "abs_tol", "dense_output_every_ns"):
        if getattr(cfg, key) <= 0:
            out.append(f"integrator.{key} must be positive")
    if cfg.method not in ("RK45", "DOP853", "RK23"):
        out.append(f"integrator.method {cfg.method!r} is not an explicit Runge-Kutta method")
    for axis in ("x", "y"):
        name = getattr(cfg, f"{axis}_param")
        if name not in AXIS_UNITS:
            out.append(f"sweep.{axis}_param {name!r} is not one of {sorted(AXIS_UNITS)}")
        if getattr(cfg, f"{axis}_count") < 2:
            out.append(f"sweep.{axis}_count must be at least 2")
        if not getattr(cfg, f"{axis}_lo") < getattr(cfg, f"{axis}_hi"):
            out.append(f"sweep.{axis}_lo must be below sweep.{axis}_hi")
    if cfg.x_param == cfg.y_param:
        out.append("sweep.x_param and sweep.y_param must differ")
    if cfg.target not in TARGETS:
        out.append(f"sweep.target must be one of {sorted(TARGETS)}")
    return out


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text, source=path)


def _format(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_config(cfg: RunConfig) -> str:
    """Canonical INI text; ``parse_config(dump_config(c)) == c``."""
    data = {f.name: getattr(cfg, f.name) for f in fields(cfg)}
    lines = []
    for section, keys in SCHEMA.items():
        lines.append(f"[{section}]")
        lines.extend(f"{key} = {_format(data[key])}" for key in keys)
        lines.append("")
    return "\n".join(lines)


def save_config(cfg: RunConfig, path):
    Path(path).write_text(dump_config(cfg))
