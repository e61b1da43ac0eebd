"""YAML run configuration: parsing, validation and serialisation.

The schema is documented in ``docs/config_schema.md``.  Complex entries may be
written as a plain number, a Python-style string such as ``"0.3-1e-3j"``, or an
``[re, im]`` pair; serialisation always uses the pair form.
"""

import os
from dataclasses import dataclass
from typing import Optional

import numpy as np
import yaml

from ..coherence import LocalOscillator, PulseSpec
from ..model import ExcitedState, MolecularModel, validate_model

SCHEMA_VERSION = 1
MODES = ("lin-cir", "cir-lin", "heterodyne")
REFERENCES = ("lin-cir", "cir-lin")
DEFAULT_SAMPLES = 10 ** 6
MIN_SAMPLES = 1000
_MISSING = object()


class ParseError(ValueError):
    """Malformed configuration; carries the offending field and line if known."""

    def __init__(self, message, field=None, line=None, source=None):
        self.message = message
        self.field = field
        self.line = line
        self.source = source
        where = source or "<config>"
        if line is not None:
            where += f":{line}"
        if field:
            where += f": field '{field}'"
        super().__init__(f"{where}: {message}")


class ConfigValidationError(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.violations))


class _Locator:
    """Maps dotted field paths to line numbers of a composed YAML document."""

    def __init__(self, node, source=None):
        self.node = node
        self.source = source

    def line(self, path):
        node, best = self.node, None
        if node is not None:
            best = node.start_mark.line + 1
        for part in path:
            child = None
            if isinstance(node, yaml.MappingNode):
                for k, v in node.value:
                    if k.value == str(part):
                        child, best = v, k.start_mark.line + 1
                        break
            elif isinstance(node, yaml.SequenceNode) and isinstance(part, int):
                if 0 <= part < len(node.value):
                    child = node.value[part]
                    best = child.start_mark.line + 1
            if child is None:
                break
            node = child
        return best

    def error(self, path, message):
        name = ".".join(str(p) for p in path)
        return ParseError(message, field=name or None, line=self.line(path), source=self.source)


class _Reader:
    def __init__(self, data, loc, path=()):
        self.data = data
        self.loc = loc
        self.path = path

    def sub(self, key, required=True):
        value = self.get(key, _MISSING if required else None)
        if value is None:
            return None
        if not isinstance(value, dict):
            raise self.loc.error(self.path + (key,), "expected a mapping")
        return _Reader(value, self.loc, self.path + (key,))

    def get(self, key, default=_MISSING):
        if not isinstance(self.data, dict):
            raise self.loc.error(self.path, "expected a mapping")
        if key not in self.data:
            if default is _MISSING:
                raise self.loc.error(self.path + (key,), "required field is missing")
            return default
        return self.data[key]

    def number(self, key, default=_MISSING):
        value = self.get(key, default)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            if isinstance(value, str):
                try:
                    return float(value)
                except ValueError:
                    pass
            raise self.loc.error(self.path + (key,), f"expected a real number, got {value!r}")
        return float(value)

    def integer(self, key, default=_MISSING):
        value = self.get(key, default)
        if value is None:
            return None
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        if isinstance(value, bool) or not isinstance(value, int):
            raise self.loc.error(self.path + (key,), f"expected an integer, got {value!r}")
        return value

    def string(self, key, default=_MISSING):
        value = self.get(key, default)
        if not isinstance(value, str):
            raise self.loc.error(self.path + (key,), f"expected a string, got {value!r}")
        return value

    def boolean(self, key, default=_MISSING):
        value = self.get(key, default)
        if not isinstance(value, bool):
            raise self.loc.error(self.path + (key,), f"expected true/false, got {value!r}")
        return value

    def complex_(self, key, default=_MISSING):
        return _to_complex(self.get(key, default), self.loc, self.path + (key,))

    def array(self, key, shape, default=_MISSING):
        value = self.get(key, default)
        if value is None:
            return None
        return _to_array(value, shape, self.loc, self.path + (key,))


def _to_complex(value, loc, path):
    if isinstance(value, bool):
        raise loc.error(path, f"expected a complex number, got {value!r}")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, str):
        try:
            return complex(value.replace(" ", ""))
        except ValueError:
            raise loc.error(path, f"cannot read {value!r} as a complex number") from None
    if (isinstance(value, list) and len(value) == 2
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)):
        return complex(value[0], value[1])
    raise loc.error(path, f"expected a complex number, got {value!r}")


def _to_array(value, shape, loc, path):
    if not isinstance(value, list) or len(value) != shape[0]:
        raise loc.error(path, f"expected a list of length {shape[0]}")
    if len(shape) == 1:
        return np.array([_to_complex(v, loc, path + (i,)) for i, v in enumerate(value)])
    return np.array([_to_array(v, shape[1:], loc, path + (i,)) for i, v in enumerate(value)])


def _complex_out(z):
    z = complex(z)
    return [float(z.real), float(z.imag)]


def _array_out(a):
    a = np.asarray(a)
    if a.ndim == 1:
        return [_complex_out(z) for z in a]
    return [_array_out(row) for row in a]


@dataclass(eq=False)
class RunConfig:
    model: MolecularModel
    pump: PulseSpec
    stokes: PulseSpec
    probe: PulseSpec
    lo: Optional[LocalOscillator] = None
    mode: str = "lin-cir"
    reference: str = "lin-cir"
    phi: float = 0.0
    N: float = 1.0
    grid_start: float = 0.0
    grid_stop: float = 1.0
    grid_points: int = 2
    rho21_0: Optional[complex] = None
    rho11: float = 1.0
    mc_enabled: bool = False
    n_samples: int = DEFAULT_SAMPLES
    seed: Optional[int] = None
    output: Optional[str] = None
    real_wavefunctions: bool = False
    schema_version: int = SCHEMA_VERSION

    @property
    def grid(self):
        return np.linspace(self.grid_start, self.grid_stop, self.grid_points)

    def replace(self, **changes):
        kw = {k: getattr(self, k) for k in self.__dataclass_fields__}
        kw.update(changes)
        return RunConfig(**kw)

    def to_dict(self):
        m = self.model
        states = []
        for s in m.excited_states:
            states.append({
                "omega_31": s.omega_31, "gamma_3": s.gamma_3,
                "mu_13": _array_out(s.mu_13), "mu_32": _array_out(s.mu_32),
                "m_13": _array_out(s.m_13), "m_32": _array_out(s.m_32),
                "q_13": _array_out(s.q_13), "q_32": _array_out(s.q_32),
                "mu_31": _array_out(s.mu_31), "mu_23": _array_out(s.mu_23),
            })

        def pulse(p):
            return {"omega_0": float(p.omega_0), "sigma": float(p.sigma),
                    "amplitude": _complex_out(p.amplitude), "tau": float(p.tau),
                    "polarization": _array_out(p.polarization)}

        out = {
            "schema_version": self.schema_version,
            "units": {"hbar": m.hbar, "c": m.c},
            "model": {"omega_v": m.omega_v, "gamma": m.gamma,
                      "real_wavefunctions": self.real_wavefunctions,
                      "excited_states": states},
            "pulses": {"pump": pulse(self.pump), "stokes": pulse(self.stokes),
                       "probe": pulse(self.probe)},
            "coherence": {"rho11": float(self.rho11)},
            "detection": {"mode": self.mode, "reference": self.reference,
                          "phi": float(self.phi), "N": float(self.N)},
            "grid": {"start": float(self.grid_start), "stop": float(self.grid_stop),
                     "points": int(self.grid_points)},
            "mc": {"enabled": self.mc_enabled, "n_samples": int(self.n_samples),
                   "seed": self.seed},
        }
        if self.lo is not None:
            out["pulses"]["lo"] = {"amplitude": float(self.lo.amplitude),
                                   "phase": float(self.lo.phase)}
        if self.rho21_0 is not None:
            out["coherence"]["rho21_0"] = _complex_out(self.rho21_0)
        if self.output is not None:
            out["output"] = {"path": self.output}
        return out

    def __eq__(self, other):
        if not isinstance(other, RunConfig):
            return NotImplemented
        return self.to_dict() == other.to_dict()


def _read_state(r):
    omega_31 = r.number("omega_31")
    gamma_3 = r.number("gamma_3")
    mu_13 = r.array("mu_13", (3,))
    m_13 = r.array("m_13", (3,), None)
    q_13 = r.array("q_13", (3, 3), None)
    if "mu_32" in r.data:
        if "overlap" in r.data:
            raise r.loc.error(r.path + ("overlap",), "give either mu_32 or overlap, not both")
        zeros3, zeros33 = np.zeros(3), np.zeros((3, 3))
        return ExcitedState(
            omega_31, gamma_3, mu_13, r.array("mu_32", (3,)),
            zeros3 if m_13 is None else m_13, r.array("m_32", (3,), zeros3.tolist()),
            zeros33 if q_13 is None else q_13, r.array("q_32", (3, 3), zeros33.tolist()),
            r.array("mu_31", (3,), None), r.array("mu_23", (3,), None))
    overlap = r.complex_("overlap", 1.0)
    return ExcitedState.condon(omega_31, gamma_3, mu_13, m_13, q_13, overlap)


def _read_pulse(r):
    pol = r.array("polarization", (3,), [1.0, 0.0, 0.0])
    try:
        return PulseSpec(r.number("omega_0"), r.number("sigma"), r.complex_("amplitude", 1.0),
                         r.number("tau", 0.0), tuple(pol))
    except ValueError as exc:
        if isinstance(exc, ParseError):
            raise
        raise r.loc.error(r.path, str(exc)) from None


def _load_model(top, loc, base_dir):
    r = top.sub("model")
    if "file" in r.data:
        path = r.string("file")
        if not os.path.isabs(path):
            path = os.path.join(base_dir, path)
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise r.loc.error(r.path + ("file",), f"cannot read model file: {exc}") from None
        data, mloc = _load_yaml(text, path)
        return _Reader(data, mloc)
    return r


def _read_model(r, units):
    states_raw = r.get("excited_states")
    if not isinstance(states_raw, list):
        raise r.loc.error(r.path + ("excited_states",), "expected a list of excited states")
    states = []
    for i, s in enumerate(states_raw):
        path = r.path + ("excited_states", i)
        if not isinstance(s, dict):
            raise r.loc.error(path, "expected a mapping")
        states.append(_read_state(_Reader(s, r.loc, path)))
    hbar = units.number("hbar", 1.0) if units else 1.0
    c = units.number("c", 1.0) if units else 1.0
    model = MolecularModel(r.number("omega_v"), r.number("gamma"), states, hbar, c)
    return model, r.boolean("real_wavefunctions", False)


def _load_yaml(text, source):
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        problem = getattr(exc, "problem", None) or str(exc)
        raise ParseError(f"YAML syntax error: {problem}", line=line, source=source) from None
    loc = _Locator(node, source)
    if not isinstance(data, dict):
        raise ParseError("top level must be a mapping", line=1, source=source)
    return data, loc


def parse_config_text(text, source=None, base_dir="."):
    """Parse and validate configuration text; see :func:`parse_config`."""
    data, loc = _load_yaml(text, source)
    top = _Reader(data, loc)

    version = top.integer("schema_version")
    if version != SCHEMA_VERSION:
        raise loc.error(("schema_version",),
                        f"unsupported schema version {version} (expected {SCHEMA_VERSION})")
    units = top.sub("units", required=False)
    model, real_wf = _read_model(_load_model(top, loc, base_dir), units)

    pulses = top.sub("pulses")
    pump = _read_pulse(pulses.sub("pump"))
    stokes = _read_pulse(pulses.sub("stokes"))
    probe = _read_pulse(pulses.sub("probe"))
    lo = None
    lo_r = pulses.sub("lo", required=False)
    if lo_r is not None:
        amp = lo_r.number("amplitude")
        if amp < 0:
            raise loc.error(lo_r.path + ("amplitude",), "must be non-negative")
        lo = LocalOscillator(amp, lo_r.number("phase", 0.0))

    coh = top.sub("coherence", required=False)
    rho21 = coh.complex_("rho21_0") if coh is not None and "rho21_0" in coh.data else None
    rho11 = coh.number("rho11", 1.0) if coh is not None else 1.0

    det = top.sub("detection")
    grid = top.sub("grid")
    mc = top.sub("mc", required=False)
    out = top.sub("output", required=False)

    cfg = RunConfig(
        model=model, pump=pump, stokes=stokes, probe=probe, lo=lo,
        mode=det.string("mode"), reference=det.string("reference", "lin-cir"),
        phi=det.number("phi", 0.0), N=det.number("N", 1.0),
        grid_start=grid.number("start"), grid_stop=grid.number("stop"),
        grid_points=grid.integer("points"),
        rho21_0=rho21, rho11=rho11,
        mc_enabled=mc.boolean("enabled", False) if mc else False,
        n_samples=mc.integer("n_samples", DEFAULT_SAMPLES) if mc else DEFAULT_SAMPLES,
        seed=mc.integer("seed", None) if mc else None,
        output=out.string("path", None) if out else None,
        real_wavefunctions=real_wf,
        schema_version=version,
    )
    validate_config(cfg)
    return cfg


def parse_config(path):
    """Read a YAML run configuration from ``path``.

    Raises :class:`ParseError` for malformed input and
    :class:`ConfigValidationError` listing every violated invariant.
    """
    path = os.fspath(path)
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read configuration: {exc}", source=path) from None
    return parse_config_text(text, source=path, base_dir=os.path.dirname(os.path.abspath(path)))


def validate_config(cfg):
    problems = []
    if cfg.mode not in MODES:
        problems.append(f"detection.mode must be one of {MODES} (got {cfg.mode!r})")
    if cfg.reference not in REFERENCES:
        problems.append(f"detection.reference must be one of {REFERENCES}")
    if not cfg.N > 0:
        problems.append(f"detection.N must be positive (got {cfg.N})")
    if cfg.grid_points < 2:
        problems.append(f"grid.points must be at least 2 (got {cfg.grid_points})")
    if not cfg.grid_stop > cfg.grid_start:
        problems.append("grid must be increasing (stop > start)")
    if cfg.mc_enabled and cfg.seed is None:
        problems.append("mc.seed is required when Monte Carlo is enabled")
    if cfg.seed is not None and not 0 <= cfg.seed < 2 ** 64:
        problems.append("mc.seed must be an unsigned 64-bit integer")
    if cfg.n_samples < MIN_SAMPLES:
        problems.append(f"mc.n_samples must be at least {MIN_SAMPLES}")
    if cfg.mode == "heterodyne" and (cfg.lo is None or not cfg.lo.amplitude > 0):
        problems.append("heterodyne mode needs pulses.lo with a positive amplitude")
    if not cfg.rho11 > 0:
        problems.append("coherence.rho11 must be positive")
    report = validate_model(cfg.model, real_wavefunctions=cfg.real_wavefunctions)
    problems.extend(f"model: {v}" for v in report.violations)
    if problems:
        raise ConfigValidationError(problems)
    return cfg


def serialize_config(cfg):
    """YAML text that parses back to a configuration equal to ``cfg``."""
    return yaml.safe_dump(cfg.to_dict(), sort_keys=False, default_flow_style=None)
