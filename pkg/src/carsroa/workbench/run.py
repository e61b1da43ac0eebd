"""Spectrum, heterodyne and verification runs driven by a :class:`RunConfig`."""

import hashlib
import io
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Optional

import numpy as np

from .. import __version__
from .. import averaging
from ..coherence import coherence_dynamics_freq, coherence_dynamics_time, lineshape_F, prepare_coherence
from ..detection import cid, difference_and_sum, enhancement_ratio, phase_cycle
from ..model import CoherenceState
from ..scattering import (antistokes_circular_components,
                          antistokes_linear_components_circular_input,
                          pipeline_cir_lin, pipeline_lin_cir)
from ..tensors import ComplexTensors, build_tensors, compute_invariants, reduce_to_real
from .config import serialize_config

SIGMA_LIMIT = 3.0
MC_REL_LIMIT = 1e-2


def config_hash(cfg):
    """Short digest of the physics settings; the output path is excluded."""
    text = serialize_config(cfg.replace(output=None))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


@dataclass
class Prepared:
    """Everything a run derives from the configuration before detection."""

    rho21_0: complex
    props: object
    invariants: object
    grid: np.ndarray
    F: np.ndarray
    omega_l: float
    c: float


def prepare(cfg):
    model = cfg.model
    rho = cfg.rho21_0
    if rho is None:
        rho = prepare_coherence(cfg.pump, cfg.stokes, model)
    omega_l = cfg.probe.omega_0
    t = build_tensors(model, omega_l)
    props = reduce_to_real(t.alpha, t.G, t.A)
    grid = cfg.grid
    F = lineshape_F(grid, cfg.probe.tau, cfg.probe, model.gamma, rho, model.omega_v)
    return Prepared(complex(rho), props, compute_invariants(props, omega_l), grid, F,
                    omega_l, model.c)


def _fmt(x):
    return "%.15e" % x


def _metadata_lines(cfg, extra, timestamp):
    lines = [f"carsroa {__version__}",
             f"config_hash: {config_hash(cfg)}",
             f"seed: {cfg.seed if cfg.seed is not None else 'none'}",
             f"N: {_fmt(cfg.N)}",
             "units: arbitrary units"]
    lines += [f"{k}: {v}" for k, v in extra.items()]
    if timestamp:
        lines.append("timestamp: " + datetime.now(timezone.utc).isoformat(timespec="seconds"))
    return lines


def format_csv(columns, comments=()):
    """CSV text with ``#`` comment lines, a header row and ``%.15e`` values."""
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    names = list(columns)
    buf.write(",".join(names) + "\n")
    arrays = [np.asarray(columns[n], dtype=float) for n in names]
    for row in zip(*arrays):
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def write_text(path, text):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _spectrum_mode(cfg):
    return cfg.reference if cfg.mode == "heterodyne" else cfg.mode


def run_spectrum(cfg, out=None, timestamp=True, prepared=None):
    """LO-free R/L spectrum with difference, sum and CID; writes CSV if a path
    is given (``out`` or the configured output)."""
    p = prepared or prepare(cfg)
    mode = _spectrum_mode(cfg)
    spec = difference_and_sum(mode, p.invariants, cfg.N, p.grid, p.F, p.omega_l, c=p.c,
                              metadata={"config_hash": config_hash(cfg), "seed": cfg.seed})
    delta = cid(spec)
    columns = {"omega_as": spec.omega_as_grid, "I_R": spec["I_R"], "I_L": spec["I_L"],
               "diff": spec["diff"], "sum": spec["sum"], "cid": delta}
    if cfg.mc_enabled:
        est = averaging.mc_spectrum(p.props, mode, p.omega_l, p.grid, p.F, cfg.N,
                                    cfg.n_samples, cfg.seed, c=p.c)
        for j, name in enumerate(("I_R", "I_L", "diff")):
            columns[f"mc_{name}"] = est.mean[:, j]
            columns[f"mc_{name}_se"] = est.std_error[:, j]
        spec.metadata["mc"] = est
    path = out or cfg.output
    extra = {"mode": mode, "rho21_0": repr(p.rho21_0)}
    if cfg.mc_enabled:
        extra["n_samples"] = cfg.n_samples
    if path:
        write_text(path, format_csv(columns, _metadata_lines(cfg, extra, timestamp)))
    return spec


def run_heterodyne(cfg, out=None, timestamp=True, prepared=None, phi=None):
    """Phase-cycled heterodyne signals at ``phi`` (default: the configured phase)."""
    if cfg.lo is None:
        raise ValueError("heterodyne run needs a local oscillator")
    p = prepared or prepare(cfg)
    phi = cfg.phi if phi is None else phi
    res = phase_cycle(p.invariants, cfg.N, p.grid, p.F, cfg.lo.amplitude, phi, p.omega_l,
                      c=p.c, mode=cfg.reference)
    path = out or cfg.output
    if path:
        extra = {"mode": f"heterodyne ({cfg.reference})", "phi": _fmt(phi),
                 "lo_amplitude": _fmt(cfg.lo.amplitude), "rho21_0": repr(p.rho21_0),
                 "ratio_estimate": _fmt(res.ratio_estimate)}
        columns = {"omega_as": res.omega_as_grid, "diff_cycled": res.diff_cycled,
                   "sum_cycled": res.sum_cycled, "ratio": res.ratio}
        write_text(path, format_csv(columns, _metadata_lines(cfg, extra, timestamp)))
    return res


def run_enhancement(cfg):
    rho = cfg.rho21_0
    if rho is None:
        rho = prepare_coherence(cfg.pump, cfg.stokes, cfg.model)
    state = CoherenceState(complex(rho), rho11=cfg.rho11)
    return rho, enhancement_ratio(cfg.N, state)


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    tolerance: float
    std_error: Optional[float] = None
    n_samples: Optional[int] = None
    detail: str = ""

    def line(self):
        s = (f"{'PASS' if self.passed else 'FAIL'} {self.name}: value={self.value:.6g} "
             f"tolerance={self.tolerance:.3g}")
        if self.std_error is not None:
            s += f" std_error={self.std_error:.3g}"
        if self.n_samples is not None:
            s += f" n={self.n_samples}"
        if self.detail:
            s += f" ({self.detail})"
        return s


@dataclass
class VerificationReport:
    checks: list = field(default_factory=list)

    @property
    def ok(self):
        return all(c.passed for c in self.checks)

    def text(self):
        lines = [c.line() for c in self.checks]
        lines.append(f"{sum(c.passed for c in self.checks)}/{len(self.checks)} checks passed")
        return "\n".join(lines) + "\n"


def _mc_check(name, est, expected, n):
    """3-sigma and 1 % agreement on both channels, 3-sigma on the difference."""
    mean, se = est.mean, est.std_error
    z = np.abs(mean - expected) / np.where(se > 0, se, np.inf)
    z = np.where((se == 0) & (mean != expected), np.inf, z)
    rel = np.abs(mean[:2] - expected[:2]) / np.abs(expected[:2])
    passed = bool(np.all(z <= SIGMA_LIMIT) and np.all(rel < MC_REL_LIMIT))
    return CheckResult(name, passed, float(np.max(z)), SIGMA_LIMIT, float(np.max(se)), n,
                       f"max relative deviation {np.max(rel):.2e}, diff z={z[2]:.2f}")


def run_verify(cfg, analytic_lin_cir=None, analytic_cir_lin=None, coherence=True):
    """Run the oracle suite for the configured model.

    The analytic intensity functions can be swapped for alternatives, which is
    how the suite is checked to catch a wrong formula.
    """
    if cfg.seed is None:
        raise ValueError("verification needs a seed for its Monte Carlo checks")
    lin_cir = analytic_lin_cir or averaging.analytic_lin_cir
    cir_lin = analytic_cir_lin or averaging.analytic_cir_lin
    p = prepare(cfg)
    report = VerificationReport()
    n = cfg.n_samples
    i_pk = int(np.argmax(np.abs(p.F)))
    w_pk, F_pk = p.grid[i_pk], p.F[i_pk]
    ratio = w_pk / p.omega_l

    for k, (mode, analytic, signal_fn) in enumerate(
            (("lin_cir", lin_cir, averaging.lin_cir_signal),
             ("cir_lin", cir_lin, averaging.cir_lin_signal))):
        sig = signal_fn(p.props, F_pk, cfg.N, p.omega_l, w_pk, p.c)
        est = averaging.mc_average_intensity(sig, n, cfg.seed + k)
        i_r, i_l = analytic(p.invariants, cfg.N, F_pk, omega_ratio=ratio, c=p.c)
        report.checks.append(_mc_check(f"mc_vs_analytic_{mode}", est,
                                       np.array([i_r, i_l, i_r - i_l]), n))

    achiral = cfg.model.achiral()
    t = build_tensors(achiral, p.omega_l)
    a_props = reduce_to_real(t.alpha, t.G, t.A)
    a_inv = compute_invariants(a_props, p.omega_l)
    spec = difference_and_sum(_spectrum_mode(cfg), a_inv, cfg.N, p.grid, p.F, p.omega_l, c=p.c)
    exact = float(np.max(np.abs(spec["diff"])))
    est = averaging.mc_average_intensity(
        averaging.lin_cir_signal(a_props, F_pk, cfg.N, p.omega_l, w_pk, p.c), n, cfg.seed + 2)
    floor = 1e-12 * abs(est.mean[0])
    z0 = abs(est.mean[2]) / max(est.std_error[2], floor)
    report.checks.append(CheckResult(
        "achiral_difference_null", exact == 0.0 and z0 <= SIGMA_LIMIT, z0, SIGMA_LIMIT,
        float(est.std_error[2]), n, f"analytic max |diff| = {exact:g}"))

    s1 = difference_and_sum(_spectrum_mode(cfg), p.invariants, cfg.N, p.grid, p.F, p.omega_l, c=p.c)
    s2 = difference_and_sum(_spectrum_mode(cfg), p.invariants, 2 * cfg.N, p.grid, p.F,
                            p.omega_l, c=p.c)
    dev = max(float(np.max(np.abs(s2[ch] - 4.0 * s1[ch]))) for ch in s1.channels)
    report.checks.append(CheckResult("n_squared_scaling", dev == 0.0, dev, 0.0))

    lo_amp = cfg.lo.amplitude if cfg.lo is not None else 1.0
    het = phase_cycle(p.invariants, cfg.N, p.grid, p.F, lo_amp, cfg.phi, p.omega_l, c=p.c,
                      mode=cfg.reference)
    target = 2 * p.invariants.g_prime / (p.c * p.invariants.a)
    rel = abs(het.ratio_estimate - target) / max(abs(target), 1e-300)
    report.checks.append(CheckResult("phase_cycle_ratio", rel < 1e-10, rel, 1e-10,
                                     detail=f"homodyne residual {het.homodyne_residual:.2e}"))
    report.checks.append(CheckResult("phase_cycle_homodyne_cancellation",
                                     het.homodyne_residual < 1e-12, het.homodyne_residual, 1e-12))

    k_l, k_as = p.omega_l / p.c, w_pk / p.c
    ct = ComplexTensors.from_real(p.props)
    worst = 0.0
    for ref, closed in ((pipeline_lin_cir(ct, F_pk, cfg.N, k_l, k_as, p.c),
                         antistokes_circular_components(p.props, F_pk, cfg.N, k_l, k_as, p.c)),
                        (pipeline_cir_lin(ct, F_pk, cfg.N, k_l, k_as, "R", p.c),
                         antistokes_linear_components_circular_input(
                             p.props, F_pk, cfg.N, "R", k_l, k_as, p.c)),
                        (pipeline_cir_lin(ct, F_pk, cfg.N, k_l, k_as, "L", p.c),
                         antistokes_linear_components_circular_input(
                             p.props, F_pk, cfg.N, "L", k_l, k_as, p.c))):
        a, b = np.array(ref), np.array(closed)
        worst = max(worst, float(np.max(np.abs(a - b)) / np.max(np.abs(a))))
    report.checks.append(CheckResult("closed_form_fields_vs_pipeline", worst < 1e-10, worst, 1e-10))

    if coherence:
        report.checks.extend(_coherence_checks(cfg))
    return report


def _coherence_checks(cfg):
    pump, stokes, model = cfg.pump, cfg.stokes, cfg.model
    t_end = max(pump.tau, stokes.tau)
    width = 1.0 / min(pump.sigma, stokes.sigma)
    times = (t_end, t_end + 3 * width)
    worst = 0.0
    for t in times:
        a = coherence_dynamics_time(pump, stokes, model, t)
        b = coherence_dynamics_freq(pump, stokes, model, t)
        worst = max(worst, abs(a - b) / abs(b))
    checks = [CheckResult("coherence_time_vs_frequency", worst < 1e-6, worst, 1e-6,
                          detail=f"{len(times)} times")]
    t_long = t_end + 14 * width
    late = coherence_dynamics_time(pump, stokes, model, t_long)
    limit = late * np.exp((1j * model.omega_v + model.gamma) * t_long)
    rho = prepare_coherence(pump, stokes, model)
    rel = abs(rho - limit) / abs(limit)
    checks.append(CheckResult("coherence_preparation_long_time", rel < 1e-6, rel, 1e-6))
    return checks
