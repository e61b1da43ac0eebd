"""Pulse fields, vibrational-coherence preparation and the anti-Stokes lineshape.

Fourier convention (symmetric)::

    f(t) = (2 pi)^-1/2 \\int dw f(w) exp(-i w t)
    f(w) = (2 pi)^-1/2 \\int dt f(t) exp(+i w t)

A pulse with spectral envelope ``amp * exp(-(w - w0)^2 / (2 sigma^2))`` and
delay ``tau`` is therefore ``amp * sigma * exp(-sigma^2 (t - tau)^2 / 2)
* exp(-i w0 t)`` in time.

The Stokes pulse drives the Raman coherence through its negative-frequency
part, i.e. the complex conjugate of its analytic field, centred at ``-w_s``.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .quadrature import (QuadratureNotConverged, adaptive_simpson,
                         composite_gauss_legendre, merge_intervals)

__all__ = [
    "PulseSpec", "LocalOscillator", "PerturbativeRegimeWarning",
    "QuadratureNotConverged", "pulse_spectrum", "pulse_field",
    "prepare_coherence", "coherence_dynamics_time", "coherence_dynamics_freq",
    "lineshape_F",
]

# half-width of the Gaussian windows, in units of the relevant width
_WINDOW = 12.0


class PerturbativeRegimeWarning(RuntimeWarning):
    """Perturbation theory produced a coherence above the physical bound 1/2."""


@dataclass(frozen=True, eq=False)
class PulseSpec:
    omega_0: float
    sigma: float
    amplitude: complex = 1.0
    tau: float = 0.0
    polarization: tuple = (1.0, 0.0, 0.0)

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive (got {self.sigma})")
        pol = np.array(self.polarization, dtype=complex)
        if pol.shape != (3,):
            raise ValueError("polarization must be a 3-vector")
        if abs(np.linalg.norm(pol) - 1.0) > 1e-12:
            raise ValueError("polarization must have unit norm")
        if abs(pol[2]) > 1e-12:
            raise ValueError("polarization must be transverse to z")
        pol.setflags(write=False)
        object.__setattr__(self, "polarization", pol)
        object.__setattr__(self, "amplitude", complex(self.amplitude))

    def k_vector(self, c=1.0):
        return np.array([0.0, 0.0, self.omega_0 / c])

    def with_(self, **changes):
        kw = dict(omega_0=self.omega_0, sigma=self.sigma, amplitude=self.amplitude,
                  tau=self.tau, polarization=self.polarization)
        kw.update(changes)
        return PulseSpec(**kw)

    # negative-frequency partner, used for the Stokes pulse
    def conjugate_spectrum(self, omega):
        x = np.asarray(omega) + self.omega_0
        return (np.conj(self.amplitude) * np.exp(-x * x / (2 * self.sigma ** 2))
                * np.exp(1j * x * self.tau))

    def conjugate_field(self, t):
        t = np.asarray(t, dtype=float)
        return np.conj(pulse_field(self, t))


@dataclass(frozen=True)
class LocalOscillator:
    """Heterodyne reference at the anti-Stokes frequency.

    The complex field is ``amplitude * exp(-i phase)`` so that the cross term
    ``Re(F conj(E_LO))`` equals ``Re(F |E_LO| exp(i phase))``.
    """

    amplitude: float
    phase: float = 0.0
    frequency: float = float("nan")

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError("local oscillator amplitude must be non-negative")

    @property
    def field(self):
        return self.amplitude * np.exp(-1j * self.phase)

    def shifted(self, dphi):
        return LocalOscillator(self.amplitude, self.phase + dphi, self.frequency)


def pulse_spectrum(pulse, omega):
    """Frequency-domain field ``E(w) = env(w - w0) exp(i (w - w0) tau)``."""
    x = np.asarray(omega) - pulse.omega_0
    return (pulse.amplitude * np.exp(-x * x / (2 * pulse.sigma ** 2))
            * np.exp(1j * x * pulse.tau))


def pulse_field(pulse, t):
    """Time-domain field matching :func:`pulse_spectrum` under the symmetric FT."""
    t = np.asarray(t, dtype=float)
    s = pulse.sigma
    return (pulse.amplitude * s * np.exp(-0.5 * (s * (t - pulse.tau)) ** 2)
            * np.exp(-1j * pulse.omega_0 * t))


def _couplings(pump, stokes, model):
    """``<2|mu.e_s*|3><3|mu.e_p|1>`` for every excited state."""
    mu23 = model.stacked("mu_23")
    mu31 = model.stacked("mu_31")
    return (mu23 @ np.conj(stokes.polarization)) * (mu31 @ pump.polarization)


def _product_window(pump, stokes, offset):
    """Window in pump frequency where env_p(w) * env_s(offset - w) is non-negligible."""
    sp2, ss2 = pump.sigma ** 2, stokes.sigma ** 2
    centre = (pump.omega_0 * ss2 + (offset + stokes.omega_0) * sp2) / (sp2 + ss2)
    width = np.sqrt(sp2 * ss2 / (sp2 + ss2))
    return centre - _WINDOW * width, centre + _WINDOW * width


def prepare_coherence(pump, stokes, model, reduction="pole", rtol=1e-8):
    """Coherence amplitude ``rho21(0)`` left behind by the pump/Stokes pair.

    ``reduction="pole"`` (default) keeps the full pole of the vibrational
    propagator: ``rho21(t) -> rho21(0) exp(-(i w_v + Gamma) t)`` once both
    pulses are over, with

        rho21(0) = (i / hbar^2) sum_3 c_3 \\int dw E_s(w_v - i Gamma - w) E_p(w)
                   / (w_31 - w - i Gamma_3).

    ``reduction="delta"`` replaces the propagator by ``-i pi delta(W - w_v)``
    only, which gives the same integral with prefactor ``i / (2 hbar^2)`` and
    a real Stokes argument; it equals half of the pole result when
    ``Gamma`` is small against the pulse bandwidths.
    """
    if reduction not in ("pole", "delta"):
        raise ValueError(f"unknown reduction {reduction!r}")
    coupling = _couplings(pump, stokes, model)
    if not np.any(coupling) or pump.amplitude == 0 or stokes.amplitude == 0:
        return 0.0 + 0.0j
    shift = -1j * model.gamma if reduction == "pole" else 0.0
    prefactor = 1j / model.hbar ** 2 * (1.0 if reduction == "pole" else 0.5)
    lo, hi = _product_window(pump, stokes, model.omega_v)

    total = 0.0 + 0.0j
    for c3, w31, g3 in zip(coupling, model.omega_31, model.gamma_3):
        if c3 == 0:
            continue

        def integrand(w, w31=w31, g3=g3):
            return (stokes.conjugate_spectrum(model.omega_v + shift - w)
                    * pulse_spectrum(pump, w) / (w31 - w - 1j * g3))

        bps = [w31 + k * g3 for k in (-10, -1, 0, 1, 10)]
        total += c3 * adaptive_simpson(integrand, lo, hi, rtol=rtol, breakpoints=bps)
    rho = prefactor * total
    if abs(rho) > 0.5:
        warnings.warn(f"|rho21(0)| = {abs(rho):.3g} exceeds 1/2; "
                      "perturbative preparation is outside its regime",
                      PerturbativeRegimeWarning, stacklevel=2)
    return complex(rho)


def coherence_dynamics_time(pump, stokes, model, t, rtol=1e-10):
    """``rho21(t)`` by direct quadrature of the nested time integral.

    Both propagators carry their damping: ``exp(-(i w_31 + Gamma_3) t1)`` for
    the intermediate state and ``exp(-(i w_v + Gamma) t2)`` for the coherence.
    """
    t = float(t)
    coupling = _couplings(pump, stokes, model)
    ws, wp = _WINDOW / stokes.sigma, _WINDOW / pump.sigma
    a2 = max(0.0, t - stokes.tau - ws)
    b2 = max(0.0, t - stokes.tau + ws)
    if b2 <= a2:
        return 0.0 + 0.0j

    total = 0.0 + 0.0j
    for c3, w31, g3 in zip(coupling, model.omega_31, model.gamma_3):
        if c3 == 0:
            continue

        def inner(t2, w31=w31, g3=g3):
            a1 = np.maximum(0.0, t - t2 - pump.tau - wp)
            b1 = np.maximum(0.0, t - t2 - pump.tau + wp)

            def f1(t1):
                return (np.exp(-(1j * w31 + g3) * t1)
                        * pulse_field(pump, t - t1 - t2[..., None]))
            return composite_gauss_legendre(f1, a1, b1, rtol=rtol * 0.1, panels=8)

        def outer(t2):
            return (np.exp(-(1j * model.omega_v + model.gamma) * t2)
                    * stokes.conjugate_field(t - t2) * inner(t2))

        total += c3 * composite_gauss_legendre(outer, a2, b2, rtol=rtol, panels=8)
    return complex(-total / model.hbar ** 2)


def coherence_dynamics_freq(pump, stokes, model, t, rtol=1e-10):
    """``rho21(t)`` from the double frequency integral.

        rho21(t) = 1 / (2 pi hbar^2) sum_3 c_3 \\int dw_p \\int dW
                   exp(-i W t) E_s(W - w_p) E_p(w_p)
                   / ((w_p - w_31 + i Gamma_3)(W - w_v + i Gamma))

    The inner ``w_p`` integral runs over the Gaussian product window of each
    outer ``W``; the outer one is adaptive with breakpoints around the
    vibrational pole.
    """
    t = float(t)
    coupling = _couplings(pump, stokes, model)
    span = _WINDOW * np.hypot(pump.sigma, stokes.sigma)
    centre = pump.omega_0 - stokes.omega_0
    g = model.gamma
    bps = [model.omega_v + k * g for k in (-100, -30, -10, -3, -1, 0, 1, 3, 10, 30, 100)]

    total = 0.0 + 0.0j
    for c3, w31, g3 in zip(coupling, model.omega_31, model.gamma_3):
        if c3 == 0:
            continue

        def g_inner(W, w31=w31, g3=g3):
            lo, hi = _product_window(pump, stokes, W)

            def f(wp):
                return (stokes.conjugate_spectrum(W[..., None] - wp) * pulse_spectrum(pump, wp)
                        / (wp - w31 + 1j * g3))
            return composite_gauss_legendre(f, lo, hi, rtol=rtol * 0.1, panels=4)

        def outer(W):
            return np.exp(-1j * W * t) * g_inner(W) / (W - model.omega_v + 1j * g)

        total += c3 * adaptive_simpson(outer, centre - span, centre + span,
                                       rtol=rtol, breakpoints=bps, initial=64)
    return complex(total / (2 * np.pi * model.hbar ** 2))


def _lineshape_integral(x0, tau, probe, gamma, rtol):
    env = probe.with_(tau=tau, amplitude=probe.amplitude)
    w0, s = probe.omega_0, probe.sigma
    support = merge_intervals([(w0 - 8 * s, w0 + 8 * s), (x0 - 50 * gamma, x0 + 50 * gamma)])
    bps = [x0 + k * gamma for k in (-10, -3, -1, 0, 1, 3, 10)] + [w0 - s, w0, w0 + s]

    def f(w):
        d = x0 - w
        return pulse_spectrum(env, w) / (gamma * gamma + d * d)

    return sum(adaptive_simpson(f, a, b, rtol=rtol, breakpoints=bps) for a, b in support)


def lineshape_F(omega_as, tau, probe, gamma, rho21_0, omega_v, rtol=1e-8):
    """Anti-Stokes lineshape

        F(w_as, tau) = (1/pi) \\int dw env(w - w0) exp(i (w - w0) tau)
                       Gamma rho21(0) / (Gamma^2 + (w_as - w_v - w)^2).

    ``omega_as`` may be a scalar or an array; the probe's own ``tau`` is
    replaced by the ``tau`` argument.
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    scalar = np.ndim(omega_as) == 0
    grid = np.atleast_1d(np.asarray(omega_as, dtype=float))
    out = np.zeros(grid.shape, dtype=complex)
    if rho21_0 != 0 and probe.amplitude != 0:
        for i, w in enumerate(grid):
            out[i] = _lineshape_integral(w - omega_v, tau, probe, gamma, rtol)
        out *= gamma / np.pi * rho21_0
    return complex(out[0]) if scalar else out
