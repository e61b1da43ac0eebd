"""Observables: difference/sum spectra, phase-cycled heterodyne signals,
circular intensity difference and the coherent enhancement factor.

Every intensity carries the same overall constant, fixed to 1, so absolute
values are arbitrary units while ratios are exact.
"""

from dataclasses import dataclass, field

import numpy as np

from .averaging import (analytic_cir_lin, analytic_lin_cir, cir_lin_coefficients,
                        lin_cir_coefficients)
from .coherence import LocalOscillator

RATIO_FLOOR = 1e-12
MODES = ("lin-cir", "cir-lin")
UNITS = "arbitrary units"


class RatioUndefined(ValueError):
    """The cycled sum signal vanishes everywhere, so no ratio can be formed."""


@dataclass(eq=False)
class SignalSpectrum:
    omega_as_grid: np.ndarray
    channels: dict
    metadata: dict = field(default_factory=dict)
    # homodyne decomposition I_R/L = coeff_R/L * weight, kept when no LO is present
    coeff_R: np.ndarray = None
    coeff_L: np.ndarray = None
    weight: np.ndarray = None

    def __post_init__(self):
        self.omega_as_grid = np.asarray(self.omega_as_grid, dtype=float)
        n = self.omega_as_grid.shape
        for name, arr in self.channels.items():
            arr = np.asarray(arr, dtype=float)
            if arr.shape != n:
                raise ValueError(f"channel {name!r} has shape {arr.shape}, grid has {n}")
            self.channels[name] = arr

    def __getitem__(self, name):
        return self.channels[name]

    @property
    def has_lo(self):
        return bool(self.metadata.get("lo", False))


@dataclass(eq=False)
class HeterodyneResult:
    omega_as_grid: np.ndarray
    diff_cycled: np.ndarray
    sum_cycled: np.ndarray
    ratio: np.ndarray
    ratio_estimate: float
    phase: float
    homodyne_residual: float = 0.0


def _mode_functions(mode):
    if mode == "lin-cir":
        return analytic_lin_cir, lin_cir_coefficients
    if mode == "cir-lin":
        return analytic_cir_lin, cir_lin_coefficients
    raise ValueError(f"unknown detection mode {mode!r}; expected one of {MODES}")


def difference_and_sum(mode, inv, N, omega_as, F, omega_l, lo=None, c=1.0, metadata=None):
    """Orientation-averaged R/L channels with their difference and sum.

    ``omega_as`` and ``F`` are arrays over the same grid; ``omega_l`` is the
    probe centre frequency, which sets ``omega_as / omega_l`` per point.
    """
    analytic, coefficients = _mode_functions(mode)
    grid = np.atleast_1d(np.asarray(omega_as, dtype=float))
    F = np.broadcast_to(np.asarray(F, dtype=complex), grid.shape)
    ratio = grid / omega_l
    i_r, i_l = analytic(inv, N, F, lo=lo, omega_ratio=ratio, c=c)
    i_r = np.broadcast_to(i_r, grid.shape)
    i_l = np.broadcast_to(i_l, grid.shape)
    meta = {"mode": mode, "N": N, "units": UNITS, "lo": lo is not None}
    meta.update(metadata or {})
    spec = SignalSpectrum(grid, {"I_R": i_r, "I_L": i_l, "diff": i_r - i_l, "sum": i_r + i_l},
                          meta)
    if lo is None:
        k_r, k_l = coefficients(inv, ratio, c)
        spec.coeff_R = np.broadcast_to(k_r, grid.shape)
        spec.coeff_L = np.broadcast_to(k_l, grid.shape)
        spec.weight = (N * N) * np.abs(F) ** 2
    return spec


def _floored_ratio(num, den, reference):
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    ref = np.max(np.abs(reference)) if np.size(reference) else 0.0
    ok = np.abs(reference) > RATIO_FLOOR * ref
    out = np.full(num.shape, np.nan)
    out[ok] = num[ok] / den[ok]
    return out


def cid(spectrum):
    """Circular intensity difference ``(I_R - I_L) / (I_R + I_L)`` per point.

    Points where the sum falls below the relative floor are NaN.  When the
    spectrum keeps its homodyne decomposition the ratio is taken between the
    coefficients, so it is exactly independent of ``N`` and ``rho21``.
    """
    if spectrum.has_lo:
        raise ValueError("the circular intensity difference needs an LO-free spectrum")
    if spectrum.coeff_R is not None and spectrum.weight is not None:
        k_r, k_l = spectrum.coeff_R, spectrum.coeff_L
        return _floored_ratio(k_r - k_l, k_r + k_l, spectrum.weight)
    s = spectrum["sum"]
    return _floored_ratio(spectrum["diff"], s, s)


def phase_cycle(inv, N, omega_as, F, lo_magnitude, phi, omega_l, c=1.0, mode="lin-cir"):
    """Subtract the heterodyne spectra recorded at LO phases ``phi`` and ``phi + pi``.

    The homodyne ``N^2`` parts cancel, leaving the cross terms; their ratio
    estimates ``2 G' / (c a)``.  ``homodyne_residual`` is the largest leftover
    relative to the homodyne scale, measured against the LO-only cross terms.
    """
    if not lo_magnitude > 0:
        raise ValueError("lo_magnitude must be positive")
    lo = LocalOscillator(lo_magnitude, phi)
    plus = difference_and_sum(mode, inv, N, omega_as, F, omega_l, lo=lo, c=c)
    minus = difference_and_sum(mode, inv, N, omega_as, F, omega_l, lo=lo.shifted(np.pi), c=c)
    diff_cycled = plus["diff"] - minus["diff"]
    sum_cycled = plus["sum"] - minus["sum"]

    cross = N * np.real(np.asarray(F) * lo_magnitude * np.exp(1j * phi))
    expected_diff = 16 / (np.sqrt(2.0) * c) * inv.g_prime * cross
    expected_sum = 8 / np.sqrt(2.0) * inv.a * cross
    homodyne = difference_and_sum(mode, inv, N, omega_as, F, omega_l, c=c)
    scale = max(np.max(np.abs(homodyne["sum"])), np.max(np.abs(expected_sum)), 1e-300)
    residual = max(np.max(np.abs(diff_cycled - expected_diff)),
                   np.max(np.abs(sum_cycled - expected_sum))) / scale

    ratio = _floored_ratio(diff_cycled, sum_cycled, sum_cycled)
    ok = np.isfinite(ratio)
    if not np.any(ok):
        raise RatioUndefined("cycled sum is below the floor at every grid point")
    s = sum_cycled[ok]
    estimate = float(np.dot(diff_cycled[ok], s) / np.dot(s, s))
    return HeterodyneResult(plus.omega_as_grid, diff_cycled, sum_cycled, ratio,
                            estimate, float(phi), float(residual))


def enhancement_ratio(N, coherent):
    """Coherent over incoherent signal, ``N |rho21|^2 / rho11``."""
    if not coherent.rho11 > 0:
        raise ValueError("rho11 must be positive")
    return N * abs(coherent.rho21_0) ** 2 / coherent.rho11
