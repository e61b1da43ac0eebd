"""Molecular level scheme and transition-moment data.

States are labelled as in the usual Raman picture: ``|1>`` is the ground
vibrational level, ``|2>`` the excited vibrational level (gap ``omega_v``), and
each :class:`ExcitedState` is one member of the intermediate electronic
manifold ``{|3>}``.
"""

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

SYMMETRY_RTOL = 1e-12
REALITY_RTOL = 1e-12


def _frozen(value, shape):
    arr = np.array(value, dtype=complex)
    if arr.shape != shape:
        raise ValueError(f"expected shape {shape}, got {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ExcitedState:
    """One intermediate state ``|3>`` with its transition moments.

    ``mu_13 = <1|mu|3>`` and ``mu_32 = <3|mu|2>``; likewise for the magnetic
    dipole ``m`` and quadrupole ``q``.  The reverse-direction electric dipoles
    ``mu_31`` and ``mu_23`` enter only the coherence preparation; when omitted
    they follow from hermiticity of the dipole operator.
    """

    omega_31: float
    gamma_3: float
    mu_13: np.ndarray
    mu_32: np.ndarray
    m_13: np.ndarray = field(default_factory=lambda: np.zeros(3))
    m_32: np.ndarray = field(default_factory=lambda: np.zeros(3))
    q_13: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))
    q_32: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))
    mu_31: Optional[np.ndarray] = None
    mu_23: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "omega_31", float(self.omega_31))
        object.__setattr__(self, "gamma_3", float(self.gamma_3))
        for name in ("mu_13", "mu_32", "m_13", "m_32"):
            object.__setattr__(self, name, _frozen(getattr(self, name), (3,)))
        for name in ("q_13", "q_32"):
            object.__setattr__(self, name, _frozen(getattr(self, name), (3, 3)))
        mu_31 = np.conj(self.mu_13) if self.mu_31 is None else self.mu_31
        mu_23 = np.conj(self.mu_32) if self.mu_23 is None else self.mu_23
        object.__setattr__(self, "mu_31", _frozen(mu_31, (3,)))
        object.__setattr__(self, "mu_23", _frozen(mu_23, (3,)))

    @classmethod
    def condon(cls, omega_31, gamma_3, mu_13, m_13=None, q_13=None, overlap=1.0):
        """Build a state whose ``|3> -> |2>`` moments are ``overlap`` times the
        complex conjugate of the ``|1> -> |3>`` moments.

        This Condon-type factorisation makes the polarisability symmetric and,
        for real wavefunctions and negligible ``gamma_3``, gives the
        ``G = conj(script-G)^T`` and ``A = script-A`` identities exactly.
        """
        mu_13 = np.asarray(mu_13, dtype=complex)
        m_13 = np.zeros(3, complex) if m_13 is None else np.asarray(m_13, dtype=complex)
        q_13 = np.zeros((3, 3), complex) if q_13 is None else np.asarray(q_13, dtype=complex)
        return cls(omega_31, gamma_3, mu_13, overlap * np.conj(mu_13),
                   m_13, overlap * np.conj(m_13), q_13, overlap * np.conj(q_13))

    def scaled_dipoles(self, s):
        """Copy with every electric-dipole moment multiplied by ``s``."""
        return ExcitedState(self.omega_31, self.gamma_3, s * self.mu_13, s * self.mu_32,
                            self.m_13, self.m_32, self.q_13, self.q_32,
                            s * self.mu_31, s * self.mu_23)

    def achiral(self):
        """Copy with magnetic-dipole and quadrupole moments removed."""
        return ExcitedState(self.omega_31, self.gamma_3, self.mu_13, self.mu_32,
                            mu_31=self.mu_31, mu_23=self.mu_23)


@dataclass(frozen=True, eq=False)
class MolecularModel:
    omega_v: float
    gamma: float
    excited_states: Sequence[ExcitedState]
    hbar: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "omega_v", float(self.omega_v))
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "excited_states", tuple(self.excited_states))

    @property
    def omega_31(self):
        return np.array([s.omega_31 for s in self.excited_states])

    @property
    def omega_32(self):
        # derived, never stored
        return self.omega_31 - self.omega_v

    @property
    def gamma_3(self):
        return np.array([s.gamma_3 for s in self.excited_states])

    def stacked(self, name):
        """Moments of all excited states stacked along a leading axis."""
        return np.stack([getattr(s, name) for s in self.excited_states])

    def achiral(self):
        return MolecularModel(self.omega_v, self.gamma,
                              [s.achiral() for s in self.excited_states],
                              self.hbar, self.c)

    def scaled_dipoles(self, s):
        return MolecularModel(self.omega_v, self.gamma,
                              [e.scaled_dipoles(s) for e in self.excited_states],
                              self.hbar, self.c)


@dataclass(frozen=True)
class CoherenceState:
    """Vibrational coherence and populations of the two Raman levels.

    No invariants are enforced at construction; use
    :func:`validate_coherence` for the positivity bounds.
    """

    rho21_0: complex
    rho11: float = 1.0
    rho22: float = 0.0


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations

    def __bool__(self):
        return self.ok

    def add(self, message):
        self.violations.append(message)

    def extend(self, other):
        self.violations.extend(other.violations)
        return self

    def __str__(self):
        if self.ok:
            return "pass"
        return "; ".join(self.violations)


def _max_abs(a):
    return float(np.max(np.abs(a))) if np.size(a) else 0.0


def validate_model(model, real_wavefunctions=False):
    """Check the level scheme and moment data; never raises.

    Returns a :class:`ValidationReport` listing every violated invariant with
    the index of the offending excited state.
    """
    report = ValidationReport()
    if not (np.isfinite(model.omega_v) and model.omega_v > 0):
        report.add(f"omega_v must be positive (got {model.omega_v})")
    if not (np.isfinite(model.gamma) and model.gamma > 0):
        report.add(f"gamma must be positive (got {model.gamma})")
    if not (model.hbar > 0 and model.c > 0):
        report.add("hbar and c must be positive")
    if not model.excited_states:
        report.add("excited_states is empty")

    for i, s in enumerate(model.excited_states):
        tag = f"excited_states[{i}]"
        if not s.omega_31 > model.omega_v:
            report.add(f"{tag}: omega_31={s.omega_31} does not exceed omega_v={model.omega_v}")
        if not s.gamma_3 > 0:
            report.add(f"{tag}: gamma_3 must be positive (got {s.gamma_3})")
        arrays = {n: getattr(s, n) for n in
                  ("mu_13", "mu_32", "m_13", "m_32", "q_13", "q_32", "mu_31", "mu_23")}
        for n, a in arrays.items():
            if not np.all(np.isfinite(a)):
                report.add(f"{tag}: {n} has non-finite entries")
        for n in ("q_13", "q_32"):
            q = arrays[n]
            asym = _max_abs(q - q.T)
            if asym > SYMMETRY_RTOL * max(_max_abs(q), 1e-300):
                report.add(f"{tag}: quadrupole {n} is not symmetric (max asymmetry {asym:.3g})")
        if real_wavefunctions:
            for n in ("mu_13", "mu_32", "q_13", "q_32", "mu_31", "mu_23"):
                a = arrays[n]
                if _max_abs(a.imag) > REALITY_RTOL * max(_max_abs(a), 1e-300):
                    report.add(f"{tag}: {n} must be purely real for real wavefunctions")
            for n in ("m_13", "m_32"):
                a = arrays[n]
                if _max_abs(a.real) > REALITY_RTOL * max(_max_abs(a), 1e-300):
                    report.add(f"{tag}: {n} must be purely imaginary for real wavefunctions")
    return report


def validate_coherence(state):
    """Positivity bounds on the two-level density matrix."""
    report = ValidationReport()
    r = abs(state.rho21_0)
    if state.rho11 < 0 or state.rho22 < 0:
        report.add("populations must be non-negative")
    if state.rho11 + state.rho22 > 1 + 1e-12:
        report.add(f"rho11 + rho22 = {state.rho11 + state.rho22:g} exceeds 1")
    if r > 0.5 + 1e-12:
        report.add(f"|rho21| = {r:g} exceeds the maximum coherence 1/2")
    if r > np.sqrt(max(state.rho11 * state.rho22, 0.0)) + 1e-12:
        report.add(f"|rho21| = {r:g} exceeds sqrt(rho11*rho22)")
    return report
