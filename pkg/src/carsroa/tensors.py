"""Sum-over-states property tensors, their real reductions, and invariants.

Index conventions (all arrays are plain numpy):

* ``alpha[b, a]``      -- polarisability, field index last.
* ``G[b, a]``          -- electric dipole (b) / magnetic field (a).
* ``G_script[b, a]``   -- magnetic dipole (b) / electric field (a).
* ``A[b, g, a]``       -- electric dipole (b) / field gradient pair (g, a).
* ``A_script[a, g, b]``-- electric field (a) / induced quadrupole pair (g, b).

Rank-3 tensors keep the dipole index first so that the real-wavefunction
identity ``A == A_script`` is an entrywise comparison.
"""

from dataclasses import dataclass
from itertools import permutations

import numpy as np


def levi_civita():
    """Right-handed Levi-Civita symbol with ``eps[0, 1, 2] = +1``."""
    eps = np.zeros((3, 3, 3))
    for p in permutations(range(3)):
        inversions = sum(p[i] > p[j] for i in range(3) for j in range(i + 1, 3))
        eps[p] = -1.0 if inversions % 2 else 1.0
    return eps


EPSILON = levi_civita()


class ResidueTooLarge(ValueError):
    """The part discarded by the real-wavefunction reduction is not negligible."""


@dataclass(frozen=True, eq=False)
class ComplexTensors:
    alpha: np.ndarray
    G: np.ndarray
    G_script: np.ndarray
    A: np.ndarray
    A_script: np.ndarray

    @classmethod
    def from_real(cls, props):
        """Complex tensors implied by a real property set.

        Uses ``G = -i G'``, ``G_script[b, a] = conj(G[a, b]) = i G'[a, b]`` and
        ``A_script = A``.  Leading batch axes are carried through.
        """
        g = np.asarray(props.g_prime)
        return cls(alpha=np.asarray(props.alpha, dtype=complex),
                   G=-1j * g,
                   G_script=1j * np.swapaxes(g, -1, -2),
                   A=np.asarray(props.a_tensor, dtype=complex),
                   A_script=np.asarray(props.a_tensor, dtype=complex))


@dataclass(frozen=True, eq=False)
class RealPropertySet:
    alpha: np.ndarray
    g_prime: np.ndarray
    a_tensor: np.ndarray

    def scaled(self, alpha=1.0, chiral=1.0):
        return RealPropertySet(alpha * np.asarray(self.alpha),
                               chiral * np.asarray(self.g_prime),
                               chiral * np.asarray(self.a_tensor))


@dataclass(frozen=True)
class Invariants:
    """Isotropic invariants of a real property set.

    Besides the five quadratic invariants this carries the isotropic scalars
    ``a = alpha_ll / 3`` and ``g_prime = G'_ll / 3`` that multiply the
    local-oscillator cross terms, and the frequency used in ``gamma2_A``.
    """

    a2: float
    gamma2_alpha: float
    aG_prime: float
    gamma2_G: float
    gamma2_A: float
    a: float
    g_prime: float
    omega_l: float


def _denominators(model, omega_l):
    g3 = model.gamma_3
    d1 = model.omega_32 - omega_l - 1j * g3
    d2 = model.omega_31 + omega_l + 1j * g3
    return d1, d2


def build_alpha(model, omega_l):
    """Complex polarisability for the ``1 -> 2`` Raman coherence at ``omega_l``."""
    d1, d2 = _denominators(model, omega_l)
    mu13 = model.stacked("mu_13")
    mu32 = model.stacked("mu_32")
    alpha = (np.einsum("s,sb,sa->ba", 1 / d1, mu13, mu32)
             + np.einsum("s,sa,sb->ba", 1 / d2, mu13, mu32))
    return alpha / model.hbar


def build_optical_activity(model, omega_l):
    """Return ``(G, G_script, A, A_script)`` at ``omega_l``."""
    d1, d2 = _denominators(model, omega_l)
    w1, w2 = 1 / d1, 1 / d2
    mu13, mu32 = model.stacked("mu_13"), model.stacked("mu_32")
    m13, m32 = model.stacked("m_13"), model.stacked("m_32")
    q13, q32 = model.stacked("q_13"), model.stacked("q_32")

    G = (np.einsum("s,sb,sa->ba", w1, mu13, m32)
         + np.einsum("s,sa,sb->ba", w2, m13, mu32))
    G_script = (np.einsum("s,sb,sa->ba", w1, m13, mu32)
                + np.einsum("s,sa,sb->ba", w2, mu13, m32))
    A = (np.einsum("s,sb,sga->bga", w1, mu13, q32)
         + np.einsum("s,sga,sb->bga", w2, q13, mu32))
    A_script = (np.einsum("s,sgb,sa->agb", w1, q13, mu32)
                + np.einsum("s,sa,sgb->agb", w2, mu13, q32))
    h = model.hbar
    return G / h, G_script / h, A / h, A_script / h


def build_tensors(model, omega_l):
    G, Gs, A, As = build_optical_activity(model, omega_l)
    return ComplexTensors(build_alpha(model, omega_l), G, Gs, A, As)


def _check_residue(name, t, tol):
    scale = float(np.max(np.abs(t))) if t.size else 0.0
    bad = float(np.max(np.abs(t.imag))) if t.size else 0.0
    if bad > tol * scale:
        raise ResidueTooLarge(
            f"{name}: discarded imaginary part {bad:.3e} exceeds {tol:g} x {scale:.3e}")


def reduce_to_real(alpha_c, G_c, A_c, tol=1e-10):
    """Real tensors ``alpha``, ``G' = iG`` and ``A`` from their complex forms.

    Raises :class:`ResidueTooLarge` if a discarded imaginary part exceeds
    ``tol`` relative to the magnitude of its tensor.
    """
    alpha_c = np.asarray(alpha_c, dtype=complex)
    gp = 1j * np.asarray(G_c, dtype=complex)
    A_c = np.asarray(A_c, dtype=complex)
    for name, t in (("alpha", alpha_c), ("G'", gp), ("A", A_c)):
        _check_residue(name, t, tol)
    return RealPropertySet(alpha_c.real.copy(), gp.real.copy(), A_c.real.copy())


def compute_invariants(props, omega_l):
    """Isotropic invariants of ``props``; ``omega_l`` multiplies ``gamma2_A``."""
    al = np.asarray(props.alpha, dtype=float)
    gp = np.asarray(props.g_prime, dtype=float)
    A = np.asarray(props.a_tensor, dtype=float)
    tr_a = np.trace(al)
    tr_g = np.trace(gp)
    return Invariants(
        a2=tr_a * tr_a / 9.0,
        gamma2_alpha=0.5 * (3.0 * np.sum(al * al) - tr_a * tr_a),
        aG_prime=tr_a * tr_g / 9.0,
        gamma2_G=0.5 * (3.0 * np.sum(al * gp) - tr_a * tr_g),
        gamma2_A=0.5 * omega_l * np.einsum("bcd,ab,cda->", EPSILON, al, A),
        a=tr_a / 3.0,
        g_prime=tr_g / 3.0,
        omega_l=float(omega_l),
    )
