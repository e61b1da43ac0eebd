"""Induced multipole moments and the radiated anti-Stokes field.

All functions accept tensors with leading batch axes (e.g. one property set
per sampled orientation) and broadcast over them.
"""

from dataclasses import dataclass, field

import numpy as np

from .coherence import lineshape_F

SQRT2 = np.sqrt(2.0)
Z_HAT = np.array([0.0, 0.0, 1.0])

# e_R = (x - i y)/sqrt2, e_L = (x + i y)/sqrt2; the R component of a field is
# e_L . E and the L component is e_R . E (plain dot product, no conjugation)
E_R = np.array([1.0, -1.0j, 0.0]) / SQRT2
E_L = np.array([1.0, 1.0j, 0.0]) / SQRT2
JONES = {
    "x": np.array([1.0, 0.0, 0.0], dtype=complex),
    "R": np.array([1.0, -1.0j, 0.0]) / SQRT2,
    "L": np.array([1.0, 1.0j, 0.0]) / SQRT2,
}


@dataclass(frozen=True, eq=False)
class InducedMoments:
    mu_e: np.ndarray
    mu_m: np.ndarray
    mu_q: np.ndarray
    m_vec: np.ndarray
    q_mat: np.ndarray

    @property
    def mu(self):
        return self.mu_e + self.mu_m + self.mu_q


@dataclass(frozen=True, eq=False)
class RadiationConfig:
    k_as: float
    k_l: float = 0.0
    n_hat: np.ndarray = field(default_factory=lambda: Z_HAT.copy())
    r: float = 1.0
    Z0: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        n = np.asarray(self.n_hat, dtype=float)
        if abs(np.linalg.norm(n) - 1.0) > 1e-12:
            raise ValueError("n_hat must be a unit vector")
        if not self.r > 0:
            raise ValueError("r must be positive")
        object.__setattr__(self, "n_hat", n)

    @property
    def prefactor(self):
        """Common factor ``Z0 c k^2 exp(ikr) / (4 pi r)`` of every forward field."""
        k = self.k_as
        return self.Z0 * self.c * k * k / (4 * np.pi) * np.exp(1j * k * self.r) / self.r


def moments_from_lineshape(tensors, e_pol, k_l, F, c=1.0):
    """Induced moments for a plane-wave probe along z with Jones vector ``e_pol``.

    With the tensors frozen at one frequency every moment is
    ``tensor . (field components) * F``; the magnetic field follows from
    ``B = z x E / c``.
    """
    e = np.asarray(e_pol, dtype=complex)
    b = np.cross(Z_HAT, e) / c
    mu_e = np.einsum("...ba,a->...b", tensors.alpha, e) * F
    mu_m = np.einsum("...ba,a->...b", tensors.G, b) * F
    m_vec = np.einsum("...ba,a->...b", tensors.G_script, e) * F
    # k has only a z component, so the quadrupole term picks gamma = z
    mu_q = (1j * k_l / 3.0) * np.einsum("...ba,a->...b", tensors.A[..., :, 2, :], e) * F
    q_mat = np.einsum("...agb,a->...gb", tensors.A_script, e) * F
    return InducedMoments(mu_e, mu_m, mu_q, m_vec, q_mat)


def induced_moments(tensors, probe, gamma, rho21_0, omega_v, omega_as, c=1.0):
    """Moments at ``omega_as`` for tensors evaluated at ``omega_as - omega_v``."""
    F = lineshape_F(omega_as, probe.tau, probe, gamma, rho21_0, omega_v)
    return moments_from_lineshape(tensors, probe.polarization, probe.omega_0 / c, F, c)


def radiated_field(moments, cfg):
    """Far-zone electric field of the induced dipoles and quadrupole."""
    n = cfg.n_hat
    k = cfg.k_as
    phase = np.exp(1j * k * cfg.r) / cfg.r
    mu = moments.mu
    n_b = np.broadcast_to(n, mu.shape)
    e_mu = cfg.c * k ** 2 / (4 * np.pi) * np.cross(np.cross(n_b, mu), n_b)
    e_m = k ** 2 / (4 * np.pi) * np.cross(moments.m_vec, n_b)
    qn = np.einsum("...ab,b->...a", moments.q_mat, n)
    e_q = 1j * cfg.c * k ** 3 / (12 * np.pi) * np.cross(np.cross(qn, n_b), n_b)
    return cfg.Z0 * phase * (e_mu + e_m + e_q)


def circular_components(E):
    """``(E_R, E_L) = (e_L . E, e_R . E)``."""
    return E @ E_L, E @ E_R


def pipeline_lin_cir(tensors, F, N, k_l, k_as, c=1.0):
    """Forward ``(E_R, E_L)`` from moments -> radiation -> projection, x probe.

    The result is divided by :attr:`RadiationConfig.prefactor` and multiplied
    by ``N`` so that it is directly comparable with the closed forms.
    """
    cfg = RadiationConfig(k_as=k_as, k_l=k_l, c=c)
    E = radiated_field(moments_from_lineshape(tensors, JONES["x"], k_l, F, c), cfg)
    e_r, e_l = circular_components(E)
    scale = N / cfg.prefactor
    return e_r * scale, e_l * scale


def pipeline_cir_lin(tensors, F, N, k_l, k_as, handedness, c=1.0):
    """Forward ``(E_x, E_y)`` for an R or L circular probe, normalised as above."""
    cfg = RadiationConfig(k_as=k_as, k_l=k_l, c=c)
    E = radiated_field(moments_from_lineshape(tensors, JONES[handedness], k_l, F, c), cfg)
    scale = N / cfg.prefactor
    return E[..., 0] * scale, E[..., 1] * scale


def antistokes_circular_components(props, F, N, k_l, k_as, c=1.0):
    """Closed-form ``(E_R, E_L)`` of the forward anti-Stokes field for an
    x-polarised probe (upper sign R, lower sign L)."""
    al, gp, A = props.alpha, props.g_prime, props.a_tensor
    common = (al[..., 0, 0] + 1j * k_l / 3 * A[..., 0, 2, 0]
              - 1j * k_as / 3 * A[..., 0, 2, 0])
    odd = (1j * al[..., 1, 0] + gp[..., 1, 1] / c - k_l / 3 * A[..., 1, 2, 0]
           + gp[..., 0, 0] / c + k_as / 3 * A[..., 0, 1, 2])
    pre = N / SQRT2 * F
    return pre * (common + odd), pre * (common - odd)


def antistokes_linear_components_circular_input(props, F, N, handedness, k_l, k_as, c=1.0):
    """Closed-form ``(E_x, E_y)`` for a circular probe; ``handedness`` is
    ``"R"`` (upper signs) or ``"L"``."""
    if handedness not in ("R", "L"):
        raise ValueError("handedness must be 'R' or 'L'")
    s = 1.0 if handedness == "R" else -1.0
    al, gp, A = props.alpha, props.g_prime, props.a_tensor
    ex = (al[..., 0, 0] - s * 1j * al[..., 0, 1]
          + 1j * k_l / 3 * A[..., 0, 2, 0] - 1j * k_as / 3 * A[..., 0, 2, 0]
          + s * gp[..., 0, 0] / c + s * k_l / 3 * A[..., 0, 2, 1]
          + s * gp[..., 1, 1] / c - s * k_as / 3 * A[..., 1, 0, 2])
    ey = (al[..., 1, 0] - s * 1j * al[..., 1, 1]
          + s * k_l / 3 * A[..., 1, 2, 1] - s * k_as / 3 * A[..., 1, 1, 2]
          - 1j / c * gp[..., 1, 1] + 1j * k_l / 3 * A[..., 1, 2, 0]
          - 1j / c * gp[..., 0, 0] - 1j * k_as / 3 * A[..., 0, 1, 2])
    pre = N / SQRT2 * F
    return pre * ex, pre * ey
