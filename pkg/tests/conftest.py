import numpy as np
import pytest

from carsroa.model import ExcitedState, MolecularModel


def random_vector(rng, scale=1.0, kind="complex"):
    v = rng.standard_normal(3)
    if kind == "complex":
        v = v + 1j * rng.standard_normal(3)
    elif kind == "imag":
        v = 1j * v
    return scale * v


def random_symmetric(rng, scale=1.0, kind="complex"):
    q = rng.standard_normal((3, 3))
    if kind == "complex":
        q = q + 1j * rng.standard_normal((3, 3))
    return scale * 0.5 * (q + q.T)


def random_general_model(rng, n_states=3, omega_v=1.0, gamma=0.05):
    """Unconstrained complex moments in both directions."""
    states = []
    for k in range(n_states):
        states.append(ExcitedState(
            omega_31=8.0 + 3.0 * k + rng.uniform(), gamma_3=rng.uniform(0.01, 0.3),
            mu_13=random_vector(rng), mu_32=random_vector(rng),
            m_13=random_vector(rng, 0.01), m_32=random_vector(rng, 0.01),
            q_13=random_symmetric(rng, 0.01), q_32=random_symmetric(rng, 0.01)))
    return MolecularModel(omega_v, gamma, states)


def random_condon_model(rng, n_states=2, omega_v=1.0, gamma=0.02, gamma_3=1e-14):
    """Real-wavefunction model whose tensor identities hold exactly."""
    states = []
    for k in range(n_states):
        states.append(ExcitedState.condon(
            10.0 + 4.0 * k + rng.uniform(), gamma_3,
            rng.standard_normal(3),
            m_13=random_vector(rng, 0.005, "imag"),
            q_13=random_symmetric(rng, 0.005, "real"),
            overlap=rng.uniform(-0.5, 0.5)))
    return MolecularModel(omega_v, gamma, states)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def coherence_cases():
    """Five (model, pump, stokes) triples spanning widths, delays and detunings."""
    from carsroa.coherence import PulseSpec
    rng = np.random.default_rng(7)
    cases = []
    for k in range(5):
        states = [ExcitedState(6.0 + 2.0 * j + rng.uniform(), rng.uniform(0.2, 0.8),
                               random_vector(rng, kind="real"), random_vector(rng, kind="real"))
                  for j in range(1 + k % 3)]
        model = MolecularModel(1.0 + 0.1 * k, rng.uniform(0.02, 0.1), states)
        pump = PulseSpec(4.0 + 0.2 * k, rng.uniform(0.5, 0.9), 0.3, 0.0)
        stokes = PulseSpec(pump.omega_0 - model.omega_v + rng.uniform(-0.2, 0.2),
                           rng.uniform(0.4, 0.8), rng.uniform(0.5, 1.0), rng.uniform(0.0, 1.0))
        cases.append((model, pump, stokes))
    return cases


def lineshape_half_width(probe, gamma, omega_v=1.0):
    """Half width at half maximum of |F| around its peak at omega_v + omega_0."""
    from scipy.optimize import brentq
    from carsroa.coherence import lineshape_F
    centre = omega_v + probe.omega_0

    def mag(x):
        return abs(lineshape_F(centre + x, 0.0, probe, gamma, 1.0, omega_v))

    half = 0.5 * mag(0.0)
    hi = 0.1 * min(probe.sigma, gamma)
    while mag(hi) > half:
        hi *= 2.0
    return brentq(lambda x: mag(x) - half, 0.0, hi, xtol=1e-14 * hi, rtol=1e-13)


GAUSS_HWHM = np.sqrt(2.0 * np.log(2.0))
