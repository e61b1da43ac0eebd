"""Isotropic orientational averaging: closed forms and Monte Carlo.

Orientations are unit quaternions in scipy's scalar-last order
``(x, y, z, w)``.  Uniform samples on SO(3) come from normalised 4-D Gaussian
vectors.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial.transform import Rotation

from .scattering import pipeline_cir_lin, pipeline_lin_cir
from .tensors import ComplexTensors, RealPropertySet

SQRT2 = np.sqrt(2.0)
DEFAULT_SAMPLES = 10 ** 6
CHUNK = 2 ** 16
MIN_SAMPLES = 1000


@dataclass(frozen=True, eq=False)
class Orientation:
    quaternion: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.quaternion, dtype=float)
        if q.shape != (4,) or abs(np.linalg.norm(q) - 1.0) > 1e-12:
            raise ValueError("orientation needs a unit quaternion of length 4")
        object.__setattr__(self, "quaternion", q)

    @property
    def matrix(self):
        return Rotation.from_quat(self.quaternion).as_matrix()


@dataclass(frozen=True)
class McEstimate:
    mean: np.ndarray
    std_error: np.ndarray
    n_samples: int
    seed: Optional[int]

    def z_score(self, expected):
        err = np.asarray(self.std_error)
        diff = np.asarray(self.mean) - np.asarray(expected)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(err > 0, np.abs(diff) / np.where(err > 0, err, 1.0),
                            np.where(diff == 0, 0.0, np.inf))


def sample_quaternions(rng, n):
    q = rng.standard_normal((n, 4))
    return q / np.linalg.norm(q, axis=1, keepdims=True)


def sample_orientation(rng):
    return Orientation(sample_quaternions(rng, 1)[0])


def sample_rotations(rng, n):
    """``n`` uniformly distributed rotation matrices, shape ``(n, 3, 3)``."""
    return Rotation.from_quat(sample_quaternions(rng, n)).as_matrix()


def _as_matrix(R):
    if isinstance(R, Orientation):
        return R.matrix
    return np.asarray(R, dtype=float)


def rotate_tensors(props, R):
    """Rotate every tensor of ``props``; ``R`` may be a batch ``(n, 3, 3)``."""
    R = _as_matrix(R)
    Rt = np.swapaxes(R, -1, -2)
    alpha = R @ np.asarray(props.alpha, dtype=float) @ Rt
    g = R @ np.asarray(props.g_prime, dtype=float) @ Rt
    A = np.asarray(props.a_tensor, dtype=float)
    # rotate the last pair as matrices, then mix the leading index
    A = R[..., None, :, :] @ A @ Rt[..., None, :, :]
    A = (R @ A.reshape(A.shape[:-3] + (3, 9))).reshape(A.shape)
    return RealPropertySet(alpha, g, A)


def _merge(stats, other):
    n1, m1, s1 = stats
    n2, m2, s2 = other
    n = n1 + n2
    delta = m2 - m1
    return n, m1 + delta * (n2 / n), s1 + s2 + delta * delta * (n1 * n2 / n)


def _seed_of(rng):
    if rng is None or isinstance(rng, (int, np.integer)):
        return None if rng is None else int(rng)
    return None


def mc_average_intensity(signal_fn, n, rng, chunk=CHUNK):
    """Sample mean and standard error of ``signal_fn`` over random orientations.

    ``signal_fn`` maps a batch of rotation matrices ``(m, 3, 3)`` to real
    values of shape ``(m,)`` or ``(m, k)``.  ``rng`` is an integer seed or a
    ``numpy.random.Generator``.  With an integer seed the sample budget is cut
    into fixed chunks with their own spawned streams, so the result does not
    depend on how the chunks are scheduled; chunk statistics are combined by
    pairwise mean/variance merging.
    """
    n = int(n)
    if n < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples (got {n})")
    seed = _seed_of(rng)
    n_chunks = -(-n // chunk)
    if seed is not None:
        streams = [np.random.default_rng(s)
                   for s in np.random.SeedSequence(seed).spawn(n_chunks)]
    else:
        streams = [rng] * n_chunks

    stats = None
    remaining = n
    for stream in streams:
        m = min(chunk, remaining)
        remaining -= m
        vals = np.asarray(signal_fn(sample_rotations(stream, m)), dtype=float)
        cur = (m, vals.mean(axis=0), ((vals - vals.mean(axis=0)) ** 2).sum(axis=0))
        stats = cur if stats is None else _merge(stats, cur)
    count, mean, m2 = stats
    var = m2 / (count - 1)
    return McEstimate(mean=mean, std_error=np.sqrt(var / count), n_samples=count, seed=seed)


def random_property_set(rng, chiral_scale=1e-3, omega_l=1.0, c=1.0):
    """Random real property set with realistic chiral/achiral proportions.

    ``alpha`` is symmetric, ``A`` is symmetric in its quadrupole pair, and the
    optical-activity tensors are sized so that ``G'/c`` and ``k_l A / 3`` are
    ``chiral_scale`` times the polarisability scale.
    """
    al = rng.standard_normal((3, 3))
    al = 0.5 * (al + al.T) + rng.uniform(0.5, 1.5) * np.eye(3)
    g = chiral_scale * c * rng.standard_normal((3, 3))
    A = rng.standard_normal((3, 3, 3))
    A = 0.5 * (A + A.transpose(0, 2, 1)) * chiral_scale * 3.0 * c / omega_l
    return RealPropertySet(al, g, A)


def _lo_field(lo):
    if lo is None:
        return 0.0
    return lo.field if hasattr(lo, "field") else complex(lo)


def lin_cir_coefficients(inv, omega_ratio=1.0, c=1.0):
    """Homodyne coefficients ``(k_R, k_L)`` of ``N^2 |F|^2`` for Lin-Cir."""
    base = (45 * inv.a2 + 7 * inv.gamma2_alpha) / 90
    odd = ((180 * inv.aG_prime + 4 * inv.gamma2_G) / (90 * c)
           - 6 * inv.gamma2_A / (90 * c)
           + np.asarray(omega_ratio) * 2 * inv.gamma2_A / (90 * c))
    return base + odd, base - odd


def cir_lin_coefficients(inv, omega_ratio=1.0, c=1.0):
    """Homodyne coefficients ``(k_R, k_L)`` of ``N^2 |F|^2`` for Cir-Lin."""
    base = (45 * inv.a2 + 7 * inv.gamma2_alpha) / 90
    odd = ((180 * inv.aG_prime + 4 * inv.gamma2_G) / (90 * c)
           - np.asarray(omega_ratio) * 6 * inv.gamma2_A / (90 * c)
           + 2 * inv.gamma2_A / (90 * c))
    return base + odd, base - odd


def _with_lo(k_r, k_l, inv, N, F, lo, c):
    F = np.asarray(F)
    weight = (N * N) * (np.abs(F) ** 2)
    i_r = k_r * weight
    i_l = k_l * weight
    if lo is not None:
        cross = N * np.real(F * np.conj(_lo_field(lo)))
        even = SQRT2 * inv.a * cross
        odd = 4 / (SQRT2 * c) * inv.g_prime * cross
        i_r = i_r + even + odd
        i_l = i_l + even - odd
    return i_r, i_l


def analytic_lin_cir(inv, N, F, lo=None, omega_ratio=1.0, c=1.0):
    """Orientation-averaged ``(I_R, I_L)`` for a linear probe, circular analysis.

    The homodyne part is first order in the optical-activity tensors.  With a
    local oscillator the cross terms are added; the LO-only background
    ``|E_LO|^2`` is not included.
    """
    k_r, k_l = lin_cir_coefficients(inv, omega_ratio, c)
    return _with_lo(k_r, k_l, inv, N, F, lo, c)


def analytic_cir_lin(inv, N, F, lo=None, omega_ratio=1.0, c=1.0):
    """Orientation-averaged ``(I_x^R, I_x^L)`` for a circular probe, x analysis."""
    k_r, k_l = cir_lin_coefficients(inv, omega_ratio, c)
    return _with_lo(k_r, k_l, inv, N, F, lo, c)


def lin_cir_signal(props, F, N, omega_l, omega_as, c=1.0, lo=None):
    """Per-orientation ``[|E_R|^2, |E_L|^2, |E_R|^2 - |E_L|^2]`` from the
    moments -> radiation -> projection pipeline (LO background removed)."""
    e_lo = _lo_field(lo)
    k_l, k_as = omega_l / c, omega_as / c

    def signal(R):
        t = ComplexTensors.from_real(rotate_tensors(props, R))
        e_r, e_l = pipeline_lin_cir(t, F, N, k_l, k_as, c)
        i_r = np.abs(e_r + e_lo) ** 2 - abs(e_lo) ** 2
        i_l = np.abs(e_l + e_lo) ** 2 - abs(e_lo) ** 2
        return np.stack([i_r, i_l, i_r - i_l], axis=-1)
    return signal


def cir_lin_signal(props, F, N, omega_l, omega_as, c=1.0, lo=None):
    """Per-orientation ``[|E_x^R|^2, |E_x^L|^2, difference]`` for circular probes."""
    e_lo = _lo_field(lo)
    k_l, k_as = omega_l / c, omega_as / c

    def signal(R):
        t = ComplexTensors.from_real(rotate_tensors(props, R))
        ex_r, _ = pipeline_cir_lin(t, F, N, k_l, k_as, "R", c)
        ex_l, _ = pipeline_cir_lin(t, F, N, k_l, k_as, "L", c)
        i_r = np.abs(ex_r + e_lo) ** 2 - abs(e_lo) ** 2
        i_l = np.abs(ex_l + e_lo) ** 2 - abs(e_lo) ** 2
        return np.stack([i_r, i_l, i_r - i_l], axis=-1)
    return signal


def mc_spectrum(props, mode, omega_l, omega_as, F, N, n, seed, c=1.0):
    """Monte Carlo ``I_R``, ``I_L`` and their difference on a whole grid.

    After dividing out the common radiation prefactor each forward field is
    linear in ``k_as``, so the pipeline runs at two wavenumbers per orientation
    and every grid point is interpolated exactly from those.  Returns the
    :class:`McEstimate` with mean of shape ``(points, 3)``.
    """
    grid = np.atleast_1d(np.asarray(omega_as, dtype=float))
    weight = (N * N) * np.abs(np.broadcast_to(np.asarray(F), grid.shape)) ** 2
    k_as = grid / c
    k1, k2 = k_as.min(), k_as.max()
    if k2 == k1:
        k2 = k1 + 1.0
    t = (k_as - k1) / (k2 - k1)
    k_l = omega_l / c

    def fields(tensors, k):
        if mode == "lin-cir":
            return pipeline_lin_cir(tensors, 1.0, 1.0, k_l, k, c)
        if mode == "cir-lin":
            return (pipeline_cir_lin(tensors, 1.0, 1.0, k_l, k, "R", c)[0],
                    pipeline_cir_lin(tensors, 1.0, 1.0, k_l, k, "L", c)[0])
        raise ValueError(f"unknown detection mode {mode!r}")

    def signal(R):
        tensors = ComplexTensors.from_real(rotate_tensors(props, R))
        r1, l1 = fields(tensors, k1)
        r2, l2 = fields(tensors, k2)
        e_r = r1[:, None] + t * (r2 - r1)[:, None]
        e_l = l1[:, None] + t * (l2 - l1)[:, None]
        i_r = np.abs(e_r) ** 2 * weight
        i_l = np.abs(e_l) ** 2 * weight
        return np.stack([i_r, i_l, i_r - i_l], axis=-1)

    chunk = int(max(1024, min(CHUNK, 2 ** 20 // grid.size)))
    return mc_average_intensity(signal, n, seed, chunk=chunk)
