import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.spatial.transform import Rotation

from carsroa.averaging import (CHUNK, Orientation, analytic_cir_lin, analytic_lin_cir,
                               cir_lin_signal, lin_cir_signal, mc_average_intensity,
                               mc_spectrum, random_property_set, rotate_tensors,
                               sample_orientation, sample_rotations)
from carsroa.coherence import LocalOscillator
from carsroa.tensors import RealPropertySet, compute_invariants


def test_orientation_must_be_unit():
    with pytest.raises(ValueError):
        Orientation([1.0, 1.0, 0.0, 0.0])
    o = sample_orientation(np.random.default_rng(0))
    assert abs(np.linalg.norm(o.quaternion) - 1) < 1e-12
    np.testing.assert_allclose(o.matrix @ o.matrix.T, np.eye(3), atol=1e-14)


def test_identity_rotation_leaves_props_unchanged(rng):
    p = random_property_set(rng)
    q = rotate_tensors(p, Orientation([0.0, 0.0, 0.0, 1.0]))
    np.testing.assert_array_equal(q.alpha, p.alpha)
    np.testing.assert_array_equal(q.g_prime, p.g_prime)
    np.testing.assert_array_equal(q.a_tensor, p.a_tensor)


def test_quarter_turn_permutes_axes():
    p = RealPropertySet(np.diag([1.0, 2.0, 3.0]), np.zeros((3, 3)), np.zeros((3, 3, 3)))
    R = Rotation.from_euler("z", 90, degrees=True).as_matrix()
    np.testing.assert_allclose(rotate_tensors(p, R).alpha, np.diag([2.0, 1.0, 3.0]), atol=1e-15)


def test_batched_rotation_matches_single(rng):
    p = random_property_set(rng, chiral_scale=0.3)
    R = sample_rotations(rng, 4)
    batch = rotate_tensors(p, R)
    for i in range(4):
        r = R[i]
        np.testing.assert_allclose(batch.alpha[i], r @ p.alpha @ r.T, atol=1e-15)
        np.testing.assert_allclose(batch.g_prime[i], r @ p.g_prime @ r.T, atol=1e-15)
        ref = np.einsum("ia,jb,kc,abc->ijk", r, r, r, p.a_tensor)
        np.testing.assert_allclose(batch.a_tensor[i], ref, atol=1e-15)


def test_sample_stream_is_deterministic():
    a = sample_rotations(np.random.default_rng(5), 1000)
    b = sample_rotations(np.random.default_rng(5), 1000)
    assert np.array_equal(a, b)


def test_rotation_moments_are_isotropic():
    R = sample_rotations(np.random.default_rng(11), 10 ** 6)
    assert np.all(np.abs(R.mean(axis=0)) < 3e-3)
    # <R_ia R_jb> = delta_ij delta_ab / 3; each entry has variance <= 1/9 per sample
    second = np.einsum("nia,njb->iajb", R, R, optimize=True) / len(R)
    expected = np.einsum("ij,ab->iajb", np.eye(3), np.eye(3)) / 3
    assert np.max(np.abs(second - expected)) < 4 * np.sqrt(1 / 9 / len(R)) * 3


def test_constant_signal():
    est = mc_average_intensity(lambda R: np.ones(len(R)), 5000, 1)
    assert est.mean == 1.0 and est.std_error == 0.0 and est.n_samples == 5000


def test_minimum_sample_count():
    with pytest.raises(ValueError):
        mc_average_intensity(lambda R: np.ones(len(R)), 999, 1)


def test_std_error_shrinks_with_more_samples():
    f = lambda R: R[:, 0, 0] ** 2
    a = mc_average_intensity(f, 200_000, 3)
    b = mc_average_intensity(f, 400_000, 3)
    assert b.std_error / a.std_error == pytest.approx(1 / np.sqrt(2), rel=0.03)
    assert abs(a.mean - 1 / 3) < 3 * a.std_error + 1e-12


def test_chunk_merging_matches_pooled_statistics():
    n, seed = 3 * CHUNK + 123, 17
    est = mc_average_intensity(lambda R: R[:, 0, 1] + R[:, 2, 2] ** 3, n, seed)
    streams = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(4)]
    vals = []
    for k, s in enumerate(streams):
        R = sample_rotations(s, CHUNK if k < 3 else 123)
        vals.append(R[:, 0, 1] + R[:, 2, 2] ** 3)
    v = np.concatenate(vals)
    assert est.mean == pytest.approx(v.mean(), rel=1e-12)
    assert est.std_error == pytest.approx(v.std(ddof=1) / np.sqrt(n), rel=1e-10)


def test_generator_and_seed_inputs():
    f = lambda R: R[:, 1, 1]
    assert mc_average_intensity(f, 2000, 4).seed == 4
    assert mc_average_intensity(f, 2000, np.random.default_rng(4)).seed is None


def inv_of(p, w=1.0):
    return compute_invariants(p, w)


def test_achiral_analytic_channels_are_equal(rng):
    p = random_property_set(rng, chiral_scale=0.0)
    inv = inv_of(p)
    i_r, i_l = analytic_lin_cir(inv, 10.0, 0.3 + 0.4j)
    base = (45 * inv.a2 + 7 * inv.gamma2_alpha) / 90 * 100 * 0.25
    assert i_r == i_l == pytest.approx(base, rel=1e-15)


def test_circular_intensity_sum(rng):
    inv = inv_of(random_property_set(rng, chiral_scale=0.1))
    F = 0.6 - 0.2j
    for fn in (analytic_lin_cir, analytic_cir_lin):
        i_r, i_l = fn(inv, 7.0, F, omega_ratio=1.4)
        expected = (45 * inv.a2 + 7 * inv.gamma2_alpha) / 45 * 49 * abs(F) ** 2
        assert i_r + i_l == pytest.approx(expected, rel=1e-13)


def test_circular_input_difference_spectrum(rng):
    inv = inv_of(random_property_set(rng, chiral_scale=0.1), 1.3)
    c, r, N, F = 1.7, 1.25, 4.0, 0.1 + 0.9j
    i_r, i_l = analytic_cir_lin(inv, N, F, omega_ratio=r, c=c)
    expected = (2 * (180 * inv.aG_prime + 4 * inv.gamma2_G) / (90 * c)
                - 2 * r * 6 * inv.gamma2_A / (90 * c) + 2 * 2 * inv.gamma2_A / (90 * c))
    assert i_r - i_l == pytest.approx(expected * N * N * abs(F) ** 2, rel=1e-12)


def test_configurations_coincide_at_equal_frequencies(rng):
    inv = inv_of(random_property_set(rng, chiral_scale=0.1))
    a = analytic_lin_cir(inv, 3.0, 0.5, omega_ratio=1.0)
    b = analytic_cir_lin(inv, 3.0, 0.5, omega_ratio=1.0)
    assert a[0] - a[1] == pytest.approx(b[0] - b[1], rel=1e-13)
    a = analytic_lin_cir(inv, 3.0, 0.5, omega_ratio=1.5)
    b = analytic_cir_lin(inv, 3.0, 0.5, omega_ratio=1.5)
    assert a[0] - a[1] != pytest.approx(b[0] - b[1], rel=1e-6)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 32 - 1))
def test_analytic_intensities_are_rotation_invariant(seed):
    rng = np.random.default_rng(seed)
    p = random_property_set(rng, chiral_scale=0.05)
    q = rotate_tensors(p, sample_rotations(rng, 1)[0])
    lo = LocalOscillator(0.7, 0.3)
    for fn in (analytic_lin_cir, analytic_cir_lin):
        a = fn(inv_of(p), 5.0, 0.2 + 0.3j, lo=lo, omega_ratio=1.3)
        b = fn(inv_of(q), 5.0, 0.2 + 0.3j, lo=lo, omega_ratio=1.3)
        np.testing.assert_allclose(a, b, rtol=1e-10)


@pytest.mark.parametrize("fn, signal", [(analytic_lin_cir, lin_cir_signal),
                                        (analytic_cir_lin, cir_lin_signal)])
def test_monte_carlo_matches_analytic(fn, signal):
    rng = np.random.default_rng(2024)
    p = random_property_set(rng)
    inv = inv_of(p, 2.0)
    F, N = 0.8 - 0.3j, 3.0
    est = mc_average_intensity(signal(p, F, N, 2.0, 3.0), 200_000, 99)
    i_r, i_l = fn(inv, N, F, omega_ratio=1.5)
    z = np.abs(est.mean - [i_r, i_l, i_r - i_l]) / est.std_error
    assert np.all(z < 3), z


def test_local_oscillator_cross_terms_match_monte_carlo():
    rng = np.random.default_rng(8)
    p = random_property_set(rng, chiral_scale=0.02)
    inv = inv_of(p, 2.0)
    F, N = 0.5 + 0.5j, 2.0
    lo = LocalOscillator(1.5, 0.7)
    est = mc_average_intensity(lin_cir_signal(p, F, N, 2.0, 3.0, lo=lo), 200_000, 5)
    i_r, i_l = analytic_lin_cir(inv, N, F, lo=lo, omega_ratio=1.5)
    z = np.abs(est.mean - [i_r, i_l, i_r - i_l]) / est.std_error
    assert np.all(z < 3), z


def test_grid_monte_carlo_interpolates_exactly(rng):
    p = random_property_set(rng)
    grid = np.array([2.6, 3.0, 3.4])
    F = np.array([0.2, 0.9 + 0.1j, 0.3j])
    est = mc_spectrum(p, "lin-cir", 2.0, grid, F, 2.0, 4000, 3)
    for i in range(3):
        single = mc_average_intensity(lin_cir_signal(p, F[i], 2.0, 2.0, grid[i]), 4000, 3)
        np.testing.assert_allclose(est.mean[i], single.mean, rtol=1e-10)
