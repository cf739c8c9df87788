import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dugks.kinetic import (KineticModel, Variant, equilibrium, f_hat_from_f, f_hat_plus_from_f_tilde,
                           f_original_from_f_hat, f_tilde_from_f_bar, f_tilde_plus, source_term,
                           theta)
from dugks.lattice import D2Q9

W_ = D2Q9.weights
XI = D2Q9.velocities
CS2 = D2Q9.cs2
A = KineticModel(Variant.A, 4.0, 0.004)
B = KineticModel(Variant.B, 4.0, 0.004)


def test_theta_examples():
    assert theta(0.0, 4.0) == 0.5
    assert theta(1.0, 7.0) == 0.0 and theta(-1.0, 2.0) == 0.0
    W = 4.0
    assert theta(np.tanh(1.0), W) == pytest.approx(0.209987, abs=1e-6)


@pytest.mark.parametrize("s", [-3.0, -0.7, 0.0, 1.3, 2.0])
def test_theta_is_profile_slope(s):
    # dphi/ds of the equilibrium profile tanh(2s/W) equals Theta(phi)
    W, d = 4.0, 1e-5
    prof = lambda r: np.tanh(2 * r / W)
    fd = (prof(s + d) - prof(s - d)) / (2 * d)
    assert theta(prof(s), W) == pytest.approx(fd, rel=1e-8)


def test_equilibrium_examples():
    for m in (A, B):
        np.testing.assert_allclose(equilibrium(m, 0.3, [0.0, 0.0]), 0.3 * W_, atol=1e-16)
    assert equilibrium(B, 1.0, [0.02, 0.0])[1] == pytest.approx(1.06 / 9, abs=1e-15)
    # termwise second-order form for the east population
    xu = 0.02
    want = (1 / 9) * (1 + xu / CS2 + xu**2 / (2 * CS2**2) - xu**2 / (2 * CS2))
    assert equilibrium(A, 1.0, [0.02, 0.0])[1] == pytest.approx(want, abs=1e-15)


def test_source_examples():
    assert np.all(source_term(A, 0.0, [0.6, 0.8]) == 0.0)
    assert np.all(source_term(B, 0.0, [0.6, 0.8], [0.0, 0.0]) == 0.0)
    np.testing.assert_allclose(source_term(A, 0.5, [1.0, 0.0]) @ XI, [CS2 * 0.5, 0.0], atol=1e-16)
    np.testing.assert_allclose(source_term(B, 0.0, [1.0, 0.0], [0.001, 0.0]) @ XI, [0.001, 0.0],
                               atol=1e-16)
    # variant A ignores the time-derivative term
    np.testing.assert_array_equal(source_term(A, 0.3, [0.0, 1.0], [5.0, 5.0]),
                                  source_term(A, 0.3, [0.0, 1.0]))


unit = st.floats(-1.0, 1.0)
small = st.floats(-0.07, 0.07)


@settings(max_examples=1000, deadline=None)
@given(unit, small, small, st.floats(0, 2 * np.pi), st.floats(0, 1.0), small, small)
def test_moment_identities(phi, ux, uy, ang, th, dx, dy):
    u = np.array([ux, uy])
    n = np.array([np.cos(ang), np.sin(ang)])
    for m in (A, B):
        feq = equilibrium(m, phi, u)
        assert abs(feq.sum() - phi) < 1e-13
        np.testing.assert_allclose(feq @ XI, phi * u, rtol=0, atol=1e-13)
        F = source_term(m, th, n, [dx, dy])
        assert abs(F.sum()) < 1e-13
    feq = equilibrium(A, phi, u)
    np.testing.assert_allclose(np.einsum("a,ai,aj->ij", feq, XI, XI),
                               CS2 * phi * np.eye(2) + phi * np.outer(u, u), rtol=0, atol=1e-13)
    np.testing.assert_allclose(source_term(A, th, n) @ XI, CS2 * th * n, rtol=0, atol=1e-13)
    np.testing.assert_allclose(source_term(B, th, n, [dx, dy]) @ XI, CS2 * th * n + [dx, dy],
                               rtol=0, atol=1e-13)


def test_batched_shapes():
    phi = np.random.default_rng(0).uniform(-1, 1, (4, 5))
    u = np.zeros((4, 5, 2))
    assert equilibrium(A, phi, u).shape == (4, 5, 9)
    assert source_term(B, theta(phi, 4.0), u, u).shape == (4, 5, 9)


def test_transform_example():
    got = f_hat_plus_from_f_tilde(np.ones(9), np.zeros(9), np.zeros(9), 0.004, 0.5)
    np.testing.assert_allclose(got, (0.008 - 0.25) / 0.508, rtol=1e-15)
    assert got[0] == pytest.approx(-0.476378, abs=1e-6)


vec9 = st.lists(st.floats(-2, 2), min_size=9, max_size=9).map(np.array)


@settings(max_examples=500, deadline=None)
@given(vec9, vec9, vec9, st.floats(1e-4, 10.0), st.floats(0.01, 2.0))
def test_transform_identities(ft, feq, F, tau, dt):
    s = 0.5 * dt
    hp = f_hat_plus_from_f_tilde(ft, feq, F, tau, dt)
    tp = f_tilde_plus(ft, feq, F, tau, dt)
    np.testing.assert_allclose(tp, 4 / 3 * hp - 1 / 3 * ft, rtol=0, atol=1e-14 * 8)
    # fixed point at equilibrium
    np.testing.assert_allclose(f_hat_plus_from_f_tilde(feq, feq, 0 * F, tau, dt), feq, atol=1e-14)
    np.testing.assert_allclose(f_tilde_plus(feq, feq, 0 * F, tau, dt), feq, atol=1e-14)
    np.testing.assert_allclose(f_original_from_f_hat(feq, feq, 0 * F, tau, s), feq, atol=1e-14)
    # round trips of the inverse pairs
    f = ft
    np.testing.assert_allclose(f_original_from_f_hat(f_hat_from_f(f, feq, F, tau, s), feq, F, tau, s),
                               f, rtol=0, atol=1e-14 * max(1.0, s / tau))
    # fbar -> ftilde is the same affine form with dt in place of s
    fb = f_original_from_f_hat(f, feq, F, tau, dt)
    np.testing.assert_allclose(f_tilde_from_f_bar(fb, feq, F, tau, dt), f, rtol=0,
                               atol=1e-14 * max(1.0, dt / tau))


@pytest.mark.parametrize("fn,step", [(f_hat_plus_from_f_tilde, 0.5), (f_tilde_plus, 0.5),
                                     (f_original_from_f_hat, 0.25)])
def test_transforms_affine_probe(fn, step):
    # coefficients found by probing unit inputs; the first two sum to one
    z, o = np.zeros(9), np.ones(9)
    a = fn(o, z, z, 0.004, step)[0]
    b = fn(z, o, z, 0.004, step)[0]
    c = fn(z, z, o, 0.004, step)[0]
    assert a + b == pytest.approx(1.0, abs=1e-15)
    rng = np.random.default_rng(1)
    x, y, w = rng.normal(size=(3, 9))
    np.testing.assert_allclose(fn(x, y, w, 0.004, step), a * x + b * y + c * w, atol=1e-14)


def test_transform_limits():
    rng = np.random.default_rng(2)
    fh, feq, F = rng.normal(size=(3, 9))
    np.testing.assert_array_equal(f_original_from_f_hat(fh, feq, F, 0.004, 0.0), fh)
    ft = rng.normal(size=9)
    np.testing.assert_allclose(f_tilde_plus(ft, feq, F, 1e9, 0.5), ft + 0.5 * F, atol=1e-8)
    np.testing.assert_allclose(f_tilde_plus(ft, feq, 0 * F, 1e9, 0.5), ft, atol=1e-9)


def test_moment0_preserved_by_transforms():
    rng = np.random.default_rng(3)
    feq = equilibrium(A, 0.4, [0.01, -0.02])
    F = source_term(A, 0.3, [0.6, 0.8])
    ft = feq + 0.01 * rng.normal(size=9)
    ft += (feq.sum() - ft.sum()) / 9
    assert f_hat_plus_from_f_tilde(ft, feq, F, 0.004, 0.5).sum() == pytest.approx(0.4, abs=1e-15)
    assert f_tilde_plus(ft, feq, F, 0.004, 0.5).sum() == pytest.approx(0.4, abs=1e-15)


def test_model_construction():
    m = KineticModel.from_peclet("A", 4.0, 60.0, 0.02)
    assert m.tau_f == pytest.approx(0.004, rel=1e-14)
    assert m.mobility == pytest.approx(0.02 * 4.0 / 60.0)
    assert m.variant is Variant.A
    assert Variant.parse("b") is Variant.B
    with pytest.raises(ValueError):
        Variant.parse("C")
    with pytest.raises(ValueError):
        KineticModel(Variant.A, 0.0, 0.004)
    with pytest.raises(ValueError):
        KineticModel(Variant.A, 4.0, -1.0)
    with pytest.raises(ValueError):
        KineticModel.from_peclet(Variant.A, 4.0, 0.0, 0.02)
