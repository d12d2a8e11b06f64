import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from tpflow import _kernels_np
from tpflow.core import Params
from tpflow.kernels import (
    mode_scalar_kernel,
    mode_velocity_batch,
    mode_velocity_kernel,
    oseen_E,
    oseen_gamma,
    oseen_gamma_batch,
    oseen_phi,
    sqrt_nnr,
    tp_kernel_l2t,
    tp_kernel_timeslice,
    _param_nodes,
)

P = Params()


def fd_hessian(fn, x, h=1e-3):
    H = np.zeros((3, 3) + np.shape(fn(x)), dtype=np.result_type(fn(x), float))
    E = np.eye(3) * h
    for i in range(3):
        for j in range(3):
            H[i, j] = (fn(x + E[i] + E[j]) - fn(x + E[i] - E[j]) - fn(x - E[i] + E[j])
                       + fn(x - E[i] - E[j])) / (4 * h * h)
    return H


class TestOseenE:
    @pytest.mark.parametrize("s", [1e-8, 0.3, 1.0, 2.5, 10.0, 60.0, -3.0])
    def test_against_quadrature(self, s):
        ref, _ = quad(lambda t: -np.expm1(-t) / t, 0, s, epsabs=0, epsrel=1e-13, limit=200)
        assert oseen_E(np.array(s)) == pytest.approx(ref, rel=1e-13)

    def test_small_argument_series(self):
        s = np.array([1e-12])
        assert oseen_E(s)[0] == pytest.approx(1e-12, rel=1e-10)


class TestOseenTensor:
    @pytest.mark.parametrize("x", [(1.0, 0.5, -0.3), (-2.0, 1.0, 0.5), (0.2, -0.1, 3.0)])
    @pytest.mark.parametrize("lam", [1.0, -0.7])
    def test_matches_potential_hessian(self, x, lam):
        x = np.array(x)
        H = fd_hessian(lambda y: oseen_phi(y, lam), x)
        ref = np.trace(H) * np.eye(3) - H
        G = oseen_gamma_batch(x, lam)
        assert np.abs(G - ref).max() < 1e-5 * np.abs(G).max()

    def test_symmetric_and_divergence_free(self):
        X = np.random.default_rng(0).normal(size=(50, 3)) * 5
        G, dG = oseen_gamma_batch(X, 1.3, deriv=1)
        assert np.abs(G - np.swapaxes(G, -1, -2)).max() < 1e-15
        div = np.einsum("...iij->...j", dG)
        assert np.abs(div).max() < 1e-10 * np.abs(dG).max()

    def test_gradient_by_finite_differences(self):
        x = np.array([1.2, -0.4, 0.9])
        _, dG = oseen_gamma_batch(x, 1.0, deriv=1)
        h = 1e-5
        for m in range(3):
            e = np.eye(3)[m] * h
            fd = (oseen_gamma_batch(x + e, 1.0) - oseen_gamma_batch(x - e, 1.0)) / (2 * h)
            assert np.abs(dG[m] - fd).max() < 1e-7

    def test_stokes_limit(self):
        # |lam x| << 1: Oseen tensor -> (delta / r + x x^T / r^3) / (8 pi)
        x = np.array([0.6, 0.5, -0.6])
        r = np.linalg.norm(x)
        stokes = (np.eye(3) / r + np.outer(x, x) / r**3) / (8 * np.pi)
        G = oseen_gamma_batch(x, 1e-5)
        assert np.abs(G - stokes).max() < 1e-4 * np.abs(stokes).max()

    def test_reflection_flips_drift(self):
        x = np.array([1.5, 0.3, -0.8])
        R = np.diag([-1.0, 1.0, 1.0])
        assert np.allclose(oseen_gamma_batch(x, -1.0), R @ oseen_gamma_batch(R @ x, 1.0) @ R, rtol=1e-13)

    def test_zero_drift_rejected(self):
        with pytest.raises(ValueError, match="drift required"):
            oseen_gamma((1.0, 0.0, 0.0), 0.0)

    def test_kernel_tensor_metadata(self):
        kt = oseen_gamma((1.0, 2.0, 2.0), 1.0, deriv=1)
        assert kt.entries.shape == (3, 3, 3)
        assert kt.mode == "steady" and kt.deriv_order == 1


class TestModeScalarKernel:
    @pytest.mark.parametrize("k", [1, 3, -2])
    def test_solves_homogeneous_equation(self, k):
        x = np.array([0.8, -0.5, 0.4])
        om = P.omega * k
        H = fd_hessian(lambda y: mode_scalar_kernel(k, y, P.lam, P.period), x, h=2e-3)
        g = mode_scalar_kernel(k, x, P.lam, P.period, 1)
        G = mode_scalar_kernel(k, x, P.lam, P.period)
        res = -np.trace(H) - P.lam * g[0] + 1j * om * G
        assert abs(res) < 1e-4 * abs(G)

    def test_branch_has_nonnegative_real_part(self):
        z = sqrt_nnr(np.array([1j, -1j, 4 + 0j, 1j * 50 + 0.25]))
        assert np.all(z.real >= 0)

    def test_zero_mode_rejected(self):
        with pytest.raises(ValueError):
            mode_scalar_kernel(0, np.ones(3), 1.0, 2 * np.pi)


class TestModeVelocityKernel:
    X = np.array([[1.0, 0.5, -0.3], [-2.5, 1.0, 0.7], [0.3, 3.0, -1.2]])

    def test_divergence_free(self):
        _, dV = mode_velocity_batch(2, self.X, P, grad=True)
        assert np.abs(np.einsum("pjjl->pl", dV)).max() < 1e-9 * np.abs(dV).max()

    def test_gradient_by_finite_differences(self):
        V, dV = mode_velocity_batch(1, self.X, P, grad=True)
        h = 1e-5
        for m in range(3):
            e = np.eye(3)[m] * h
            fd = (mode_velocity_batch(1, self.X + e, P) - mode_velocity_batch(1, self.X - e, P)) / (2 * h)
            assert np.abs(dV[:, m] - fd).max() < 1e-7 * np.abs(dV).max()

    def test_negative_mode_is_conjugate(self):
        assert np.allclose(mode_velocity_batch(-3, self.X, P), np.conj(mode_velocity_batch(3, self.X, P)),
                           rtol=0, atol=1e-15)

    def test_parametric_matches_convolution(self):
        Vp = mode_velocity_batch(1, self.X[:2], P)
        Vc = mode_velocity_batch(1, self.X[:2], P, "convolution")
        assert np.abs(Vp - Vc).max() < 1e-4 * np.abs(Vc).max()

    def test_gradient_only_from_parametric(self):
        with pytest.raises(ValueError):
            mode_velocity_batch(1, self.X, P, "convolution", grad=True)

    def test_single_point_tensor(self):
        kt = mode_velocity_kernel(2, (1.0, 1.0, 0.0), P)
        assert kt.entries.shape == (3, 3) and kt.mode == 2

    def test_backends_agree(self):
        from tpflow import _backend

        if _backend.BACKEND != "cython":
            pytest.skip("compiled extension not built")
        from tpflow import _ext

        u, w = _param_nodes()
        a = _ext.param_mode_kernel(self.X, 1.0, 2.0, u, w, True)
        b = _kernels_np.param_mode_kernel(self.X, 1.0, 2.0, u, w, True)
        assert np.abs(a[0] - b[0]).max() < 1e-14 * np.abs(b[0]).max()
        assert np.abs(a[1] - b[1]).max() < 1e-14 * np.abs(b[1]).max()


class TestTimePeriodicKernel:
    def test_time_slice_is_real_and_periodic(self):
        x = np.array([2.0, -1.0, 0.5])
        a = tp_kernel_timeslice(0.3, x, P, 4)
        b = tp_kernel_timeslice(0.3 + P.period, x, P, 4)
        assert a.dtype == float and np.allclose(a, b, rtol=1e-12)

    def test_zero_time_average(self):
        x = np.array([1.0, 1.0, 1.0])
        ts = P.period * np.arange(9) / 9
        avg = np.mean([tp_kernel_timeslice(t, x, P, 4) for t in ts], axis=0)
        assert np.abs(avg).max() < 1e-15

    @pytest.mark.parametrize("k_max", [0, 9])
    def test_k_max_range(self, k_max):
        with pytest.raises(ValueError):
            tp_kernel_timeslice(0.0, np.ones(3), P, k_max)

    def test_origin_rejected(self):
        with pytest.raises(ValueError):
            tp_kernel_l2t(np.zeros(3), P, 2)

    @settings(max_examples=8, deadline=None)
    @given(st.tuples(*[st.floats(-6, 6)] * 3).filter(lambda v: np.linalg.norm(v) > 0.5))
    def test_parseval(self, x):
        x = np.array(x)
        ts = P.period * np.arange(9) / 9
        direct = np.sqrt(np.mean([np.sum(tp_kernel_timeslice(t, x, P, 4) ** 2) for t in ts]))
        assert tp_kernel_l2t(x, P, 4) == pytest.approx(direct, rel=1e-12)
