import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from tpflow.asymptotics import (
    SCAN_DIRECTIONS,
    downstream_axis,
    expansion_scan,
    farfield_linear,
    fit_decay,
    forcing_mean,
    mean_force,
    profile,
    remainder,
    wake_scan,
)
from tpflow.core import Params
from tpflow.kernels import oseen_gamma_batch
from tpflow.solver import ForcingSpec, sample_forcing

P = Params()
MIXED = ForcingSpec(radius=2.0, amplitude=(1.0, 0.5, 0.0), time_profile="mixed", weights=((0, 1.0), (1, 1.0)))


class TestFitDecay:
    @settings(max_examples=25, deadline=None)
    @given(alpha=st.floats(0.1, 5.0), c=st.floats(1e-3, 1e3))
    def test_exact_power_law(self, alpha, c):
        r = np.geomspace(2, 20, 6)
        f = fit_decay(r, c * r**-alpha)
        assert f.alpha == pytest.approx(alpha, abs=1e-9)
        assert f.c_fit == pytest.approx(c, rel=1e-8)
        assert f.r_squared == pytest.approx(1.0)

    @pytest.mark.parametrize(
        "r, v",
        [
            ([1, 2, 3], [1, 1, 1]),
            ([1, 2, 3, 3.5], [1, 1, 1, 1]),
            ([1, 3, 2, 8], [1, 1, 1, 1]),
            ([1, 2, 4, 8], [1, 0, 1, 1]),
        ],
    )
    def test_rejects_bad_samples(self, r, v):
        with pytest.raises(ValueError):
            fit_decay(r, v)


class TestProfile:
    def test_downstream_axis_follows_drift(self):
        assert downstream_axis(2.0)[0] == -1 and downstream_axis(-2.0)[0] == 1

    def test_quadrature_mean(self):
        spec = ForcingSpec(radius=2.0, amplitude=(1.0, 0.0, 0.0))
        ref = 4 * np.pi * quad(lambda r: r * r * np.exp(-1 / (1 - (r / 2) ** 2)), 0, 2,
                               epsabs=0, epsrel=1e-13)[0]
        assert forcing_mean(spec, 2)[0] == pytest.approx(ref, rel=1e-6)
        # the lattice sum converges to the same value, more slowly
        p = Params(box_half_length=8.0, n_spatial=64, n_temporal=1)
        assert mean_force(sample_forcing(spec, p))[0] == pytest.approx(ref, rel=1e-3)

    def test_profile_is_oseen_times_mean(self):
        x = np.array([[12.0, 3.0, -1.0]])
        c = np.array([0.3, -0.2, 0.1])
        assert np.allclose(profile(x, c, 1.0), oseen_gamma_batch(x, 1.0) @ c)

    def test_wake_scan_monotone(self):
        fits = wake_scan(1.0, np.linspace(0, np.pi, 5), np.geomspace(5, 80, 8))
        a = [f.alpha for f in fits]
        assert a[0] == pytest.approx(1.0, abs=0.02)
        assert all(y >= x for x, y in zip(a, a[1:]))


class TestFarField:
    def test_remainder_is_linear_minus_profile(self):
        x = np.array([15.0, 2.0, 0.0])
        u = farfield_linear(0.7, x, MIXED, P)
        prof = profile(x[None], forcing_mean(MIXED), P.lam)[0]
        assert np.allclose(remainder(0.7, x, MIXED, P), u - prof, rtol=1e-13)

    def test_margin_enforced(self):
        with pytest.raises(ValueError, match="far-field"):
            farfield_linear(0.0, np.array([3.0, 0, 0]), MIXED, P)

    def test_steady_forcing_has_no_time_dependence(self):
        spec = ForcingSpec(radius=2.0, amplitude=(1.0, 0.0, 0.0))
        x = np.array([0.0, 20.0, 0.0])
        assert np.allclose(farfield_linear(0.0, x, spec, P), farfield_linear(1.3, x, spec, P))

    def test_expansion_scan_rows(self):
        radii = np.geomspace(10, 40, 4)
        rep, rows = expansion_scan(MIXED, P, radii, directions={"e2": SCAN_DIRECTIONS["e2"]})
        assert len(rows) == 3 * len(radii)
        assert {q for _, _, q, _ in rows} == {"remainder", "profile", "oscillatory_l2t"}
        assert rep.to_dict()["pass"] is rep.passed
        assert rep.fits[0].alpha >= 1.4
