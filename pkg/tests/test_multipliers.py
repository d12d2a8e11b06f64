import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tpflow.core import Params, TPField, divergence_max, transform
from tpflow.multipliers import (
    apply_osc_inverse,
    apply_steady_oseen_inverse,
    gradient,
    helmholtz,
    project,
    recover_pressure,
    symbols,
)

PRM = Params(box_half_length=4.0, n_spatial=16, n_temporal=2)


def spectral_noise(seed, params=PRM, comps=3):
    rng = np.random.default_rng(seed)
    shape = (params.n_times,) + (params.n_spatial,) * 3 + (comps,)
    return transform(TPField("physical", rng.standard_normal(shape).astype(complex), params), "to_spectral")


class TestProjections:
    def test_complementary(self):
        f = spectral_noise(0)
        s, o = project(f, "steady"), project(f, "oscillatory")
        assert np.array_equal(s.data + o.data, f.data)
        assert np.abs(s.data[1:]).max() == 0 and np.abs(o.data[0]).max() == 0

    def test_unknown(self):
        with pytest.raises(ValueError):
            project(spectral_noise(0), "transient")

    def test_physical_rejected(self):
        f = transform(spectral_noise(0), "to_physical")
        with pytest.raises(ValueError):
            helmholtz(f)


class TestHelmholtz:
    def test_idempotent_and_solenoidal(self):
        P1 = helmholtz(spectral_noise(1))
        assert np.abs(helmholtz(P1).data - P1.data).max() < 1e-14 * P1.max_abs()
        assert divergence_max(P1) < 1e-13 * P1.max_abs()

    def test_removes_gradients(self):
        p = spectral_noise(2, comps=1)
        g = gradient(p)
        assert helmholtz(g).max_abs() < 1e-13 * g.max_abs()

    def test_pressure_recovers_gradient_part(self):
        f = spectral_noise(3)
        p = recover_pressure(f)
        rebuilt = helmholtz(f).data + gradient(p).data
        rebuilt[:, 0, 0, 0] = f.data[:, 0, 0, 0]
        assert np.abs(rebuilt - f.data).max() < 1e-13 * f.max_abs()

    @settings(max_examples=10, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_commutes_with_projection(self, seed):
        f = spectral_noise(seed)
        a = helmholtz(project(f, "oscillatory")).data
        b = project(helmholtz(f), "oscillatory").data
        assert np.array_equal(a, b)


class TestInverses:
    def test_oscillatory_inverse_roundtrip(self):
        S = symbols(PRM)
        w = project(helmholtz(spectral_noise(4)), "oscillatory")
        back = apply_osc_inverse(w.like(S.osc_den[..., None] * w.data))
        assert np.abs(back.data - w.data).max() < 1e-13 * w.max_abs()

    def test_oscillatory_inverse_kills_steady_part(self):
        out = apply_osc_inverse(project(spectral_noise(5), "steady"))
        assert out.max_abs() == 0

    def test_steady_inverse_solves_oseen(self):
        S = symbols(PRM)
        f = project(spectral_noise(6), "steady")
        v = apply_steady_oseen_inverse(f)
        Hf = helmholtz(f).data[0]
        lhs = S.steady_den[..., None] * v.data[0]
        mask = (S.xi2[0] > 0)[..., None]
        assert np.abs(np.where(mask, lhs - Hf, 0)).max() < 1e-13 * np.abs(Hf).max()
        assert np.abs(v.data[0, 0, 0, 0]).max() == 0
        assert np.abs(v.data[1:]).max() == 0

    def test_symbols_read_only(self):
        S = symbols(PRM)
        with pytest.raises(ValueError):
            S.osc_den[0, 0, 0, 0] = 1.0
