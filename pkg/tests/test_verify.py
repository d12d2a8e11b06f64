import numpy as np
import pytest

from tpflow.core import Params, TPField
from tpflow.solver import Solution
from tpflow.verify import (
    CLAIMS,
    VerificationReport,
    energy_balance,
    run_claim,
    verify_energy_flux,
    verify_expansion,
    verify_integrability,
    verify_mode_kernel_bounds,
    verify_oseen_props,
    verify_symbol_nonvanishing,
)
from tpflow.solver import ForcingSpec


class TestReport:
    def test_pass_iff_all_thresholds_met(self):
        ok = VerificationReport("x", {"a": 1.0, "b": 3}, {"a": ["<=", 1.0], "b": ["==", 3]})
        bad = VerificationReport("x", {"a": 1.1, "b": 3}, {"a": ["<=", 1.0], "b": ["==", 3]})
        assert ok.passed and not bad.passed
        assert bad.failures() == ["a"]

    def test_threshold_without_measurement(self):
        with pytest.raises(ValueError):
            VerificationReport("x", {}, {"a": ["<=", 1.0]})

    def test_json_has_no_runtime_by_default(self):
        d = VerificationReport("x", {"a": 1.0}, {"a": [">", 0]}).to_dict()
        assert "runtime_seconds" not in d and d["pass"] is True


class TestCoverageManifest:
    # every quantitative claim of the far-field theory has a check
    EXPECTED = {
        "symbol_nonvanishing",
        "mode_kernel_bounds",
        "dual_route",
        "tp_kernel_decay",
        "integrability",
        "oseen_properties",
        "multiplier_exactness",
        "solver_small_data",
        "energy_flux",
        "expansion",
    }

    def test_registry_complete(self):
        assert set(CLAIMS) == self.EXPECTED
        assert all(isinstance(desc, str) and desc for desc, _ in CLAIMS.values())

    def test_unknown_claim(self):
        with pytest.raises(KeyError):
            run_claim("nope", Params())


class TestPreconditions:
    def test_integrability_rejects_untested_exponent(self):
        with pytest.raises(ValueError, match="outside"):
            verify_integrability(Params(), r_list=(1.8,))

    def test_integrability_gradient_endpoint_allowed_range(self):
        with pytest.raises(ValueError):
            verify_integrability(Params(), r_grad=(1.34,))

    def test_oseen_requires_drift(self):
        with pytest.raises(ValueError, match="drift required"):
            verify_oseen_props(0.0)

    def test_mode_bounds_reject_zero_mode(self):
        with pytest.raises(ValueError):
            verify_mode_kernel_bounds(Params(), k_set=[0, 1])

    def test_zero_mean_dominance_is_vacuous(self):
        spec = ForcingSpec(radius=2.0, time_profile="cosine")
        with pytest.raises(ValueError, match="vacuous"):
            verify_expansion(spec, Params())


class TestSymbol:
    def test_small_lattice(self):
        rep = verify_symbol_nonvanishing(Params(box_half_length=4.0, n_spatial=32, n_temporal=2))
        assert rep.passed
        assert rep.measured["zero_count"] == 1


class TestEnergy:
    def test_zero_solution(self, small):
        z = TPField.zeros(small)
        p = TPField.zeros(small, components=1)
        bal = energy_balance(z, p, z, [1.0, 2.0])
        assert all(v == 0 for part in bal.values() for v in part.values())

    def test_ball_integral_of_plane_wave(self, small):
        # |grad u|^2 for u = (0, sin(xi x1), 0) integrates in closed form
        from tpflow.core import build_lattice, transform

        lat = build_lattice(small)
        x1, _, _ = lat.points()
        xi = lat.spatial_freqs[3]
        data = np.zeros(lat.shape + (3,), complex)
        data[..., 1] = np.sin(xi * x1)
        u = transform(TPField("physical", data, small), "to_spectral")
        bal = energy_balance(u, TPField.zeros(small, 1), TPField.zeros(small), [2.0])
        R = 2.0
        # int_B xi^2 cos^2(xi x1) dx = xi^2 / 2 * (vol + int_B cos(2 xi x1))
        z = 2 * xi * R
        ball_cos = 4 * np.pi * R**3 * (np.sin(z) - z * np.cos(z)) / z**3
        ref = 0.5 * xi**2 * (4 * np.pi * R**3 / 3 + ball_cos)
        assert bal["dirichlet"][R] == pytest.approx(ref, rel=1e-12)

    def test_shell_outside_box_rejected(self, small):
        z = TPField.zeros(small)
        sol = Solution(z, TPField.zeros(small, 1), [0.0], 1, True, 0.0)
        with pytest.raises(ValueError, match="trusted"):
            verify_energy_flux(sol, z, [(2.0, 6.0)])

    def test_unconverged_rejected(self, small):
        z = TPField.zeros(small)
        sol = Solution(z, TPField.zeros(small, 1), [1.0], 30, False, 0.0)
        with pytest.raises(ValueError, match="converged"):
            verify_energy_flux(sol, z, [(1.0, 2.0)])
