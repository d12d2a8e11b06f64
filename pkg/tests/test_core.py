import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tpflow.core import (
    Params,
    TPField,
    build_lattice,
    dealias_mask,
    divergence_max,
    dump_field,
    load_field,
    lp_norm,
    parseval_norm2,
    transform,
)


def real_field(params, seed, comps=3):
    rng = np.random.default_rng(seed)
    shape = (params.n_times,) + (params.n_spatial,) * 3 + (comps,)
    return TPField("physical", rng.standard_normal(shape).astype(complex), params)


class TestParams:
    def test_defaults(self):
        p = Params()
        assert (p.lam, p.n_spatial, p.n_temporal, p.box_half_length) == (1.0, 64, 8, 16.0)
        assert p.n_times == 17
        assert p.spacing == pytest.approx(0.5)

    @pytest.mark.parametrize(
        "kw, msg",
        [
            ({"period": 0.0}, "period"),
            ({"box_half_length": -1.0}, "box_half_length"),
            ({"n_spatial": 15}, "n_spatial"),
            ({"n_temporal": 0}, "n_temporal"),
            ({"max_iter": 0}, "max_iter"),
        ],
    )
    def test_rejects(self, kw, msg):
        with pytest.raises(ValueError, match=msg):
            Params(**kw)

    def test_frozen(self):
        with pytest.raises(AttributeError):
            Params().lam = 2.0

    def test_zero_drift_rejected_at_lattice(self):
        with pytest.raises(ValueError, match="drift required"):
            build_lattice(Params(lam=0.0))


class TestLattice:
    def test_frequencies(self, tiny):
        lat = build_lattice(tiny)
        assert lat.shape == (5, 16, 16, 16)
        assert lat.spatial_freqs[1] == pytest.approx(np.pi / tiny.box_half_length)
        assert lat.axis_points[0] == -tiny.box_half_length
        assert lat.temporal_freqs[1] == pytest.approx(tiny.omega)


class TestTransform:
    def test_roundtrip(self, tiny):
        f = real_field(tiny, 0)
        g = transform(transform(f, "to_spectral"), "to_physical")
        assert np.abs(g.data - f.data).max() < 1e-13

    def test_mean_normalisation(self, tiny):
        f = TPField("physical", np.full((5, 16, 16, 16, 1), 2.5 + 0j), tiny)
        fh = transform(f, "to_spectral")
        assert fh.data[0, 0, 0, 0, 0] == pytest.approx(2.5)
        assert np.abs(fh.data).sum() == pytest.approx(2.5)

    def test_plane_wave_coefficient(self, tiny):
        # exp(i xi x) with centred coordinates lands on a single coefficient
        lat = build_lattice(tiny)
        x1, _, _ = lat.points()
        xi = lat.spatial_freqs[2]
        data = np.broadcast_to(np.exp(1j * xi * x1), (5, 16, 16, 16))[..., None].astype(complex)
        fh = transform(TPField("physical", data.copy(), tiny), "to_spectral")
        assert fh.data[0, 2, 0, 0, 0] == pytest.approx(1.0)

    def test_hermitian_symmetry_of_real_fields(self, tiny):
        fh = transform(real_field(tiny, 1), "to_spectral").data
        flipped = np.conj(np.roll(np.flip(fh, axis=(0, 1, 2, 3)), 1, axis=(0, 1, 2, 3)))
        assert np.abs(fh - flipped).max() < 1e-14

    def test_wrong_direction(self, tiny):
        with pytest.raises(ValueError):
            transform(real_field(tiny, 0), "to_spectral_x")

    @settings(max_examples=10, deadline=None)
    @given(seed=st.integers(0, 2**31 - 1))
    def test_parseval(self, seed):
        p = Params(box_half_length=3.0, n_spatial=8, n_temporal=1)
        f = real_field(p, seed)
        direct = (2 * p.box_half_length) ** 3 * np.mean(np.sum(np.abs(f.data) ** 2, axis=-1))
        assert parseval_norm2(transform(f, "to_spectral")) == pytest.approx(direct, rel=1e-12)


class TestNorms:
    def test_constant_field_norm(self, tiny):
        f = TPField("physical", np.ones((5, 16, 16, 16, 1), complex), tiny)
        vol = (2 * tiny.box_half_length) ** 3
        assert lp_norm(f, 2.0) == pytest.approx(np.sqrt(vol))

    def test_nested_regions_monotone(self, tiny):
        f = real_field(tiny, 2)
        a = lp_norm(f, 1.5, ("ball", 1.0))
        b = lp_norm(f, 1.5, ("ball", 2.0))
        c = lp_norm(f, 1.5, ("shell", 1.0, 2.0))
        assert a <= b
        assert b**1.5 == pytest.approx(a**1.5 + c**1.5)

    def test_dealias_mask_fraction(self, small):
        m = dealias_mask(small)
        assert m[0, 0, 0, 0]
        assert not m[:, small.n_spatial // 2].any()

    def test_divergence_of_gradient_field_is_not_zero(self, tiny):
        fh = transform(real_field(tiny, 3), "to_spectral")
        assert divergence_max(fh) > 0


class TestDump:
    def test_roundtrip(self, tiny, tmp_path):
        fh = transform(real_field(tiny, 4), "to_spectral")
        dump_field(fh, tmp_path / "f.bin")
        g = load_field(tmp_path / "f.bin")
        assert g.params.n_spatial == tiny.n_spatial
        assert np.array_equal(g.data, fh.data)
        assert (tmp_path / "f.bin").stat().st_size == fh.data.size * 16
