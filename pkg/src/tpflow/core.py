"""Discretised space-time lattice, time-periodic fields, transforms and norms.

The whole space is replaced by the periodic box [-L, L)^3 and one period of
time is sampled at ``2N + 1`` equispaced instants.  Spectral coefficients use
the time-space *average* normalisation, so the coefficient at ``(k, xi) =
(0, 0)`` is the mean of the field over one period and the box.  Integrals over
the box are therefore ``(2L)^3`` times the corresponding average.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

__all__ = [
    "Params",
    "Lattice",
    "TPField",
    "build_lattice",
    "lattice_of",
    "transform",
    "divergence_max",
    "lp_norm",
    "parseval_norm2",
    "dealias_mask",
    "dump_field",
    "load_field",
]


@dataclass(frozen=True)
class Params:
    """Physical and discretisation parameters.

    ``lam`` is the drift parameter lambda; it must be nonzero for anything
    that builds a lattice, but a few kernel routines accept ``lam = 0`` for
    cross-checks, so the check lives in :func:`build_lattice`.
    """

    lam: float = 1.0
    period: float = 2 * np.pi
    box_half_length: float = 16.0
    n_spatial: int = 64
    n_temporal: int = 8
    dealias: bool = True
    tol_div: float = 1e-10
    tol_solver: float = 1e-8
    max_iter: int = 30

    def __post_init__(self):
        if not self.period > 0:
            raise ValueError("period must be positive")
        if not self.box_half_length > 0:
            raise ValueError("box_half_length must be positive")
        if self.n_spatial < 4 or self.n_spatial % 2:
            raise ValueError("n_spatial must be an even integer >= 4")
        if self.n_temporal < 1:
            raise ValueError("n_temporal must be >= 1")
        if self.tol_div < 0 or not self.tol_solver > 0:
            raise ValueError("tolerances must be nonnegative (tol_solver > 0)")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")

    @property
    def n_times(self) -> int:
        return 2 * self.n_temporal + 1

    @property
    def spacing(self) -> float:
        return 2 * self.box_half_length / self.n_spatial

    @property
    def omega(self) -> float:
        """Fundamental angular frequency 2 pi / T."""
        return 2 * np.pi / self.period

    def with_(self, **changes) -> "Params":
        return replace(self, **changes)


@dataclass(frozen=True)
class Lattice:
    """Dual-group points and physical sample points of the truncated group.

    Frequency arrays are stored in numpy FFT order.
    """

    params: Params
    spatial_freqs: np.ndarray  # (n,) xi values along one axis
    spatial_index: np.ndarray  # (n,) integer m along one axis
    temporal_freqs: np.ndarray  # (2N+1,) omega_k
    temporal_index: np.ndarray  # (2N+1,) integer k
    axis_points: np.ndarray  # (n,) x_j = -L + j h
    times: np.ndarray  # (2N+1,) t_j = j T / (2N+1)
    cell_volume: float
    time_weight: float

    @property
    def shape(self) -> tuple[int, int, int, int]:
        n = self.params.n_spatial
        return (self.params.n_times, n, n, n)

    def wavevectors(self):
        """Sparse broadcastable (xi1, xi2, xi3), each of shape (1, n, n, n)."""
        xi = self.spatial_freqs
        return (
            xi[None, :, None, None],
            xi[None, None, :, None],
            xi[None, None, None, :],
        )

    def xi_squared(self) -> np.ndarray:
        x1, x2, x3 = self.wavevectors()
        return x1**2 + x2**2 + x3**2

    def omegas(self) -> np.ndarray:
        """Temporal angular frequencies broadcastable as (2N+1, 1, 1, 1)."""
        return self.temporal_freqs[:, None, None, None]

    def points(self):
        """Sparse broadcastable physical coordinates (x1, x2, x3)."""
        x = self.axis_points
        return x[:, None, None], x[None, :, None], x[None, None, :]

    def radius(self) -> np.ndarray:
        x1, x2, x3 = self.points()
        return np.sqrt(x1**2 + x2**2 + x3**2)


def build_lattice(params: Params) -> Lattice:
    if params.lam == 0:
        raise ValueError("drift required: lambda must be nonzero")
    if params.n_spatial % 2:
        raise ValueError("n_spatial must be even")
    return lattice_of(params)


def lattice_of(params: Params) -> Lattice:
    """Lattice geometry without the drift check (pure field algebra)."""
    n, L = params.n_spatial, params.box_half_length
    nt = params.n_times
    m = np.fft.fftfreq(n, d=1.0 / n).astype(int)
    k = np.fft.fftfreq(nt, d=1.0 / nt).astype(int)
    h = 2 * L / n
    return Lattice(
        params=params,
        spatial_freqs=(np.pi / L) * m,
        spatial_index=m,
        temporal_freqs=params.omega * k,
        temporal_index=k,
        axis_points=-L + h * np.arange(n),
        times=params.period * np.arange(nt) / nt,
        cell_volume=h**3,
        time_weight=1.0 / nt,
    )


@dataclass(frozen=True)
class TPField:
    """A time-periodic scalar or vector field on the lattice.

    ``data`` has shape ``(2N+1, n, n, n, components)``.  In the spectral
    representation the first four axes are in FFT order.
    """

    representation: str
    data: np.ndarray
    params: Params
    components: int = field(init=False)

    def __post_init__(self):
        if self.representation not in ("physical", "spectral"):
            raise ValueError(f"unknown representation {self.representation!r}")
        p = self.params
        n = p.n_spatial
        if self.data.ndim != 5 or self.data.shape[:4] != (p.n_times, n, n, n):
            raise ValueError(
                f"data shape {self.data.shape} does not match lattice "
                f"{(p.n_times, n, n, n)} + (components,)"
            )
        if self.data.shape[4] not in (1, 3):
            raise ValueError("fields have 1 or 3 components")
        object.__setattr__(self, "components", self.data.shape[4])

    @classmethod
    def zeros(cls, params: Params, components: int = 3, representation="spectral"):
        n = params.n_spatial
        shape = (params.n_times, n, n, n, components)
        return cls(representation, np.zeros(shape, complex), params)

    def like(self, data: np.ndarray) -> "TPField":
        return TPField(self.representation, data, self.params)

    def max_abs(self) -> float:
        return float(np.abs(self.data).max())


def _axis_sign(n: int) -> np.ndarray:
    # x_j = -L + j h shifts every Fourier coefficient by exp(i pi m) = (-1)^m
    m = np.fft.fftfreq(n, d=1.0 / n).astype(int)
    return np.where(m % 2 == 0, 1.0, -1.0)


def _shift_phase(n: int) -> np.ndarray:
    s = _axis_sign(n)
    return s[:, None, None] * s[None, :, None] * s[None, None, :]


def transform(f: TPField, direction: str) -> TPField:
    """Forward (``to_spectral``) or inverse (``to_physical``) transform."""
    if direction == "to_spectral":
        if f.representation != "physical":
            raise ValueError("to_spectral expects a physical field")
        n = f.params.n_spatial
        norm = f.params.n_times * n**3
        d = np.fft.fftn(f.data, axes=(0, 1, 2, 3)) / norm
        d *= _shift_phase(n)[None, :, :, :, None]
        return TPField("spectral", d, f.params)
    if direction == "to_physical":
        if f.representation != "spectral":
            raise ValueError("to_physical expects a spectral field")
        n = f.params.n_spatial
        norm = f.params.n_times * n**3
        d = f.data * _shift_phase(n)[None, :, :, :, None]
        d = np.fft.ifftn(d, axes=(0, 1, 2, 3)) * norm
        return TPField("physical", d, f.params)
    raise ValueError(f"unknown direction {direction!r}")


def divergence_max(f: TPField) -> float:
    """max over (k, xi) of |xi . u_hat(k, xi)|."""
    if f.representation != "spectral":
        raise ValueError("divergence_max expects a spectral field")
    if f.components != 3:
        raise ValueError("divergence_max expects a vector field")
    xi = lattice_of(f.params).wavevectors()
    div = sum(xi[j][..., None] * f.data[..., j : j + 1] for j in range(3))
    return float(np.abs(div).max())


def _region_mask(lat: Lattice, region) -> np.ndarray:
    r = lat.radius()
    if region == "full_box":
        return np.ones_like(r, dtype=bool)
    kind, *args = region
    if kind == "ball":
        return r <= args[0]
    if kind == "shell":
        return (r > args[0]) & (r <= args[1])
    raise ValueError(f"unknown region {region!r}")


def lp_norm(f: TPField, r: float, region="full_box") -> float:
    """Discrete L^r norm with (1/T) int dt int dx weighting.

    ``region`` is ``"full_box"``, ``("ball", R)`` (r <= R) or ``("shell", R1, R2)``
    (R1 < r <= R2), so a ball splits exactly into a smaller ball and a shell.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    if f.representation != "physical":
        raise ValueError("lp_norm expects a physical field")
    lat = lattice_of(f.params)
    mask = _region_mask(lat, region)
    mag = np.sqrt(np.sum(np.abs(f.data) ** 2, axis=-1))
    # numpy's pairwise sum over a fixed layout is order-deterministic
    s = np.sum(np.where(mask[None], mag, 0.0) ** r)
    return float((s * lat.cell_volume * lat.time_weight) ** (1.0 / r))


def parseval_norm2(f: TPField) -> float:
    """(2L)^3 sum |u_hat|^2, equal to the squared L^2 norm over the box."""
    if f.representation != "spectral":
        raise ValueError("parseval_norm2 expects a spectral field")
    L = f.params.box_half_length
    return float((2 * L) ** 3 * np.sum(np.abs(f.data) ** 2))


def dealias_mask(params: Params) -> np.ndarray:
    """Boolean (2N+1, n, n, n) mask of modes kept by the 2/3 rule."""
    n, nt = params.n_spatial, params.n_times
    m = np.abs(np.fft.fftfreq(n, d=1.0 / n))
    k = np.abs(np.fft.fftfreq(nt, d=1.0 / nt))
    km = 3 * k < nt
    mm = 3 * m < n
    return (
        km[:, None, None, None]
        & mm[None, :, None, None]
        & mm[None, None, :, None]
        & mm[None, None, None, :]
    )


def dump_field(f: TPField, path) -> None:
    """Write interleaved little-endian complex doubles plus a JSON sidecar."""
    path = Path(path)
    f.data.astype("<c16").tofile(path)
    side = {
        "representation": f.representation,
        "components": f.components,
        "n_temporal": f.params.n_temporal,
        "n_spatial": f.params.n_spatial,
        "box_half_length": f.params.box_half_length,
        "period": f.params.period,
        "lambda": f.params.lam,
        "ordering": "fft" if f.representation == "spectral" else "grid",
    }
    path.with_suffix(path.suffix + ".json").write_text(json.dumps(side, indent=2, sort_keys=True))


def load_field(path, params: Params | None = None) -> TPField:
    path = Path(path)
    side = json.loads(path.with_suffix(path.suffix + ".json").read_text())
    if params is None:
        params = Params(
            lam=side["lambda"],
            period=side["period"],
            box_half_length=side["box_half_length"],
            n_spatial=side["n_spatial"],
            n_temporal=side["n_temporal"],
        )
    n = side["n_spatial"]
    shape = (2 * side["n_temporal"] + 1, n, n, n, side["components"])
    data = np.fromfile(path, dtype="<c16").reshape(shape).astype(complex)
    return TPField(side["representation"], data, params)
