"""Forcing, the pseudo-spectral nonlinearity and the Picard fixed-point solver."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    Params,
    TPField,
    build_lattice,
    dealias_mask,
    divergence_max,
    lattice_of,
    transform,
)
from .multipliers import (
    apply_osc_inverse,
    apply_steady_oseen_inverse,
    helmholtz,
    project,
    recover_pressure,
    symbols,
)

__all__ = [
    "ForcingSpec",
    "Solution",
    "bump",
    "sample_forcing",
    "forcing_spectral_tail",
    "advect",
    "linear_solve",
    "drop_nyquist",
    "pde_residual",
    "picard_solve",
    "manufactured_roundtrip",
    "random_solenoidal",
    "scan_convergence",
]


@dataclass(frozen=True)
class ForcingSpec:
    """Compactly supported smooth forcing ``amplitude * g(t) * bump(x)``.

    ``time_profile`` is ``"constant"`` (g = 1), ``"cosine"`` (g =
    cos(harmonic * omega t)) or ``"mixed"`` (g = sum_k w_k cos(k omega t)
    with ``weights = ((k, w_k), ...)``; k = 0 contributes the constant w_0).
    """

    center: tuple = (0.0, 0.0, 0.0)
    radius: float = 2.0
    amplitude: tuple = (1.0, 0.0, 0.0)
    time_profile: str = "constant"
    harmonic: int = 1
    weights: tuple = ()

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("forcing radius must be positive")
        if self.time_profile not in ("constant", "cosine", "mixed"):
            raise ValueError(f"unknown time_profile {self.time_profile!r}")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        object.__setattr__(self, "amplitude", tuple(float(c) for c in self.amplitude))
        object.__setattr__(self, "weights", tuple((int(k), float(w)) for k, w in self.weights))

    def time_coefficients(self) -> dict:
        """Fourier coefficients c_k of g(t) = sum_k c_k exp(i k omega t)."""
        if self.time_profile == "constant":
            return {0: 1.0}
        if self.time_profile == "cosine":
            k0 = abs(self.harmonic)
            return {0: 1.0} if k0 == 0 else {k0: 0.5, -k0: 0.5}
        out: dict = {}
        for k, w in self.weights:
            k = abs(k)
            if k == 0:
                out[0] = out.get(0, 0.0) + w
            else:
                out[k] = out.get(k, 0.0) + 0.5 * w
                out[-k] = out.get(-k, 0.0) + 0.5 * w
        return out

    def profile(self, t, period):
        om = 2 * np.pi / period
        t = np.asarray(t, float)
        return sum(c * np.exp(1j * k * om * t) for k, c in self.time_coefficients().items()).real

    def scaled(self, factor: float) -> "ForcingSpec":
        a = tuple(factor * c for c in self.amplitude)
        return ForcingSpec(self.center, self.radius, a, self.time_profile, self.harmonic, self.weights)


def bump(X, center, radius):
    """exp(-1 / (1 - s^2)) for s = |x - center| / radius < 1, else 0."""
    X = np.asarray(X, float)
    s2 = np.sum((X - np.asarray(center)) ** 2, axis=-1) / radius**2
    inside = s2 < 1
    out = np.zeros(s2.shape)
    out[inside] = np.exp(-1.0 / (1.0 - s2[inside]))
    return out


def sample_forcing(spec: ForcingSpec, params: Params) -> TPField:
    """Physical field amplitude (x) g(t) (x) bump on the lattice."""
    lat = build_lattice(params)
    L = params.box_half_length
    if np.linalg.norm(spec.center) + spec.radius > L / 2:
        raise ValueError("forcing support must lie inside |x| <= L/2")
    x1, x2, x3 = lat.points()
    X = np.stack(np.broadcast_arrays(x1, x2, x3), axis=-1)
    psi = bump(X, spec.center, spec.radius)
    g = spec.profile(lat.times, params.period)
    amp = np.asarray(spec.amplitude)
    data = g[:, None, None, None, None] * psi[None, ..., None] * amp
    return TPField("physical", data.astype(complex), params)


def forcing_spectral_tail(f: TPField) -> float:
    """Largest coefficient on the outermost spatial shell relative to the peak."""
    fh = f if f.representation == "spectral" else transform(f, "to_spectral")
    n = f.params.n_spatial
    m = np.abs(np.fft.fftfreq(n, d=1.0 / n))
    edge = (
        (m[:, None, None] == n // 2) | (m[None, :, None] == n // 2) | (m[None, None, :] == n // 2)
    )
    a = np.abs(fh.data)
    peak = a.max()
    return float(a[:, edge].max() / peak) if peak > 0 else 0.0


def _phys(a, params):
    return transform(TPField("spectral", a, params), "to_physical").data.real


def _spec(a, params):
    return transform(TPField("physical", a.astype(complex), params), "to_spectral").data


def advect(u: TPField, form: str = "divergence", check: bool = True) -> TPField:
    """Pseudo-spectral u . grad u (2/3-rule dealiased when params.dealias).

    ``form="divergence"`` uses div(u (x) u); ``"convective"`` uses
    u_j d_j u.  Both agree for solenoidal u.
    """
    if u.representation != "spectral" or u.components != 3:
        raise ValueError("advect expects a spectral vector field")
    p = u.params
    umax = u.max_abs()
    if check and umax > 0 and divergence_max(u) > max(p.tol_div, 1e-12) * umax:
        raise ValueError("advect requires a divergence-free field")
    if umax == 0:
        return u.like(np.zeros_like(u.data))
    mask = dealias_mask(p)[..., None] if p.dealias else None
    uh = u.data * mask if p.dealias else u.data
    xi = symbols(p).xi
    up = _phys(uh, p)
    if form == "divergence":
        out = np.zeros_like(uh)
        for j in range(3):
            for l in range(j, 3):
                P = _spec(up[..., j : j + 1] * up[..., l : l + 1], p)[..., 0]
                out[..., l] += 1j * xi[j] * P
                if l != j:
                    out[..., j] += 1j * xi[l] * P
    elif form == "convective":
        acc = np.zeros(up.shape)
        for j in range(3):
            du = _phys(1j * xi[j][..., None] * uh, p)
            acc += up[..., j : j + 1] * du
        out = _spec(acc, p)
    else:
        raise ValueError(f"unknown form {form!r}")
    if p.dealias:
        out = out * mask
    return u.like(out)


def drop_nyquist(a: np.ndarray) -> np.ndarray:
    """Copy of spectral data with the spatial Nyquist planes set to zero.

    The first-derivative symbol is not Hermitian there, so keeping those
    coefficients would leak imaginary parts into real fields.
    """
    n = a.shape[1]
    out = a.copy()
    out[:, n // 2] = 0
    out[:, :, n // 2] = 0
    out[:, :, :, n // 2] = 0
    return out


def linear_solve(f: TPField) -> TPField:
    """Steady Oseen solve of P f plus oscillatory solve of P_H P_perp f.

    Spatial Nyquist coefficients of ``f`` are ignored.
    """
    fh = f if f.representation == "spectral" else transform(f, "to_spectral")
    fh = fh.like(drop_nyquist(fh.data))
    v = apply_steady_oseen_inverse(project(fh, "steady"))
    w = apply_osc_inverse(helmholtz(project(fh, "oscillatory")))
    return fh.like(v.data + w.data)


def pde_residual(u: TPField, p: TPField, f: TPField, N: TPField | None = None) -> np.ndarray:
    """Spectral residual of d_t u - Delta u - lam d_1 u + grad p + N(u) - f.

    The (k, xi) = (0, 0) mode is excluded (set to zero): a mean force cannot
    be balanced on a periodic box.  Spatial Nyquist modes are excluded too,
    since the solver does not resolve them.
    """
    fh = f if f.representation == "spectral" else transform(f, "to_spectral")
    S = symbols(u.params)
    N = advect(u, check=False) if N is None else N
    R = S.osc_den[..., None] * u.data + N.data - fh.data
    for j in range(3):
        R[..., j] += 1j * S.xi[j] * p.data[..., 0]
    R[0, 0, 0, 0, :] = 0
    return drop_nyquist(R)


@dataclass(frozen=True)
class Solution:
    u: TPField
    p: TPField
    residual_history: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    amplitude: float = 0.0


def picard_solve(f: TPField, params: Params | None = None) -> Solution:
    """Fixed point u <- A[P(f - N(u))] + A_perp[P_H P_perp(f - N(u))] from u = 0.

    The convergence metric is the max spectral PDE residual relative to
    max |f_hat|.  Spatial Nyquist coefficients of ``f`` are dropped first.
    NaNs raise ``FloatingPointError``.
    """
    params = params or f.params
    fh = f if f.representation == "spectral" else transform(f, "to_spectral")
    fh = fh.like(drop_nyquist(fh.data))
    fmax = fh.max_abs()
    scale = fmax if fmax > 0 else 1.0
    u = fh.like(np.zeros_like(fh.data))
    N = u.like(np.zeros_like(fh.data))
    history = []
    converged = False
    it = 0
    for it in range(1, params.max_iter + 1):
        with np.errstate(all="ignore"):
            u = linear_solve(fh.like(fh.data - N.data))
            N = advect(u, check=False)
            p = recover_pressure(fh.like(fh.data - N.data))
            res = float(np.abs(pde_residual(u, p, fh, N)).max()) / scale
        if not (np.isfinite(res) and np.all(np.isfinite(N.data))):
            raise FloatingPointError(f"NaN/inf in Picard iterate {it}")
        history.append(res)
        if res < params.tol_solver:
            converged = True
            break
    p = recover_pressure(fh.like(fh.data - N.data))
    return Solution(u, p, history, it, converged, fmax)


def manufactured_roundtrip(W: TPField, params: Params | None = None) -> float:
    """Build F from W with the per-mode operator, invert, return the relative error."""
    params = params or W.params
    if W.representation != "spectral":
        W = transform(W, "to_spectral")
    wmax = W.max_abs()
    if np.abs(project(W, "steady").data).max() > 0:
        raise ValueError("manufactured field must have no steady (k = 0) content")
    if wmax > 0 and divergence_max(W) > max(params.tol_div, 1e-12) * wmax:
        raise ValueError("manufactured field must be divergence-free")
    S = symbols(W.params)
    F = W.like(S.osc_den[..., None] * W.data)
    W2 = apply_osc_inverse(F)
    return float(np.abs(W2.data - W.data).max() / (wmax if wmax > 0 else 1.0))


def random_solenoidal(params: Params, rng: np.random.Generator, band: float = 0.5,
                      oscillatory: bool = True) -> TPField:
    """Random real, band-limited, divergence-free spectral field."""
    lat = lattice_of(params)
    shape = lat.shape + (3,)
    f = TPField("physical", rng.standard_normal(shape).astype(complex), params)
    fh = transform(f, "to_spectral")
    n = params.n_spatial
    m = np.abs(lat.spatial_index)
    keep = m <= band * n / 2
    k = np.abs(lat.temporal_index) <= max(1, int(band * params.n_temporal))
    mask = k[:, None, None, None] & keep[None, :, None, None] & keep[None, None, :, None] & keep[None, None, None, :]
    d = fh.data * mask[..., None]
    d[0, 0, 0, 0, :] = 0
    out = helmholtz(fh.like(d))
    if oscillatory:
        out = project(out, "oscillatory")
    return out


def scan_convergence(spec: ForcingSpec, params: Params, amplitudes) -> dict:
    """Largest tested amplitude for which Picard converges monotonically."""
    rows = []
    best = 0.0
    base = np.linalg.norm(spec.amplitude)
    for a in sorted(amplitudes):
        f = sample_forcing(spec.scaled(a / base), params)
        try:
            sol = picard_solve(f, params)
            h = sol.residual_history
            mono = sol.converged and all(b < a_ for a_, b in zip(h, h[1:]))
        except FloatingPointError:
            mono, sol = False, None
        rows.append({"amplitude": a, "converged": bool(sol and sol.converged), "monotone": mono,
                     "iterations": sol.iterations if sol else None})
        if mono:
            best = a
    return {"threshold": best, "rows": rows}
