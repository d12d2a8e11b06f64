"""Far-field objects: mean force, profile Gamma^lam c_f, remainders and decay fits."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .core import Params, TPField, transform
from .kernels import mode_velocity_batch, oseen_gamma_batch
from .solver import ForcingSpec, bump

__all__ = [
    "DecayFit",
    "ExpansionReport",
    "fit_decay",
    "mean_force",
    "forcing_mean",
    "profile",
    "downstream_axis",
    "farfield_modes",
    "farfield_linear",
    "farfield_linear_batch",
    "remainder",
    "remainder_batch",
    "oscillatory_l2t",
    "wake_scan",
    "expansion_scan",
    "SCAN_DIRECTIONS",
]

SCAN_DIRECTIONS = {
    "+e1": (1.0, 0.0, 0.0),
    "-e1": (-1.0, 0.0, 0.0),
    "e2": (0.0, 1.0, 0.0),
    "diag": tuple(float(c) for c in np.ones(3) / np.sqrt(3.0)),
}


@dataclass(frozen=True)
class DecayFit:
    alpha: float
    c_fit: float
    r_squared: float
    radii: tuple
    direction: tuple = (0.0, 0.0, 0.0)
    quantity: str = ""

    def to_dict(self) -> dict:
        return {
            "direction": list(self.direction),
            "quantity": self.quantity,
            "alpha": self.alpha,
            "c_fit": self.c_fit,
            "r_squared": self.r_squared,
        }


@dataclass
class ExpansionReport:
    c_f: np.ndarray
    fits: list = field(default_factory=list)
    profile_fits: list = field(default_factory=list)
    passed: bool = False

    def to_dict(self) -> dict:
        return {
            "c_f": [float(c) for c in self.c_f],
            "fits": [f.to_dict() for f in self.fits],
            "profile_fits": [f.to_dict() for f in self.profile_fits],
            "pass": bool(self.passed),
        }


def fit_decay(radii, values, direction=(0.0, 0.0, 0.0), quantity="") -> DecayFit:
    """Least-squares fit of log(value) = log(C) - alpha log(r)."""
    r = np.asarray(radii, dtype=float)
    v = np.asarray(values, dtype=float)
    if r.size < 4 or r.size != v.size:
        raise ValueError("decay fits need at least 4 (radius, value) samples")
    if np.any(np.diff(r) <= 0) or r[0] <= 0:
        raise ValueError("radii must be positive and strictly increasing")
    if r[-1] < 4 * r[0]:
        raise ValueError("radii must span a factor of at least 4")
    if np.any(~(v > 0)):
        raise ValueError("decay fits need positive values")
    x, y = np.log(r), np.log(v)
    A = np.stack([np.ones_like(x), x], axis=1)
    (b, m), *_ = np.linalg.lstsq(A, y, rcond=None)
    fit = b + m * x
    ss_res = float(np.sum((y - fit) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return DecayFit(float(-m), float(np.exp(b)), max(0.0, r2), tuple(r.tolist()),
                    tuple(float(d) for d in direction), quantity)


def mean_force(f: TPField) -> np.ndarray:
    """(1/T) int_0^T int f dx dt of a sampled forcing (box integral)."""
    fh = f if f.representation == "spectral" else transform(f, "to_spectral")
    L = f.params.box_half_length
    return np.real((2 * L) ** 3 * fh.data[0, 0, 0, 0, :])


def profile(x, c_f, lam):
    """Gamma^lam(x) c_f."""
    return oseen_gamma_batch(x, lam) @ np.asarray(c_f, dtype=float)


def downstream_axis(lam) -> np.ndarray:
    """Unit vector along which the steady Oseen tensor decays slowest."""
    return np.array([-np.sign(lam), 0.0, 0.0])


def _ball_nodes(spec: ForcingSpec, order: int):
    nr, nt, nph = 12 * order, 12 * order, 24 * order
    g, w = leggauss(nr)
    R = 0.5 * spec.radius * (g + 1)
    WR = 0.5 * spec.radius * w * R**2
    ct, wt = leggauss(nt)
    st = np.sqrt(1 - ct**2)
    ph = 2 * np.pi * np.arange(nph) / nph
    d = np.stack([np.repeat(ct, nph), np.outer(st, np.cos(ph)).ravel(), np.outer(st, np.sin(ph)).ravel()], -1)
    wd = np.repeat(wt, nph) * (2 * np.pi / nph)
    Y = (R[:, None, None] * d[None]).reshape(-1, 3) + np.asarray(spec.center)
    W = (WR[:, None] * wd[None]).ravel() * bump(Y, spec.center, spec.radius)
    keep = W > 0
    return Y[keep], W[keep]


def forcing_mean(spec: ForcingSpec, order: int = 1) -> np.ndarray:
    """Mean force of the continuous forcing by the far-field quadrature."""
    _, W = _ball_nodes(spec, order)
    c0 = spec.time_coefficients().get(0, 0.0)
    return c0 * W.sum() * np.asarray(spec.amplitude)


def _check_margin(X, spec):
    d = np.linalg.norm(X, axis=-1)
    if np.any(d < 2 * spec.radius + np.linalg.norm(spec.center)):
        raise ValueError("far-field points must satisfy |x| >= 2 radius + |center|")


def farfield_modes(X, spec: ForcingSpec, params: Params, order: int = 1) -> dict:
    """{k: int K_k(x - y) amp bump(y) dy} for each forcing harmonic k.

    ``K_0`` is the steady Oseen tensor, ``K_k`` the per-mode velocity kernel.
    The time coefficient of the profile is *not* included.
    """
    X = np.reshape(np.asarray(X, dtype=float), (-1, 3))
    _check_margin(X, spec)
    Y, W = _ball_nodes(spec, order)
    amp = np.asarray(spec.amplitude)
    out = {}
    for k, c in spec.time_coefficients().items():
        if c == 0:
            continue
        acc = np.zeros((len(X), 3), complex if k else float)
        for i, x in enumerate(X):
            Z = x - Y
            if k == 0:
                K = oseen_gamma_batch(Z, params.lam)
            else:
                K = mode_velocity_batch(k, Z, params, "parametric")
            acc[i] = np.einsum("p,pjl,l->j", W, K, amp)
        out[k] = acc
    return out


def farfield_linear_batch(ts, X, spec: ForcingSpec, params: Params, order: int = 1,
                          modes: dict | None = None):
    """Linear solution u(t, x) outside the forcing support, shape (len(ts), M, 3)."""
    modes = farfield_modes(X, spec, params, order) if modes is None else modes
    coef = spec.time_coefficients()
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    M = next(iter(modes.values())).shape[0] if modes else np.reshape(X, (-1, 3)).shape[0]
    u = np.zeros((len(ts), M, 3))
    for k, A in modes.items():
        ph = coef[k] * np.exp(1j * params.omega * k * ts)
        u += np.real(ph[:, None, None] * A[None])
    return u


def farfield_linear(t, x, spec: ForcingSpec, params: Params, order: int = 1) -> np.ndarray:
    return farfield_linear_batch([t], np.asarray(x, float)[None], spec, params, order)[0, 0]


def remainder_batch(ts, X, spec, params, order=1, modes=None):
    """u(t, x) - Gamma^lam(x) c_f with c_f from the same quadrature."""
    u = farfield_linear_batch(ts, X, spec, params, order, modes)
    c_f = forcing_mean(spec, order)
    return u - profile(np.reshape(X, (-1, 3)), c_f, params.lam)[None]


def remainder(t, x, spec, params, order=1):
    return remainder_batch([t], np.asarray(x, float)[None], spec, params, order)[0, 0]


def oscillatory_l2t(modes: dict, spec: ForcingSpec) -> np.ndarray:
    """L^2-in-time magnitude of the oscillatory part from its mode vectors."""
    coef = spec.time_coefficients()
    acc = 0.0
    for k, A in modes.items():
        if k:
            acc = acc + np.sum(np.abs(coef[k] * A) ** 2, axis=-1)
    return np.sqrt(acc)


def wake_scan(lam, angles, radii) -> list:
    """Decay fits of |Gamma^lam| along rays at angle theta from the downstream axis."""
    d0 = downstream_axis(lam)
    e2 = np.array([0.0, 1.0, 0.0])
    radii = np.asarray(radii, dtype=float)
    fits = []
    for th in angles:
        d = np.cos(th) * d0 + np.sin(th) * e2
        G = oseen_gamma_batch(radii[:, None] * d, lam)
        vals = np.linalg.norm(G, axis=(1, 2))
        fits.append(fit_decay(radii, vals, d, f"gamma_oseen@theta={th:.6f}"))
    return fits


def expansion_scan(spec: ForcingSpec, params: Params, radii=None, times=None, order: int = 1,
                   directions=None):
    """Remainder, profile and oscillatory far field along each scan direction.

    Returns ``(report, rows)``: ``report.fits`` holds remainder and
    oscillatory-part fits, ``rows`` the samples as ``(direction, radius,
    quantity, value)``.  The remainder magnitude is the worst over ``times``.
    ``report.passed`` requires every remainder alpha >= 1.4 and, when the
    mean force is nonzero, the profile to exceed the remainder at the
    largest radius.
    """
    radii = np.geomspace(10.0, 40.0, 7) if radii is None else np.asarray(radii, float)
    times = params.period * np.array([0.0, 0.25, 0.5]) if times is None else np.asarray(times, float)
    directions = SCAN_DIRECTIONS if directions is None else directions
    c_f = forcing_mean(spec, order)
    has_mean = bool(np.linalg.norm(c_f) > 0)
    rep = ExpansionReport(c_f=c_f)
    rows = []
    ok = True
    for d in directions.values():
        d = tuple(float(c) for c in d)
        X = radii[:, None] * np.asarray(d)
        modes = farfield_modes(X, spec, params, order)
        rem = np.linalg.norm(remainder_batch(times, X, spec, params, order, modes), axis=-1).max(axis=0)
        prof = np.linalg.norm(profile(X, c_f, params.lam), axis=-1)
        osc = oscillatory_l2t(modes, spec) if len(modes) > (0 in modes) else np.zeros(len(radii))
        for name, vals in (("remainder", rem), ("profile", prof), ("oscillatory_l2t", osc)):
            rows += [(d, float(r), name, float(v)) for r, v in zip(radii, vals)]
        fr = fit_decay(radii, rem, d, "remainder")
        rep.fits.append(fr)
        if np.all(osc > 0):
            rep.fits.append(fit_decay(radii, osc, d, "oscillatory_l2t"))
        if has_mean:
            rep.profile_fits.append(fit_decay(radii, prof, d, "profile"))
            ok &= bool(prof[-1] > rem[-1])
        ok &= fr.alpha >= 1.4
    rep.passed = bool(ok)
    return rep, rows
