"""Fundamental solutions: steady Oseen tensor, per-mode kernels and Gamma_perp.

Conventions
-----------
* Point arrays have a trailing axis of length 3; scalar routines broadcast
  over the leading axes.
* Gradients put the derivative index first: ``dG[..., h, i, j] = d_h G_ij``.
* Mode ``k`` has angular frequency ``omega_k = 2 pi k / T``.  The per-mode
  operator is ``-Delta - lam d_1 + i omega_k``; its velocity kernel is the
  inverse Fourier transform of ``(I - xi xi^T/|xi|^2) / (|xi|^2 + i(omega_k -
  lam xi_1))``.

Three independent evaluators of the per-mode velocity kernel are provided:
``"spectral"`` (symbol inversion on a padded lattice), ``"convolution"``
(quadrature of ``(d Phi_L) * (d Gamma_R)``) and ``"parametric"`` (a
one-dimensional integral representation, the production route).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import erfc, exp1

from . import _backend
from .core import Params

__all__ = [
    "KernelTensor",
    "SpectralRoute",
    "ConvolutionRoute",
    "set_threads",
    "sqrt_nnr",
    "oseen_E",
    "oseen_phi",
    "oseen_gamma",
    "oseen_gamma_batch",
    "laplace_phi",
    "mode_scalar_kernel",
    "mode_velocity_kernel",
    "mode_velocity_batch",
    "tp_kernel_timeslice",
    "tp_kernel_modes",
    "tp_kernel_l2t",
    "tp_kernel_l2t_batch",
    "l2t_truncation_report",
]

EULER_GAMMA = 0.57721566490153286061
_I3 = np.eye(3)

_THREADS = 1


def set_threads(n: int) -> None:
    """Worker threads for point sweeps.  Results never depend on this."""
    global _THREADS
    _THREADS = max(1, int(n))


def _pmap(fn, items):
    items = list(items)
    if _THREADS == 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=_THREADS) as ex:
        return list(ex.map(fn, items))


@dataclass(frozen=True)
class KernelTensor:
    entries: np.ndarray
    point: tuple
    mode: int | str
    deriv_order: int = 0


def composite_gauss(breaks, n):
    """Composite Gauss-Legendre nodes and weights on consecutive panels."""
    g, w = leggauss(n)
    breaks = np.asarray(breaks, float)
    a, b = breaks[:-1, None], breaks[1:, None]
    x = 0.5 * (b - a) * g + 0.5 * (a + b)
    return x.ravel(), (0.5 * (b - a) * w).ravel()


# --------------------------------------------------------------------------
# scalar special functions


def sqrt_nnr(z):
    """Square root with nonnegative real part (principal branch)."""
    s = np.sqrt(np.asarray(z, dtype=complex))
    s = np.where(s.real < 0, -s, s)
    return s[()] if s.ndim == 0 else s


def oseen_E(s):
    """E(s) = int_0^s (1 - exp(-t)) / t dt for real s (any sign).

    Uses the power series sum_{n>=1} (-1)^(n+1) s^n / (n n!) for s <= 1
    (for negative s every term has the same sign, so there is no
    cancellation) and gamma + ln s + E1(s) for s > 1.
    """
    s = np.asarray(s, dtype=float)
    out = np.empty_like(s)
    small = s <= 1.0
    if np.any(small):
        x = s[small]
        nmax = int(30 + 3 * np.max(np.abs(x), initial=0.0))
        term = x.copy()  # (-1)^(n+1) x^n / n! at n = 1
        acc = term.copy()
        for n in range(2, nmax + 1):
            term = -term * x / n
            acc += term / n
        out[small] = acc
    big = ~small
    if np.any(big):
        x = s[big]
        out[big] = EULER_GAMMA + np.log(x) + exp1(x)
    return out[()] if out.ndim == 0 else out


def _E_derivs(s):
    """First three derivatives of E at s >= 0."""
    s = np.asarray(s, dtype=float)
    g1 = np.empty_like(s)
    g2 = np.empty_like(s)
    g3 = np.empty_like(s)
    small = s < 2.0
    x = s[small]
    # series: g1 = sum (-x)^n/(n+1)!, g2 and g3 termwise derivatives
    a1 = np.zeros_like(x)
    a2 = np.zeros_like(x)
    a3 = np.zeros_like(x)
    fact = 1.0
    for n in range(0, 34):
        fact *= n + 1  # (n+1)!
        c = (-1.0) ** n / fact
        a1 += c * x**n
        if n >= 1:
            a2 += c * n * x ** (n - 1)
        if n >= 2:
            a3 += c * n * (n - 1) * x ** (n - 2)
    g1[small], g2[small], g3[small] = a1, a2, a3
    big = ~small
    x = s[big]
    e = np.exp(-x)
    g1[big] = -np.expm1(-x) / x
    g2[big] = (e * (1 + x) - 1) / x**2
    g3[big] = (2 - e * (2 + 2 * x + x * x)) / x**3
    return g1, g2, g3


def _oseen_variable(X, lam):
    """s = |lam| (r + sign(lam) x1) / 2, evaluated without cancellation."""
    X = np.asarray(X, dtype=float)
    r = np.linalg.norm(X, axis=-1)
    if np.any(r == 0):
        raise ValueError("the Oseen kernel is singular at x = 0")
    sig = np.sign(lam)
    x1 = sig * X[..., 0]
    rho2 = X[..., 1] ** 2 + X[..., 2] ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(x1 >= 0, r + x1, rho2 / (r - x1))
    return 0.5 * abs(lam) * w, r


def oseen_phi(x, lam):
    """Scalar Oseen potential whose Laplacian is exp(-s)/(4 pi r).

    For lam > 0 this is E(lam (|x| + x1) / 2) / (4 pi lam); for lam < 0 the
    decaying mirror image under x1 -> -x1 is returned.
    """
    if lam == 0:
        raise ValueError("drift required: lambda must be nonzero")
    s, _ = _oseen_variable(x, lam)
    return oseen_E(s) / (4 * np.pi * abs(lam))


def oseen_gamma_batch(X, lam, deriv=0):
    """Steady Oseen tensor (and optionally its gradient) at points ``X``.

    Returns ``G`` of shape (..., 3, 3), plus ``dG`` of shape (..., 3, 3, 3)
    when ``deriv == 1``.
    """
    if lam == 0:
        raise ValueError("drift required: lambda must be nonzero")
    X = np.asarray(X, dtype=float)
    s, r = _oseen_variable(X, lam)
    mu, sig = abs(lam), np.sign(lam)
    n = X / r[..., None]
    e1 = np.array([sig, 0.0, 0.0])
    R = r[..., None, None]
    nn = n[..., :, None] * n[..., None, :]
    s1 = 0.5 * mu * (n + e1)
    s2 = 0.5 * mu * (_I3 - nn) / R
    g1, g2, g3 = _E_derivs(s)
    c = 1.0 / (4 * np.pi * mu)
    P2 = c * (g2[..., None, None] * s1[..., :, None] * s1[..., None, :] + g1[..., None, None] * s2)
    lap = np.trace(P2, axis1=-2, axis2=-1)
    G = lap[..., None, None] * _I3 - P2
    if deriv == 0:
        return G
    if deriv != 1:
        raise ValueError("deriv must be 0 or 1")
    nnn = nn[..., :, :, None] * n[..., None, None, :]
    sym = (
        np.einsum("ij,...k->...ijk", _I3, n)
        + np.einsum("ik,...j->...ijk", _I3, n)
        + np.einsum("jk,...i->...ijk", _I3, n)
    )
    s3 = 0.5 * mu * (3 * nnn - sym) / r[..., None, None, None] ** 2
    sss = s1[..., :, None, None] * s1[..., None, :, None] * s1[..., None, None, :]
    mixed = (
        s2[..., :, None, :] * s1[..., None, :, None]
        + s1[..., :, None, None] * s2[..., None, :, :]
        + s2[..., :, :, None] * s1[..., None, None, :]
    )
    P3 = c * (
        g3[..., None, None, None] * sss
        + g2[..., None, None, None] * mixed
        + g1[..., None, None, None] * s3
    )
    dlap = np.einsum("...hhk->...k", P3)
    # dG[h, i, j] = delta_ij d_h (Delta Phi) - Phi_ijh
    dG = dlap[..., :, None, None] * _I3 - np.moveaxis(P3, -1, -3)
    return G, dG


def oseen_gamma(x, lam, deriv=0) -> KernelTensor:
    x = np.asarray(x, dtype=float)
    out = oseen_gamma_batch(x, lam, deriv)
    entries = out if deriv == 0 else out[1]
    return KernelTensor(entries, tuple(x.tolist()), "steady", deriv)


def laplace_phi(x):
    """Phi_L(x) = 1 / (4 pi |x|)."""
    return 1.0 / (4 * np.pi * np.linalg.norm(np.asarray(x, float), axis=-1))


# --------------------------------------------------------------------------
# per-mode kernels


def mode_scalar_kernel(k, x, lam, period, deriv=0):
    """exp(-kappa |x| - lam x1 / 2) / (4 pi |x|), kappa = sqrt_nnr(i w_k + lam^2/4).

    ``deriv`` 1 returns the gradient (..., 3); 2 returns the Hessian
    (..., 3, 3).
    """
    if k == 0:
        raise ValueError("the per-mode kernel is defined for k != 0 only")
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    if np.any(r == 0):
        raise ValueError("the per-mode kernel is singular at x = 0")
    om = 2 * np.pi * k / period
    kap = sqrt_nnr(1j * om + 0.25 * lam**2)
    a = 0.5 * lam
    G = np.exp(-kap * r - a * x[..., 0]) / (4 * np.pi * r)
    if deriv == 0:
        return G
    n = x / r[..., None]
    R = r[..., None]
    e1 = _I3[0]
    q = -kap * n - a * e1 - n / R
    if deriv == 1:
        return G[..., None] * q
    if deriv != 2:
        raise ValueError("deriv must be 0, 1 or 2")
    nn = n[..., :, None] * n[..., None, :]
    R2 = r[..., None, None]
    dq = -kap * (_I3 - nn) / R2 - (_I3 - 2 * nn) / R2**2
    return G[..., None, None] * (q[..., :, None] * q[..., None, :] + dq)


@lru_cache(maxsize=4)
def _param_nodes(per_panel=16, levels=8):
    breaks = np.concatenate([[0.0], 2.0 ** -np.arange(levels, -1, -1)])
    return composite_gauss(breaks, per_panel)


def _parametric_batch(X, lam, om, grad=False):
    u, w = _param_nodes()
    X = np.ascontiguousarray(np.reshape(X, (-1, 3)), dtype=float)
    chunks = [X[i : i + 512] for i in range(0, len(X), 512)]
    res = _pmap(lambda c: _backend.param_mode_kernel(c, lam, om, u, w, grad), chunks)
    V = np.concatenate([r[0] for r in res]) if res else np.zeros((0, 3, 3), complex)
    if not grad:
        return V, None
    dV = np.concatenate([r[1] for r in res]) if res else np.zeros((0, 3, 3, 3), complex)
    return V, dV


@dataclass(frozen=True)
class SpectralRoute:
    """Settings of the symbol-inversion evaluator.

    The kernel lattice has half-length ``pad * L`` and spacing ``h /
    refine``.  The slowly decaying part of the symbol is subtracted in
    closed form; the remainder is smoothly low-passed by
    ``0.5 erfc(sharpness (|xi| / xi_nyquist - center))``.
    """

    pad: float = 1.5
    refine: int = 2
    sharpness: float = 6.0
    center: float = 0.55
    chunk: int = 64


@dataclass(frozen=True)
class ConvolutionRoute:
    """Settings of the convolution evaluator (two spherical product grids)."""

    per_panel: int = 8
    n_polar: int = 48
    n_azimuth: int = 24
    power: int = 6
    tail: float = 1e-12
    panel_width: float = 2.0


def _chi_hessian(X, c):
    """-d_j d_l chi_c with chi_c(r) = (1 - exp(-c r)) / (4 pi c^2 r)."""
    r = np.linalg.norm(X, axis=-1)
    n = X / r[..., None]
    e = np.exp(-c * r)
    om = -np.expm1(-c * r)
    f1 = (c * e * r - om) / (4 * np.pi * c**2 * r**2)
    f2 = (-(c**2) * e * r**2 - 2 * c * e * r + 2 * om) / (4 * np.pi * c**2 * r**3)
    A = (f2 - f1 / r)[..., None, None]
    B = (f1 / r)[..., None, None]
    return -(A * n[..., :, None] * n[..., None, :] + B * _I3)


def _spectral_batch(X, lam, om, params: Params, cfg: SpectralRoute):
    X = np.reshape(np.asarray(X, dtype=float), (-1, 3))
    Lk = cfg.pad * params.box_half_length
    nk = int(round(cfg.refine * cfg.pad * params.n_spatial))
    nk += nk % 2
    m = np.fft.fftfreq(nk, d=1.0 / nk)
    xi = (np.pi / Lk) * m
    K = (xi[:, None, None], xi[None, :, None], xi[None, None, :])
    k2 = K[0] ** 2 + K[1] ** 2 + K[2] ** 2
    xi_nyq = np.pi * nk / (2 * Lk)
    filt = 0.5 * erfc(cfg.sharpness * (np.sqrt(k2) / xi_nyq - cfg.center))
    c2 = 1j * om
    with np.errstate(divide="ignore", invalid="ignore"):
        rem = (1.0 / (k2 + 1j * (om - lam * K[0])) - 1.0 / (k2 + c2)) / k2 * filt
    rem[0, 0, 0] = 0.0
    del filt
    G = np.zeros((len(X), 3, 3), complex)
    scale = 1.0 / (2 * Lk) ** 3
    for s0 in range(0, len(X), cfg.chunk):
        Xc = X[s0 : s0 + cfg.chunk]
        E = [np.exp(1j * xi[:, None] * Xc[None, :, a]) for a in range(3)]
        for j in range(3):
            for l in range(j, 3):
                A = K[j] * K[l] * rem
                B = (A.reshape(nk * nk, nk) @ E[2]).reshape(nk, nk, -1)
                C = np.einsum("abp,bp->ap", B, E[1])
                v = np.einsum("ap,ap->p", C, E[0]) * scale
                G[s0 : s0 + len(Xc), j, l] = v
                G[s0 : s0 + len(Xc), l, j] = v
    G += _chi_hessian(X, sqrt_nnr(c2))
    tr = np.trace(G, axis1=-2, axis2=-1)
    return tr[:, None, None] * _I3 - G


@lru_cache(maxsize=8)
def _sphere_grid(rmax, cfg: ConvolutionRoute):
    br = [0.0, 0.25, 0.5, 1.0, 2.0]
    while br[-1] < rmax:
        br.append(br[-1] + cfg.panel_width)
    R, WR = composite_gauss(br, cfg.per_panel)
    ct, wt = leggauss(cfg.n_polar)
    st = np.sqrt(1 - ct**2)
    ph = 2 * np.pi * np.arange(cfg.n_azimuth) / cfg.n_azimuth
    d = np.stack(
        [np.repeat(ct, len(ph)), np.outer(st, np.cos(ph)).ravel(), np.outer(st, np.sin(ph)).ravel()],
        axis=-1,
    )
    wd = np.repeat(wt, len(ph)) * (2 * np.pi / cfg.n_azimuth)
    Y = (R[:, None, None] * d[None]).reshape(-1, 3)
    W = ((WR * R**2)[:, None] * wd[None]).ravel()
    return Y, W


def _convolution_one(x, lam, om, cfg: ConvolutionRoute):
    x = np.asarray(x, dtype=float)
    a = 0.5 * lam
    kap = complex(sqrt_nnr(1j * om + a * a))
    decay = kap.real - abs(a)
    rmax = float(np.ceil(np.log(1.0 / cfg.tail) / decay + np.linalg.norm(x)))
    Y, W = _sphere_grid(rmax, cfg)
    Gk = _backend.conv_accumulate(x, Y, W, kap, a, cfg.power, False)
    Gk += _backend.conv_accumulate(x, np.ascontiguousarray(Y + x), W, kap, a, cfg.power, True)
    r = np.linalg.norm(x)
    Gr = np.exp(-kap * r - a * x[0]) / (4 * np.pi * r)
    return Gr * _I3 - Gk


def mode_velocity_batch(k, X, params: Params, route="parametric", grad=False, cfg=None):
    """Per-mode velocity kernel at points ``X`` of shape (M, 3).

    Returns (M, 3, 3); with ``grad`` (parametric route only) also the
    (M, 3, 3, 3) gradient.
    """
    if k == 0:
        raise ValueError("the per-mode kernel is defined for k != 0 only")
    X = np.reshape(np.asarray(X, dtype=float), (-1, 3))
    if np.any(np.linalg.norm(X, axis=1) == 0):
        raise ValueError("the per-mode kernel is singular at x = 0")
    om = params.omega * k
    lam = params.lam
    if route == "parametric":
        V, dV = _parametric_batch(X, lam, om, grad)
        return (V, dV) if grad else V
    if grad:
        raise ValueError("gradients are only provided by the parametric route")
    if route == "spectral":
        return _spectral_batch(X, lam, om, params, cfg or SpectralRoute())
    if route == "convolution":
        cfg = cfg or ConvolutionRoute()
        return np.array(_pmap(lambda x: _convolution_one(x, lam, om, cfg), X)).reshape(-1, 3, 3)
    raise ValueError(f"unknown route {route!r}")


def mode_velocity_kernel(k, x, params: Params, route="parametric") -> KernelTensor:
    """delta_jl tr(Gamma_k) - Gamma_k,jl at a single point."""
    x = np.asarray(x, dtype=float)
    V = mode_velocity_batch(k, x[None], params, route)[0]
    return KernelTensor(V, tuple(x.tolist()), int(k), 0)


# --------------------------------------------------------------------------
# Gamma_perp


def tp_kernel_modes(X, params: Params, k_max: int, grad=False):
    """{k: V_k(X)} for 0 < |k| <= k_max, negative modes computed directly."""
    out = {}
    for k in range(-k_max, k_max + 1):
        if k:
            out[k] = mode_velocity_batch(k, X, params, "parametric", grad)
    return out


def tp_kernel_timeslice(t, x, params: Params, k_max: int):
    """Gamma_perp(t, x) truncated to 0 < |k| <= k_max (3x3 real)."""
    if not 1 <= k_max <= params.n_temporal:
        raise ValueError("k_max must lie in [1, n_temporal]")
    x = np.asarray(x, dtype=float)
    if np.linalg.norm(x) == 0:
        raise ValueError("Gamma_perp is singular at x = 0")
    modes = tp_kernel_modes(x[None], params, k_max)
    acc = sum(np.exp(1j * params.omega * k * t) * V[0] for k, V in modes.items())
    scale = max(np.abs(acc).max(), np.finfo(float).tiny)
    if np.abs(acc.imag).max() > 1e-10 * scale:
        raise ArithmeticError("mode sum is not real: conjugate pairing violated")
    return acc.real


def tp_kernel_l2t_batch(X, params: Params, k_max: int, deriv=0):
    """((1/T) int |Gamma_perp|^2 dt)^(1/2) at points ``X`` via Parseval.

    The magnitude is the Frobenius norm over tensor entries (and the
    derivative index for ``deriv = 1``).
    """
    X = np.reshape(np.asarray(X, dtype=float), (-1, 3))
    acc = np.zeros(len(X))
    for k in range(1, k_max + 1):
        # V_{-k} = conj(V_k) entrywise, so each pair contributes twice
        res = mode_velocity_batch(k, X, params, "parametric", grad=deriv == 1)
        A = res[1] if deriv == 1 else res
        acc += 2 * np.sum(np.abs(A.reshape(len(X), -1)) ** 2, axis=1)
    return np.sqrt(acc)


def tp_kernel_l2t(x, params: Params, k_max: int, deriv=0) -> float:
    x = np.asarray(x, dtype=float)
    if np.linalg.norm(x) == 0:
        raise ValueError("Gamma_perp is singular at x = 0")
    return float(tp_kernel_l2t_batch(x[None], params, k_max, deriv)[0])


def l2t_truncation_report(x, params: Params, k_max: int) -> dict:
    """Change of the l2t value from k_max to k_max + 1 versus a tail estimate.

    Beyond the exponentially small Gamma_R part, mode magnitudes fall off
    like 1/omega_k, so |V_k| <~ |V_kmax| k_max / k and the squared tail is at
    most |V_kmax|^2 k_max^2 sum_{k > k_max} k^-2 <= |V_kmax|^2 k_max.
    """
    x = np.asarray(x, dtype=float)
    v0 = tp_kernel_l2t(x, params.with_(n_temporal=max(params.n_temporal, k_max + 1)), k_max)
    v1 = tp_kernel_l2t(x, params.with_(n_temporal=max(params.n_temporal, k_max + 1)), k_max + 1)
    Vlast = mode_velocity_batch(k_max, x[None], params)[0]
    ref = np.sqrt(2 * np.sum(np.abs(Vlast) ** 2))
    tail = ref * np.sqrt(k_max)
    return {"value": v0, "value_next": v1, "change": abs(v1 - v0), "tail_bound": float(tail)}
