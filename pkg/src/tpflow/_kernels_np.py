"""Pure numpy implementations of the hot kernel loops.

These mirror ``_ext.pyx`` function for function and are used when the
compiled extension is unavailable (or ``TPFLOW_PURE=1``).
"""

import numpy as np

_I3 = np.eye(3)
_E1 = _I3[0]


def _sqrt_nnr(z):
    s = np.sqrt(np.asarray(z, dtype=complex))
    return np.where(s.real < 0, -s, s)


def param_mode_kernel(X, lam, omega, u, w, grad=False, chunk=256):
    """Per-mode velocity kernel from its one-dimensional parametric integral.

    Returns ``V`` of shape (M, 3, 3) and, if ``grad``, ``dV`` of shape
    (M, 3, 3, 3) with ``dV[p, m, j, l] = d_m V_jl``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    M = X.shape[0]
    V = np.empty((M, 3, 3), complex)
    dV = np.empty((M, 3, 3, 3), complex) if grad else None
    b = _sqrt_nnr(1j * omega + 0.25 * lam**2 * u**2)
    p = 0.5 * lam * u**2
    q = u * b
    cw = w / (4 * np.pi * b)
    kap = _sqrt_nnr(1j * omega + 0.25 * lam**2)
    a = 0.5 * lam
    for s in range(0, M, chunk):
        Xc = X[s : s + chunk]
        r = np.linalg.norm(Xc, axis=1)
        n = Xc / r[:, None]
        R = r[:, None]
        g0 = cw * np.exp(-p * Xc[:, :1] - q * R)  # (m, Q)
        g1 = -q * g0
        g2 = q * q * g0
        A = g2 - g1 / R
        B = g1 / R
        nn = n[:, :, None] * n[:, None, :]
        h1 = g1[:, :, None] * n[:, None, :]
        h2 = A[:, :, None, None] * nn[:, None] + B[:, :, None, None] * _I3
        e_h1 = np.zeros_like(h2)
        e_h1[:, :, 0, :] += h1
        e_h1[:, :, :, 0] += h1
        s2 = h2 - p[None, :, None, None] * e_h1
        s2[:, :, 0, 0] += p**2 * g0
        Gr = np.exp(-kap * r - a * Xc[:, 0]) / (4 * np.pi * r)
        V[s : s + chunk] = s2.sum(axis=1) + Gr[:, None, None] * _I3
        if not grad:
            continue
        g3 = -q**3 * g0
        Ap = g3 - g2 / R + g1 / R**2
        c3 = Ap - 2 * A / R
        cs = A / R
        nnn = nn[:, :, :, None] * n[:, None, None, :]
        sym = (
            np.einsum("jm,pl->pjlm", _I3, n)
            + np.einsum("lm,pj->pjlm", _I3, n)
            + np.einsum("jl,pm->pjlm", _I3, n)
        )
        h3 = c3[:, :, None, None, None] * nnn[:, None] + cs[:, :, None, None, None] * sym[:, None]
        # product rule with exp(-p x1): terms in e_j, e_l, e_m
        t1 = np.zeros_like(h3)
        t1[:, :, 0, :, :] += h2
        t1[:, :, :, 0, :] += h2
        t1[:, :, :, :, 0] += h2
        t2 = np.zeros_like(h3)
        t2[:, :, 0, 0, :] += h1
        t2[:, :, 0, :, 0] += h1
        t2[:, :, :, 0, 0] += h1
        s3 = h3 - p[None, :, None, None, None] * t1 + (p**2)[None, :, None, None, None] * t2
        s3[:, :, 0, 0, 0] -= p**3 * g0
        H3 = s3.sum(axis=1)  # (m, j, l, mm)
        qv = -kap * n - a * _E1 - n / R
        dG = Gr[:, None] * qv
        dV[s : s + chunk] = np.transpose(H3, (0, 3, 1, 2)) + dG[:, :, None, None] * _I3
    return V, dV


def conv_accumulate(x, Y, W, kap, a, power, about_x):
    """Weighted sum  -sum_y w (d_j Phi_L)(x - y) (d_l Gamma_R)(y)  over nodes.

    The partition of unity ``d1^p / (d0^p + d1^p)`` (``d0 = |y|``,
    ``d1 = |x - y|``) assigns each node to the grid centred at 0; the
    complementary weight is used when ``about_x`` is true.
    """
    x = np.asarray(x, float)
    d0 = np.linalg.norm(Y, axis=1)
    Z = x - Y
    d1 = np.linalg.norm(Z, axis=1)
    t0 = d0**power
    t1 = d1**power
    pw = (t0 if about_x else t1) / (t0 + t1)
    gphi = -Z / (4 * np.pi * d1[:, None] ** 3)
    Gr = np.exp(-kap * d0 - a * Y[:, 0]) / (4 * np.pi * d0)
    gR = Gr[:, None] * (-kap * Y / d0[:, None] - Y / d0[:, None] ** 2)
    gR[:, 0] -= a * Gr
    return -np.einsum("p,pj,pl->jl", W * pw, gphi, gR)
