"""Fourier multipliers on the lattice: projections, Leray projector, inverses.

All operators act diagonally in (k, xi) on spectral :class:`TPField` data, so
they commute with each other wherever their symbols do.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import Params, TPField, lattice_of

__all__ = [
    "SymbolGrid",
    "symbols",
    "project",
    "helmholtz",
    "apply_osc_inverse",
    "apply_steady_oseen_inverse",
    "recover_pressure",
    "gradient",
]


@dataclass(frozen=True)
class SymbolGrid:
    """Per-(k, xi) symbols shared read-only by all operators.

    ``osc_den`` is ``|xi|^2 + i(omega_k - lam xi_1)`` on the whole lattice;
    ``steady_den`` its k = 0 plane.  ``inv_xi2`` is ``1/|xi|^2`` with 0 at
    xi = 0.
    """

    params: Params
    xi: tuple
    xi2: np.ndarray
    inv_xi2: np.ndarray
    osc_den: np.ndarray
    steady_den: np.ndarray
    steady_mask: np.ndarray  # (2N+1, 1, 1, 1) True at k = 0

    def __post_init__(self):
        for a in (self.xi2, self.inv_xi2, self.osc_den, self.steady_den):
            a.setflags(write=False)


@lru_cache(maxsize=8)
def symbols(params: Params) -> SymbolGrid:
    lat = lattice_of(params)
    xi = lat.wavevectors()
    xi2 = lat.xi_squared()
    with np.errstate(divide="ignore"):
        inv = np.where(xi2 > 0, 1.0 / np.where(xi2 > 0, xi2, 1.0), 0.0)
    den = xi2 + 1j * (lat.omegas() - params.lam * xi[0])
    steady = lat.temporal_index == 0
    return SymbolGrid(
        params=params,
        xi=xi,
        xi2=xi2,
        inv_xi2=inv,
        osc_den=den,
        steady_den=den[0],
        steady_mask=steady[:, None, None, None],
    )


def _need_spectral(f: TPField):
    if f.representation != "spectral":
        raise ValueError("multipliers act on spectral fields")


def project(f: TPField, which: str) -> TPField:
    """Steady part (k = 0 only) or purely oscillatory part (k != 0)."""
    _need_spectral(f)
    m = symbols(f.params).steady_mask[..., None]
    if which == "steady":
        return f.like(np.where(m, f.data, 0))
    if which == "oscillatory":
        return f.like(np.where(m, 0, f.data))
    raise ValueError(f"unknown projection {which!r}")


def helmholtz(f: TPField) -> TPField:
    """Apply I - xi xi^T / |xi|^2; the xi = 0 coefficient is left unchanged."""
    _need_spectral(f)
    if f.components != 3:
        raise ValueError("helmholtz expects a vector field")
    S = symbols(f.params)
    d = f.data
    div = S.xi[0] * d[..., 0] + S.xi[1] * d[..., 1] + S.xi[2] * d[..., 2]
    c = div * S.inv_xi2
    out = np.stack([d[..., j] - S.xi[j] * c for j in range(3)], axis=-1)
    return f.like(out)


def apply_osc_inverse(f: TPField) -> TPField:
    """Multiply by (1 - delta(k)) / (|xi|^2 + i(omega_k - lam xi_1))."""
    _need_spectral(f)
    S = symbols(f.params)
    den = np.where(S.steady_mask, 1.0, S.osc_den)
    out = np.where(S.steady_mask[..., None], 0, f.data / den[..., None])
    return f.like(out)


def apply_steady_oseen_inverse(f: TPField) -> TPField:
    """Steady Oseen solve of the k = 0 plane: helmholtz then 1/(|xi|^2 - i lam xi_1).

    The output lives on the k = 0 plane; its xi = 0 coefficient is zero.
    """
    _need_spectral(f)
    S = symbols(f.params)
    g = helmholtz(f).data[0]
    den = S.steady_den
    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.where((S.xi2[0] > 0)[..., None], g / den[..., None], 0)
    out = np.zeros_like(f.data)
    out[0] = v
    return f.like(out)


def recover_pressure(g: TPField) -> TPField:
    """Scalar p with grad p = (I - helmholtz) g, i.e. p_hat = -i xi.g_hat / |xi|^2."""
    _need_spectral(g)
    if g.components != 3:
        raise ValueError("recover_pressure expects a vector field")
    S = symbols(g.params)
    d = g.data
    div = S.xi[0] * d[..., 0] + S.xi[1] * d[..., 1] + S.xi[2] * d[..., 2]
    p = -1j * div * S.inv_xi2
    return TPField("spectral", p[..., None], g.params)


def gradient(p: TPField) -> TPField:
    """Spectral gradient of a scalar field."""
    _need_spectral(p)
    S = symbols(p.params)
    d = p.data[..., 0]
    return TPField("spectral", np.stack([1j * S.xi[j] * d for j in range(3)], axis=-1), p.params)
