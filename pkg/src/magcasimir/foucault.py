"""Eddy-current (Foucault) mode contribution to the pressure.

At small relaxation rates the TE spectral weight of the eddy modes
concentrates near omega ~ gamma, and its integral tends to a finite limit as
gamma -> 0.  For each transverse wavevector,

    density(k) = (k / 2 pi^2) int_0^{omega_cut} Re[p_TE(omega, k)] domega,

with omega_cut = sqrt(gamma_scaled * omega_next) the geometric separation
point between the eddy band and the next frequency scale.  The k/2pi^2
prefactor folds in the transverse measure and the parity doubling, so the
total is directly int_0^inf density dk.
"""
from dataclasses import dataclass

import numpy as np

from .constants import C, HBAR, K_B
from .numerics import Exponential, adaptive_quad, geom_edges, semi_infinite_quad
from .optics import CavityConfig, Polarization, spectral_density
from .pressure import scaled_config


class ScaleSeparationError(ValueError):
    """The scaled relaxation rate is not far below the next frequency scale."""


@dataclass
class FoucaultDensity:
    k: float
    value: float            # Pa per unit k  [Pa m / rad]
    gamma_scale_used: float
    omega_cut: float


def default_gamma_scale(cfg: CavityConfig) -> float:
    """Largest scale satisfying the separation requirement with margin.

    Non-magnetic pairs: 1e-4.  Magnetic pairs need the scaled rate two orders
    below the magnetic relaxation frequency, which is much more restrictive.
    """
    gmax = max(cfg.mirror1.gamma, cfg.mirror2.gamma)
    target = 1e-4 * gmax
    mags = [m for m in (cfg.mirror1, cfg.mirror2) if m.magnetic]
    if mags:
        target = min(target, min(m.omega_m for m in mags) / 200.0)
    return target / gmax


def _omega_next(cfg: CavityConfig, k: float) -> float:
    mags = [m for m in (cfg.mirror1, cfg.mirror2) if m.magnetic]
    if mags:
        return min(m.omega_m for m in mags)
    xi1 = 2.0 * np.pi * K_B * cfg.T / HBAR
    return min(xi1, C * k)


def foucault_density(cfg: CavityConfig, k: float, gamma_scale: float = None) -> FoucaultDensity:
    """Eddy-mode pressure density at one transverse wavevector."""
    if gamma_scale is None:
        gamma_scale = default_gamma_scale(cfg)
    scfg = scaled_config(cfg, gamma_scale)
    g_s = max(scfg.mirror1.gamma, scfg.mirror2.gamma)
    w_next = _omega_next(cfg, k)
    if g_s > w_next / 10.0:
        raise ScaleSeparationError(
            f"scaled gamma {g_s:.3e} not well below the next scale {w_next:.3e}")
    w_cut = np.sqrt(g_s * w_next)

    def integrand(w):
        return np.real(spectral_density(scfg, k, w + 0j, Polarization.TE))

    init = np.concatenate([[0.0], geom_edges(w_cut * 1e-12, w_cut, 2)])
    r = adaptive_quad(integrand, 0.0, w_cut, rtol=scfg.tol * 0.1, init_edges=init)
    value = k / (2.0 * np.pi**2) * r.value
    return FoucaultDensity(k=k, value=value, gamma_scale_used=gamma_scale, omega_cut=w_cut)


def foucault_total(cfg: CavityConfig, gamma_scale: float = None) -> float:
    """Eddy-mode contribution to the pressure [Pa]: integral of the density."""
    if gamma_scale is None:
        gamma_scale = default_gamma_scale(cfg)

    def f(karr):
        return np.array([foucault_density(cfg, k, gamma_scale).value
                         if k > 0 else 0.0 for k in np.asarray(karr, dtype=float)])

    r = semi_infinite_quad(f, 0.0, tol=max(cfg.tol, 1e-7),
                           decay=Exponential(2.0 * cfg.L))
    return float(r.value)


def foucault_distance_scan(cfg: CavityConfig, L_grid, gamma_scale: float = None) -> list:
    """Eddy-mode totals over a grid of mirror separations (ascending)."""
    Ls = list(L_grid)
    if any(L <= 0 for L in Ls) or any(b <= a for a, b in zip(Ls, Ls[1:])):
        raise ValueError("L grid must be positive and ascending")
    out = []
    for L in Ls:
        c = CavityConfig(cfg.mirror1, cfg.mirror2, L, cfg.T,
                         slab_factor=cfg.slab_factor, tol=cfg.tol)
        out.append((L, foucault_total(c, gamma_scale)))
    return out
