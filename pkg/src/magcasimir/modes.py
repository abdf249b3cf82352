"""Low-frequency mode structure of the TE spectral density near the origin.

On the negative imaginary axis the cavity has, for lossy (and magnetic)
mirrors, two bands densely filled with slab modes: eddy-current modes in
[-gamma, -gamma_tilde] accumulating at the permittivity pole -i*gamma, and,
for magnetic mirrors, magnetic modes in [-omega_m_tilde, -omega_m]
accumulating at the permeability pole.  The band edges gamma_tilde and
omega_m_tilde are the zeros of K_z on the axis.  The TE reflection amplitude
of a magnetic mirror additionally has two isolated zeros xi0- < 0 < xi0+,
and there is a critical transverse wavevector k0 at which the lossless TE
reflection vanishes at zero frequency.

Mode counting uses winding numbers of the slab-amplitude spectral density
(meromorphic in z) on rectangles that enclose one structure at a time.
N < 0 means more poles than zeros inside.
"""
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .constants import C
from .materials import Material
from .numerics import RectContour, winding_number
from .optics import CavityConfig, Polarization, spectral_density
from .pressure import scaled_config


class BracketFailure(RuntimeError):
    """A root bracket could not be established (invalid parameter regime)."""


@dataclass
class ModeChart:
    """Inventory of the low-frequency TE structure at one wavevector."""

    k: float
    gamma: float                       # merged eddy-band deep edge (max over mirrors)
    gamma_tilde: float                 # merged shallow edge (min over mirrors)
    omega_m: Optional[float]           # magnetic band shallow edge
    omega_m_tilde: Optional[float]     # magnetic band deep edge
    xi0_minus: Optional[float]         # isolated TE reflection zero, < 0
    xi0_plus: Optional[float]          # isolated TE reflection zero, > 0
    windings: dict
    slab_d: float


def _eps_axis(m: Material, y):
    """Permittivity at z = i*y for real y (exactly real there)."""
    return 1.0 + m.omega_p**2 / (y * (m.gamma + y))


def _mu_axis(m: Material, y):
    if m.mu0 == 1.0:
        return 1.0
    return 1.0 + (m.mu0 - 1.0) / (1.0 + y / m.omega_m)


def _kz2_deficit(m: Material, k: float, y):
    """G(y) = eps*mu*y^2/c^2 + k^2 evaluated at z = i*y; K_z^2 = -G."""
    return _eps_axis(m, y) * _mu_axis(m, y) * y * y / C**2 + k * k


def _bisect_on(fn, lo, hi, flo, fhi, rel=1e-13):
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if hi - lo <= rel * max(abs(lo), abs(hi)):
            return mid
        fm = fn(mid)
        if fm == 0.0:
            return mid
        if np.sign(fm) == np.sign(flo):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    return 0.5 * (lo + hi)


def _first_sign_change(fn, grid):
    vals = np.array([fn(x) for x in grid])
    idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    if idx.size == 0:
        return None
    i = idx[0]
    return _bisect_on(fn, grid[i], grid[i + 1], vals[i], vals[i + 1])


def kz_zero_points(m: Material, k: float):
    """Zeros of K_z on the negative imaginary axis: (gamma_tilde, omega_m_tilde).

    gamma_tilde in (0, gamma) exists for any lossy mirror; omega_m_tilde in
    (omega_m, mu(0)*omega_m) exists for magnetic mirrors when gamma < omega_m.
    Both returned as positive magnitudes; omega_m_tilde is None when absent.
    """
    if m.gamma <= 0:
        raise BracketFailure("lossy mirror required")
    g = lambda y: _kz2_deficit(m, k, y)
    # gamma_tilde: bracket between the origin and the permittivity pole -gamma
    grid = -m.gamma + m.gamma * np.geomspace(1e-14, 1.0, 200)[::-1]
    grid = np.sort(np.concatenate([grid, [-m.gamma * 1e-15]]))
    gt = _first_sign_change(g, grid)
    if gt is None:
        raise BracketFailure("no K_z zero between -i*gamma and the origin")
    omt = None
    if m.magnetic and m.gamma < m.omega_m:
        lo, hi = -m.mu0 * m.omega_m, -m.omega_m
        grid = hi + (lo - hi) * np.geomspace(1e-14, 1.0, 200)
        grid = np.sort(grid)
        omt = _first_sign_change(g, grid)
        if omt is None:
            raise BracketFailure("no magnetic K_z zero found")
        omt = abs(omt)
    return abs(gt), omt


def critical_wavevector(m: Material) -> float:
    """k0 = sqrt(mu0) * omega_p / (c sqrt(mu0^2 - 1)); lossless zero-frequency
    TE reflection vanishes there.  Defined for magnetic mirrors only."""
    if not m.magnetic:
        raise ValueError("critical wavevector requires mu(0) > 1")
    return math.sqrt(m.mu0) * m.omega_p / (C * math.sqrt(m.mu0**2 - 1.0))


def te_zeros_imag_axis(m: Material, k: float):
    """Isolated zeros (xi0_minus, xi0_plus) of the TE reflection on the
    imaginary axis, for a magnetic lossy mirror with gamma < omega_m.

    xi0_minus lies in (-omega_m, -gamma): the amplitude is real there and runs
    from +1 at the permeability pole to -1 at the permittivity pole.  xi0_plus
    is the first zero on the positive axis.
    """
    if not m.magnetic:
        raise ValueError("te zeros require mu(0) > 1")
    if not 0 < m.gamma < m.omega_m:
        raise ValueError("regime gamma < omega_m required")

    def gfun(y):
        G = _kz2_deficit(m, k, y)
        if G < 0:
            raise BracketFailure(f"K_z real at y={y:.3e}; outside the reality interval")
        kap = math.sqrt(y * y / C**2 + k * k)
        return _mu_axis(m, y) * kap - math.sqrt(G)

    # negative side: log-dense toward both end poles
    a, b = -m.omega_m, -m.gamma
    ga = np.geomspace(1e-12, 0.5, 120)
    grid = np.sort(np.concatenate([a + (b - a) * ga, b - (b - a) * ga]))
    xi_m = _first_sign_change(gfun, grid)
    if xi_m is None:
        raise BracketFailure("no TE zero between the permeability and permittivity poles")
    # positive side: first crossing, log grid across all candidate scales
    grid = np.geomspace(min(m.gamma, m.omega_m) * 1e-3, m.mu0 * m.omega_m * 1e3, 400)
    xi_p = _first_sign_change(gfun, grid)
    if xi_p is None:
        raise BracketFailure("no TE zero on the positive imaginary axis")
    return xi_m, xi_p


def _winding_of_density(cfg: CavityConfig, k: float, rect: RectContour) -> int:
    h = lambda z: complex(spectral_density(cfg, k, z, Polarization.TE, slab=True))
    return winding_number(h, rect)


def mode_chart(cfg: CavityConfig, k: float, gamma_scale: Optional[float] = None) -> ModeChart:
    """Assemble band edges, isolated zeros, and winding numbers at one k.

    For magnetic mirrors the counting regime needs gamma < omega_m, far below
    physical relaxation rates; with ``gamma_scale=None`` both rates are scaled
    so the larger becomes 1e-3 * omega_m (non-magnetic pairs are charted at
    their physical rates).
    """
    mags = [m for m in (cfg.mirror1, cfg.mirror2) if m.magnetic]
    if gamma_scale is None:
        if mags:
            gmax = max(cfg.mirror1.gamma, cfg.mirror2.gamma)
            gamma_scale = 1e-3 * min(m.omega_m for m in mags) / gmax
        else:
            gamma_scale = 1.0
    scfg = scaled_config(cfg, gamma_scale)
    m1, m2 = scfg.mirror1, scfg.mirror2
    mags = [m for m in (m1, m2) if m.magnetic]
    if mags and any(m.gamma >= m.omega_m for m in (m1, m2)):
        raise ValueError("magnetic charts need gamma < omega_m after scaling")

    gamma = max(m1.gamma, m2.gamma)
    gt1, omt1 = kz_zero_points(m1, k)
    gt2, omt2 = kz_zero_points(m2, k)
    gamma_tilde = min(gt1, gt2)
    omega_m = min(m.omega_m for m in mags) if mags else None
    omega_m_tilde = max(x for x in (omt1, omt2) if x is not None) if mags else None
    xi_m = xi_p = None
    if mags:
        xi_m, xi_p = te_zeros_imag_axis(mags[0], k)

    windings = {}
    half_w = gamma_tilde / 4.0
    length = gamma - gamma_tilde
    m_top = min(0.25 * length, 0.45 * gamma_tilde)
    if xi_m is not None:
        m_bot = min(0.25 * length, 0.45 * (abs(xi_m) - gamma))
    else:
        m_bot = 0.25 * length
    foucault_rect = RectContour(-half_w, half_w, -(gamma + m_bot), -(gamma_tilde - m_top))
    windings["foucault"] = _winding_of_density(scfg, k, foucault_rect)

    if mags:
        length_m = omega_m_tilde - omega_m
        mm_bot = 0.25 * length_m
        mm_top = min(0.25 * length_m, 0.45 * (omega_m - abs(xi_m)))
        mag_rect = RectContour(-omega_m / 4.0, omega_m / 4.0,
                               -(omega_m_tilde + mm_bot), -(omega_m - mm_top))
        windings["magnetic"] = _winding_of_density(scfg, k, mag_rect)

        h_m = 0.25 * min(abs(xi_m) - gamma, omega_m - abs(xi_m))
        zrect_m = RectContour(-h_m, h_m, xi_m - h_m, xi_m + h_m)
        h_p = 0.25 * min(xi_p, abs(omega_m - xi_p) if xi_p < omega_m else xi_p)
        zrect_p = RectContour(-h_p, h_p, xi_p - h_p, xi_p + h_p)
        n_zm = _winding_of_density(scfg, k, zrect_m)
        n_zp = _winding_of_density(scfg, k, zrect_p)
        # disconnected sets: eddy interval plus one isolated zero
        windings["S-"] = windings["foucault"] + n_zm
        windings["S+"] = windings["foucault"] + n_zp
        windings["zero-"] = n_zm
        windings["zero+"] = n_zp

    return ModeChart(k=k, gamma=gamma, gamma_tilde=gamma_tilde,
                     omega_m=omega_m, omega_m_tilde=omega_m_tilde,
                     xi0_minus=xi_m, xi0_plus=xi_p,
                     windings=windings, slab_d=scfg.slab_thickness)
