"""Wave vectors, Fresnel amplitudes, and the cavity spectral density.

The axial wavenumbers follow the retarded branch: Im k_z >= 0 in the upper
half of the frequency plane, extended to the real axis as the limit from
above.  On the positive imaginary axis z = i*xi this gives
k_z = i*sqrt(xi^2/c^2 + k^2).

The spectral density of the pressure integrand is

    p = hbar * k_z * f * C,    f = r1 r2 e^{2 i k_z L} / (1 - r1 r2 e^{2 i k_z L}),
    C = coth(hbar z / 2 k_B T),

with the product r1 r2 reducing to r^2 for identical mirrors.
"""
import enum
from dataclasses import dataclass

import numpy as np

from .constants import C, HBAR, K_B
from .materials import Material, PoleEvaluationError, permeability, permittivity


class DegenerateDenominatorError(ZeroDivisionError):
    """A Fresnel denominator vanished (single-interface or slab mode)."""


class CavityResonanceError(ZeroDivisionError):
    """The round-trip denominator 1 - r1 r2 e^{2ikzL} vanished."""


class Polarization(enum.Enum):
    TE = "TE"
    TM = "TM"


@dataclass(frozen=True)
class CavityConfig:
    """Two mirrors facing each other across vacuum.

    Parameters
    ----------
    mirror1, mirror2 : Material
    L : float
        Mirror separation [m], > 0.
    T : float
        Temperature [K], >= 0.
    slab_factor : float
        Mode analysis uses finite slabs of thickness d = slab_factor * L.
    tol : float
        Relative tolerance passed to quadratures and sums.
    """

    mirror1: Material
    mirror2: Material
    L: float
    T: float
    slab_factor: float = 10.0
    tol: float = 1e-6

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError("L must be positive")
        if self.T < 0:
            raise ValueError("T must be non-negative")
        if self.slab_factor < 1:
            raise ValueError("slab_factor must be >= 1")
        if not 0 < self.tol < 1e-2:
            raise ValueError("tol out of range")

    @property
    def slab_thickness(self) -> float:
        return self.slab_factor * self.L


def _branch_sqrt(w, z):
    """Retarded square root: Im >= 0, ties broken so Re(result)*Re(z) >= 0."""
    s = np.sqrt(np.asarray(w, dtype=complex))
    zre = np.real(np.asarray(z, dtype=complex))
    flip = (s.imag < 0) | ((s.imag == 0) & (s.real * zre < 0))
    return np.where(flip, -s, s)


def axial_wavenumbers(m: Material, k, z):
    """(k_z, K_z): axial wavenumbers in vacuum and inside the mirror.

    k_z = sqrt(z^2/c^2 - k^2), K_z = sqrt(eps*mu*z^2/c^2 - k^2), retarded branch.
    Either k or z may be an array (broadcast).
    """
    k = np.asarray(k, dtype=float)
    zz = np.asarray(z, dtype=complex)
    kz = _branch_sqrt(zz * zz / C**2 - k * k, zz)
    Kz = _branch_sqrt(permittivity(m, z) * permeability(m, z) * zz * zz / C**2 - k * k, zz)
    return kz, Kz


def fresnel(m: Material, k, z, pol: Polarization):
    """Reflection amplitude of a semi-infinite mirror.

    TE: (mu k_z - K_z)/(mu k_z + K_z);  TM: (eps k_z - K_z)/(eps k_z + K_z).
    Real on the imaginary frequency axis; 0 in the vacuum limit.
    """
    kz, Kz = axial_wavenumbers(m, k, z)
    fac = permeability(m, z) if pol is Polarization.TE else permittivity(m, z)
    den = fac * kz + Kz
    if np.any(den == 0):
        raise DegenerateDenominatorError("single-interface mode")
    return (fac * kz - Kz) / den


def slab_fresnel(m: Material, k, z, pol: Polarization, d: float):
    """Reflection amplitude of a slab of thickness d.

      r_slab = r (1 - e^{2 i K_z d}) / (1 - r^2 e^{2 i K_z d})

    Even under K_z -> -K_z, hence free of branch points at K_z zeros, and
    approaches the semi-infinite amplitude wherever Im(K_z) d is large.
    """
    kz, Kz = axial_wavenumbers(m, k, z)
    fac = permeability(m, z) if pol is Polarization.TE else permittivity(m, z)
    den = fac * kz + Kz
    if np.any(den == 0):
        raise DegenerateDenominatorError("single-interface mode")
    r = (fac * kz - Kz) / den
    e = np.exp(2j * Kz * d)
    den_s = 1.0 - r * r * e
    if np.any(den_s == 0):
        raise DegenerateDenominatorError("slab mode")
    return r * (1.0 - e) / den_s


def thermal_factor(omega, T: float):
    """coth(hbar*omega / 2 k_B T); sign(omega) at T = 0.

    Odd in omega, saturating to +-1 for |omega| >> k_B T / hbar, behaving as
    2 k_B T/(hbar omega) near zero.  Complex arguments are supported (the
    analytic continuation), with simple poles at the discrete imaginary
    frequencies where tanh vanishes.
    """
    omega = np.asarray(omega)
    if np.any(omega == 0):
        raise PoleEvaluationError("thermal factor pole at omega = 0")
    if T == 0:
        return np.sign(np.real(omega)).astype(float)
    t = np.tanh(HBAR * omega / (2.0 * K_B * T))
    if np.any(t == 0):
        raise PoleEvaluationError("thermal factor pole")
    return 1.0 / t


def loop_function(cfg: CavityConfig, k, z, pol: Polarization, slab: bool = False):
    """Round-trip function f = x/(1-x), x = r1 r2 e^{2 i k_z L}.

    With ``slab`` the mirror amplitudes are slab amplitudes of thickness
    cfg.slab_thickness (meromorphic in z), as required by mode counting.
    """
    kz, _ = axial_wavenumbers(cfg.mirror1, k, z)
    if slab:
        d = cfg.slab_thickness
        r1 = slab_fresnel(cfg.mirror1, k, z, pol, d)
        r2 = slab_fresnel(cfg.mirror2, k, z, pol, d)
    else:
        r1 = fresnel(cfg.mirror1, k, z, pol)
        r2 = fresnel(cfg.mirror2, k, z, pol)
    x = r1 * r2 * np.exp(2j * kz * cfg.L)
    den = 1.0 - x
    if np.any(den == 0):
        raise CavityResonanceError("cavity resonance: 1 - r1 r2 e^{2ikzL} = 0")
    return x / den


def spectral_density(cfg: CavityConfig, k, z, pol: Polarization, slab: bool = False):
    """p = hbar k_z f C: the per-mode weight of the pressure integrand.

    Re[p] is even in omega on the real axis and p is real on the positive
    imaginary axis.
    """
    kz, _ = axial_wavenumbers(cfg.mirror1, k, z)
    f = loop_function(cfg, k, z, pol, slab=slab)
    return HBAR * kz * f * thermal_factor(z, cfg.T)
