"""Frequency-dependent material response evaluated anywhere in the complex plane.

Metallic permittivity uses the free-electron (Drude) form with plasma
frequency omega_p and ohmic relaxation rate gamma,

    eps(z) = 1 + chi(z),   chi(z) = omega_p^2 / (-i z (gamma - i z)),

whose lossless limit (gamma = 0) is chi(z) = -omega_p^2 / z^2.  The magnetic
response is a single relaxation

    mu(z) = 1 + (mu(0) - 1) / (1 - i z / omega_m),

with a simple pole at z = -i*omega_m.  Presets for gold and nickel carry the
parameter values used throughout.
"""
import enum
from dataclasses import dataclass, replace

import numpy as np

from .constants import C, ev_to_angular
from .numerics import Exponential, adaptive_quad, geom_edges


class PoleEvaluationError(ZeroDivisionError):
    """A response function was evaluated exactly at one of its poles."""


class MaterialKind(enum.Enum):
    LOSSY_DRUDE = "lossy-drude"
    STRICT_PLASMA = "strict-plasma"


@dataclass(frozen=True)
class Material:
    """Immutable mirror material.

    Parameters
    ----------
    omega_p : float
        Plasma frequency [rad/s], > 0.
    gamma : float
        Ohmic relaxation rate [rad/s], >= 0 (exactly 0 for STRICT_PLASMA).
    mu0 : float
        Static permeability mu(0), >= 1.
    omega_m : float
        Magnetic relaxation frequency [rad/s], > 0 (irrelevant when mu0 == 1).
    kind : MaterialKind
    """

    omega_p: float
    gamma: float
    mu0: float = 1.0
    omega_m: float = ev_to_angular(1e-10)
    kind: MaterialKind = MaterialKind.LOSSY_DRUDE

    def __post_init__(self):
        if not self.omega_p > 0:
            raise ValueError("omega_p must be positive")
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")
        if self.mu0 < 1:
            raise ValueError("mu0 must be >= 1")
        if not self.omega_m > 0:
            raise ValueError("omega_m must be positive")
        if self.kind is MaterialKind.STRICT_PLASMA and self.gamma != 0.0:
            raise ValueError("strict plasma kind requires gamma == 0")
        if self.kind is MaterialKind.LOSSY_DRUDE and self.gamma == 0.0:
            raise ValueError("lossy kind requires gamma > 0")

    @property
    def magnetic(self) -> bool:
        return self.mu0 > 1.0


# Parameter values: gold 9 eV / 35 meV, nickel 4.89 eV / 43.6 meV with static
# permeability 110 relaxing at 0.1 neV.  Gold's omega_m matches nickel's for
# uniformity; with mu0 = 1 it never enters.
GOLD = Material(omega_p=ev_to_angular(9.0), gamma=ev_to_angular(0.035), mu0=1.0)
NICKEL = Material(omega_p=ev_to_angular(4.89), gamma=ev_to_angular(0.0436), mu0=110.0)

PRESETS = {"au": GOLD, "ni": NICKEL}


def preset(name: str) -> Material:
    """Resolve a preset material by name ('au' or 'ni')."""
    try:
        return PRESETS[name.lower()]
    except KeyError:
        raise KeyError(f"unknown material preset {name!r}; have {sorted(PRESETS)}") from None


def with_gamma_scale(m: Material, scale: float) -> Material:
    """Material with its relaxation rate multiplied by ``scale`` > 0."""
    if not scale > 0:
        raise ValueError("scale must be positive")
    return replace(m, gamma=m.gamma * scale)


def plasma_limit(m: Material) -> Material:
    """The strictly lossless counterpart of a material (gamma set to 0)."""
    return replace(m, gamma=0.0, kind=MaterialKind.STRICT_PLASMA)


def susceptibility(m: Material, z):
    """Electric susceptibility chi(z) for complex z (scalar or array)."""
    z = np.asarray(z, dtype=complex)
    if m.kind is MaterialKind.STRICT_PLASMA:
        den = z * z
        if np.any(den == 0):
            raise PoleEvaluationError("plasma susceptibility has a double pole at z = 0")
        return -m.omega_p**2 / den
    den = -1j * z * (m.gamma - 1j * z)
    if np.any(den == 0):
        raise PoleEvaluationError("Drude susceptibility poles at z = 0 and z = -i*gamma")
    return m.omega_p**2 / den


def permittivity(m: Material, z):
    """Relative permittivity eps(z) = 1 + chi(z)."""
    return 1.0 + susceptibility(m, z)


def conductivity(m: Material, z):
    """Complex conductivity sigma(z) = omega_p^2 / (gamma - i z); finite at z=0 when lossy."""
    z = np.asarray(z, dtype=complex)
    den = m.gamma - 1j * z
    if np.any(den == 0):
        raise PoleEvaluationError("conductivity pole")
    return m.omega_p**2 / den


def permeability(m: Material, z):
    """Relative permeability mu(z); identically 1 for non-magnetic materials."""
    z = np.asarray(z, dtype=complex)
    if m.mu0 == 1.0:
        return np.ones_like(z)
    den = 1.0 - 1j * z / m.omega_m
    if np.any(den == 0):
        raise PoleEvaluationError("permeability pole at z = -i*omega_m")
    return 1.0 + (m.mu0 - 1.0) / den


def kk_transform(m: Material, xi: float, rtol: float = 1e-8) -> float:
    """Reconstruct chi on the imaginary axis from the dissipative response.

    Evaluates (2/pi) * int_0^inf  Re[sigma(x)] / (x^2 + xi^2) dx, which for a
    lossy metal reproduces chi(i*xi).  For the strictly lossless model the
    dissipative part vanishes identically and the result is exactly 0, even
    though chi(i*xi) != 0: dispersion relations carry no content without
    dissipation.
    """
    if not xi > 0:
        raise ValueError("xi must be positive")
    if m.kind is MaterialKind.STRICT_PLASMA or m.gamma == 0.0:
        return 0.0
    g, wp = m.gamma, m.omega_p

    def integrand(x):
        return (2.0 / np.pi) * wp**2 * g / ((g**2 + x**2) * (x**2 + xi**2))

    # two Lorentzian scales (gamma and xi); truncate where the x^-4 tail bound
    # drops below the tolerance
    target = wp**2 / (xi**2 + g * xi)
    xmax = max(g, xi) * 10.0
    while (2.0 / np.pi) * wp**2 * g / (3.0 * xmax**3) > 0.05 * rtol * target:
        xmax *= 2.0
    scales = sorted({g * 1e-2, g, g * 1e2, xi * 1e-2, xi, xi * 1e2})
    edges = np.concatenate([[0.0], [s for s in scales if s < xmax], [xmax]])
    r = adaptive_quad(integrand, 0.0, xmax, rtol=rtol * 0.1, init_edges=np.unique(edges))
    return float(r.value)
