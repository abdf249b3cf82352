"""Physical constants (exact SI defined values) and unit conversions.

Internally everything is SI with angular frequencies in rad/s.  User-facing
parameters are accepted in eV (photon energies) and nm (lengths) and converted
at the boundary.
"""
from dataclasses import dataclass


@dataclass(frozen=True)
class PhysicalConstants:
    """Exact SI defined values (2019 redefinition)."""

    hbar: float = 1.054571817e-34   # J s
    c: float = 299792458.0          # m/s
    k_B: float = 1.380649e-23       # J/K
    eV: float = 1.602176634e-19     # J


CONST = PhysicalConstants()

HBAR = CONST.hbar
C = CONST.c
K_B = CONST.k_B
EV = CONST.eV


def ev_to_angular(energy_ev: float) -> float:
    """Convert a photon energy in eV to an angular frequency in rad/s."""
    return energy_ev * EV / HBAR


def angular_to_ev(omega: float) -> float:
    """Convert an angular frequency in rad/s to a photon energy in eV."""
    return omega * HBAR / EV


def nm_to_m(length_nm: float) -> float:
    """Convert nanometers to meters."""
    return length_nm * 1e-9
