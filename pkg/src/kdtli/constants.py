"""Physical constants (CODATA 2018) and unit conversions.

Everything internal is SI. Inputs arrive in the units molecular-beam people
use (amu, cubic angstroms, nm, um, mm) and are converted exactly once, at
construction / parse time.
"""

import math

H_PLANCK = 6.62607015e-34       # J s, exact
C_LIGHT = 299792458.0           # m/s, exact
HBAR = H_PLANCK / (2.0 * math.pi)
AMU_KG = 1.66053906660e-27      # kg

ANGSTROM3_M3 = 1e-30
NM_M = 1e-9
UM_M = 1e-6
MM_M = 1e-3


def amu_to_kg(mass_amu: float) -> float:
    return mass_amu * AMU_KG


def kg_to_amu(mass_kg: float) -> float:
    return mass_kg / AMU_KG


def angstrom3_to_m3(alpha_a3: float) -> float:
    return alpha_a3 * ANGSTROM3_M3


def m3_to_angstrom3(alpha_m3: float) -> float:
    return alpha_m3 / ANGSTROM3_M3
