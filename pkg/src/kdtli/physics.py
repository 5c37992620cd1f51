"""Molecule / grating / geometry types and the light-grating interaction.

Converts beam and laser inputs into the two dimensionless interaction
parameters (the peak eikonal phase phi0 and the peak mean absorbed photon
number n0) plus the Talbot parameter xi = L / L_T.  All quantities SI.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .constants import (
    AMU_KG,
    ANGSTROM3_M3,
    C_LIGHT,
    H_PLANCK,
    HBAR,
)

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class Molecule:
    """Molecular beam species: mass, optical polarizability, absorption cross section.

    ``alpha_opt`` is the volume-convention polarizability at the laser
    frequency (SI polarizability / 4 pi eps0), in m^3.  ``sigma_abs`` is the
    absorption cross section at the laser frequency, in m^2.
    """

    name: str
    mass: float          # kg
    alpha_opt: float     # m^3
    sigma_abs: float     # m^2

    def __post_init__(self) -> None:
        if self.mass <= 0.0:
            raise ValueError(f"molecule mass must be > 0, got {self.mass}")
        if self.alpha_opt < 0.0:
            raise ValueError("optical polarizability must be >= 0")
        if self.sigma_abs < 0.0:
            raise ValueError("absorption cross section must be >= 0")

    @classmethod
    def from_units(cls, name: str, mass_amu: float, alpha_a3: float,
                   sigma_abs_m2: float) -> "Molecule":
        """Construct from amu / cubic-angstrom inputs."""
        return cls(name=name, mass=mass_amu * AMU_KG,
                   alpha_opt=alpha_a3 * ANGSTROM3_M3, sigma_abs=sigma_abs_m2)

    @property
    def mass_amu(self) -> float:
        return self.mass / AMU_KG

    @property
    def alpha_a3(self) -> float:
        return self.alpha_opt / ANGSTROM3_M3


@dataclass(frozen=True)
class LaserGrating:
    """Retro-reflected standing-wave grating; period is half the wavelength."""

    wavelength: float    # m
    power: float         # W
    waist_y: float       # m, vertical waist
    waist_z: float       # m, waist along the molecular beam

    def __post_init__(self) -> None:
        for field in ("wavelength", "power", "waist_y", "waist_z"):
            if getattr(self, field) <= 0.0:
                raise ValueError(f"laser {field} must be > 0")

    @property
    def period(self) -> float:
        return 0.5 * self.wavelength

    def with_power(self, power: float) -> "LaserGrating":
        return replace(self, power=power)


@dataclass(frozen=True)
class MaterialGrating:
    """Absorptive nanostructure mask."""

    period: float           # m
    open_fraction: float    # slit width / period
    wall_thickness: float = 0.0   # m, only the yaw rule uses it

    def __post_init__(self) -> None:
        if self.period <= 0.0:
            raise ValueError("grating period must be > 0")
        if not 0.0 < self.open_fraction < 1.0:
            raise ValueError("open fraction must lie in (0, 1)")
        if self.wall_thickness < 0.0:
            raise ValueError("wall thickness must be >= 0")

    @property
    def slit_width(self) -> float:
        return self.open_fraction * self.period


@dataclass(frozen=True)
class Interferometer:
    """Symmetric three-grating geometry: mask, light grating, mask.

    ``L`` is the (equal) separation between neighbouring gratings, ``L0``
    the source-to-first-grating distance and ``L3`` the distance from the
    last grating to the detector.  ``h_s`` / ``h_d`` are the source and
    detector slit heights, ``n_slits`` the number of illuminated openings.
    """

    L: float
    L0: float
    L3: float
    h_s: float
    h_d: float
    n_slits: int
    g1: MaterialGrating
    g3: MaterialGrating
    laser: LaserGrating

    def __post_init__(self) -> None:
        for field in ("L", "L0", "L3", "h_s", "h_d"):
            if getattr(self, field) <= 0.0:
                raise ValueError(f"interferometer {field} must be > 0")
        if self.n_slits < 1:
            raise ValueError("n_slits must be >= 1")
        d = self.laser.period
        for g, tag in ((self.g1, "g1"), (self.g3, "g3")):
            if not math.isclose(g.period, d, rel_tol=1e-12):
                raise ValueError(
                    f"{tag} period {g.period} differs from light-grating period {d}; "
                    "the equal-period design is assumed throughout")

    @property
    def period(self) -> float:
        return self.laser.period


@dataclass(frozen=True)
class InteractionParams:
    """Dimensionless state of one grating passage at a given velocity."""

    phi0: float   # peak eikonal phase, rad
    n0: float     # peak mean number of absorbed photons
    xi: float     # Talbot parameter L / L_T

    def __post_init__(self) -> None:
        if self.phi0 < 0.0 or self.n0 < 0.0:
            raise ValueError("phi0 and n0 must be >= 0")
        if self.xi <= 0.0:
            raise ValueError("xi must be > 0")


def de_broglie_wavelength(molecule: Molecule, v_z: float) -> float:
    """Matter wavelength h / (m v) for forward speed v_z."""
    if v_z <= 0.0:
        raise ValueError(f"velocity must be > 0, got {v_z}")
    return H_PLANCK / (molecule.mass * v_z)


def talbot_length(molecule: Molecule, v_z: float, d: float) -> float:
    """Near-field self-imaging distance d^2 / lambda_dB = d^2 m v / h."""
    if d <= 0.0:
        raise ValueError(f"grating period must be > 0, got {d}")
    return d * d / de_broglie_wavelength(molecule, v_z)


def phase_amplitude(molecule: Molecule, laser: LaserGrating, v_z: float) -> float:
    """Peak eikonal phase phi0 = 8 sqrt(2 pi) alpha P / (hbar c w_y v_z)."""
    if v_z <= 0.0:
        raise ValueError(f"velocity must be > 0, got {v_z}")
    return (8.0 * _SQRT_2PI * molecule.alpha_opt * laser.power
            / (HBAR * C_LIGHT * laser.waist_y * v_z))


def absorption_amplitude(molecule: Molecule, laser: LaserGrating, v_z: float) -> float:
    """Peak mean absorbed-photon number n0 = (8/sqrt(2 pi)) sigma lambda P / (h c w_y v_z)."""
    if v_z <= 0.0:
        raise ValueError(f"velocity must be > 0, got {v_z}")
    return (8.0 / _SQRT_2PI * molecule.sigma_abs * laser.wavelength * laser.power
            / (H_PLANCK * C_LIGHT * laser.waist_y * v_z))


def talbot_parameter(molecule: Molecule, v_z: float, d: float, L: float) -> float:
    """xi = L / L_T; the natural abscissa of every visibility curve."""
    if L <= 0.0:
        raise ValueError("grating separation must be > 0")
    return L / talbot_length(molecule, v_z, d)


def interaction_params(molecule: Molecule, laser: LaserGrating, L: float,
                       v_z: float) -> InteractionParams:
    """Bundle (phi0, n0, xi) for one species at one velocity and laser power."""
    return InteractionParams(
        phi0=phase_amplitude(molecule, laser, v_z),
        n0=absorption_amplitude(molecule, laser, v_z),
        xi=talbot_parameter(molecule, v_z, laser.period, L),
    )


def eikonal_phase(x: float, phi0: float, d: float) -> float:
    """Position-dependent phase imprint phi0 sin^2(pi x / d)."""
    if d <= 0.0:
        raise ValueError("grating period must be > 0")
    s = math.sin(math.pi * x / d)
    return phi0 * s * s


def classical_kick(x: float, phi0: float, d: float) -> float:
    """Transverse momentum kick (pi hbar / d) phi0 sin(2 pi x / d).

    The hbar cancels the one hiding in phi0, so the kick is classical.
    """
    if d <= 0.0:
        raise ValueError("grating period must be > 0")
    return math.pi * HBAR / d * phi0 * math.sin(2.0 * math.pi * x / d)


# Measured optical properties at 532 nm for the species this instrument
# characterizes.  The fluorofullerene cross sections are consistent with
# zero (only upper bounds are known), so they are entered as 0.
MOLECULES = {
    "C60": Molecule.from_units("C60", 720.0, 87.1, 2.8e-22),
    "C70": Molecule.from_units("C70", 840.0, 114.2, 24.9e-22),
    "C60F36": Molecule.from_units("C60F36", 1404.6, 60.3, 0.0),
    "C60F48": Molecule.from_units("C60F48", 1632.6, 60.1, 0.0),
}
