"""Fringe signals, sinusoidal visibilities and velocity averaging.

The detector signal behind the third grating is a Fourier series in the
scan position x_s whose coefficients combine the mask coefficients
A_l = f sinc(l pi f) with the even-order transfer coefficients of the
light grating.  Visibility is the first-harmonic contrast 2 |S_1 / S_0|,
i.e. the contrast of a sinusoidal fit to the pattern.

Velocity spread enters by averaging the signed harmonic S_1 over the
(truncated Gaussian) beam velocity distribution: the zeroth Fourier
component does not depend on velocity, so only S_1 needs the quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import coefficients as coeffs
from .bessel import besseli_scaled
from .physics import Interferometer, Molecule, interaction_params, InteractionParams

DEFAULT_ELL_MAX = 8          # A_l^2 < 1e-5 A_0^2 beyond this for f ~ 0.42
DEFAULT_VELOCITY_NODES = 64
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_FWHM_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))


class ConfigError(ValueError):
    """Invalid run configuration (bad distribution, missing keys, ...)."""


def sinc(x: float) -> float:
    """Unnormalized sinc: sin(x)/x with sinc(0) = 1 (no hidden pi)."""
    if x == 0.0:
        return 1.0
    return math.sin(x) / x


def grating_coefficient_A(ell: int, f: float) -> float:
    """Fourier coefficient A_l = f sinc(l pi f) of a binary mask of open fraction f."""
    if not 0.0 < f < 1.0:
        raise ValueError(f"open fraction must lie in (0, 1), got {f}")
    return f * sinc(ell * math.pi * f)


@dataclass(frozen=True)
class FringePattern:
    """One-period fringe signal, stored as Fourier coefficients S_0..S_lmax.

    The signal is real, so S_{-l} = conj(S_l) and only l >= 0 is stored.
    """

    coeffs: tuple          # complex S_l, l = 0..ell_max
    period: float          # m

    def __post_init__(self) -> None:
        s0 = self.coeffs[0]
        if s0.imag != 0.0 or s0.real <= 0.0:
            raise ValueError("S_0 must be real and positive")

    @property
    def visibility(self) -> float:
        return 2.0 * abs(self.coeffs[1] / self.coeffs[0])

    def sample(self, x_s) -> np.ndarray:
        """Evaluate the signal at scan position(s) x_s (meters)."""
        x = np.atleast_1d(np.asarray(x_s, dtype=float))
        total = np.full_like(x, float(self.coeffs[0].real))
        for ell in range(1, len(self.coeffs)):
            c = self.coeffs[ell]
            arg = 2.0 * math.pi * ell * x / self.period
            total += 2.0 * (c.real * np.cos(arg) - c.imag * np.sin(arg))
        return total if np.ndim(x_s) else total[0]


def _pattern(params: InteractionParams, f: float, ell_max: int, hat,
             period: float) -> FringePattern:
    if ell_max < 1:
        raise ValueError("ell_max must be >= 1")
    cs = []
    for ell in range(0, ell_max + 1):
        a = grating_coefficient_A(ell, f)
        cs.append(complex(a * a * hat(2 * ell, ell * params.xi, params.phi0, params.n0)))
    return FringePattern(coeffs=tuple(cs), period=period)


def fringe_pattern_qm(params: InteractionParams, f: float,
                      ell_max: int = DEFAULT_ELL_MAX, period: float = 1.0) -> FringePattern:
    """Quantum interference pattern behind the third grating."""
    return _pattern(params, f, ell_max, coeffs.b_hat, period)


def fringe_pattern_cl(params: InteractionParams, f: float,
                      ell_max: int = DEFAULT_ELL_MAX, period: float = 1.0) -> FringePattern:
    """Moire pattern for classically moving molecules."""
    return _pattern(params, f, ell_max, coeffs.c_hat, period)


def signal_qm(x_s: float, params: InteractionParams, f: float,
              ell_max: int = DEFAULT_ELL_MAX, period: float = 1.0) -> float:
    """Quantum fringe signal at scan position x_s."""
    return float(fringe_pattern_qm(params, f, ell_max, period).sample(x_s))


def signal_cl(x_s: float, params: InteractionParams, f: float,
              ell_max: int = DEFAULT_ELL_MAX, period: float = 1.0) -> float:
    """Classical fringe signal at scan position x_s."""
    return float(fringe_pattern_cl(params, f, ell_max, period).sample(x_s))


def visibility_qm(xi: float, phi0: float, n0: float, f: float) -> float:
    """Monochromatic quantum visibility 2 sinc^2(pi f) |B_hat_2(xi)|."""
    if not 0.0 < f < 1.0:
        raise ValueError("open fraction must lie in (0, 1)")
    s = sinc(math.pi * f)
    return 2.0 * s * s * abs(coeffs.b_hat(2, xi, phi0, n0))


def visibility_cl(xi: float, phi0: float, n0: float, f: float) -> float:
    """Monochromatic classical visibility 2 sinc^2(pi f) |C_hat_2(xi)|."""
    if not 0.0 < f < 1.0:
        raise ValueError("open fraction must lie in (0, 1)")
    s = sinc(math.pi * f)
    return 2.0 * s * s * abs(coeffs.c_hat(2, xi, phi0, n0))


def visibility_abs_only(xi: float, n0: float, f: float) -> float:
    """Visibility from photon absorption alone (vanishing dipole phase)."""
    if n0 < 0.0:
        raise ValueError("n0 must be >= 0")
    if not 0.0 < f < 1.0:
        raise ValueError("open fraction must lie in (0, 1)")
    za = n0 * coeffs.sin_half_pi_sq(xi)
    s = sinc(math.pi * f)
    return 2.0 * s * s * besseli_scaled(2, za)


def maximize_abs_only(f: float, n0_max: float = 20.0, tol: float = 1e-10):
    """Golden-section maximum of the absorption-only visibility over n0.

    Evaluated at xi = 1 where the absorption strength equals n0 itself.
    Returns (n0_star, v_star).
    """
    lo, hi = 0.0, n0_max
    c = hi - GOLDEN * (hi - lo)
    d = lo + GOLDEN * (hi - lo)
    fc = visibility_abs_only(1.0, c, f)
    fd = visibility_abs_only(1.0, d, f)
    while hi - lo > tol:
        if fc > fd:
            hi, d, fd = d, c, fc
            c = hi - GOLDEN * (hi - lo)
            fc = visibility_abs_only(1.0, c, f)
        else:
            lo, c, fc = c, d, fd
            d = lo + GOLDEN * (hi - lo)
            fd = visibility_abs_only(1.0, d, f)
    n0_star = 0.5 * (lo + hi)
    return n0_star, visibility_abs_only(1.0, n0_star, f)


@dataclass(frozen=True)
class VelocityDistribution:
    """Gaussian forward-velocity distribution, truncated to v > 0.

    ``rel_fwhm`` is the full width at half maximum divided by the mean.
    """

    mean_v: float
    rel_fwhm: float

    def __post_init__(self) -> None:
        if self.mean_v <= 0.0:
            raise ValueError("mean velocity must be > 0")
        if not 0.0 <= self.rel_fwhm < 1.0:
            raise ValueError("relative FWHM must lie in [0, 1)")

    @property
    def sigma(self) -> float:
        return self.rel_fwhm * self.mean_v / _FWHM_SIGMA

    def nodes_and_weights(self, n_nodes: int = DEFAULT_VELOCITY_NODES):
        """Trapezoid nodes over +/- 4 sigma, clipped to v > 0, weights renormalized.

        Raises ConfigError when the untruncated Gaussian puts >= 1e-6 of its
        mass at v <= 0 (the truncation would then bias the average).
        """
        if n_nodes < 32:
            raise ValueError("velocity quadrature needs at least 32 nodes")
        sig = self.sigma
        if sig == 0.0:
            return np.array([self.mean_v]), np.array([1.0])
        # P(v <= 0) = Phi(-mean/sigma) for the untruncated Gaussian
        tail = 0.5 * math.erfc(self.mean_v / (sig * math.sqrt(2.0)))
        if tail >= 1e-6:
            raise ConfigError(
                f"velocity distribution has {tail:.2e} mass at v <= 0; "
                "mean/sigma must exceed ~4.75")
        lo = max(self.mean_v - 4.0 * sig, 1e-12)
        hi = self.mean_v + 4.0 * sig
        v = np.linspace(lo, hi, n_nodes)
        w = np.exp(-0.5 * ((v - self.mean_v) / sig) ** 2)
        w[0] *= 0.5
        w[-1] *= 0.5
        w /= w.sum()
        return v, w


def _averaged_first_harmonic(dist: VelocityDistribution, molecule: Molecule,
                             ifm: Interferometer, power: float, hat,
                             n_nodes: int) -> float:
    laser = ifm.laser.with_power(power) if power != ifm.laser.power else ifm.laser
    vs, ws = dist.nodes_and_weights(n_nodes)
    acc = 0.0
    for v, w in zip(vs, ws):
        p = interaction_params(molecule, laser, ifm.L, float(v))
        acc += w * hat(2, p.xi, p.phi0, p.n0)
    return acc


def _sinc_pair(ifm: Interferometer) -> float:
    # reduces to sinc^2(pi f) when both masks share the open fraction
    return (sinc(math.pi * ifm.g1.open_fraction)
            * sinc(math.pi * ifm.g3.open_fraction))


def velocity_averaged_visibility(dist: VelocityDistribution, molecule: Molecule,
                                 ifm: Interferometer, power: float,
                                 model: str = "quantum",
                                 n_nodes: int = DEFAULT_VELOCITY_NODES) -> float:
    """Velocity-averaged sinusoidal visibility 2 |<S_1>_v| / S_0."""
    if power < 0.0:
        raise ValueError("laser power must be >= 0")
    if power == 0.0:
        return 0.0
    if model == "quantum":
        hat = coeffs.b_hat
    elif model == "classical":
        hat = coeffs.c_hat
    else:
        raise ValueError(f"unknown model {model!r}")
    mean = _averaged_first_harmonic(dist, molecule, ifm, power, hat, n_nodes)
    return 2.0 * _sinc_pair(ifm) * abs(mean)


@dataclass(frozen=True)
class ScanPoint:
    """Velocity-averaged visibilities at one laser power."""

    power: float
    visibility_qm: float
    visibility_cl: float

    def __post_init__(self) -> None:
        for v in (self.visibility_qm, self.visibility_cl):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"visibility {v} outside [0, 1]")


def power_scan(molecule: Molecule, ifm: Interferometer, dist: VelocityDistribution,
               powers, n_nodes: int = DEFAULT_VELOCITY_NODES) -> list:
    """Quantum and classical velocity-averaged visibilities over a power list."""
    powers = list(powers)
    if any(p < 0.0 for p in powers):
        raise ValueError("powers must be >= 0")
    if sorted(powers) != powers:
        raise ValueError("powers must be sorted ascending")
    points = []
    for p in powers:
        points.append(ScanPoint(
            power=p,
            visibility_qm=velocity_averaged_visibility(dist, molecule, ifm, p,
                                                       "quantum", n_nodes),
            visibility_cl=velocity_averaged_visibility(dist, molecule, ifm, p,
                                                       "classical", n_nodes),
        ))
    return points
