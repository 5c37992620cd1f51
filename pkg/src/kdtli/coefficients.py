"""Closed-form transfer coefficients of a sinusoidal phase grating.

A standing light wave imprints the phase phi0 sin^2(pi x / d) and absorbs
photons at the rate n0 sin^2(pi x / d).  Its effect on Talbot-Lau fringe
formation is carried entirely by a family of Bessel-valued coefficients:

* ``fourier_b``       -- diffraction amplitudes of the pure phase grating
* ``talbot_lau_B``    -- coherent fringe-transfer coefficients
* ``classical_C``     -- their moire (classical-trajectory) counterparts
* ``chi``             -- characteristic coefficients of the photon-number
                         momentum-kick statistics
* ``b_hat``/``c_hat`` -- transfer coefficients with absorption folded in

The hatted coefficients have a closed form built on a mixed addition
theorem for J and I Bessel functions (``graf_mixed_theorem_check`` keeps it
honest at runtime).  Near the degenerate point |zeta_coh| = zeta_abs the
closed form is 0/0-structured, so evaluation falls back to the defining
convolution; odd orders are always evaluated by convolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .bessel import besseli, besseli_scaled, besselj

# Tail rule for every truncated infinite sum: stop once 5 consecutive terms
# fall below SUM_TAIL_EPS, never exceeding SUM_INDEX_CAP.
SUM_TAIL_EPS = 1e-14
SUM_TAIL_RUN = 5
SUM_INDEX_CAP = 200

# Relative width of the degenerate |zeta_coh| ~ zeta_abs band routed to the
# convolution fallback.
DEGENERACY_BAND = 1e-6

_POW_MINUS_I = (1.0 + 0.0j, -1.0j, -1.0 + 0.0j, 1.0j)   # (-i)^j, j mod 4


def _check_amplitudes(phi0: float, n0: float) -> None:
    if phi0 < 0.0:
        raise ValueError(f"phi0 must be >= 0, got {phi0}")
    if n0 < 0.0:
        raise ValueError(f"n0 must be >= 0, got {n0}")


def sin_pi(xi: float) -> float:
    """sin(pi xi) with exact period 2 and exact zeros at integer xi."""
    r = math.remainder(xi, 2.0)
    if r == round(r):
        return 0.0
    return math.sin(math.pi * r)


def sin_half_pi_sq(xi: float) -> float:
    """sin^2(pi xi / 2) with exact period 2."""
    r = math.remainder(xi, 2.0)
    if r == 0.0:
        return 0.0
    s = math.sin(0.5 * math.pi * r)
    return s * s


def sin_pi_sq(xi: float) -> float:
    """sin^2(pi xi) with exact period 1."""
    r = math.remainder(xi, 1.0)
    if r == 0.0:
        return 0.0
    s = math.sin(math.pi * r)
    return s * s


@dataclass(frozen=True)
class ZetaTriple:
    """The three argument functions entering the hatted coefficients."""

    zeta_coh: float   # phi0 sin(pi xi): coherent dipole-force diffraction
    zeta_abs: float   # n0 sin^2(pi xi / 2): incoherent photon absorption
    zeta_cl: float    # phi0 pi xi: classical lensing, not periodic in xi


def zetas(xi: float, phi0: float, n0: float) -> ZetaTriple:
    _check_amplitudes(phi0, n0)
    return ZetaTriple(
        zeta_coh=phi0 * sin_pi(xi),
        zeta_abs=n0 * sin_half_pi_sq(xi),
        zeta_cl=phi0 * math.pi * xi,
    )


def fourier_b(j: int, phi0: float) -> complex:
    """Diffraction amplitude b_j = (-i)^j e^{i phi0/2} J_j(phi0/2)."""
    _check_amplitudes(phi0, 0.0)
    phase = complex(math.cos(0.5 * phi0), math.sin(0.5 * phi0))
    return _POW_MINUS_I[j % 4] * phase * besselj(j, 0.5 * phi0)


def talbot_lau_B(m: int, xi: float, phi0: float) -> float:
    """Coherent fringe-transfer coefficient B_m(xi) = J_m(-phi0 sin(pi xi))."""
    _check_amplitudes(phi0, 0.0)
    return besselj(m, -phi0 * sin_pi(xi))


def classical_C(m: int, xi: float, phi0: float) -> float:
    """Classical coefficient C_m(xi) = J_m(-pi phi0 xi); no xi recurrence."""
    _check_amplitudes(phi0, 0.0)
    return besselj(m, -math.pi * phi0 * xi)


def prob_k_given_n(k: int, n: int) -> float:
    """Net-momentum distribution of a balanced n-step random walk.

    Probability that n absorbed photons, each pushing left or right with
    equal chance, transfer k net photon momenta.
    """
    if n < 0:
        raise ValueError("photon count must be >= 0")
    if (n + k) % 2 != 0 or abs(k) > n:
        return 0.0
    return math.comb(n, (k + n) // 2) / 2.0**n


def prob_k(k: int, nbar: float) -> float:
    """Net-momentum distribution after Poisson-averaged absorption.

    exp(-nbar) I_k(nbar): the Poisson mixture of balanced random walks.
    """
    if nbar < 0.0:
        raise ValueError("mean photon number must be >= 0")
    return besseli_scaled(k, nbar)


def chi(m: int, xi: float, n0: float) -> float:
    """Characteristic coefficient exp(-n0 sin^2(pi xi)) I_m(n0 sin^2(pi xi))."""
    if n0 < 0.0:
        raise ValueError("n0 must be >= 0")
    a = n0 * sin_pi_sq(xi)
    return besseli_scaled(m, a)


def _sgn(x: float) -> float:
    return 1.0 if x >= 0.0 else -1.0


def _hat(m: int, zc: float, za: float) -> float:
    """Transfer coefficient with absorption: convolution of J_n(-zc) with
    the scaled I_{m-n}(za), in closed form where safe."""
    if za == 0.0:
        return besselj(m, -zc)
    if m % 2 != 0 or abs(abs(zc) - za) < DEGENERACY_BAND * (abs(zc) + za + 1.0):
        return _hat_convolution(m, zc, za)
    if abs(zc) > za:
        arg = math.sqrt(zc * zc - za * za)
        pref = ((zc - za) / (zc + za)) ** (m // 2)
        return math.exp(-za) * pref * besselj(m, -_sgn(za + zc) * arg)
    # |zc| < za: the Bessel argument turns imaginary; J_m(i u) = i^m I_m(u)
    # leaves a real value for even m.
    w = math.sqrt(za * za - zc * zc)
    pref = ((za - zc) / (za + zc)) ** (m // 2)
    return pref * besseli_scaled(m, w) * math.exp(w - za)


def _hat_convolution(m: int, zc: float, za: float) -> float:
    def term(n: int) -> float:
        inc = besseli_scaled(m - n, za)
        if inc == 0.0:
            return 0.0
        return besselj(n, -zc) * inc

    total = term(0)
    for direction in (1, -1):
        below = 0
        n = direction
        while abs(n) <= SUM_INDEX_CAP:
            t = term(n)
            total += t
            below = below + 1 if abs(t) < SUM_TAIL_EPS else 0
            if below >= SUM_TAIL_RUN:
                break
            n += direction
    return total


def b_hat(m: int, xi: float, phi0: float, n0: float) -> float:
    """Quantum fringe-transfer coefficient including photon absorption."""
    z = zetas(xi, phi0, n0)
    return _hat(m, z.zeta_coh, z.zeta_abs)


def c_hat(m: int, xi: float, phi0: float, n0: float) -> float:
    """Classical (moire) transfer coefficient including photon absorption."""
    z = zetas(xi, phi0, n0)
    return _hat(m, z.zeta_cl, z.zeta_abs)


def graf_mixed_theorem_check(u: float, v: float, n: int, kmax: int = 80) -> float:
    """Residual of the mixed J/I addition identity underlying the closed forms.

    Compares ((v-u)/(v+u))^{n/2} J_n(-sgn(u+v) sqrt(v^2-u^2)) against the
    truncated series sum_k I_{k+n}(u) J_k(v).  Returns |LHS - RHS|; small
    residuals certify the closed-form branch logic on (u, v).

    The closed form uses principal branches, which match the series for
    u >= 0 (the physical regime: u is an absorption strength) and for even
    n at any u; for odd n with u < 0 the two sides can differ by a sign.
    """
    if u == v or u == -v:
        raise ValueError("identity is degenerate at u = +/- v")
    ratio = complex(v - u) / complex(v + u)
    pref = ratio ** (n / 2.0)
    disc = v * v - u * u
    sg = _sgn(u + v)
    if disc >= 0.0:
        lhs = pref * besselj(n, -sg * math.sqrt(disc))
    else:
        y = -sg * math.sqrt(-disc)
        lhs = pref * 1j**n * besseli(n, y)
    rhs = 0.0
    for k in range(-kmax, kmax + 1):
        rhs += besseli(k + n, u) * besselj(k, v)
    return abs(lhs - rhs)
