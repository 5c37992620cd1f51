"""Weighted least-squares extraction of polarizability and absorption cross section.

Fits the velocity-averaged visibility-vs-power model to measured
(P, V, sigma_V) triples with a damped Gauss-Newton loop (Levenberg-Marquardt
lambda schedule).  Parameters are optimized as (log alpha, log(sigma + eps)),
which enforces positivity, makes the loop invariant under unit rescalings
and lets sigma collapse to an effective zero for weakly absorbing species;
in that case a one-sided 95% profile upper bound is reported instead of a
symmetric error bar.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .pattern import VelocityDistribution, velocity_averaged_visibility
from .physics import Interferometer, Molecule

SIGMA_EPS = 1e-30        # m^2; log-parameterization floor
SIGMA_ZERO_GATE = 1e-26  # below this the cross section counts as zero
MAX_ITER = 200
STEP_TOL = 1e-10
GRAD_TOL = 1e-8
_PROFILE_DELTA_CHI2 = 2.706   # one-sided 95% for one parameter


class FitError(RuntimeError):
    """Optimizer failed to converge; carries the best point found."""

    def __init__(self, message: str, result: "FitResult"):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class PowerScanDataset:
    """Measured interference contrast versus laser power for one species."""

    molecule: Molecule                  # mass is fixed; alpha/sigma are seeds
    dist: VelocityDistribution
    interferometer: Interferometer
    powers: tuple                       # W
    visibilities: tuple
    sigmas: tuple                       # one standard deviation per point

    def __post_init__(self) -> None:
        n = len(self.powers)
        if n < 4:
            raise ValueError("need at least 4 scan points to fit two parameters")
        if len(self.visibilities) != n or len(self.sigmas) != n:
            raise ValueError("powers/visibilities/sigmas length mismatch")
        if len(set(self.powers)) != n:
            raise ValueError("powers must be distinct")
        if any(s <= 0.0 for s in self.sigmas):
            raise ValueError("every sigma_V must be > 0")


@dataclass(frozen=True)
class FitResult:
    """Best-fit optical parameters with statistical uncertainties."""

    alpha_a3: float
    alpha_err_a3: float
    sigma_abs: float          # m^2
    sigma_err: float          # m^2
    chi2: float
    ndof: int
    covariance: np.ndarray    # 2x2 in (A^3, m^2) units
    model: str
    n_iter: int
    converged: bool
    at_sigma_floor: bool
    sigma_upper95: float | None = None
    message: str = ""

    @property
    def chi2_per_dof(self) -> float:
        return self.chi2 / self.ndof if self.ndof > 0 else math.inf


def model_visibilities(dataset: PowerScanDataset, alpha_a3: float, sigma_m2: float,
                       model: str = "quantum", n_nodes: int = 64,
                       power_scale: float = 1.0, waist_scale: float = 1.0) -> np.ndarray:
    """Velocity-averaged model curve on the dataset's power grid.

    ``power_scale`` and ``waist_scale`` re-calibrate the assumed laser power
    and vertical waist; the systematic-error band is built from them.
    """
    mol = Molecule.from_units(dataset.molecule.name, dataset.molecule.mass_amu,
                              alpha_a3, sigma_m2)
    ifm = dataset.interferometer
    if waist_scale != 1.0:
        laser = replace(ifm.laser, waist_y=ifm.laser.waist_y * waist_scale)
        ifm = replace(ifm, laser=laser)
    return np.array([
        velocity_averaged_visibility(dataset.dist, mol, ifm, p * power_scale,
                                     model, n_nodes)
        for p in dataset.powers])


def _residuals(dataset, theta, model, n_nodes, power_scale, waist_scale):
    alpha = math.exp(theta[0])
    sigma = math.exp(theta[1]) - SIGMA_EPS
    sigma = max(sigma, 0.0)
    vm = model_visibilities(dataset, alpha, sigma, model, n_nodes,
                            power_scale, waist_scale)
    v = np.asarray(dataset.visibilities)
    s = np.asarray(dataset.sigmas)
    return (v - vm) / s


def _jacobian(dataset, theta, model, n_nodes, power_scale, waist_scale):
    # central differences, relative step 1e-6 in the log parameters
    cols = []
    for i in range(2):
        h = 1e-6 * max(1.0, abs(theta[i]))
        tp = theta.copy(); tp[i] += h
        tm = theta.copy(); tm[i] -= h
        rp = _residuals(dataset, tp, model, n_nodes, power_scale, waist_scale)
        rm = _residuals(dataset, tm, model, n_nodes, power_scale, waist_scale)
        cols.append((rp - rm) / (2.0 * h))
    return np.column_stack(cols)


def _physical_covariance(dataset, alpha, sigma, model, n_nodes,
                         power_scale, waist_scale) -> np.ndarray:
    def resid(a, s):
        vm = model_visibilities(dataset, a, s, model, n_nodes,
                                power_scale, waist_scale)
        return (np.asarray(dataset.visibilities) - vm) / np.asarray(dataset.sigmas)

    ha = 1e-6 * max(alpha, 1e-3)
    hs = max(1e-6 * sigma, 1e-26)
    ja = (resid(alpha + ha, sigma) - resid(alpha - ha, sigma)) / (2.0 * ha)
    js = (resid(alpha, sigma + hs) - resid(alpha, max(sigma - hs, 0.0))) / (
        hs + min(hs, sigma))
    jac = np.column_stack([ja, js])
    jtj = jac.T @ jac
    try:
        return np.linalg.inv(jtj)
    except np.linalg.LinAlgError:
        return np.full((2, 2), np.inf)


def fit(dataset: PowerScanDataset, model: str = "quantum",
        initial_guess: tuple | None = None, n_nodes: int = 64,
        power_scale: float = 1.0, waist_scale: float = 1.0,
        profile_sigma_bound: bool = True) -> FitResult:
    """Damped Gauss-Newton fit of (alpha_opt, sigma_abs) to a power scan.

    ``initial_guess`` is (alpha in A^3, sigma_abs in m^2); defaults to the
    dataset molecule's values.  Raises FitError (with the best point
    attached) if the loop exhausts its iteration budget.
    """
    if model not in ("quantum", "classical"):
        raise ValueError(f"unknown model {model!r}")
    if initial_guess is None:
        initial_guess = (dataset.molecule.alpha_a3, dataset.molecule.sigma_abs)
    a0, s0 = initial_guess
    if a0 <= 0.0 or s0 < 0.0:
        raise ValueError("initial guess must have alpha > 0 and sigma >= 0")

    theta = np.array([math.log(a0), math.log(s0 + SIGMA_EPS)])
    args = (model, n_nodes, power_scale, waist_scale)
    r = _residuals(dataset, theta, *args)
    chi2 = float(r @ r)
    lam = 1e-3
    n_iter = 0
    converged = False
    message = "converged"

    for n_iter in range(1, MAX_ITER + 1):
        jac = _jacobian(dataset, theta, *args)
        grad = jac.T @ r
        hess = jac.T @ jac
        if np.max(np.abs(grad)) < GRAD_TOL * max(1.0, chi2):
            converged = True
            break
        step = None
        while lam < 1e14:
            damped = hess + lam * np.diag(np.maximum(np.diag(hess), 1e-12))
            try:
                trial = np.linalg.solve(damped, -grad)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            r_new = _residuals(dataset, theta + trial, *args)
            chi2_new = float(r_new @ r_new)
            if chi2_new <= chi2:
                step = trial
                theta = theta + trial
                r, chi2 = r_new, chi2_new
                lam = max(lam / 3.0, 1e-12)
                break
            lam *= 10.0
        if step is None:
            converged = True   # no downhill direction left: local minimum
            message = "converged (damping exhausted)"
            break
        if np.max(np.abs(step) / np.maximum(np.abs(theta), 1.0)) < STEP_TOL:
            converged = True
            break

    alpha = math.exp(theta[0])
    sigma = max(math.exp(theta[1]) - SIGMA_EPS, 0.0)
    at_floor = sigma < SIGMA_ZERO_GATE
    cov = _physical_covariance(dataset, alpha, sigma, *args)
    errs = np.sqrt(np.maximum(np.diag(cov), 0.0))
    ndof = len(dataset.powers) - 2
    result = FitResult(alpha_a3=alpha, alpha_err_a3=float(errs[0]),
                       sigma_abs=sigma, sigma_err=float(errs[1]),
                       chi2=chi2, ndof=ndof, covariance=cov, model=model,
                       n_iter=n_iter, converged=converged,
                       at_sigma_floor=at_floor, message=message)
    if not converged:
        raise FitError(f"no convergence after {MAX_ITER} iterations "
                       f"(chi2={chi2:.3e})", result)
    if profile_sigma_bound and (at_floor or sigma < 2.0 * result.sigma_err):
        bound = _sigma_upper_bound(dataset, result, *args)
        result = replace(result, sigma_upper95=bound)
    return result


def _chi2_at_sigma(dataset, sigma, alpha_start, model, n_nodes,
                   power_scale, waist_scale) -> float:
    # one-parameter reoptimization of alpha at fixed sigma
    theta = math.log(alpha_start)
    args = (model, n_nodes, power_scale, waist_scale)

    def resid(t):
        return _residuals(dataset, np.array([t, math.log(sigma + SIGMA_EPS)]), *args)

    r = resid(theta)
    chi2 = float(r @ r)
    lam = 1e-3
    for _ in range(60):
        h = 1e-6 * max(1.0, abs(theta))
        dr = (resid(theta + h) - resid(theta - h)) / (2.0 * h)
        g = float(dr @ r)
        hh = float(dr @ dr)
        if abs(g) < 1e-10 * max(1.0, chi2):
            break
        moved = False
        while lam < 1e12:
            t_new = theta - g / (hh * (1.0 + lam))
            r_new = resid(t_new)
            c_new = float(r_new @ r_new)
            if c_new <= chi2:
                theta, r, chi2 = t_new, r_new, c_new
                lam = max(lam / 3.0, 1e-12)
                moved = True
                break
            lam *= 10.0
        if not moved or abs(g / (hh * (1.0 + lam))) < 1e-12:
            break
    return chi2


def _sigma_upper_bound(dataset, result: FitResult, model, n_nodes,
                       power_scale, waist_scale) -> float:
    """One-sided 95% profile bound: chi2(sigma) = chi2_min + 2.706."""
    target = result.chi2 + _PROFILE_DELTA_CHI2
    lo = result.sigma_abs
    hi = max(4.0 * result.sigma_abs, 1e-24)
    args = (model, n_nodes, power_scale, waist_scale)
    for _ in range(60):
        if _chi2_at_sigma(dataset, hi, result.alpha_a3, *args) > target:
            break
        hi *= 2.0
    else:
        return hi
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if _chi2_at_sigma(dataset, mid, result.alpha_a3, *args) > target:
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-3 * hi:
            break
    return hi


@dataclass(frozen=True)
class SystematicBand:
    """Parameter envelope from laser-power and waist calibration errors."""

    alpha_lo: float
    alpha_hi: float
    sigma_lo: float
    sigma_hi: float
    corners: tuple   # ((power_scale, waist_scale, FitResult), ...)


def systematic_band(dataset: PowerScanDataset, result: FitResult,
                    power_err: float = 0.05, waist_err: float = 0.10,
                    n_nodes: int = 64) -> SystematicBand:
    """Re-fit at the four (P, w_y) calibration corners and report the envelope.

    phi0 and n0 scale as P / w_y, so for a rigid model the fitted parameters
    move by factors waist_scale / power_scale at each corner.
    """
    corners = []
    alphas = [result.alpha_a3]
    sigmas = [result.sigma_abs]
    for sp in (1.0 - power_err, 1.0 + power_err):
        for sw in (1.0 - waist_err, 1.0 + waist_err):
            r = fit(dataset, model=result.model,
                    initial_guess=(result.alpha_a3, result.sigma_abs),
                    n_nodes=n_nodes, power_scale=sp, waist_scale=sw,
                    profile_sigma_bound=False)
            corners.append((sp, sw, r))
            alphas.append(r.alpha_a3)
            sigmas.append(r.sigma_abs)
    return SystematicBand(alpha_lo=min(alphas), alpha_hi=max(alphas),
                          sigma_lo=min(sigmas), sigma_hi=max(sigmas),
                          corners=tuple(corners))


def synthesize(molecule: Molecule, ifm: Interferometer, dist: VelocityDistribution,
               powers, noise_rel: float, seed: int,
               n_nodes: int = 64) -> PowerScanDataset:
    """Generate a reproducible synthetic power scan from the quantum model.

    Gaussian relative noise; visibilities clipped to [0, 1].  The per-point
    sigma is the generative noise level (floored to stay positive).
    """
    if noise_rel < 0.0:
        raise ValueError("noise level must be >= 0")
    rng = np.random.default_rng(seed)
    vm = np.array([velocity_averaged_visibility(dist, molecule, ifm, p,
                                                "quantum", n_nodes)
                   for p in powers])
    sig = np.maximum(noise_rel * vm, 1e-9)
    v = vm + sig * rng.standard_normal(len(vm)) if noise_rel > 0 else vm.copy()
    v = np.clip(v, 0.0, 1.0)
    return PowerScanDataset(molecule=molecule, dist=dist, interferometer=ifm,
                            powers=tuple(float(p) for p in powers),
                            visibilities=tuple(float(x) for x in v),
                            sigmas=tuple(float(s) for s in sig))
