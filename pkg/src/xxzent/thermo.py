"""Ground-state energy per site at N = infinity from the root-density equation

    a_1(lam) = rho(lam) + integral a_2(lam - mu) rho(mu) dmu,   a_n = theta_n' / (2 pi)
    E / N    = delta - integral eps(lam) rho(lam) dlam
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate

from .anisotropy import Anisotropy, Regime, extended_anisotropy
from .bethe import bare_energy, scattering_phase_derivative

# rho(lam) <= exp(-pi lam / 2) / 2 and eps <= 8, so the tail beyond this
# cut-off is below 1e-19.
GAPLESS_CUTOFF = 30.0
MIN_HARMONICS = 64
MAX_HARMONICS = 1 << 22


class QuadratureError(RuntimeError):
    def __init__(self, message: str, estimate: float):
        super().__init__(message)
        self.estimate = estimate


def gapless_root_density(lam):
    """``1 / (4 cosh(pi lam / 2))``; shared by the gapless and isotropic regimes."""
    x = np.abs(np.asarray(lam, dtype=float)) * (math.pi / 2.0)
    e = np.exp(-x)
    return 0.5 * e / (1.0 + e * e)


def _gapless_energy(a: Anisotropy, tol: float) -> float:
    integrand = lambda lam: bare_energy(lam, a) * gapless_root_density(lam)
    value, err = integrate.quad(integrand, 0.0, GAPLESS_CUTOFF, epsabs=tol, epsrel=tol, limit=400)
    if err > 10 * tol:
        raise QuadratureError(f"quadrature error estimate {err:.2e} above {tol:.1e}", err)
    return a.delta - 2.0 * value


def _massive_energy_with(a: Anisotropy, harmonics: int) -> float:
    # Sample one period on 2K points starting at 0; FFT coefficients then
    # diagonalize the periodic convolution without shift phases.
    nu = a.nu
    period = math.pi / nu
    npts = 2 * harmonics
    lam = period * np.arange(npts) / npts
    spacing = period / npts
    a1 = np.fft.fft(scattering_phase_derivative(1, lam, a) / (2 * math.pi)) * spacing
    a2 = np.fft.fft(scattering_phase_derivative(2, lam, a) / (2 * math.pi)) * spacing
    eps = np.fft.fft(bare_energy(lam, a)) * spacing
    rho_hat = a1 / (1.0 + a2)
    # Parseval: integral eps rho over a period = (1/P) sum eps_k conj(rho_k)
    overlap = np.real(np.sum(eps * np.conj(rho_hat))) / period
    return a.delta - overlap


def _massive_energy(a: Anisotropy, tol: float) -> float:
    # kernels decay on the scale 1 while the period is pi/nu
    harmonics = MIN_HARMONICS
    while harmonics < 8.0 / a.nu:
        harmonics *= 2
    prev = _massive_energy_with(a, harmonics)
    while harmonics < MAX_HARMONICS:
        harmonics *= 2
        cur = _massive_energy_with(a, harmonics)
        if abs(cur - prev) < tol:
            return cur
        prev = cur
    raise QuadratureError(f"Fourier series not converged at {harmonics} harmonics", abs(cur - prev))


def thermo_energy(delta: float, tol: float = 1e-10) -> float:
    """Energy per site of the infinite chain for ``delta >= 0``.

    Values in (-1, 0) are accepted as well so finite differences can straddle
    the free-fermion point.
    """
    a = extended_anisotropy(delta)
    if a.regime is Regime.MASSIVE:
        return _massive_energy(a, tol)
    return _gapless_energy(a, min(tol, 1e-12))

