"""Physical observables built on top of the ground-state energy curve.

``gzz`` follows from Hellmann-Feynman (``d(E/N)/d delta``) and the nearest
neighbour concurrence from ``C = max(0, |e - delta g| - g - 1) / 2``.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import optimize, special

from .anisotropy import Anisotropy, Regime, classify_anisotropy
from .bethe import RapiditySolution, SolverOptions, solve_ground_state
from .thermo import thermo_energy

log = logging.getLogger(__name__)

LN2 = math.log(2.0)
C0 = 2.0 * LN2 - 1.0
C1 = 2.0 * LN2 - 0.5 - 2.0 / math.pi - 2.0 / math.pi**2

DEFAULT_STEP = 1e-4
SERIES_TERM_CAP = 10_000_000


@dataclass(frozen=True)
class ObservablePoint:
    delta: float
    n_sites: int | None  # None marks the infinite chain
    energy_per_site: float
    gzz: float
    concurrence: float
    xi: float | None = None
    status: str = "ok"

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    @property
    def inv_xi(self) -> float | None:
        return None if self.xi is None else 1.0 / self.xi


CSV_HEADER = ("delta", "n_sites", "energy_per_site", "gzz", "concurrence", "xi", "status")


def _g12(x: float | None) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return format(float(x), ".12g")


def point_csv_fields(p: ObservablePoint) -> list[str]:
    n = "inf" if p.n_sites is None else str(p.n_sites)
    return [_g12(p.delta), n, _g12(p.energy_per_site), _g12(p.gzz),
            _g12(p.concurrence), _g12(p.xi), p.status]


def point_from_csv_fields(fields: dict[str, str]) -> ObservablePoint:
    num = lambda s: float(s) if s else math.nan
    n = fields["n_sites"]
    return ObservablePoint(
        delta=float(fields["delta"]),
        n_sites=None if n == "inf" else int(n),
        energy_per_site=num(fields["energy_per_site"]),
        gzz=num(fields["gzz"]),
        concurrence=num(fields["concurrence"]),
        xi=float(fields["xi"]) if fields.get("xi") else None,
        status=fields.get("status") or "ok",
    )


# ---------------------------------------------------------------------------
# concurrence and correlation function

def concurrence_xxz(energy_per_site: float, gzz: float, delta: float) -> float:
    return 0.5 * max(0.0, abs(energy_per_site - delta * gzz) - gzz - 1.0)


def richardson_derivative(f: Callable[[float], float], x: float, step: float = DEFAULT_STEP) -> float:
    """Central difference at ``h`` and ``h/2`` combined to cancel the h^2 term."""
    d_h = (f(x + step) - f(x - step)) / (2 * step)
    half = 0.5 * step
    d_half = (f(x + half) - f(x - half)) / (2 * half)
    return (4.0 * d_half - d_h) / 3.0


def _bethe_energy_fn(n_sites: int, options: SolverOptions | None, seed: RapiditySolution | None):
    start = None if seed is None else np.asarray(seed.rapidities)

    def energy(delta: float) -> float:
        # the stencil around delta = 0 dips into (-1, 0), where the gapless
        # equations still hold
        sol = solve_ground_state(n_sites, delta, options, initial=start,
                                 _allow_negative=delta < 0)
        return sol.energy_per_site

    return energy


def gzz(n_sites: int | None, delta: float, step: float = DEFAULT_STEP,
        options: SolverOptions | None = None, seed: RapiditySolution | None = None) -> float:
    """Nearest-neighbour ``<sz sz>`` as the derivative of E/N in delta.

    ``n_sites=None`` uses the thermodynamic-limit energy.
    """
    if delta < 0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    if step <= 0:
        raise ValueError("step must be positive")
    if n_sites is None:
        f = lambda d: thermo_energy(d, tol=1e-13)
    else:
        f = _bethe_energy_fn(n_sites, options, seed)
    return richardson_derivative(f, delta, step)


# ---------------------------------------------------------------------------
# correlation length

def _alternating_harmonic_tail(k: int) -> float:
    """sum_{n>k} (-1)^n / n in closed form via digamma."""
    x = k + 1
    beta = 0.5 * (special.digamma((x + 1) / 2.0) - special.digamma(x / 2.0))
    return (-1.0) ** x * beta


def inverse_correlation_length(delta: float, tol: float = 1e-12) -> tuple[float, float]:
    """Return ``(1/xi, bound)`` for ``delta > 1``.

    ``1/xi = nu + sum_n (-1)^n tanh(2 n nu) / n`` is summed in consecutive
    pairs; past the last pair the tail is the alternating harmonic tail (exact)
    minus a remainder bounded by ``2 exp(-4 (K+1) nu) / (K+1)``.
    """
    a = classify_anisotropy(delta)
    if a.regime is not Regime.MASSIVE:
        raise ValueError(f"correlation length is finite only for delta > 1, got {delta}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    nu = a.nu
    total = 0.0
    k = 0  # terms summed so far, always even
    block = 4096
    while True:
        pairs = np.arange(k // 2 + 1, k // 2 + block + 1, dtype=float)
        even, odd = 2.0 * pairs, 2.0 * pairs - 1.0
        total += float(np.sum(np.tanh(2 * even * nu) / even - np.tanh(2 * odd * nu) / odd))
        k += 2 * block
        bound = 2.0 * math.exp(-4.0 * (k + 1) * nu) / (k + 1)
        if bound < tol:
            break
        if k >= SERIES_TERM_CAP:
            log.warning("1/xi series capped at %d terms for delta=%g; bound %.2e", k, delta, bound)
            break
        block = min(2 * block, 1 << 20)
    # close to delta = 1 the true value is exponentially small and rounding
    # can leave it marginally negative
    return max(0.0, nu + total + _alternating_harmonic_tail(k)), bound


def correlation_length(delta: float, tol: float = 1e-12) -> float:
    inv, _ = inverse_correlation_length(delta, tol)
    return math.inf if inv == 0.0 else 1.0 / inv


def delta_at_correlation_length(xi: float, bracket: tuple[float, float] = (1.0 + 1e-6, 100.0)) -> float:
    """Anisotropy at which the correlation length equals ``xi``."""
    target = 1.0 / xi
    return optimize.brentq(lambda d: inverse_correlation_length(d)[0] - target, *bracket, xtol=1e-13)


# ---------------------------------------------------------------------------
# q-deformation and closed-form scaling laws

def q_map(a: Anisotropy) -> tuple[complex | float, float | None]:
    if a.regime is Regime.MASSIVE:
        return a.q, None
    if a.regime is Regime.ISOTROPIC:
        return 1.0, 0.0
    return cmath.exp(1j * a.phi), a.phi


def quadratic_form(delta: float) -> float:
    return C0 - C1 * (delta - 1.0) ** 2


def q_form(q: complex | float) -> float:
    """``C0 - C1/4 (q^1/2 - q^-1/2)^4``; symmetric under q -> 1/q."""
    root = cmath.sqrt(q)
    return C0 - 0.25 * C1 * ((root - 1.0 / root) ** 4).real


def phi_form(phi: float) -> float:
    return C0 - 4.0 * C1 * math.sin(0.5 * phi) ** 4


def concurrence_scaling_forms(delta: float) -> tuple[float, float, float | None]:
    a = classify_anisotropy(delta)
    q, phi = q_map(a)
    return quadratic_form(delta), q_form(q), (phi_form(phi) if phi is not None else None)
