"""Logarithmic Bethe-ansatz equations for the XXZ ring and their Newton solution.

Units follow ``H = sum_l [sx sx + sy sy + delta sz sz]`` with Pauli matrices.
Rapidities are scaled so the isotropic equations read
``((lam + i) / (lam - i))^N = prod (lam_j - lam_l + 2i) / (lam_j - lam_l - 2i)``,
which keeps ``lam`` continuous through ``delta = 1`` in all three regimes.

In logarithmic form, with the odd phase functions ``theta_n``::

    F_j = N theta_1(lam_j) - 2 pi I_j - sum_l theta_2(lam_j - lam_l) = 0
    E   = N delta - sum_j eps(lam_j)
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .anisotropy import Anisotropy, Regime, classify_anisotropy, extended_anisotropy

log = logging.getLogger(__name__)

MAX_SITES = 4096


class NonConvergence(RuntimeError):
    """Newton iteration stopped before reaching the requested tolerance."""

    def __init__(self, message: str, best: np.ndarray, residual: float, delta: float | None = None):
        super().__init__(message)
        self.best = best
        self.residual = residual
        self.delta = delta


@dataclass(frozen=True)
class QuantumNumberSet:
    n_sites: int
    m_down: int
    numbers: tuple[float, ...]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.numbers, dtype=float)


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-12
    max_iter: int = 200
    max_halvings: int = 30


@dataclass(frozen=True)
class RapiditySolution:
    anisotropy: Anisotropy
    quantum_numbers: QuantumNumberSet
    rapidities: np.ndarray = field(repr=False)
    residual_norm: float
    energy: float
    iterations: int = 0

    @property
    def n_sites(self) -> int:
        return self.quantum_numbers.n_sites

    @property
    def energy_per_site(self) -> float:
        return self.energy / self.n_sites


def ground_state_quantum_numbers(n_sites: int) -> QuantumNumberSet:
    """Consecutive quantum numbers centred on zero with ``M = N / 2``."""
    if int(n_sites) != n_sites or n_sites < 2 or n_sites % 2:
        raise ValueError(f"Bethe ground state needs an even chain length >= 2, got {n_sites!r}")
    n_sites = int(n_sites)
    m = n_sites // 2
    numbers = tuple(j - (m + 1) / 2 for j in range(1, m + 1))
    return QuantumNumberSet(n_sites, m, numbers)


# ---------------------------------------------------------------------------
# phase functions

def _denominator_gapless(lam, gamma, n):
    # cosh(2 gamma lam) - cos(2 n gamma) without cancellation near gamma -> 0
    return 2.0 * np.sinh(gamma * lam) ** 2 + 2.0 * np.sin(n * gamma) ** 2


def _denominator_massive(lam, nu, n):
    # cosh(2 n nu) - cos(2 nu lam)
    return 2.0 * np.sinh(n * nu) ** 2 + 2.0 * np.sin(nu * lam) ** 2


def scattering_phase(n: int, lam, a: Anisotropy):
    """Continuous odd branch of the log of the two-body / one-body phase factor."""
    lam = np.asarray(lam, dtype=float)
    if a.regime is Regime.ISOTROPIC:
        return 2.0 * np.arctan(lam / n)
    if a.regime is Regime.GAPLESS:
        g = a.gamma
        return 2.0 * np.arctan(np.tanh(g * lam) / np.tan(n * g))
    nu = a.nu
    x = nu * lam
    winding = np.floor(x / math.pi + 0.5)
    return 2.0 * np.arctan(np.tan(x) / np.tanh(n * nu)) + 2.0 * math.pi * winding


def scattering_phase_derivative(n: int, lam, a: Anisotropy):
    lam = np.asarray(lam, dtype=float)
    if a.regime is Regime.ISOTROPIC:
        return 2.0 * n / (lam * lam + n * n)
    if a.regime is Regime.GAPLESS:
        g = a.gamma
        return 2.0 * g * np.sin(2 * n * g) / _denominator_gapless(lam, g, n)
    nu = a.nu
    return 2.0 * nu * np.sinh(2 * n * nu) / _denominator_massive(lam, nu, n)


def bare_energy(lam, a: Anisotropy):
    """Energy removed from the ferromagnetic reference by one magnon at ``lam``."""
    lam = np.asarray(lam, dtype=float)
    if a.regime is Regime.ISOTROPIC:
        return 8.0 / (lam * lam + 1.0)
    if a.regime is Regime.GAPLESS:
        g = a.gamma
        return 4.0 * np.sin(2 * g) ** 2 / _denominator_gapless(lam, g, 1)
    nu = a.nu
    return 4.0 * np.sinh(2 * nu) ** 2 / _denominator_massive(lam, nu, 1)


# ---------------------------------------------------------------------------
# residual and Jacobian

def bae_residual(candidate, qn: QuantumNumberSet, a: Anisotropy) -> np.ndarray:
    lam = np.asarray(candidate, dtype=float)
    if lam.shape != (qn.m_down,):
        raise ValueError(f"expected {qn.m_down} rapidities, got shape {lam.shape}")
    diff = lam[:, None] - lam[None, :]
    return (
        qn.n_sites * scattering_phase(1, lam, a)
        - 2.0 * math.pi * qn.as_array()
        - scattering_phase(2, diff, a).sum(axis=1)
    )


def bae_jacobian(candidate, qn: QuantumNumberSet, a: Anisotropy) -> np.ndarray:
    lam = np.asarray(candidate, dtype=float)
    diff = lam[:, None] - lam[None, :]
    kern = scattering_phase_derivative(2, diff, a)
    np.fill_diagonal(kern, 0.0)
    jac = kern.copy()
    jac[np.diag_indices_from(jac)] = (
        qn.n_sites * scattering_phase_derivative(1, lam, a) - kern.sum(axis=1)
    )
    return jac


# ---------------------------------------------------------------------------
# initial guesses

def _massive_root_density_coefficients(nu: float, tol: float = 1e-16) -> np.ndarray:
    kmax = max(8, math.ceil(math.log(2.0 / tol) / (2.0 * nu)))
    k = np.arange(1, kmax + 1)
    return 0.5 / np.cosh(2.0 * nu * k)


def initial_guess(qn: QuantumNumberSet, a: Anisotropy) -> np.ndarray:
    """Rapidities from inverting the thermodynamic counting function.

    Gapless and isotropic regimes share the root density ``1/(4 cosh(pi lam/2))``
    in these units; the massive density is a Fourier series on the box.
    """
    frac = qn.as_array() / qn.n_sites
    iso = (2.0 / math.pi) * np.arcsinh(np.tan(2.0 * math.pi * frac))
    if a.regime is not Regime.MASSIVE or qn.m_down == 0:
        return iso
    half = a.box_half_width
    if iso.size and np.max(np.abs(iso)) < 0.25 * half:
        return iso
    nu = a.nu
    r = _massive_root_density_coefficients(nu)
    k = np.arange(1, r.size + 1)
    grid = np.linspace(0.0, half, 4097)
    counting = (nu / math.pi) * (
        0.5 * grid + (np.sin(2.0 * nu * np.outer(grid, k)) * (r / (nu * k))).sum(axis=1)
    )
    counting[-1] = 0.25
    return np.sign(frac) * np.interp(np.abs(frac), counting, grid)


def _wrap(lam: np.ndarray, a: Anisotropy) -> np.ndarray:
    if a.regime is not Regime.MASSIVE:
        return lam
    half = a.box_half_width
    return lam - 2.0 * half * np.ceil((lam - half) / (2.0 * half))


# ---------------------------------------------------------------------------
# Newton solve

def rounding_floor(n_sites: int) -> float:
    """Smallest residual resolvable in double precision; terms reach ~2 pi N."""
    return 16.0 * np.finfo(float).eps * 2.0 * math.pi * n_sites


def _newton(lam0: np.ndarray, qn: QuantumNumberSet, a: Anisotropy, opts: SolverOptions):
    lam = _wrap(np.array(lam0, dtype=float), a)
    floor = rounding_floor(qn.n_sites)
    res = bae_residual(lam, qn, a)
    norm = float(np.max(np.abs(res))) if res.size else 0.0
    it = 0
    while norm >= opts.tol:
        if it >= opts.max_iter:
            raise NonConvergence(
                f"iteration cap {opts.max_iter} hit at residual {norm:.3e}", lam, norm, a.delta
            )
        it += 1
        step = np.linalg.solve(bae_jacobian(lam, qn, a), -res)
        t = 1.0
        for _ in range(opts.max_halvings + 1):
            trial = _wrap(lam + t * step, a)
            trial_res = bae_residual(trial, qn, a)
            trial_norm = float(np.max(np.abs(trial_res)))
            if trial_norm < norm:
                break
            t *= 0.5
        else:
            if norm < max(opts.tol, floor):
                # stalled on rounding noise, not on a bad iterate
                return lam, norm, it
            raise NonConvergence(
                f"line search stalled at residual {norm:.3e} after {it} iterations",
                lam, norm, a.delta,
            )
        lam, res, norm = trial, trial_res, trial_norm
    return lam, norm, it


def _energy(lam: np.ndarray, n_sites: int, a: Anisotropy) -> float:
    return float(n_sites * a.delta - np.sum(bare_energy(lam, a)))


def solve_ground_state(
    n_sites: int,
    delta: float,
    options: SolverOptions | None = None,
    initial: np.ndarray | None = None,
    *,
    _allow_negative: bool = False,
) -> RapiditySolution:
    """Solve the ground-state Bethe equations for an even ring of ``n_sites``."""
    opts = options or SolverOptions()
    qn = ground_state_quantum_numbers(n_sites)
    if n_sites > MAX_SITES:
        raise ValueError(f"n_sites={n_sites} exceeds {MAX_SITES}")
    a = extended_anisotropy(delta) if _allow_negative else classify_anisotropy(delta)
    lam0 = initial_guess(qn, a) if initial is None else np.asarray(initial, dtype=float)
    try:
        lam, norm, it = _newton(lam0, qn, a, opts)
    except NonConvergence:
        if initial is None:
            raise
        log.debug("continuation guess failed at delta=%g, retrying from scratch", delta)
        lam, norm, it = _newton(initial_guess(qn, a), qn, a, opts)
    lam.setflags(write=False)
    return RapiditySolution(a, qn, lam, norm, _energy(lam, n_sites, a), it)


def ground_energy(sol: RapiditySolution, tol: float | None = None) -> float:
    """Total energy ``N delta - sum eps(lam_j)`` of a converged solution."""
    limit = SolverOptions().tol if tol is None else tol
    if sol.quantum_numbers.m_down and sol.residual_norm >= max(limit, 1e-10):
        raise ValueError(f"solution not converged (residual {sol.residual_norm:.3e})")
    return _energy(np.asarray(sol.rapidities), sol.n_sites, sol.anisotropy)


def sweep_continuation(
    n_sites: int, delta_grid, options: SolverOptions | None = None
) -> list[RapiditySolution | NonConvergence]:
    """Solve along ``delta_grid`` reusing each solution as the next starting point.

    The previous rapidities are shifted by the change in the thermodynamic
    guess, which absorbs most of the rescaling across regimes. Failed points
    appear in the output as :class:`NonConvergence` instances.
    """
    qn = ground_state_quantum_numbers(n_sites)
    out: list[RapiditySolution | NonConvergence] = []
    prev: RapiditySolution | None = None
    prev_guess = None
    for delta in delta_grid:
        a = classify_anisotropy(delta)
        guess = initial_guess(qn, a)
        start = None
        if prev is not None:
            start = np.asarray(prev.rapidities) + (guess - prev_guess)
        try:
            sol = solve_ground_state(n_sites, delta, options, initial=start)
        except NonConvergence as exc:
            log.warning("N=%d delta=%g did not converge: %s", n_sites, delta, exc)
            out.append(exc)
            continue
        out.append(sol)
        prev, prev_guess = sol, guess
    return out


# ---------------------------------------------------------------------------
# serialization

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def solution_to_json(sol: RapiditySolution) -> str:
    a = sol.anisotropy
    fields = [
        ("n", str(sol.n_sites)),
        ("m", str(sol.quantum_numbers.m_down)),
        ("delta", _fmt(a.delta)),
        ("regime", f'"{a.regime.value}"'),
        ("gamma_or_nu", _fmt(a.gamma_or_nu)),
        ("quantum_numbers", "[" + ", ".join(_fmt(v) for v in sol.quantum_numbers.numbers) + "]"),
        ("rapidities", "[" + ", ".join(_fmt(v) for v in sol.rapidities) + "]"),
        ("residual_norm", _fmt(sol.residual_norm)),
        ("energy", _fmt(sol.energy)),
        ("energy_per_site", _fmt(sol.energy_per_site)),
    ]
    return "{\n" + ",\n".join(f'  "{k}": {v}' for k, v in fields) + "\n}\n"
