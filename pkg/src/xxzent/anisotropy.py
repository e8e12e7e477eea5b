"""Regime classification of the anisotropy parameter and its derived parametrizations.

    Gapless    0 <= delta < 1   delta = cos(2 gamma),  q = exp(i phi), phi = 2 gamma
    Isotropic  delta == 1       gamma = nu = phi = 0, q = 1
    Massive    delta > 1        delta = cosh(2 nu),    q = delta + sqrt(delta^2 - 1)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

# |delta - 1| below this is treated as the SU(2) point; the gamma/nu
# parametrizations lose precision as both go to zero.
ISOTROPIC_WINDOW = 1e-9


class Regime(str, Enum):
    GAPLESS = "Gapless"
    ISOTROPIC = "Isotropic"
    MASSIVE = "Massive"


@dataclass(frozen=True)
class Anisotropy:
    delta: float
    regime: Regime
    gamma: float | None = None
    nu: float | None = None
    q: float | None = None
    phi: float | None = None

    @property
    def gamma_or_nu(self) -> float:
        if self.regime is Regime.MASSIVE:
            return self.nu
        return self.gamma

    @property
    def box_half_width(self) -> float:
        """Half period of the massive phase functions; infinite otherwise."""
        if self.regime is Regime.MASSIVE:
            return math.pi / (2.0 * self.nu)
        return math.inf


def _classify(delta: float, allow_negative: bool = False) -> Anisotropy:
    delta = float(delta)
    if not math.isfinite(delta):
        raise ValueError(f"anisotropy must be finite, got {delta!r}")
    lower = -1.0 if allow_negative else 0.0
    if delta < lower or (allow_negative and delta <= -1.0):
        raise ValueError(f"anisotropy must be >= 0, got {delta!r}")
    if abs(delta - 1.0) <= ISOTROPIC_WINDOW:
        return Anisotropy(delta, Regime.ISOTROPIC, gamma=0.0, nu=0.0, q=1.0, phi=0.0)
    if delta < 1.0:
        phi = math.acos(delta)
        return Anisotropy(delta, Regime.GAPLESS, gamma=0.5 * phi, phi=phi)
    nu = 0.5 * math.acosh(delta)
    q = delta + math.sqrt((delta - 1.0) * (delta + 1.0))
    return Anisotropy(delta, Regime.MASSIVE, nu=nu, q=q)


def classify_anisotropy(delta: float) -> Anisotropy:
    """Classify ``delta >= 0`` into its regime and fill in gamma/nu/q/phi."""
    return _classify(delta)


def extended_anisotropy(delta: float) -> Anisotropy:
    """Like :func:`classify_anisotropy` but also accepts ``-1 < delta < 0``.

    Only used for finite-difference stencils straddling ``delta = 0``; the
    gapless formulas stay valid on the whole of (-1, 1).
    """
    return _classify(delta, allow_negative=True)
