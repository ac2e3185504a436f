"""Closed-form damped-Mathieu comparison model (flat-band / Markovian limit).

The phenomenological generator trades the energy-dependent self-energy for
a constant dissipation rate gamma, so the resonance bifurcation is absent
and everything is elementary:

    z'_-+ = i gamma/2 -+ i sqrt((f0 + gamma/2)^2 - w0'^2)
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass


@dataclass(frozen=True)
class PhenomParams:
    omega0p: float
    f0: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        for name in ("omega0p", "f0", "gamma"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.f0 < 0 or self.gamma < 0:
            raise ValueError("f0 and gamma must be >= 0")


def phenom_eigenvalues(p: PhenomParams) -> tuple[complex, complex]:
    """(z'_-, z'_+) with the principal square root.

    Inside |w0'| < f0 + gamma/2 the root is real: z'_- amplifies (or decays
    slower) and z'_+ decays faster.  Outside, the root is imaginary and both
    eigenvalues share Im = gamma/2 with split real parts.
    """
    rad = cmath.sqrt(complex((p.f0 + p.gamma / 2.0) ** 2 - p.omega0p ** 2))
    zm = 1j * p.gamma / 2.0 - 1j * rad
    zp = 1j * p.gamma / 2.0 + 1j * rad
    return zm, zp


def phenom_stationary(f0: float, gamma: float) -> tuple[float, ...]:
    """Stationary detunings +-sqrt(f0 (f0 + gamma)); empty when f0 = 0."""
    if f0 < 0 or gamma < 0:
        raise ValueError("f0 and gamma must be >= 0")
    if f0 == 0.0:
        return ()
    r = math.sqrt(f0 * (f0 + gamma))
    return (-r, r)


def phenom_bifurcation_edges(f0: float, gamma: float) -> tuple[float, float]:
    """Edges +-(f0 + gamma/2) of the amplification window."""
    e = f0 + gamma / 2.0
    return (-e, e)
