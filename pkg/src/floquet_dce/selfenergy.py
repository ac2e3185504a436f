"""Analytically continued self-energy of the semi-infinite tight-binding band.

The band produces sigma(z) = g^2 (zeta - sqrt(zeta^2 - 1)) with zeta the
band-centered argument in units of the half-width.  The square root is
realized as w(zeta) = sqrt(zeta-1)*sqrt(zeta+1) with principal roots per
factor, which puts the branch cut exactly on [-1, 1] and makes sheet I the
branch decaying at infinity.  Exactly-real arguments inside the cut are
evaluated on the upper lip (Im zeta -> 0+), so Im sigma_II > 0 in-band.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np


class Sheet(enum.Enum):
    """Riemann-sheet label for the two-valued self-energy."""

    I = "I"
    II = "II"

    def conjugate(self) -> "Sheet":
        return Sheet.II if self is Sheet.I else Sheet.I

    def __str__(self) -> str:  # CSV / JSON friendly
        return self.value


class BranchPointError(ZeroDivisionError):
    """Raised when a derivative is requested exactly at zeta = +-1."""


def branch_w(zeta: complex) -> complex:
    """w(zeta) = sqrt(zeta-1)*sqrt(zeta+1), cut on [-1, 1], w ~ zeta at infinity.

    Exactly-real input is special-cased: inside the cut the upper-lip limit
    +i*sqrt(1-x^2) is returned; outside, the continuous real limit
    sign(x)*sqrt(x^2-1).  (Relying on signed zeros is unsafe: adding a real
    to a complex with -0.0 imaginary part silently drops the sign.)
    """
    zeta = complex(zeta)
    if zeta.imag == 0.0:
        x = zeta.real
        if -1.0 < x < 1.0:
            return complex(0.0, math.sqrt(1.0 - x * x))
        s = math.sqrt(x * x - 1.0)
        return complex(s if x >= 1.0 else -s, 0.0)
    return cmath.sqrt(zeta - 1.0) * cmath.sqrt(zeta + 1.0)


def sigma(zeta: complex, g: float, sheet: Sheet = Sheet.II) -> complex:
    """Self-energy at band-centered argument zeta (B = 1 units).

    sigma_I = g^2 (zeta - w), sigma_II = g^2 (zeta + w).  sigma_I is the
    Cauchy transform of the band weight (decays like g^2/(2 zeta)); sigma_II
    is its continuation through the cut, the resonance sheet.
    """
    zeta = complex(zeta)
    w = branch_w(zeta)
    g2 = g * g
    if sheet is Sheet.I:
        return g2 * (zeta - w)
    return g2 * (zeta + w)


def sigma_derivative(zeta: complex, g: float, sheet: Sheet = Sheet.II) -> complex:
    """d sigma/d zeta = g^2 (1 -+ zeta/w); singular at the branch points."""
    if g == 0.0:
        return 0.0 + 0.0j
    zeta = complex(zeta)
    w = branch_w(zeta)
    if w == 0.0:
        raise BranchPointError(f"sigma derivative singular at band edge zeta={zeta}")
    g2 = g * g
    if sheet is Sheet.I:
        return g2 * (1.0 - zeta / w)
    return g2 * (1.0 + zeta / w)


def sigma_second_derivative(zeta: complex, g: float, sheet: Sheet = Sheet.II) -> complex:
    """d^2 sigma/d zeta^2 = -+ g^2 / w^3 (sheet I: +, sheet II: -)."""
    if g == 0.0:
        return 0.0 + 0.0j
    zeta = complex(zeta)
    w = branch_w(zeta)
    if w == 0.0:
        raise BranchPointError(f"sigma curvature singular at band edge zeta={zeta}")
    g2 = g * g
    return (g2 if sheet is Sheet.I else -g2) / w ** 3


@dataclass(frozen=True)
class DiscretizedBand:
    """Midpoint discretization of the band: k_j = pi(j-1/2)/N.

    omegas are the mode frequencies (center - B cos k_j) in whatever frame
    the band was built; couplings are the per-mode amplitudes
    gbar_j = g B sin(k_j)/sqrt(N), so sum gbar_j^2 -> g^2 B^2 / 2.
    """

    N: int
    kgrid: np.ndarray
    omegas: np.ndarray
    couplings: np.ndarray

    def coupling_sum_rule(self) -> float:
        """sum gbar_j^2; midpoint limit of the integral is g^2 B^2 / 2."""
        return float(np.sum(self.couplings ** 2))


def make_band(N: int, g: float, B: float = 1.0, center: float = 0.0) -> DiscretizedBand:
    """Build the N-mode midpoint band with dispersion center - B cos k."""
    if N < 1:
        raise ValueError(f"need N >= 1, got {N}")
    j = np.arange(1, N + 1)
    k = math.pi * (j - 0.5) / N
    return DiscretizedBand(
        N=N,
        kgrid=k,
        omegas=center - B * np.cos(k),
        couplings=g * B * np.sin(k) / math.sqrt(N),
    )


class PoleCollisionError(ValueError):
    """Raised when discrete_sigma is evaluated on a grid frequency."""


def discrete_sigma(z: complex, band: DiscretizedBand) -> complex:
    """Finite-N self-energy Sigma_N(z) = sum_j gbar_j^2 / (z - omega_j).

    Converges to the sheet-I value sigma((z - center)/B) for z off the real
    band interval; the midpoint rule on the k-periodic integrand converges
    faster than any power of 1/N once z is away from the band.
    """
    z = complex(z)
    den = z - band.omegas
    if np.any(den == 0.0):
        raise PoleCollisionError(f"z={z} coincides with a discretized band frequency")
    return complex(np.sum(band.couplings ** 2 / den))
