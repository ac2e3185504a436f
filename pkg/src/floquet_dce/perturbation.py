"""Second-order perturbative creation eigenvalue and its Im decomposition.

The second-order value in the drive amplitude is

    zbar2 = w0' + sigma_II(w0'-wB') - f0^2 / den,
    den   = 2 w0' + sigma_II(w0'-wB') - sigma_II(w0'+wB'),

with the imaginary part splitting exactly into a direct-dissipation term
and a multimode-amplification term:

    Im zbar2 = (1 + f0^2/R^2) Im sigma_II(w0'-wB')
             - (f0^2/R^2)     Im sigma_II(w0'+wB'),   R = |den|.

Both sigma arguments are the bare detunings (no self-consistency), so the
value carries an f0-independent O(g^4) offset from the true nonlinear
root; perturb_creation_selfconsistent removes it by expanding around the
exact zero-drive root instead.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .dispersion import newton_root, SheetPair, PHYSICAL_PAIR
from .model import ReducedParams
from .selfenergy import Sheet, sigma, sigma_derivative


class NearDegenerateError(ValueError):
    """Denominator nearly vanishes; use the nonperturbative solver instead."""


@dataclass(frozen=True)
class PerturbativeResult:
    zbar2: complex
    R: float
    im_dissipation: float
    im_multimode: float


def perturb_creation(rp: ReducedParams) -> PerturbativeResult:
    """Bare second-order creation eigenvalue and its Im decomposition."""
    s_minus = sigma(rp.omega0p - rp.omegaBp, rp.g, Sheet.II)
    s_plus = sigma(rp.omega0p + rp.omegaBp, rp.g, Sheet.II)
    den = 2.0 * rp.omega0p + s_minus - s_plus
    if abs(den) < 1e-10:
        raise NearDegenerateError(
            f"|2 w0' + sigma_II(w0'-wB') - sigma_II(w0'+wB')| = {abs(den):.2e} < 1e-10: "
            "near-degenerate cavity pair, employ the nonperturbative solver")
    f2 = rp.f0 * rp.f0
    zbar2 = rp.omega0p + s_minus - f2 / den
    R2 = abs(den) ** 2
    im_diss = (1.0 + f2 / R2) * s_minus.imag
    im_multi = -(f2 / R2) * s_plus.imag
    return PerturbativeResult(zbar2=zbar2, R=abs(den),
                              im_dissipation=im_diss, im_multimode=im_multi)


def perturb_creation_selfconsistent(rp: ReducedParams,
                                    sheets: SheetPair = PHYSICAL_PAIR) -> complex:
    """Second order around the exact zero-drive root (creation factor).

    Solves z = w0' + sigma(z - wB') by Newton first, then applies the f0^2
    shift -f0^2 / (b2'(zF) b1(zF)).  Error against the full nonlinear root
    is O(f0^4) with no g-dependent offset.
    """
    zero_drive = ReducedParams(rp.omega0p, rp.omegaBp, 0.0, rp.g, rp.B)
    guess = rp.omega0p + sigma(rp.omega0p - rp.omegaBp, rp.g, sheets.minus_arg)
    zF = newton_root(guess, zero_drive, sheets)
    if zF is None:
        raise NearDegenerateError("zero-drive creation root did not converge")
    db2 = 1.0 - sigma_derivative(zF - rp.omegaBp, rp.g, sheets.minus_arg)
    b1 = zF + rp.omega0p - sigma(zF + rp.omegaBp, rp.g, sheets.plus_arg)
    den = db2 * b1
    if abs(den) < 1e-10:
        raise NearDegenerateError("degenerate cavity pair at the zero-drive root")
    return zF - rp.f0 * rp.f0 / den


class ResonanceWindow(enum.Enum):
    BOTH_RESONANT = "both-resonant"
    AMPLIFICATION_WINDOW = "amplification-window"
    OFF_RESONANT = "off-resonant"


def perturb_window_report(rp: ReducedParams) -> ResonanceWindow:
    """Classify w0' by band membership of the two sigma arguments.

    Requires the Floquet band shift Delta = -2 wB' >= 0.  Both arguments
    in-band: dissipation and multimode amplification compete (nonlocal
    stationary mode territory).  Only the plus argument in-band: multimode
    amplification window B - Delta/2 < w0' < B + Delta/2.
    """
    if rp.omegaBp > 0.0:
        raise ValueError(f"window classification needs Delta = -2 wB' >= 0, got wB'={rp.omegaBp}")
    minus_in = abs(rp.omega0p - rp.omegaBp) < 1.0
    plus_in = abs(rp.omega0p + rp.omegaBp) < 1.0
    if minus_in and plus_in:
        return ResonanceWindow.BOTH_RESONANT
    if plus_in:
        return ResonanceWindow.AMPLIFICATION_WINDOW
    return ResonanceWindow.OFF_RESONANT
