"""Eigenmode amplitude structure: cavity component ratios, band-amplitude
kernels, and the bi-orthonormal normalization product.

A converged root z' and its partner -z' (order-swapped sheets) form the
canonical annihilation/creation pair.  Only ratios and the mixed product
<a*,1|cre> <a,0|ann> are determined by the eigenvalue problem plus the
normalization condition; individual components are gauge.

The normalization product evaluates, at the creation representative zbar,

    P = [ 1 - sigma'(zbar - wB')
          + ratio (1 - sigma'(zbar + wB')) ]^(-1),
    ratio = (zbar - w0' - sigma(zbar - wB')) / (zbar + w0' - sigma(zbar + wB')),

which equals b_plus(zbar)/D'(zbar) and reproduces the discretized
eigenvector weight c_cav^2 / (c.c) of the band oracle.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .dispersion import PHYSICAL_PAIR, Root, RootKind, SheetPair
from .model import ReducedParams
from .selfenergy import Sheet, sigma, sigma_derivative

MODE_SCHEMA = "floquet-dce/mode/1"


class EPDegeneracyError(ZeroDivisionError):
    """Normalization bracket vanished: the root sits at an exceptional point."""


class DecoupledModeError(ValueError):
    """f0 = 0: the creation/annihilation ratio is undefined (modes decouple)."""


class AmplitudeRatios(NamedTuple):
    ratio_creation: complex | None
    ratio_annihilation: complex | None
    decoupled: bool


@dataclass(frozen=True)
class ModeCoefficients:
    """Exportable Bogoliubov data of one canonical mode pair."""

    zprime: complex
    sheets: SheetPair
    ratio_creation: complex | None
    ratio_annihilation: complex | None
    norm_product: complex
    kgrid: np.ndarray
    c_plus: np.ndarray
    c_minus: np.ndarray
    on_cut: bool


def _creation_rep(root: Root, rp: ReducedParams) -> tuple[complex, SheetPair]:
    """Creation representative (zbar, sheets) of the root's canonical pair."""
    if root.kind is RootKind.CREATION:
        return root.zprime, root.sheets
    return -root.zprime, root.sheets.swapped()


def _annihilation_rep(root: Root, rp: ReducedParams) -> tuple[complex, SheetPair]:
    if root.kind is RootKind.ANNIHILATION:
        return root.zprime, root.sheets
    return -root.zprime, root.sheets.swapped()


def amplitude_ratios(root: Root, rp: ReducedParams,
                     residual_tol: float = 1e-8) -> AmplitudeRatios:
    """Cavity component ratios of the canonical pair.

    ratio_creation      = <a,0|cre>/<a*,1|cre> at the creation value zbar,
    ratio_annihilation  = <a*,1|ann>/<a,0|ann> at the annihilation value z.

    At a converged root the two are exact negatives of each other (the
    left/right component relations force it).  f0 = 0 returns the
    decoupled flag instead of dividing by zero.
    """
    if root.residual > residual_tol:
        raise ValueError(f"root residual {root.residual:.2e} above tolerance {residual_tol:.0e}")
    if rp.f0 == 0.0:
        return AmplitudeRatios(None, None, True)
    zbar, sheets_c = _creation_rep(root, rp)
    z, sheets_a = _annihilation_rep(root, rp)
    num = zbar - rp.omega0p - sigma(zbar - rp.omegaBp, rp.g, sheets_c.minus_arg)
    ratio_cre = num / (-1j * rp.f0)
    den = z - rp.omega0p - sigma(z - rp.omegaBp, rp.g, sheets_a.minus_arg)
    ratio_ann = (-1j * rp.f0) / den
    return AmplitudeRatios(ratio_cre, ratio_ann, False)


def normalization_product(root: Root, rp: ReducedParams,
                          residual_tol: float = 1e-8) -> complex:
    """<a*,1|cre> <a,0|ann> from the full-space normalization condition."""
    if root.residual > residual_tol:
        raise ValueError(f"root residual {root.residual:.2e} above tolerance {residual_tol:.0e}")
    zbar, sheets = _creation_rep(root, rp)
    if rp.f0 == 0.0:
        # decoupled modes: the cross term drops (the partner amplitude is
        # zero), leaving the single-factor spectral weight
        bracket = 1.0 - sigma_derivative(zbar - rp.omegaBp, rp.g, sheets.minus_arg)
    else:
        b_minus = zbar - rp.omega0p - sigma(zbar - rp.omegaBp, rp.g, sheets.minus_arg)
        b_plus = zbar + rp.omega0p - sigma(zbar + rp.omegaBp, rp.g, sheets.plus_arg)
        if b_plus == 0.0:
            raise EPDegeneracyError("plus brace vanished at the creation root")
        bracket = (1.0 - sigma_derivative(zbar - rp.omegaBp, rp.g, sheets.minus_arg)
                   + (b_minus / b_plus)
                   * (1.0 - sigma_derivative(zbar + rp.omegaBp, rp.g, sheets.plus_arg)))
    if abs(bracket) < 1e-10:
        raise EPDegeneracyError(
            f"normalization bracket |{abs(bracket):.2e}| < 1e-10: root at an exceptional point")
    return 1.0 / bracket


def band_amplitudes(root: Root, rp: ReducedParams, kgrid: Sequence[float],
                    residual_tol: float = 1e-8) -> tuple[np.ndarray, np.ndarray, np.ndarray, bool]:
    """Band kernels of the annihilation representative over a k grid.

    c_plus(k)  = -g_k / (z' + wB' - cos k)   on the n=0 band,
    c_minus(k) = +g_k / (z' - wB' + cos k)   on the n=1 conjugate band,

    with g_k = g B sin(k)/sqrt(pi) and B = 1 units; these are the
    components per unit cavity amplitude, matching the discretized
    eigenvectors of the band oracle.  Stationary roots sit exactly on the
    real band image; the returned on_cut flag marks that the upper-lip
    value of an essentially singular kernel is being reported.
    """
    if root.residual > residual_tol:
        raise ValueError(f"root residual {root.residual:.2e} above tolerance {residual_tol:.0e}")
    z, _sheets = _annihilation_rep(root, rp)
    k = np.asarray(kgrid, dtype=float)
    gk = rp.g * np.sin(k) / math.sqrt(math.pi)
    cosk = np.cos(k)
    den_plus = z + rp.omegaBp - cosk
    den_minus = z - rp.omegaBp + cosk
    on_cut = bool(abs(z.imag) < 1e-12
                  and (abs(z.real + rp.omegaBp) < 1.0 or abs(z.real - rp.omegaBp) < 1.0))
    tiny = 1e-300
    c_plus = -gk / np.where(den_plus == 0.0, tiny, den_plus)
    c_minus = gk / np.where(den_minus == 0.0, tiny, den_minus)
    return k, c_plus, c_minus, on_cut


def mode_coefficients(root: Root, rp: ReducedParams, kgrid: Sequence[float]) -> ModeCoefficients:
    ratios = amplitude_ratios(root, rp)
    norm = normalization_product(root, rp)
    k, c_plus, c_minus, on_cut = band_amplitudes(root, rp, kgrid)
    if rp.g == 0.0:
        k = np.array([])
        c_plus = np.array([], dtype=complex)
        c_minus = np.array([], dtype=complex)
    return ModeCoefficients(
        zprime=root.zprime, sheets=root.sheets,
        ratio_creation=ratios.ratio_creation,
        ratio_annihilation=ratios.ratio_annihilation,
        norm_product=norm, kgrid=k, c_plus=c_plus, c_minus=c_minus, on_cut=on_cut,
    )


def _c2(x: complex | None):
    return None if x is None else [x.real, x.imag]


def export_mode(root: Root, rp: ReducedParams, kgrid: Sequence[float],
                destination: str | Path) -> Path:
    """Write the mode-coefficient JSON document (schema versioned)."""
    mc = mode_coefficients(root, rp, kgrid)
    doc = {
        "schema": MODE_SCHEMA,
        "zprime": [mc.zprime.real, mc.zprime.imag],
        "sheets": [str(mc.sheets.plus_arg), str(mc.sheets.minus_arg)],
        "ratio_creation": _c2(mc.ratio_creation),
        "ratio_annihilation": _c2(mc.ratio_annihilation),
        "norm_product": _c2(mc.norm_product),
        "on_cut": mc.on_cut,
        "band": [[float(k), cp.real, cp.imag, cm.real, cm.imag]
                 for k, cp, cm in zip(mc.kgrid, mc.c_plus, mc.c_minus)],
    }
    destination = Path(destination)
    try:
        destination.parent.mkdir(parents=True, exist_ok=True)
        destination.write_text(json.dumps(doc, indent=1))
    except OSError as exc:
        raise OSError(f"failed writing mode export {destination}: {exc}") from exc
    return destination
