"""Effective 2x2 Floquet generator, its characteristic function, and the
nonlinear complex eigenvalue solver.

The characteristic (dispersion) function on a chosen pair of sheets is

    D(z') = {z' + w0' - sigma(z' + wB')} {z' - w0' - sigma(z' - wB')} + f0^2

and eigenvalues are its zeros.  sigma is odd off the cut, which gives the
exact +- pairing: z' a zero on sheets (s1, s2)  <=>  -z' a zero on the
order-swapped pair (s2, s1).  With real parameters the zero set of a
symmetric pair (s, s) is additionally closed under z' -> conj(z') and
z' -> -conj(z').
"""

from __future__ import annotations

import cmath
import enum
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .model import ReducedParams
from .selfenergy import Sheet, sigma, sigma_derivative, sigma_second_derivative

log = logging.getLogger(__name__)

NEWTON_TOL = 1e-12
STEP_TOL = 1e-10
DEDUP_TOL = 1e-8
STATIONARY_TOL = 1e-9
MAX_ITER = 200


@dataclass(frozen=True)
class SheetPair:
    """Sheet choice for the two self-energy arguments of D.

    plus_arg is the sheet of sigma(z' + wB'), minus_arg of sigma(z' - wB').
    """

    plus_arg: Sheet = Sheet.II
    minus_arg: Sheet = Sheet.II

    def swapped(self) -> "SheetPair":
        """Argument-order swap; hosts the -z' partner root."""
        return SheetPair(self.minus_arg, self.plus_arg)

    def conjugated(self) -> "SheetPair":
        """Both sheets barred I <-> II."""
        return SheetPair(self.plus_arg.conjugate(), self.minus_arg.conjugate())

    def __str__(self) -> str:
        return f"({self.plus_arg},{self.minus_arg})"


PHYSICAL_PAIR = SheetPair(Sheet.II, Sheet.II)   # resonance continuation
FIRST_PAIR = SheetPair(Sheet.I, Sheet.I)        # genuine point spectrum
ALL_PAIRS = (
    SheetPair(Sheet.I, Sheet.I), SheetPair(Sheet.I, Sheet.II),
    SheetPair(Sheet.II, Sheet.I), SheetPair(Sheet.II, Sheet.II),
)


class RootKind(enum.Enum):
    ANNIHILATION = "annihilation"
    CREATION = "creation"


class Stability(enum.Enum):
    DECAYING = "decaying"
    AMPLIFYING = "amplifying"
    STATIONARY = "stationary"
    STABLE_OSCILLATORY = "stable-oscillatory"


@dataclass(frozen=True)
class Root:
    """Converged eigenvalue z' with sheet metadata and classification."""

    zprime: complex
    sheets: SheetPair
    residual: float
    kind: RootKind
    stability: Stability

    def partner(self) -> "Root":
        """The canonical -z' partner on the order-swapped sheet pair."""
        kind = RootKind.CREATION if self.kind is RootKind.ANNIHILATION else RootKind.ANNIHILATION
        flip = {Stability.DECAYING: Stability.AMPLIFYING,
                Stability.AMPLIFYING: Stability.DECAYING}
        return Root(-self.zprime, self.sheets.swapped(), self.residual,
                    kind, flip.get(self.stability, self.stability))

    def to_dict(self) -> dict:
        return {
            "zprime": [self.zprime.real, self.zprime.imag],
            "sheets": [str(self.sheets.plus_arg), str(self.sheets.minus_arg)],
            "residual": self.residual,
            "kind": self.kind.value,
            "stability": self.stability.value,
        }


def _braces(zprime: complex, rp: ReducedParams, sheets: SheetPair) -> tuple[complex, complex]:
    b1 = zprime + rp.omega0p - sigma(zprime + rp.omegaBp, rp.g, sheets.plus_arg)
    b2 = zprime - rp.omega0p - sigma(zprime - rp.omegaBp, rp.g, sheets.minus_arg)
    return b1, b2


def build_leff(zprime: complex, rp: ReducedParams, sheets: SheetPair = PHYSICAL_PAIR) -> np.ndarray:
    """Effective generator on the {cavity, cavity*} pair at trial value z'.

    [[-w0' + sigma(z'+wB'),  -i f0],
     [-i f0,                 w0' + sigma(z'-wB')]]
    """
    s_plus = sigma(zprime + rp.omegaBp, rp.g, sheets.plus_arg)
    s_minus = sigma(zprime - rp.omegaBp, rp.g, sheets.minus_arg)
    return np.array(
        [[-rp.omega0p + s_plus, -1j * rp.f0],
         [-1j * rp.f0, rp.omega0p + s_minus]],
        dtype=complex,
    )


def dispersion_value(zprime: complex, rp: ReducedParams, sheets: SheetPair = PHYSICAL_PAIR) -> complex:
    """D(z'); zero iff z' is an eigenvalue on the chosen sheets."""
    b1, b2 = _braces(zprime, rp, sheets)
    return b1 * b2 + rp.f0 * rp.f0


def dispersion_derivative(zprime: complex, rp: ReducedParams, sheets: SheetPair = PHYSICAL_PAIR) -> complex:
    """dD/dz' via the product rule and the analytic sigma derivative."""
    b1, b2 = _braces(zprime, rp, sheets)
    db1 = 1.0 - sigma_derivative(zprime + rp.omegaBp, rp.g, sheets.plus_arg)
    db2 = 1.0 - sigma_derivative(zprime - rp.omegaBp, rp.g, sheets.minus_arg)
    return db1 * b2 + b1 * db2


def dispersion_second_derivative(zprime: complex, rp: ReducedParams,
                                 sheets: SheetPair = PHYSICAL_PAIR) -> complex:
    b1, b2 = _braces(zprime, rp, sheets)
    db1 = 1.0 - sigma_derivative(zprime + rp.omegaBp, rp.g, sheets.plus_arg)
    db2 = 1.0 - sigma_derivative(zprime - rp.omegaBp, rp.g, sheets.minus_arg)
    d2b1 = -sigma_second_derivative(zprime + rp.omegaBp, rp.g, sheets.plus_arg)
    d2b2 = -sigma_second_derivative(zprime - rp.omegaBp, rp.g, sheets.minus_arg)
    return d2b1 * b2 + 2.0 * db1 * db2 + b1 * d2b2


def dispersion_domega(zprime: complex, rp: ReducedParams, sheets: SheetPair = PHYSICAL_PAIR) -> complex:
    """dD/d omega0' = b2 - b1 (the braces carry +-omega0')."""
    b1, b2 = _braces(zprime, rp, sheets)
    return b2 - b1


def band_cuts(rp: ReducedParams) -> tuple[tuple[float, float], tuple[float, float]]:
    """Real z' intervals where each sigma argument lies on the cut."""
    return ((-1.0 - rp.omegaBp, 1.0 - rp.omegaBp),   # plus argument in cut
            (-1.0 + rp.omegaBp, 1.0 + rp.omegaBp))   # minus argument in cut


def _on_any_cut(x: float, rp: ReducedParams, margin: float = 0.0) -> bool:
    if rp.g == 0.0:
        return False
    for lo, hi in band_cuts(rp):
        if lo - margin < x < hi + margin:
            return True
    return False


def classify_kind(zprime: complex, tol: float = STATIONARY_TOL) -> RootKind:
    """Creation for Re z' > 0, annihilation for Re z' < 0 (shifted frame).

    On the imaginary axis the canonical pair is degenerate in Re; the
    decaying member (Im > 0) is labeled creation, matching the convention
    that the creation mode decays on the resonance sheet.
    """
    if zprime.real > tol:
        return RootKind.CREATION
    if zprime.real < -tol:
        return RootKind.ANNIHILATION
    return RootKind.CREATION if zprime.imag >= 0.0 else RootKind.ANNIHILATION


def classify_stability(zprime: complex, rp: ReducedParams,
                       stationary_tol: float = STATIONARY_TOL) -> Stability:
    """Sign of Im z' (positive = decaying); near-real roots are stationary
    only when a band argument is actually resonant, else stable-oscillatory."""
    if abs(zprime.imag) < stationary_tol:
        if _on_any_cut(zprime.real, rp):
            return Stability.STATIONARY
        return Stability.STABLE_OSCILLATORY
    return Stability.DECAYING if zprime.imag > 0 else Stability.AMPLIFYING


def make_root(zprime: complex, rp: ReducedParams, sheets: SheetPair,
              stationary_tol: float = STATIONARY_TOL) -> Root:
    return Root(
        zprime=zprime,
        sheets=sheets,
        residual=abs(dispersion_value(zprime, rp, sheets)),
        kind=classify_kind(zprime, stationary_tol),
        stability=classify_stability(zprime, rp, stationary_tol),
    )


def newton_root(zprime: complex, rp: ReducedParams, sheets: SheetPair = PHYSICAL_PAIR,
                tol: float = NEWTON_TOL, step_tol: float = STEP_TOL,
                max_iter: int = MAX_ITER) -> complex | None:
    """Damped Newton iteration on D; None on non-convergence.

    The step is halved (up to 30 times) while |D| does not decrease: D has
    branch points where a full Newton step overshoots.  Acceptance requires
    both |D| < tol and the last undamped step below step_tol.
    """
    z = complex(zprime)
    last_step = math.inf
    for _ in range(max_iter):
        try:
            d = dispersion_value(z, rp, sheets)
        except (OverflowError, ValueError):
            return None
        if abs(d) < tol and last_step < step_tol:
            return z
        try:
            dp = dispersion_derivative(z, rp, sheets)
        except ZeroDivisionError:
            dp = 0.0
        if dp == 0.0:
            z += 1e-9 + 1e-9j          # nudge off a critical/branch point
            continue
        step = -d / dp
        lam = 1.0
        for _ in range(30):
            if abs(dispersion_value(z + lam * step, rp, sheets)) < abs(d):
                break
            lam *= 0.5
        else:
            if abs(d) < tol:
                return z
            return None
        z += lam * step
        last_step = abs(step)
    return z if abs(dispersion_value(z, rp, sheets)) < tol and last_step < step_tol else None


def default_seeds(rp: ReducedParams, sheets: SheetPair = PHYSICAL_PAIR) -> list[complex]:
    """Closed-form seed set: g=0 pair, phenomenological pair, perturbative pair.

    The phenomenological damping constant is 2 Im sigma_II at the creation
    argument when it lies in the band, zero otherwise.
    """
    w0, f0 = rp.omega0p, rp.f0
    seeds: list[complex] = []
    bare = cmath.sqrt(complex(w0 * w0 - f0 * f0))
    seeds += [bare, -bare]
    x = rp.omega0p - rp.omegaBp
    gamma = 2.0 * sigma(x, rp.g, Sheet.II).imag if abs(x) < 1.0 else 0.0
    rad = cmath.sqrt(complex((f0 + gamma / 2.0) ** 2 - w0 * w0))
    seeds += [1j * gamma / 2.0 - 1j * rad, 1j * gamma / 2.0 + 1j * rad]
    den = (2.0 * w0 + sigma(w0 - rp.omegaBp, rp.g, Sheet.II)
           - sigma(w0 + rp.omegaBp, rp.g, Sheet.II))
    if abs(den) > 1e-10:
        z2 = w0 + sigma(w0 - rp.omegaBp, rp.g, Sheet.II) - f0 * f0 / den
        seeds += [z2, -z2]
    out: list[complex] = []
    for s in seeds:
        if not any(abs(s - t) < 1e-12 for t in out):
            out.append(s)
    return out


def _symmetry_images(z: complex, sheets: SheetPair) -> list[complex]:
    # same-pair images of a root under the exact reflection symmetries
    if sheets.plus_arg is sheets.minus_arg:
        return [-z, z.conjugate(), -z.conjugate()]
    return [z.conjugate()]


def solve_roots(rp: ReducedParams, sheets: SheetPair = PHYSICAL_PAIR,
                seeds: Sequence[complex] | None = None, *,
                tol: float = NEWTON_TOL, step_tol: float = STEP_TOL,
                dedup_tol: float = DEDUP_TOL, max_iter: int = MAX_ITER,
                stationary_tol: float = STATIONARY_TOL) -> list[Root]:
    """Newton-solve D = 0 from every seed, deduplicate, classify.

    The converged set is closed under the pair's exact symmetries (partner
    images are themselves polished by Newton, so residuals stay honest).
    Non-converged seeds are logged, not fatal; the result may be empty.
    """
    if seeds is None:
        seeds = default_seeds(rp, sheets)
    if len(seeds) == 0:
        raise ValueError("seed list must be nonempty")
    converged: list[complex] = []
    failures = 0
    for s in seeds:
        z = newton_root(s, rp, sheets, tol, step_tol, max_iter)
        if z is None:
            failures += 1
            continue
        converged.append(z)
    # close under symmetry (images re-verified by Newton)
    for z in list(converged):
        for img in _symmetry_images(z, sheets):
            zi = newton_root(img, rp, sheets, tol, step_tol, max_iter=20)
            if zi is not None:
                converged.append(zi)
    converged.sort(key=lambda c: (c.real, c.imag))
    distinct: list[complex] = []
    for z in converged:
        if not any(abs(z - u) < dedup_tol for u in distinct):
            distinct.append(z)
    if failures:
        log.debug("solve_roots: %d/%d seeds did not converge at omega0p=%g",
                  failures, len(seeds), rp.omega0p)
    if not distinct:
        # a sheet pair can be legitimately empty (roots continued through a cut)
        log.debug("solve_roots: no roots found at omega0p=%g on %s", rp.omega0p, sheets)
    return [make_root(z, rp, sheets, stationary_tol) for z in distinct]


class ContourCutError(ValueError):
    """Raised when a counting box touches or straddles a branch cut."""


class ContourRootError(ValueError):
    """Raised when D nearly vanishes on the counting contour."""


def count_roots_in_box(rp: ReducedParams, sheets: SheetPair,
                       box: tuple[float, float, float, float], *,
                       samples_per_edge: int = 64, max_depth: int = 40,
                       contour_tol: float = 1e-10) -> int:
    """Argument-principle count of zeros of D inside a rectangle.

    box = (re_min, re_max, im_min, im_max).  The rectangle must not touch
    or straddle the real cut segments: D is discontinuous across a cut, so
    a straddling contour winds around an integer that is not the zero
    count (the cut jump contributes).  Boxes fully above or below the real
    axis, or any box at g = 0, are always valid.
    """
    x0, x1, y0, y1 = box
    if not (x0 < x1 and y0 < y1):
        raise ValueError(f"degenerate box {box}")
    if rp.g != 0.0:
        straddles = y0 < 0.0 < y1 or y0 == 0.0 or y1 == 0.0
        if straddles:
            for lo, hi in band_cuts(rp):
                if x0 < hi and x1 > lo:
                    raise ContourCutError(
                        f"box {box} straddles the cut [{lo}, {hi}]; split it above/below the axis")
    corners = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1), complex(x0, y0)]

    def val(z: complex) -> complex:
        d = dispersion_value(z, rp, sheets)
        if abs(d) < contour_tol:
            raise ContourRootError(f"|D|={abs(d):.2e} on the contour at z'={z}; perturb the box")
        return d

    total = 0.0
    for a, b in zip(corners[:-1], corners[1:]):
        ts = np.linspace(0.0, 1.0, samples_per_edge + 1)
        vals = [val(a + (b - a) * t) for t in ts]

        def refine(t0, t1, d0, d1, depth):
            dphi = cmath.phase(d1 / d0)
            if abs(dphi) < 1.0:
                return dphi
            if depth >= max_depth:
                raise ContourRootError(
                    f"phase not resolved on edge {a}->{b}; root or cut too close to the contour")
            tm = 0.5 * (t0 + t1)
            dm = val(a + (b - a) * tm)
            return refine(t0, tm, d0, dm, depth + 1) + refine(tm, t1, dm, d1, depth + 1)

        total += sum(refine(ts[i], ts[i + 1], vals[i], vals[i + 1], 0)
                     for i in range(samples_per_edge))
    count = total / (2.0 * math.pi)
    n = round(count)
    if abs(count - n) > 0.1:
        raise ContourRootError(f"winding {count:.4f} is not near an integer; refine the contour")
    return int(n)
