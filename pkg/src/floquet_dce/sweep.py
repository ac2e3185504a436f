"""Branch continuation over the reduced cavity frequency, critical-point
certification, and CSV emission.

Branches are tracked on a fixed sheet pair by a linear (secant) predictor
and Newton corrector.  Near exceptional points the square-root branching
defeats the predictor, so branches terminate and fresh roots re-seed new
branches; the critical point itself is certified separately:

  * interior exceptional points solve D = 0 and dD/dz' = 0 in
    (Re z', Im z', w0') by Gauss-Newton;
  * band-edge bifurcations (where dD/dz' diverges instead of vanishing)
    solve D(edge; w0') = 0 with z' pinned at a cut endpoint;
  * stationary points are real on-cut roots: D(x; w0') = 0 solved in the
    two real unknowns (x, w0'), reached either by bisection on an Im sign
    change or from a branch endpoint whose Im z' tends to zero.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .dispersion import (
    DEDUP_TOL, NEWTON_TOL, PHYSICAL_PAIR, Root, SheetPair,
    band_cuts, dispersion_derivative, dispersion_domega,
    dispersion_second_derivative, dispersion_value, make_root, newton_root,
    solve_roots,
)
from .model import ReducedParams
from .selfenergy import BranchPointError, sigma_derivative

log = logging.getLogger(__name__)

CONTINUITY_FLOOR = 1e-4
REFINE_LEVELS = 6
EDGE_MARGIN = 0.08
ENDPOINT_IM_THRESHOLD = 0.06
EP_D_TOL = 1e-10
EP_DP_TOL = 1e-8
STATIONARY_IM_TOL = 1e-9


@dataclass
class Branch:
    """One continuation-tracked eigenvalue curve on a fixed sheet pair."""

    id: int
    sheets: SheetPair
    points: list[tuple[float, Root]] = field(default_factory=list)
    active: bool = True

    @property
    def omegas(self) -> list[float]:
        return [om for om, _ in self.points]

    @property
    def zvalues(self) -> list[complex]:
        return [r.zprime for _, r in self.points]

    def last(self) -> tuple[float, Root]:
        return self.points[-1]


@dataclass(frozen=True)
class CriticalPoint:
    """Certified exceptional (bifurcation) or stationary point."""

    kind: str                 # "exceptional" | "stationary"
    omega0p_star: float
    zprime_star: complex
    branches: tuple[int, ...]
    mechanism: str            # "interior" | "band-edge" | "sign-change" | "endpoint"
    residual_D: float
    residual_Dp: float | None = None

    def to_row(self) -> dict:
        return {
            "kind": self.kind,
            "omega0_prime": self.omega0p_star,
            "re_z": self.zprime_star.real,
            "im_z": self.zprime_star.imag,
            "branches": ";".join(str(b) for b in self.branches),
        }


def _predict(branch: Branch, omega: float) -> complex:
    pts = branch.points
    if len(pts) == 1:
        return pts[-1][1].zprime
    (om1, r1), (om2, r2) = pts[-2], pts[-1]
    if om2 == om1:
        return r2.zprime
    slope = (r2.zprime - r1.zprime) / (om2 - om1)
    return r2.zprime + slope * (omega - om2)


def _continuity_bound(branch: Branch, domega: float) -> float:
    pts = branch.points
    if len(pts) >= 2:
        secant = abs(pts[-1][1].zprime - pts[-2][1].zprime)
        return max(5.0 * secant, CONTINUITY_FLOOR)
    return max(50.0 * abs(domega), CONTINUITY_FLOOR)


def _walk_refined(rp_at, branch: Branch, om_from: float, om_to: float,
                  sheets: SheetPair, tol: float) -> complex | None:
    """Corrector fallback: subdivide the step up to 2^REFINE_LEVELS times."""
    z = branch.last()[1].zprime
    for level in range(1, REFINE_LEVELS + 1):
        n = 2 ** level
        z_try = z
        ok = True
        for i in range(1, n + 1):
            om = om_from + (om_to - om_from) * i / n
            z_new = newton_root(z_try, rp_at(om), sheets, tol=tol)
            if z_new is None or abs(z_new - z_try) > _continuity_bound(branch, (om_to - om_from) / n):
                ok = False
                break
            z_try = z_new
        if ok:
            return z_try
    return None


def sweep_branches(rp_template: ReducedParams, omega0p_grid: Sequence[float],
                   sheets: SheetPair = PHYSICAL_PAIR, *,
                   tol: float = NEWTON_TOL, dedup_tol: float = DEDUP_TOL,
                   claim_tol: float = 1e-6) -> list[Branch]:
    """Track all eigenvalue branches of D over a monotone w0' grid.

    At every grid point the default seed set is re-solved; any root no
    active branch claims spawns a new branch, so the union of branch
    points at a grid value reproduces solve_roots there.  A branch that
    loses its root (corrector failure or continuity-bound violation after
    refinement) is closed with a gap; re-seeding covers what follows.
    """
    grid = [float(w) for w in omega0p_grid]
    if len(grid) < 2:
        raise ValueError("grid needs at least 2 points")
    steps = np.diff(grid)
    if not (np.all(steps > 0) or np.all(steps < 0)):
        raise ValueError("grid must be strictly monotone")

    def rp_at(om: float) -> ReducedParams:
        return rp_template.replace_omega0p(om)

    branches: list[Branch] = []
    next_id = 0
    for i, om in enumerate(grid):
        rp = rp_at(om)
        active = [b for b in branches if b.active]
        # corrector step for existing branches
        for b in active:
            om_prev = b.last()[0]
            z_pred = _predict(b, om)
            z_new = newton_root(z_pred, rp, sheets, tol=tol)
            bound = _continuity_bound(b, om - om_prev)
            if z_new is None or abs(z_new - b.last()[1].zprime) > bound:
                z_new = _walk_refined(rp_at, b, om_prev, om, sheets, tol)
            if z_new is None:
                b.active = False
                log.debug("branch %d closed at omega0p=%g", b.id, om_prev)
                continue
            b.points.append((om, make_root(z_new, rp, sheets)))
        # branch collisions: two active branches on one root merge -> close one
        current = [b for b in branches if b.active and b.points and b.points[-1][0] == om]
        for j, b1 in enumerate(current):
            for b2 in current[j + 1:]:
                if b2.active and b1.active and \
                        abs(b1.points[-1][1].zprime - b2.points[-1][1].zprime) < dedup_tol:
                    b2.active = False
                    log.debug("branches %d/%d collided at omega0p=%g", b1.id, b2.id, om)
        # spawn unclaimed fresh roots
        claimed = [b.points[-1][1].zprime for b in branches
                   if b.active and b.points and b.points[-1][0] == om]
        for root in solve_roots(rp, sheets, tol=tol, dedup_tol=dedup_tol):
            if any(abs(root.zprime - z) < claim_tol for z in claimed):
                continue
            nb = Branch(id=next_id, sheets=sheets, points=[(om, root)])
            next_id += 1
            branches.append(nb)
            claimed.append(root.zprime)
    return branches


# ---------------------------------------------------------------------------
# critical points


def _cut_edges(rp: ReducedParams) -> list[float]:
    out = []
    for lo, hi in band_cuts(rp):
        out += [lo, hi]
    return sorted(set(out))


def find_exceptional(rp_template: ReducedParams, sheets: SheetPair,
                     bracket: tuple[float, float], z_guess: complex, *,
                     branches: tuple[int, ...] = (), max_iter: int = 200) -> CriticalPoint | None:
    """Certify a bifurcation point near (z_guess, mid-bracket).

    Interior mode solves the four real equations Re/Im of D and dD/dz' for
    the three unknowns (Re z', Im z', w0') by damped Gauss-Newton.  If the
    guess sits near a cut endpoint (or the interior iteration walks into
    one), the point is a band-edge bifurcation instead: there |dD/dz'|
    diverges, and the certificate is D(edge; w0') = 0 solved over w0'.
    """
    om_lo, om_hi = min(bracket), max(bracket)
    om = 0.5 * (om_lo + om_hi)

    def rp_at(w: float) -> ReducedParams:
        return rp_template.replace_omega0p(w)

    edges = _cut_edges(rp_template) if rp_template.g != 0.0 else []
    near_edge = next((e for e in edges if abs(z_guess - e) < EDGE_MARGIN), None)
    if near_edge is None:
        res = _interior_ep(rp_at, sheets, z_guess, om, max_iter)
        if res is not None:
            z, w, rd, rdp = res
            if om_lo - 1e-9 <= w <= om_hi + 1e-9:
                return CriticalPoint("exceptional", w, z, branches, "interior", rd, rdp)
            log.debug("interior EP converged outside bracket: omega0p=%g", w)
            return None
        near_edge = next((e for e in edges if abs(z_guess - e) < 3 * EDGE_MARGIN), None)
    if near_edge is not None:
        res = _edge_ep(rp_at, sheets, near_edge, om, max_iter)
        if res is not None:
            w, rd = res
            if om_lo - 1e-9 <= w <= om_hi + 1e-9:
                return CriticalPoint("exceptional", w, complex(near_edge, 0.0),
                                     branches, "band-edge", rd, None)
    log.info("no exceptional point certified in bracket (%g, %g)", om_lo, om_hi)
    return None


def _interior_ep(rp_at, sheets, z0: complex, om0: float, max_iter: int):
    z, om = complex(z0), float(om0)
    for _ in range(max_iter):
        rp = rp_at(om)
        try:
            d = dispersion_value(z, rp, sheets)
            dp = dispersion_derivative(z, rp, sheets)
            if abs(d) < EP_D_TOL and abs(dp) < EP_DP_TOL:
                return z, om, abs(d), abs(dp)
            d2 = dispersion_second_derivative(z, rp, sheets)
            dom = dispersion_domega(z, rp, sheets)
            # d(dD/dz')/d omega0' = b2' - b1'
            db1 = 1.0 - sigma_derivative(z + rp.omegaBp, rp.g, sheets.plus_arg)
            db2 = 1.0 - sigma_derivative(z - rp.omegaBp, rp.g, sheets.minus_arg)
        except (BranchPointError, ZeroDivisionError, OverflowError):
            return None
        ddp_dom = db2 - db1
        J = np.array([
            [dp.real, -dp.imag, dom.real],
            [dp.imag, dp.real, dom.imag],
            [d2.real, -d2.imag, ddp_dom.real],
            [d2.imag, d2.real, ddp_dom.imag],
        ])
        r = np.array([d.real, d.imag, dp.real, dp.imag])
        upd, *_ = np.linalg.lstsq(J, -r, rcond=None)
        norm0 = np.linalg.norm(r)
        lam = 1.0
        for _ in range(30):
            z_try = z + lam * complex(upd[0], upd[1])
            om_try = om + lam * upd[2]
            try:
                dt = dispersion_value(z_try, rp_at(om_try), sheets)
                dpt = dispersion_derivative(z_try, rp_at(om_try), sheets)
            except (BranchPointError, ZeroDivisionError, OverflowError):
                lam *= 0.5
                continue
            if np.linalg.norm([dt.real, dt.imag, dpt.real, dpt.imag]) < norm0:
                break
            lam *= 0.5
        else:
            return None
        z = z + lam * complex(upd[0], upd[1])
        om = om + lam * upd[2]
    return None


def _edge_ep(rp_at, sheets, edge: float, om0: float, max_iter: int):
    om = float(om0)
    z = complex(edge, 0.0)
    h = 1e-8
    for _ in range(max_iter):
        d = dispersion_value(z, rp_at(om), sheets)
        if abs(d) < EP_D_TOL:
            return om, abs(d)
        der = (dispersion_value(z, rp_at(om + h), sheets) - d) / h
        if der == 0.0:
            return None
        # 1D Gauss-Newton on |D|^2 over the single real unknown
        step = -(d.real * der.real + d.imag * der.imag) / (abs(der) ** 2)
        if abs(step) < 1e-16:
            return None
        om += step
    return None


def certify_stationary(rp_template: ReducedParams, sheets: SheetPair,
                       x_guess: float, omega_guess: float, *,
                       max_iter: int = 200) -> tuple[float, float, float] | None:
    """Solve D(x; w0') = 0 over the real unknowns (x, w0').

    A stationary mode is a real on-cut eigenvalue; with the upper-lip
    convention D there is genuinely complex, so Re D = Im D = 0 pins both
    unknowns.  Returns (x*, w0'*, |D|) or None.
    """
    x, om = float(x_guess), float(omega_guess)
    h = 1e-8
    for _ in range(max_iter):
        rp = rp_template.replace_omega0p(om)
        d = dispersion_value(complex(x, 0.0), rp, sheets)
        if abs(d) < EP_D_TOL:
            return x, om, abs(d)
        dx = (dispersion_value(complex(x + h, 0.0), rp, sheets) - d) / h
        dom = (dispersion_value(complex(x, 0.0),
                                rp_template.replace_omega0p(om + h), sheets) - d) / h
        J = np.array([[dx.real, dom.real], [dx.imag, dom.imag]])
        try:
            upd = np.linalg.solve(J, -np.array([d.real, d.imag]))
        except np.linalg.LinAlgError:
            return None
        lam = 1.0
        for _ in range(30):
            d_try = dispersion_value(complex(x + lam * upd[0], 0.0),
                                     rp_template.replace_omega0p(om + lam * upd[1]), sheets)
            if abs(d_try) < abs(d):
                break
            lam *= 0.5
        else:
            return None
        x += lam * upd[0]
        om += lam * upd[1]
    return None


def find_stationary(rp_template: ReducedParams, branch: Branch, *,
                    max_iter: int = 200) -> list[CriticalPoint]:
    """Stationary points associated with one branch.

    Interior sign changes of Im z' are refined by bisection in w0'
    (re-solving the root at each midpoint).  A branch endpoint whose Im z'
    heads to zero (the root is about to cross a cut) is certified by the
    two-real-unknown on-axis solve; exact-zero segments report nothing.
    """
    pts = branch.points
    if len(pts) < 2:
        return []
    sheets = branch.sheets
    found: list[CriticalPoint] = []

    def rp_at(w: float) -> ReducedParams:
        return rp_template.replace_omega0p(w)

    # interior sign changes
    for (om1, r1), (om2, r2) in zip(pts[:-1], pts[1:]):
        im1, im2 = r1.zprime.imag, r2.zprime.imag
        if im1 == 0.0 and im2 == 0.0:
            continue                      # exact-zero segment: nothing to balance
        if im1 * im2 >= 0.0 or min(abs(im1), abs(im2)) < 1e-15:
            continue
        lo, hi = (om1, om2)
        z_lo, z_hi = r1.zprime, r2.zprime
        ok = False
        for _ in range(max_iter):
            mid = 0.5 * (lo + hi)
            z_mid = newton_root(0.5 * (z_lo + z_hi), rp_at(mid), sheets)
            if z_mid is None:
                break
            if abs(z_mid.imag) < STATIONARY_IM_TOL:
                found.append(CriticalPoint("stationary", mid, z_mid, (branch.id,),
                                           "sign-change",
                                           abs(dispersion_value(z_mid, rp_at(mid), sheets))))
                ok = True
                break
            if (z_mid.imag > 0) == (im1 > 0):
                lo, z_lo = mid, z_mid
            else:
                hi, z_hi = mid, z_mid
        if not ok and abs(hi - lo) > 0:
            log.debug("bisection unresolved on branch %d in (%g, %g)", branch.id, om1, om2)

    # endpoint certification (either end of the branch)
    for om_end, r_end in (pts[0], pts[-1]):
        z_end = r_end.zprime
        if not (0 < abs(z_end.imag) < ENDPOINT_IM_THRESHOLD):
            continue
        if rp_template.g == 0.0 or not _near_cut_interior(z_end.real, rp_template):
            continue
        res = certify_stationary(rp_template, sheets, z_end.real, om_end)
        if res is None:
            continue
        x_star, om_star, rd = res
        if abs(om_star - om_end) > 0.2 or abs(x_star - z_end.real) > 0.2:
            continue                      # walked away: not this branch's endpoint
        found.append(CriticalPoint("stationary", om_star, complex(x_star, 0.0),
                                   (branch.id,), "endpoint", rd))
    return found


def _near_cut_interior(x: float, rp: ReducedParams, edge_margin: float = 1e-6) -> bool:
    for lo, hi in band_cuts(rp):
        if lo + edge_margin < x < hi - edge_margin:
            return True
    return False


def dedupe_critical(points: Sequence[CriticalPoint], tol_om: float = 1e-6,
                    tol_z: float = 1e-6) -> list[CriticalPoint]:
    """Merge duplicate certifications (same point reached from several branches)."""
    out: list[CriticalPoint] = []
    for p in sorted(points, key=lambda q: (q.kind, q.omega0p_star, q.zprime_star.real,
                                           q.zprime_star.imag)):
        dup = next((q for q in out if q.kind == p.kind
                    and abs(q.omega0p_star - p.omega0p_star) < tol_om
                    and abs(q.zprime_star - p.zprime_star) < tol_z), None)
        if dup is None:
            out.append(p)
        else:
            out[out.index(dup)] = CriticalPoint(
                dup.kind, dup.omega0p_star, dup.zprime_star,
                tuple(sorted(set(dup.branches) | set(p.branches))),
                dup.mechanism, dup.residual_D, dup.residual_Dp)
    return out


# ---------------------------------------------------------------------------
# critical-point candidates from branch geometry


def exceptional_candidates(branches: Sequence[Branch], grid_step: float,
                           rp: ReducedParams) -> list[tuple[tuple[float, float], complex]]:
    """Bracket/guess pairs for find_exceptional from branch geometry.

    Candidates are (a) interior minima of pairwise branch distance and
    (b) branch terminations (collisions and cut-edge arrivals).
    """
    cands: list[tuple[tuple[float, float], complex]] = []
    by_om: dict[float, list[complex]] = {}
    for b in branches:
        for om, r in b.points:
            by_om.setdefault(om, []).append(r.zprime)
    oms = sorted(by_om)
    mind = []
    for om in oms:
        zs = by_om[om]
        d = math.inf
        pair = None
        for i in range(len(zs)):
            for j in range(i + 1, len(zs)):
                dij = abs(zs[i] - zs[j])
                if dij < d:
                    d, pair = dij, 0.5 * (zs[i] + zs[j])
        mind.append((d, pair))
    for i in range(1, len(oms) - 1):
        d, pair = mind[i]
        if pair is None or not math.isfinite(d):
            continue
        if d < mind[i - 1][0] and d <= mind[i + 1][0] and d < 0.05:
            cands.append(((oms[max(0, i - 2)], oms[min(len(oms) - 1, i + 2)]), pair))
    for b in branches:
        if not b.points:
            continue
        for om_end, r_end in (b.points[0], b.points[-1]):
            z = r_end.zprime
            for e in _cut_edges(rp):
                if abs(z - e) < EDGE_MARGIN:
                    cands.append(((om_end - max(40 * grid_step, 0.03),
                                   om_end + max(40 * grid_step, 0.03)), complex(e, 0.0)))
    return cands


# ---------------------------------------------------------------------------
# CSV emission

SWEEP_HEADER = ["omega0_prime", "branch_id", "re_z", "im_z",
                "sheet_plus", "sheet_minus", "residual"]
CRITICAL_HEADER = ["kind", "omega0_prime", "re_z", "im_z", "branches"]


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def emit_sweep_csv(branches: Sequence[Branch], critical_points: Sequence[CriticalPoint],
                   out_dir: str | Path, prefix: str = "sweep") -> tuple[Path, Path]:
    """Write {prefix}_sweep.csv and {prefix}_critical.csv; deterministic order.

    Rows are sorted by (branch_id, omega0_prime); floats carry 17
    significant digits so parsing reproduces them bit-identically.
    """
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        sweep_path = out_dir / f"{prefix}_sweep.csv"
        crit_path = out_dir / f"{prefix}_critical.csv"
        with open(sweep_path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(SWEEP_HEADER)
            for b in sorted(branches, key=lambda q: q.id):
                for om, r in b.points:
                    wr.writerow([_fmt(om), b.id, _fmt(r.zprime.real), _fmt(r.zprime.imag),
                                 str(r.sheets.plus_arg), str(r.sheets.minus_arg),
                                 _fmt(r.residual)])
        with open(crit_path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(CRITICAL_HEADER)
            for p in sorted(critical_points,
                            key=lambda q: (q.kind, q.omega0p_star, q.zprime_star.real)):
                row = p.to_row()
                wr.writerow([row["kind"], _fmt(row["omega0_prime"]), _fmt(row["re_z"]),
                             _fmt(row["im_z"]), row["branches"]])
    except OSError as exc:
        raise OSError(f"failed writing sweep CSVs under {out_dir}: {exc}") from exc
    return sweep_path, crit_path


def read_sweep_csv(path: str | Path) -> list[dict]:
    """Parse a sweep CSV back into typed rows (floats, int branch id)."""
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append({
                "omega0_prime": float(rec["omega0_prime"]),
                "branch_id": int(rec["branch_id"]),
                "re_z": float(rec["re_z"]),
                "im_z": float(rec["im_z"]),
                "sheet_plus": rec["sheet_plus"],
                "sheet_minus": rec["sheet_minus"],
                "residual": float(rec["residual"]),
            })
    return rows
