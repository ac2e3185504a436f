"""Brute-force validation against the discretized band.

Two complementary oracles: dense diagonalization of the restricted
(2N+2)-mode Floquet generator validates the effective 2x2 theory's genuine
point spectrum, and symplectic time propagation of the full time-dependent
generator validates the Floquet restriction itself (monodromy exponents,
decay fits for resonance-sheet roots that finite N cannot host directly).

The one-step map is the Cayley transform of the midpoint rule,

    S_{n+1} = (1 - i h L_mid / 2)^(-1) (1 + i h L_mid / 2) S_n,

which is exactly symplectic for any generator with J L J = L^T, so the
monitored drift ||S^T J S - J|| is pure roundoff.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dispersion import Root, SheetPair, FIRST_PAIR
from .model import ModelParams, ReducedParams, reduce_params
from .selfenergy import DiscretizedBand, make_band

log = logging.getLogger(__name__)

DEFAULT_N_MATRIX = 400
DEFAULT_N_PROPAGATION = 100
DRIFT_ABORT = 1e-6


def band_for(rp: ReducedParams, N: int = DEFAULT_N_MATRIX) -> DiscretizedBand:
    """Midpoint band in the reduced frame (center wB', B = 1)."""
    return make_band(N, rp.g, B=1.0, center=rp.omegaBp)


def symplectic_metric(n_half: int) -> np.ndarray:
    """J = [[0, I], [-I, 0]] pairing each annihilation row with its conjugate."""
    J = np.zeros((2 * n_half, 2 * n_half))
    J[:n_half, n_half:] = np.eye(n_half)
    J[n_half:, :n_half] = -np.eye(n_half)
    return J


def build_restricted_floquet_matrix(rp: ReducedParams,
                                    band: DiscretizedBand) -> np.ndarray:
    """Shifted single-Floquet-unit generator over {a,0; b,0; a*,1; b*,1}.

    Diagonal -w0', -w'_j on the annihilation half and the negatives on the
    creation half; band couplings -g_j / +g_j; virtual coupling -i f0
    between the two cavity entries.  Satisfies J L J = L^T exactly.
    """
    N = band.N
    n = 2 * N + 2
    L = np.zeros((n, n), dtype=complex)
    a0, astar = 0, N + 1
    L[a0, a0] = -rp.omega0p
    L[astar, astar] = rp.omega0p
    L[a0, astar] = L[astar, a0] = -1j * rp.f0
    bl = slice(1, N + 1)
    bs = slice(N + 2, n)
    L[bl, bl] = -np.diag(band.omegas)
    L[bs, bs] = np.diag(band.omegas)
    L[a0, bl] = L[bl, a0] = -band.couplings
    L[astar, bs] = L[bs, astar] = band.couplings
    return L


def symplectic_residual(L: np.ndarray) -> float:
    """||J L J - L^T||_inf for the block metric of matching dimension."""
    n_half = L.shape[0] // 2
    J = symplectic_metric(n_half)
    return float(np.abs(J @ L @ J - L.T).max())


def diagonalize_restricted(L: np.ndarray) -> np.ndarray:
    """Full eigenvalue set, sorted by (Re, Im)."""
    ev = np.linalg.eigvals(L)
    order = np.lexsort((ev.imag, ev.real))
    return ev[order]


def pairing_residual(eigenvalues: np.ndarray) -> float:
    """Max distance of each eigenvalue to the negative of its best partner."""
    ev = np.asarray(eigenvalues)
    worst = 0.0
    for z in ev:
        worst = max(worst, float(np.min(np.abs(ev + z))))
    return worst


# ---------------------------------------------------------------------------
# time propagation


def full_liouvillian(params: ModelParams, band: DiscretizedBand, t: float) -> np.ndarray:
    """Lab-frame time-dependent generator of the discretized Heisenberg system.

    The band here carries the bare dispersion (center omegaB); the drive
    enters through f(t) = f0 sin(Omega t + theta) on the cavity entries,
    including the counter-rotating corners.
    """
    N = band.N
    n = 2 * N + 2
    f = params.f0 * math.sin(params.Omega * t + params.theta)
    L = np.zeros((n, n), dtype=complex)
    a0, astar = 0, N + 1
    L[a0, a0] = -params.omega0 - 2.0 * f
    L[astar, astar] = params.omega0 + 2.0 * f
    L[a0, astar] = -2.0 * f
    L[astar, a0] = 2.0 * f
    bl = slice(1, N + 1)
    bs = slice(N + 2, n)
    L[bl, bl] = -np.diag(band.omegas)
    L[bs, bs] = np.diag(band.omegas)
    L[a0, bl] = L[bl, a0] = -band.couplings
    L[astar, bs] = L[bs, astar] = band.couplings
    return L


class SymplecticDriftError(RuntimeError):
    pass


@dataclass
class PropagationResult:
    times: np.ndarray
    samples: list[np.ndarray]       # S(t) at the sample times
    drift: np.ndarray               # ||S^T J S - J|| / max(1, ||S||^2) at the samples
    drift_absolute: np.ndarray      # unnormalized ||S^T J S - J||_inf
    dt: float


def propagate_fundamental(params: ModelParams, band: DiscretizedBand, t_end: float, *,
                          dt: float | None = None, steps_per_period: int = 64,
                          n_samples: int = 51,
                          drift_abort: float = DRIFT_ABORT) -> PropagationResult:
    """Integrate -i dS/dt = L(t) S from S(0) = 1 with the midpoint/Cayley map.

    The step preserves S^T J S = J exactly for the symplectic-symmetric
    L(t), so the monitored residual is pure roundoff.  For amplifying
    dynamics the absolute residual inevitably grows like eps * ||S||^2;
    the monitored drift is therefore normalized by max(1, ||S||_inf^2).
    Drift beyond drift_abort means the linear solves are losing accuracy
    and a smaller dt is required.
    """
    if t_end <= 0:
        raise ValueError("t_end must be > 0")
    if dt is None:
        T = 2.0 * math.pi / params.Omega if params.Omega != 0 else t_end
        dt = min(T / steps_per_period, t_end)
    n_steps = max(1, math.ceil(t_end / dt))
    dt = t_end / n_steps
    n = 2 * band.N + 2
    J = symplectic_metric(n // 2)
    eye = np.eye(n, dtype=complex)

    time_independent = params.f0 == 0.0
    if time_independent:
        X = 0.5j * dt * full_liouvillian(params, band, 0.0)
        step_matrix = np.linalg.solve(eye - X, eye + X)

    sample_idx = np.unique(np.linspace(0, n_steps, min(n_samples, n_steps + 1)).astype(int))
    S = eye.copy()
    times, samples, drifts, drifts_abs = [], [], [], []

    def record(i: int):
        times.append(i * dt)
        samples.append(S.copy())
        raw = float(np.abs(S.T @ J @ S - J).max())
        scale = max(1.0, float(np.abs(S).max()) ** 2)
        drifts_abs.append(raw)
        drifts.append(raw / scale)
        if drifts[-1] > drift_abort:
            raise SymplecticDriftError(
                f"symplectic drift {drifts[-1]:.2e} > {drift_abort:.0e} at t={i*dt:.3g}; "
                f"reduce dt (currently {dt:.3g})")

    record(0)
    for i in range(1, n_steps + 1):
        if time_independent:
            S = step_matrix @ S
        else:
            t_mid = (i - 0.5) * dt
            X = 0.5j * dt * full_liouvillian(params, band, t_mid)
            S = np.linalg.solve(eye - X, (eye + X) @ S)
        if i in sample_idx:
            record(i)
    return PropagationResult(np.array(times), samples, np.array(drifts),
                             np.array(drifts_abs), dt)


def propagate_column(params: ModelParams, band: DiscretizedBand, t_end: float,
                     index: int, *, dt: float = 0.02) -> tuple[np.ndarray, np.ndarray]:
    """Cheap single-column propagation (survival amplitudes): S(t) e_index."""
    n_steps = max(1, math.ceil(t_end / dt))
    dt = t_end / n_steps
    n = 2 * band.N + 2
    eye = np.eye(n, dtype=complex)
    time_independent = params.f0 == 0.0
    if time_independent:
        X = 0.5j * dt * full_liouvillian(params, band, 0.0)
        M = np.linalg.solve(eye - X, eye + X)
    y = np.zeros(n, dtype=complex)
    y[index] = 1.0
    times = np.empty(n_steps + 1)
    amps = np.empty(n_steps + 1, dtype=complex)
    times[0], amps[0] = 0.0, y[index]
    for i in range(1, n_steps + 1):
        if time_independent:
            y = M @ y
        else:
            t_mid = (i - 0.5) * dt
            X = 0.5j * dt * full_liouvillian(params, band, t_mid)
            y = np.linalg.solve(eye - X, y + X @ y)
        times[i] = i * dt
        amps[i] = y[index]
    return times, amps


@dataclass(frozen=True)
class DecayFit:
    rate: float          # decay rate of |amplitude| (= Im z of the resonance)
    amplitude: float     # fitted |prefactor| (= |normalization product|)
    r_squared: float
    window: tuple[float, float]


def fit_survival_decay(times: np.ndarray, amps: np.ndarray, band_N: int,
                       B: float = 1.0, *, min_r2: float = 0.99) -> DecayFit:
    """Log-linear fit of |a(t)| over the pre-recurrence window.

    Finite N mimics decay only until the edge reflection returns at
    t_rec ~ N/(2B); the fit uses [0.1, 0.5] t_rec and is rejected when the
    correlation drops below min_r2 (recurrence or non-exponential window).
    """
    t_rec = band_N / (2.0 * B)
    lo, hi = 0.1 * t_rec, 0.5 * t_rec
    mask = (times >= lo) & (times <= hi)
    if mask.sum() < 8:
        raise ValueError(f"too few samples in the fit window [{lo:g}, {hi:g}]")
    t = times[mask]
    y = np.log(np.abs(amps[mask]))
    A = np.vstack([t, np.ones_like(t)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    r2 = float(np.corrcoef(t, y)[0, 1] ** 2)
    if r2 < min_r2:
        raise ValueError(f"decay fit rejected: R^2 = {r2:.4f} < {min_r2}")
    return DecayFit(rate=-float(coef[0]), amplitude=float(math.exp(coef[1])),
                    r_squared=r2, window=(lo, hi))


# ---------------------------------------------------------------------------
# monodromy


@dataclass(frozen=True)
class FloquetExponentSet:
    """Eigenvalues of the one-period map and the derived exponents.

    Exponents use the principal logarithm, z = -i ln(mu)/T, so Re z lives
    in (-Omega/2, Omega/2]; any comparison must pick the representative
    modulo Omega nearest the target.
    """

    multipliers: np.ndarray
    exponents: np.ndarray
    period: float
    pairing_residual: float
    det_residual: float
    eigvec_condition: float

    def nearest_exponent(self, target: complex, Omega: float) -> complex:
        """Representative of some exponent, shifted by n*Omega, nearest target."""
        best = None
        for z in self.exponents:
            n = round((target.real - z.real) / Omega)
            cand = z + n * Omega
            if best is None or abs(cand - target) < abs(best - target):
                best = cand
        return best


def monodromy_exponents(params: ModelParams, band: DiscretizedBand, *,
                        steps_per_period: int = 256) -> FloquetExponentSet:
    """Floquet multipliers/exponents from one-period propagation.

    Multipliers come in reciprocal pairs and det = 1 (symplectic spectrum);
    both residuals are recorded.  A large eigenvector condition number
    flags a nearly defective monodromy (parameter near an exceptional
    point).
    """
    if params.Omega == 0:
        raise ValueError("monodromy needs a periodic drive (Omega != 0)")
    T = 2.0 * math.pi / params.Omega
    res = propagate_fundamental(params, band, T, steps_per_period=steps_per_period,
                                n_samples=2)
    M = res.samples[-1]
    mu, V = np.linalg.eig(M)
    exps = np.array([cmath.log(m) / (1j * T) for m in mu])
    recip = 0.0
    for m in mu:
        recip = max(recip, float(np.min(np.abs(mu - 1.0 / m))))
    detres = abs(complex(np.prod(mu)) - 1.0)
    cond = float(np.linalg.cond(V))
    if cond > 1e10:
        log.warning("monodromy nearly defective: eigenvector condition %.2e", cond)
    order = np.lexsort((exps.imag, exps.real))
    return FloquetExponentSet(mu[order], exps[order], T, recip, detres, cond)


# ---------------------------------------------------------------------------
# solver-vs-oracle comparison


@dataclass(frozen=True)
class RootComparison:
    solver: complex
    oracle: complex | None
    distance: float
    method: str

    def to_dict(self) -> dict:
        return {
            "solver": [self.solver.real, self.solver.imag],
            "oracle": None if self.oracle is None else [self.oracle.real, self.oracle.imag],
            "distance": self.distance,
            "method": self.method,
        }


def compare_with_effective(rp: ReducedParams, roots: Sequence[Root], *,
                           N_values: Sequence[int] = (100, 200, 400),
                           sheets_hint: SheetPair = FIRST_PAIR) -> dict:
    """Match effective-solver roots to restricted-matrix eigenvalues per N.

    Finite N represents the genuine point spectrum (first-sheet roots and
    any complex pairs the non-Hermitian coupling creates).  Resonance-sheet
    roots with no matrix partner are listed unmatched; at f0 = 0 the finite
    spectrum is entirely real, so decay-type roots must be validated by the
    propagation fit instead (see fit_survival_decay).
    """
    spectra = {}
    for N in N_values:
        L = build_restricted_floquet_matrix(rp, band_for(rp, N))
        spectra[N] = diagonalize_restricted(L)
    comparisons: dict[int, list[RootComparison]] = {N: [] for N in N_values}
    for root in roots:
        for N in N_values:
            ev = spectra[N]
            i = int(np.argmin(np.abs(ev - root.zprime)))
            dist = float(abs(ev[i] - root.zprime))
            matched = dist < 0.05
            comparisons[N].append(RootComparison(
                solver=root.zprime,
                oracle=complex(ev[i]) if matched else None,
                distance=dist,
                method="matrix" if matched else "unmatched",
            ))
    report = {
        "N_values": list(N_values),
        "sheets": str(roots[0].sheets) if roots else str(sheets_hint),
        "per_N": {str(N): [c.to_dict() for c in comparisons[N]] for N in N_values},
    }
    return report
