"""Physical parameter records and the rotating-frame reduction.

All solver modules work in the reduced frame: frequencies are measured
from half the drive frequency and rescaled so the band half-width is 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict


@dataclass(frozen=True)
class ModelParams:
    """Lab-frame parameters of the driven cavity + photonic band.

    omega0  : cavity mode frequency
    Omega   : drive (pump) frequency
    f0      : drive amplitude, >= 0
    theta   : drive initial phase [rad]; only the time-domain oracle uses it
    omegaB  : band-center frequency
    B       : band half-width, > 0 (sets the energy unit)
    g       : dimensionless cavity-band coupling, >= 0
    """

    omega0: float
    Omega: float
    f0: float = 0.0
    theta: float = 0.0
    omegaB: float = 0.0
    B: float = 1.0
    g: float = 0.0

    def __post_init__(self):
        for name in ("omega0", "Omega", "f0", "theta", "omegaB", "B", "g"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
        if self.B <= 0:
            raise ValueError(f"B must be > 0, got {self.B}")
        if self.f0 < 0:
            raise ValueError(f"f0 must be >= 0, got {self.f0}")
        if self.g < 0:
            raise ValueError(f"g must be >= 0, got {self.g}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelParams":
        return cls(**{k: float(d[k]) for k in
                      ("omega0", "Omega", "f0", "theta", "omegaB", "B", "g") if k in d})


@dataclass(frozen=True)
class ReducedParams:
    """Frame-shifted parameters in units of B.

    omega0p = (omega0 - Omega/2)/B, omegaBp = (omegaB - Omega/2)/B.
    All downstream solvers consume this record only.
    """

    omega0p: float
    omegaBp: float
    f0: float = 0.0
    g: float = 0.0
    B: float = 1.0

    def replace_omega0p(self, omega0p: float) -> "ReducedParams":
        return ReducedParams(omega0p, self.omegaBp, self.f0, self.g, self.B)


def reduce_params(params: ModelParams) -> ReducedParams:
    """Shift frequencies by Omega/2 and rescale to B = 1 units.

    The original B is kept on the record so the lab frame can be
    reconstructed given Omega (exact when B == 1).
    """
    B = params.B
    return ReducedParams(
        omega0p=(params.omega0 - params.Omega / 2.0) / B,
        omegaBp=(params.omegaB - params.Omega / 2.0) / B,
        f0=params.f0 / B,
        g=params.g,
        B=B,
    )


def unreduce_params(rp: ReducedParams, Omega: float, theta: float = 0.0) -> ModelParams:
    """Inverse of :func:`reduce_params` for a given drive frequency."""
    return ModelParams(
        omega0=rp.omega0p * rp.B + Omega / 2.0,
        Omega=Omega,
        f0=rp.f0 * rp.B,
        theta=theta,
        omegaB=rp.omegaBp * rp.B + Omega / 2.0,
        B=rp.B,
        g=rp.g,
    )


@dataclass(frozen=True)
class FrameValidity:
    """Report of the narrow-band / weak-drive restriction check."""

    ratio: float           # (Omega - 2B)/f0, inf when f0 == 0
    threshold: float
    ok: bool

    @property
    def message(self) -> str:
        if self.ok:
            return f"rotating-frame restriction ok: (Omega-2B)/f0 = {self.ratio:.3g}"
        return (f"rotating-frame restriction marginal: (Omega-2B)/f0 = {self.ratio:.3g} "
                f"< {self.threshold:.3g}; restricted-subspace results may shift")


def check_rotating_frame_validity(params: ModelParams, threshold: float = 10.0) -> FrameValidity:
    """Check the single-Floquet-unit restriction condition Omega - 2B >> f0.

    f0 == 0 is trivially valid (no virtual coupling at all).  A failing
    check is a warning, not an error: all solvers still run.
    """
    if params.f0 == 0.0:
        return FrameValidity(ratio=math.inf, threshold=threshold, ok=True)
    ratio = (params.Omega - 2.0 * params.B) / params.f0
    return FrameValidity(ratio=ratio, threshold=threshold, ok=ratio > threshold)
