import math

import pytest

from conftest import G, rp_fig4, rp_fig5
from floquet_dce.dispersion import newton_root
from floquet_dce.model import ReducedParams
from floquet_dce.perturbation import (
    NearDegenerateError, ResonanceWindow, perturb_creation,
    perturb_creation_selfconsistent, perturb_window_report,
)
from floquet_dce.selfenergy import Sheet, sigma


def test_zero_drive_reduces_to_friedrichs_shift():
    rp = rp_fig4(0.5, f0=0.0)
    res = perturb_creation(rp)
    assert res.zbar2 == pytest.approx(0.5 + sigma(0.5, G, Sheet.II), abs=1e-15)
    assert res.im_multimode == 0.0


def test_g0_value_and_fourth_order_error():
    rp = ReducedParams(omega0p=0.5, omegaBp=0.0, f0=0.2, g=0.0)
    res = perturb_creation(rp)
    assert res.zbar2 == pytest.approx(0.46, abs=1e-15)       # 0.5 - f0^2/(2*0.5)
    exact = math.sqrt(0.25 - 0.04)
    assert abs(res.zbar2 - exact) == pytest.approx(0.001742430504416, abs=1e-12)


def test_decomposition_identity():
    for rp in (rp_fig4(0.5), rp_fig5(0.2), rp_fig5(1.0), rp_fig4(0.15, f0=0.3)):
        res = perturb_creation(rp)
        assert abs(res.zbar2.imag - (res.im_dissipation + res.im_multimode)) < 1e-12


def test_competing_signs_inside_both_bands():
    # both sigma arguments strictly in-band: dissipation positive, multimode negative
    res = perturb_creation(rp_fig5(0.2))
    assert res.im_dissipation > 0
    assert res.im_multimode < 0
    assert res.im_dissipation == pytest.approx(0.03575310077309683, rel=1e-12)
    assert res.im_multimode == pytest.approx(-0.011007784793370314, rel=1e-12)


def test_dissipation_vanishes_exactly_at_band_edge():
    # at w0' = 0.25 the minus argument sits exactly on the band edge
    res = perturb_creation(rp_fig5(0.25))
    assert res.im_dissipation == 0.0
    assert res.im_multimode < 0


def test_multimode_sign_property():
    for om in (0.0, 0.3, 0.9, 1.5, 1.74):
        rp = rp_fig5(om)
        if abs(rp.omega0p + rp.omegaBp) < 1.0:
            assert perturb_creation(rp).im_multimode <= 0.0


def test_near_degenerate_denominator_raises():
    rp = ReducedParams(omega0p=0.0, omegaBp=0.0, f0=0.2, g=G)
    with pytest.raises(NearDegenerateError, match="nonperturbative"):
        perturb_creation(rp)


def test_window_classification_fig5():
    # Delta = 1.5: amplification window (0.25, 1.75)
    assert perturb_window_report(rp_fig5(0.0)) is ResonanceWindow.BOTH_RESONANT
    assert perturb_window_report(rp_fig5(0.24)) is ResonanceWindow.BOTH_RESONANT
    assert perturb_window_report(rp_fig5(0.26)) is ResonanceWindow.AMPLIFICATION_WINDOW
    assert perturb_window_report(rp_fig5(1.74)) is ResonanceWindow.AMPLIFICATION_WINDOW
    assert perturb_window_report(rp_fig5(1.76)) is ResonanceWindow.OFF_RESONANT


def test_window_degenerate_cases():
    # Delta = 0: the window collapses to the single point w0' = B
    rp = rp_fig4(0.999999)
    assert perturb_window_report(rp) is ResonanceWindow.BOTH_RESONANT
    assert perturb_window_report(rp_fig4(1.000001)) is ResonanceWindow.OFF_RESONANT
    # Delta = 4: bands fully split, no both-resonant region
    split = ReducedParams(omega0p=0.0, omegaBp=-2.0, f0=0.2, g=G)
    assert perturb_window_report(split) is ResonanceWindow.OFF_RESONANT
    assert perturb_window_report(split.replace_omega0p(2.0)) \
        is ResonanceWindow.AMPLIFICATION_WINDOW
    with pytest.raises(ValueError):
        perturb_window_report(ReducedParams(omega0p=0.0, omegaBp=0.5, f0=0.2, g=G))


def _ratio(make_estimate):
    errs = {}
    for f0 in (0.05, 0.025):
        rp = ReducedParams(omega0p=0.5, omegaBp=0.0, f0=f0, g=G)
        zb = make_estimate(rp)
        root = newton_root(zb, rp)
        errs[f0] = abs(root - zb)
    return errs[0.05] / errs[0.025]


def test_convergence_order_g0():
    # f0^4 scaling is clean at g = 0: ratio between f0 = 0.05 and 0.025 near 16
    errs = {}
    for f0 in (0.05, 0.025):
        rp = ReducedParams(omega0p=0.5, omegaBp=0.0, f0=f0, g=0.0)
        zb = perturb_creation(rp).zbar2
        errs[f0] = abs(newton_root(zb, rp) - zb)
    assert 12 <= errs[0.05] / errs[0.025] <= 20


def test_convergence_order_selfconsistent():
    # expanding around the exact zero-drive root removes the O(g^4) offset
    # of the bare formula and restores the f0^4 ratio at g = 1/pi
    ratio = _ratio(perturb_creation_selfconsistent)
    assert 12 <= ratio <= 20


def test_bare_formula_offset_dominates_at_finite_g():
    # the bare second-order value evaluates sigma at the bare detuning, which
    # leaves an f0-independent self-consistency gap: the f0^4 ratio degrades
    # to ~1 at g = 1/pi (see the decisions ledger on the related criterion)
    ratio = _ratio(lambda rp: perturb_creation(rp).zbar2)
    assert ratio == pytest.approx(1.0, abs=0.15)
