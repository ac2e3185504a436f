import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import G, rp_fig4, rp_fig5
from floquet_dce.dispersion import (
    ALL_PAIRS, FIRST_PAIR, PHYSICAL_PAIR, ContourCutError, Root, RootKind,
    SheetPair, Stability, build_leff, count_roots_in_box, default_seeds,
    dispersion_derivative, dispersion_value, newton_root, solve_roots,
)
from floquet_dce.model import ModelParams, ReducedParams, reduce_params
from floquet_dce.selfenergy import Sheet, sigma


def test_sheetpair_involutions():
    for pair in ALL_PAIRS:
        assert pair.swapped().swapped() == pair
        assert pair.conjugated().conjugated() == pair
        swap_conj = pair.swapped().conjugated()
        assert swap_conj.swapped().conjugated() == pair


def test_build_leff_zero_coupling():
    rp = ReducedParams(omega0p=0.5, omegaBp=0.0, f0=0.2, g=0.0)
    L = build_leff(0.123 + 0.04j, rp)
    assert np.allclose(L, [[-0.5, -0.2j], [-0.2j, 0.5]])


def test_build_leff_undriven_is_diagonal():
    rp = ReducedParams(omega0p=0.3, omegaBp=-0.2, f0=0.0, g=G)
    L = build_leff(0.1 + 0.2j, rp)
    assert L[0, 1] == 0 and L[1, 0] == 0


def test_build_leff_applies_sheet_to_each_argument():
    rp = rp_fig4(0.4)
    z = 0.3 + 0.1j
    L = build_leff(z, rp, PHYSICAL_PAIR)
    s = sigma(z, G, Sheet.II)       # wB' = 0: both arguments equal z
    assert L[0, 0] == pytest.approx(-0.4 + s)
    assert L[1, 1] == pytest.approx(0.4 + s)


def test_dispersion_quadratic_at_g0():
    rp = ReducedParams(omega0p=0.5, omegaBp=0.0, f0=0.2, g=0.0)
    for z in (0.3 + 0.1j, -1.2j, 2.0):
        assert dispersion_value(z, rp) == pytest.approx(z * z - 0.25 + 0.04, rel=1e-14)
    root = math.sqrt(0.25 - 0.04)
    assert root == pytest.approx(0.458257569495584, abs=1e-15)
    assert abs(dispersion_value(root, rp)) < 1e-15


def test_dispersion_bare_mode():
    rp = ReducedParams(omega0p=0.7, omegaBp=0.0, f0=0.0, g=0.0)
    assert dispersion_value(0.7, rp) == 0.0
    assert dispersion_value(-0.7, rp) == 0.0


def test_dispersion_at_zero_overlapped_bands():
    # D(0) = f0^2 - g^4 at w0' = wB' = 0 on (II,II): the braces multiply to
    # (-i g^2)^2 = -g^4
    rp = rp_fig4(0.0)
    val = dispersion_value(0.0, rp)
    assert val == pytest.approx(0.2 ** 2 - G ** 4, abs=1e-15)
    assert val == pytest.approx(0.029734017745315665, abs=1e-15)


def test_derivative_matches_finite_differences():
    h = 1e-6
    cases = [
        (rp_fig4(0.5), 0.5 + 0.2j),
        (rp_fig4(0.15), 0.1 + 0.3j),
        (rp_fig5(0.8), 1.2 - 0.4j),
    ]
    for rp, z in cases:
        for sheets in ALL_PAIRS:
            fd = (dispersion_value(z + h, rp, sheets)
                  - dispersion_value(z - h, rp, sheets)) / (2 * h)
            an = dispersion_derivative(z, rp, sheets)
            assert abs(an - fd) <= 1e-6 * max(1.0, abs(an))


def test_derivative_g0():
    rp = ReducedParams(omega0p=0.5, omegaBp=0.0, f0=0.1, g=0.0)
    assert dispersion_derivative(1.0, rp) == pytest.approx(2.0, rel=1e-14)


@given(re=st.floats(-2.5, 2.5), im=st.floats(-2.0, 2.0),
       om=st.floats(0.0, 1.8), omB=st.floats(-0.9, 0.0), f0=st.floats(0.0, 0.4))
@settings(max_examples=80)
def test_pairing_identity_order_swap(re, im, om, omB, f0):
    # D_(s1,s2)(z) == D_(s2,s1)(-z): exact off the cuts since sigma is odd
    z = complex(re, im)
    if abs(z.imag) < 1e-3:
        z += 0.5j
    rp = ReducedParams(omega0p=om, omegaBp=omB, f0=f0, g=G)
    for sheets in ALL_PAIRS:
        a = dispersion_value(z, rp, sheets)
        b = dispersion_value(-z, rp, sheets.swapped())
        assert abs(a - b) <= 1e-12 * max(1.0, abs(a))


# --------------------------------------------------------------------------
# root solving


def test_roots_parametric_window_g0():
    rp = ReducedParams(omega0p=0.1, omegaBp=0.0, f0=0.2, g=0.0)
    roots = solve_roots(rp)
    zs = sorted(r.zprime.imag for r in roots)
    assert len(roots) == 2
    assert zs == pytest.approx([-0.17320508075688776, 0.17320508075688776], abs=1e-12)
    kinds = {r.stability for r in roots}
    assert kinds == {Stability.AMPLIFYING, Stability.DECAYING}


def test_roots_bare():
    rp = ReducedParams(omega0p=0.3, omegaBp=0.0, f0=0.0, g=0.0)
    roots = solve_roots(rp)
    assert sorted(r.zprime.real for r in roots) == pytest.approx([-0.3, 0.3], abs=1e-14)
    assert {r.kind for r in roots} == {RootKind.ANNIHILATION, RootKind.CREATION}
    assert all(r.stability is Stability.STABLE_OSCILLATORY for r in roots)


def test_friedrichs_decaying_root():
    # f0 = 0, resonant: the creation factor on sheet II has the closed-form
    # zero +i g^2/sqrt(1 - 2 g^2)
    rp = rp_fig4(0.0, f0=0.0)
    roots = solve_roots(rp)
    target = G * G / math.sqrt(1 - 2 * G * G)
    assert target == pytest.approx(0.11346807228540663, abs=1e-15)
    best = min(roots, key=lambda r: abs(r.zprime - 1j * target))
    assert abs(best.zprime - 1j * target) < 1e-9
    assert best.stability is Stability.DECAYING


def test_fig4_quadruple_and_residuals():
    rp = rp_fig4(0.5)
    roots = solve_roots(rp)
    assert len(roots) == 4
    zs = {(round(r.zprime.real, 9), round(r.zprime.imag, 9)) for r in roots}
    z0 = 0.516488904406415 + 0.0973864213464531j
    expect = {(round(s.real, 9), round(s.imag, 9))
              for s in (z0, -z0, z0.conjugate(), -z0.conjugate())}
    assert zs == expect
    for r in roots:
        assert r.residual < 1e-12


@pytest.mark.parametrize("om", [0.05, 0.15, 0.5, 1.2])
def test_at_most_four_distinct_roots_on_physical_pair(om):
    assert len(solve_roots(rp_fig4(om))) <= 4


def test_root_pairing_with_sheet_swap():
    for rp in (rp_fig4(0.5), rp_fig4(0.15), rp_fig5(0.1)):
        for sheets in (PHYSICAL_PAIR, FIRST_PAIR):
            for r in solve_roots(rp, sheets):
                partner_res = abs(dispersion_value(-r.zprime, rp, sheets.swapped()))
                assert partner_res < 1e-10


def test_g_to_zero_continuity():
    # roots approach the g=0 closed form linearly in g^2
    r0 = complex(math.sqrt(0.25 - 0.04))
    gaps = {}
    for g in (0.02, 0.01):
        rp = ReducedParams(omega0p=0.5, omegaBp=0.0, f0=0.2, g=g)
        rt = newton_root(r0, rp)
        gaps[g] = abs(rt - r0)
    slope = gaps[0.02] / 0.02 ** 2
    assert 0.1 < slope < 10.0
    assert gaps[0.02] / gaps[0.01] == pytest.approx(4.0, abs=1.0)


def test_seed_set_contains_all_candidate_families():
    rp = rp_fig4(0.5)
    seeds = default_seeds(rp)
    assert len(seeds) >= 4
    bare = cmath.sqrt(complex(0.25 - 0.04))
    assert any(abs(s - bare) < 1e-12 for s in seeds)
    assert any(abs(s + bare) < 1e-12 for s in seeds)


def test_empty_seed_list_rejected():
    with pytest.raises(ValueError):
        solve_roots(rp_fig4(0.5), seeds=[])


def test_classification_stationary_vs_oscillatory():
    # a real root inside a band (with g > 0) is stationary; a real root far
    # outside every band is plain stable oscillation
    rp = rp_fig5(0.21736000252388)
    roots = solve_roots(rp)
    stat = [r for r in roots if r.stability is Stability.STATIONARY]
    assert stat and all(abs(r.zprime.imag) < 1e-9 for r in stat)
    rp_far = rp_fig5(2.1)
    far = solve_roots(rp_far)
    assert any(r.stability is Stability.STABLE_OSCILLATORY for r in far)


# --------------------------------------------------------------------------
# argument-principle counting


def test_count_g0_box():
    rp = ReducedParams(omega0p=0.5, omegaBp=0.0, f0=0.2, g=0.0)
    assert count_roots_in_box(rp, PHYSICAL_PAIR, (-1, 1, -1, 1)) == 2


def test_count_single_bare_root():
    rp = ReducedParams(omega0p=0.5, omegaBp=0.0, f0=0.0, g=0.0)
    assert count_roots_in_box(rp, PHYSICAL_PAIR, (0.1, 1.0, -0.5, 0.5)) == 1


def test_count_rejects_cut_straddling_box():
    rp = rp_fig4(0.15)
    with pytest.raises(ContourCutError):
        count_roots_in_box(rp, PHYSICAL_PAIR, (-2, 2, -2, 2))


@pytest.mark.parametrize("om,upper,lower", [
    (0.19, 2, 2),     # four imaginary roots between the stationary point and the EP
    (0.5, 2, 2),      # generic off-axis quadruple
    (0.15, 1, 1),     # two roots: the other pair has crossed the cut
])
def test_count_matches_solver_in_half_boxes(om, upper, lower):
    rp = rp_fig4(om)
    n_up = count_roots_in_box(rp, PHYSICAL_PAIR, (-2, 2, 1e-3, 2))
    n_dn = count_roots_in_box(rp, PHYSICAL_PAIR, (-2, 2, -2, -1e-3))
    assert (n_up, n_dn) == (upper, lower)
    roots = solve_roots(rp)
    assert n_up == sum(1 for r in roots if r.zprime.imag > 1e-3)
    assert n_dn == sum(1 for r in roots if r.zprime.imag < -1e-3)


def test_four_solutions_certified():
    # the quadruple structure: upper + lower half-box counts total 4
    rp = rp_fig4(0.5)
    total = (count_roots_in_box(rp, PHYSICAL_PAIR, (-2, 2, 1e-3, 2))
             + count_roots_in_box(rp, PHYSICAL_PAIR, (-2, 2, -2, -1e-3)))
    assert total == 4
    assert len(solve_roots(rp)) == 4
