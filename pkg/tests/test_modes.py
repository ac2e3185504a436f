import json
import math

import numpy as np
import pytest

from conftest import G, rp_fig4, rp_fig5
from floquet_dce import bandoracle
from floquet_dce.dispersion import (
    FIRST_PAIR, PHYSICAL_PAIR, RootKind, make_root, solve_roots,
)
from floquet_dce.model import ReducedParams
from floquet_dce.modes import (
    EPDegeneracyError, amplitude_ratios, band_amplitudes, export_mode,
    mode_coefficients, normalization_product,
)

KGRID = (np.arange(1, 402) - 0.5) * math.pi / 401


def _root_near(rp, target, sheets=PHYSICAL_PAIR):
    roots = solve_roots(rp, sheets)
    return min(roots, key=lambda r: abs(r.zprime - target))


def test_ratio_annihilation_g0():
    rp = ReducedParams(omega0p=0.5, omegaBp=0.0, f0=0.2, g=0.0)
    root = _root_near(rp, -0.458257569495584)
    ratios = amplitude_ratios(root, rp)
    assert not ratios.decoupled
    assert ratios.ratio_annihilation == pytest.approx(0.20871215252208003j, abs=1e-12)


def test_ratio_decoupled_at_zero_drive():
    rp = rp_fig4(0.0, f0=0.0)
    root = _root_near(rp, 0.113468j)
    ratios = amplitude_ratios(root, rp)
    assert ratios.decoupled
    assert ratios.ratio_creation is None


def test_ratio_small_drive_limit():
    rp = ReducedParams(omega0p=0.5, omegaBp=0.0, f0=1e-6, g=0.0)
    root = _root_near(rp, -0.5)
    ratios = amplitude_ratios(root, rp)
    assert abs(ratios.ratio_annihilation) < 1e-5


def test_ratios_pairing_relation():
    # the left/right component relations force ratio_ann(z') = -ratio_cre(-z')
    for rp, sheets in ((rp_fig4(0.5), PHYSICAL_PAIR), (rp_fig4(0.1), FIRST_PAIR),
                       (rp_fig5(0.1), PHYSICAL_PAIR)):
        for root in solve_roots(rp, sheets):
            ratios = amplitude_ratios(root, rp)
            assert abs(ratios.ratio_creation + ratios.ratio_annihilation) < 1e-10


def test_ratio_rejects_bad_root():
    rp = rp_fig4(0.5)
    bad = make_root(0.5 + 0.5j, rp, PHYSICAL_PAIR)
    with pytest.raises(ValueError, match="residual"):
        amplitude_ratios(bad, rp)


def test_normalization_g0_closed_form():
    rp = ReducedParams(omega0p=0.5, omegaBp=0.0, f0=0.2, g=0.0)
    zbar = math.sqrt(0.25 - 0.04)
    root = _root_near(rp, zbar)
    assert normalization_product(root, rp) == pytest.approx(
        (zbar + 0.5) / (2 * zbar), rel=1e-12)
    assert normalization_product(root, rp) == pytest.approx(1.0455447255899808, rel=1e-12)
    # the annihilation partner gives the same canonical-pair product
    partner = _root_near(rp, -zbar)
    assert normalization_product(partner, rp) == pytest.approx(
        normalization_product(root, rp), rel=1e-12)


def test_normalization_bare_mode_unit_weight():
    rp = ReducedParams(omega0p=0.5, omegaBp=0.0, f0=0.0, g=0.0)
    root = _root_near(rp, 0.5)
    assert normalization_product(root, rp) == pytest.approx(1.0, rel=1e-14)


def test_normalization_friedrichs_closed_form():
    rp = rp_fig4(0.0, f0=0.0)
    root = _root_near(rp, 0.11346807228540663j)
    # [1 - dsigma_II/dz(zbar)]^(-1); the +dsigma variant fails the oracle checks
    assert normalization_product(root, rp) == pytest.approx(1.1270711904986703, rel=1e-10)


def test_normalization_diverges_at_exceptional_point():
    rp = rp_fig4(0.2)
    root = make_root(0.11346807228540663j, rp, PHYSICAL_PAIR)
    assert root.residual < 1e-10
    with pytest.raises(EPDegeneracyError):
        normalization_product(root, rp)


@pytest.fixture(scope="module")
def genuine_pair_oracle():
    """Discrete eigen-decomposition at N=400 for the (I,I) root of the
    overlapped-band setting at w0' = 0.1 (a genuine complex eigenvalue)."""
    rp = rp_fig4(0.1)
    root = _root_near(rp, 0.0796j, FIRST_PAIR)
    N = 400
    L = bandoracle.build_restricted_floquet_matrix(rp, bandoracle.band_for(rp, N))
    ev, V = np.linalg.eig(L)
    return rp, root, N, ev, V


def test_normalization_matches_discrete_eigenvector_weight(genuine_pair_oracle):
    rp, root, N, ev, V = genuine_pair_oracle
    zbar = -root.zprime if root.kind is RootKind.ANNIHILATION else root.zprime
    idx = int(np.argmin(np.abs(ev - zbar)))
    c = V[:, idx]
    weight = c[N + 1] ** 2 / np.sum(c * c)
    P = normalization_product(root, rp)
    assert abs(P - weight) < 1e-6


def test_ratios_match_discrete_eigenvector(genuine_pair_oracle):
    rp, root, N, ev, V = genuine_pair_oracle
    z_ann = root.zprime if root.kind is RootKind.ANNIHILATION else -root.zprime
    idx = int(np.argmin(np.abs(ev - z_ann)))
    c = V[:, idx]
    ratios = amplitude_ratios(root, rp)
    assert abs(ratios.ratio_annihilation - c[N + 1] / c[0]) < 1e-6


def test_band_kernels_match_discrete_eigenvector(genuine_pair_oracle):
    # sign-sensitive check of both kernels against the raw eigenvector
    rp, root, N, ev, V = genuine_pair_oracle
    z_ann = root.zprime if root.kind is RootKind.ANNIHILATION else -root.zprime
    idx = int(np.argmin(np.abs(ev - z_ann)))
    c = V[:, idx] / V[0, idx]          # unit cavity amplitude
    band = bandoracle.band_for(rp, N)
    k, c_plus, c_minus, on_cut = band_amplitudes(
        make_root(z_ann, rp, FIRST_PAIR), rp, band.kgrid)
    assert not on_cut
    scale = math.sqrt(math.pi / N)     # continuum kernel -> discrete coupling
    assert np.max(np.abs(c[1:N + 1] - scale * c_plus)) < 1e-8
    v = c[N + 1]
    assert np.max(np.abs(c[N + 2:] - scale * c_minus * v)) < 1e-8


def test_discretized_biorthonormality(genuine_pair_oracle):
    # <phi~|phi> = 1 with the band parts from the exported kernels:
    # vbar u (1 + dk sum c_plus^2) - ubar v (1 + dk sum c_minus^2) = 1
    rp, root, N, ev, V = genuine_pair_oracle
    for n_band, tol in ((100, 1e-2), (400, 1e-2)):
        band = bandoracle.band_for(rp, n_band)
        k, c_plus, c_minus, _ = band_amplitudes(root, rp, band.kgrid)
        dk = math.pi / n_band
        ratios = amplitude_ratios(root, rp)
        vu = normalization_product(root, rp)
        uv = vu * ratios.ratio_creation * ratios.ratio_annihilation
        total = vu * (1 + dk * np.sum(c_plus ** 2)) - uv * (1 + dk * np.sum(c_minus ** 2))
        assert abs(total - 1.0) < tol


def test_band_amplitudes_zero_coupling():
    rp = ReducedParams(omega0p=0.5, omegaBp=0.0, f0=0.2, g=0.0)
    root = _root_near(rp, math.sqrt(0.21))
    _, c_plus, c_minus, _ = band_amplitudes(root, rp, KGRID)
    assert np.all(c_plus == 0) and np.all(c_minus == 0)


def test_band_amplitudes_peak_at_resonant_momentum():
    rp = rp_fig5(0.3)
    root = _root_near(rp, 0.31 - 0.007j, FIRST_PAIR)
    k, c_plus, c_minus, _ = band_amplitudes(root, rp, KGRID)
    z_ann = root.zprime if root.kind is RootKind.ANNIHILATION else -root.zprime
    # the conjugate-band kernel resonates where cos k = -Re(z - wB')
    target = math.acos(max(-1.0, min(1.0, -(z_ann - rp.omegaBp).real)))
    k_peak = k[np.argmax(np.abs(c_minus))]
    assert abs(k_peak - target) < 0.05
    # the resonant channel dominates the off-band one
    assert np.max(np.abs(c_minus)) > 3 * np.max(np.abs(c_plus))


def test_export_roundtrip(tmp_path):
    rp = rp_fig4(0.5)
    root = solve_roots(rp)[0]
    path = export_mode(root, rp, KGRID, tmp_path / "mode.json")
    doc = json.loads(path.read_text())
    assert doc["schema"].endswith("mode/1")
    assert len(doc["band"]) == len(KGRID)
    mc = mode_coefficients(root, rp, KGRID)
    assert doc["norm_product"] == [mc.norm_product.real, mc.norm_product.imag]
    z = complex(*doc["zprime"])
    assert z == root.zprime


def test_export_g0_empty_band(tmp_path):
    rp = ReducedParams(omega0p=0.5, omegaBp=0.0, f0=0.2, g=0.0)
    root = solve_roots(rp)[0]
    doc = json.loads(export_mode(root, rp, KGRID, tmp_path / "m.json").read_text())
    assert doc["band"] == []


def test_nonlocal_stationary_mode_band_weight(tmp_path):
    # the certified on-cut stationary root of the shifted-band setting mixes
    # strongly with the band: kernel maximum far above 0.1 cavity units
    rp = rp_fig5(0.21736000252388)
    root = min(solve_roots(rp), key=lambda r: abs(r.zprime.imag))
    assert abs(root.zprime.imag) < 1e-9
    path = export_mode(root, rp, KGRID, tmp_path / "stat.json")
    doc = json.loads(path.read_text())
    assert doc["on_cut"] is True
    amps = np.array([[row[1], row[2], row[3], row[4]] for row in doc["band"]])
    max_amp = np.max(np.hypot(amps[:, 0], amps[:, 1]) + np.hypot(amps[:, 2], amps[:, 3]))
    assert max_amp > 0.1
