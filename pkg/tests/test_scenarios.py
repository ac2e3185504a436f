import json
import math

import pytest

from floquet_dce.model import reduce_params, ModelParams
from floquet_dce.scenarios import UnknownScenarioError, list_scenarios, run_scenario


def test_catalog_has_four_entries():
    cat = list_scenarios()
    assert len(cat) == 4
    assert {c["name"] for c in cat} == {"fig4", "fig5", "fig6", "freq-reduction"}


def test_catalog_fig5_band_shift():
    entry = next(c for c in list_scenarios() if c["name"] == "fig5")
    rp = reduce_params(ModelParams.from_dict(entry["params"]))
    assert rp.omegaBp == -0.75


def test_every_expectation_has_tolerance_and_provenance():
    for entry in list_scenarios():
        assert entry["expectations"]
        for exp in entry["expectations"]:
            assert exp["tolerance"] >= 0
            assert exp["provenance"]
            assert len(exp["window"]) == 2


def test_unknown_scenario():
    with pytest.raises(UnknownScenarioError):
        run_scenario("fig7", "/tmp/nowhere")


def test_fig6_runs_and_passes(tmp_path):
    report = run_scenario("fig6", tmp_path)
    assert all(c["pass"] for c in report["checks"])
    assert (tmp_path / "fig6_sweep.csv").exists()
    verdict = json.loads((tmp_path / "fig6_verdict.json").read_text())
    assert verdict["scenario"] == "fig6"
    measured = report["checks"][0]["measured"]
    assert abs(measured[0] - math.sqrt(0.2 * (0.2 + 1 / math.pi))) < 1e-9


def test_fig6_deterministic(tmp_path):
    run_scenario("fig6", tmp_path / "a")
    run_scenario("fig6", tmp_path / "b")
    for name in ("fig6_sweep.csv", "fig6_critical.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_freq_reduction_verdict(tmp_path):
    report = run_scenario("freq-reduction", tmp_path)
    byname = {c["descriptor"]["name"]: c for c in report["checks"]}
    assert byname["design-conditions"]["pass"]
    assert byname["amplifying-at-2B"]["pass"]
    assert byname["amplifying-at-2B"]["measured"] < -1e-6
    assert byname["none-at-5B"]["pass"]
    assert abs(byname["none-at-5B"]["measured"]) < 1e-9
    assert (tmp_path / "freq-reduction-2B_sweep.csv").exists()
    assert (tmp_path / "freq-reduction-5B_sweep.csv").exists()
