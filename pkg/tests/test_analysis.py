"""Report assembly from simulated round batches."""

import pytest

from graphqcka import networks
from graphqcka.analysis import build_report, pairwise_rates
from graphqcka.keyrates import simulate_protocol


def ideal_batches(rounds=4000, seed=3):
    batches = {}
    ghz = networks.ghz_plan()
    bells = [networks.bell_multicast_plan(), networks.bell_bridge_plan()]
    b1, b2 = simulate_protocol(ghz, rounds, seed)
    batches["nqkd/type-1"], batches["nqkd/type-2"] = b1, b2
    for k, plan in enumerate(bells):
        b1, b2 = simulate_protocol(plan, rounds, seed + 1 + k)
        batches[f"bell{k}/type-1"], batches[f"bell{k}/type-2"] = b1, b2
    return ghz, bells, batches


class TestPairwiseRates:
    def test_ideal_links_at_unit_rate(self):
        _, bells, batches = ideal_batches()
        rates, rate2 = pairwise_rates(bells, batches)
        assert set(rates) == {"1-2", "5-6", "2-5"}
        for r in rates.values():
            assert r == pytest.approx(1.0)
        assert rate2 == pytest.approx(0.5)


class TestBuildReport:
    def test_full_report_ideal(self):
        ghz, bells, batches = ideal_batches()
        report = build_report(ghz, bells, batches, mc_samples=200, mc_seed=1)
        assert report.akr_n == pytest.approx(1.0)
        assert report.akr_2 == pytest.approx(0.5)
        assert report.ratio == pytest.approx(2.0)
        assert report.copies_per_bit == {"nqkd": 1, "2qkd": 2}
        assert set(report.uncertainties) == {"qber", "qx", "akr_n", "akr_2",
                                             "ratio"}
        # ideal data has no statistical spread
        assert report.uncertainties["akr_n"] == pytest.approx(0.0, abs=1e-12)

    def test_nqkd_only(self):
        ghz, _, batches = ideal_batches()
        only = {k: v for k, v in batches.items() if k.startswith("nqkd")}
        report = build_report(ghz, [], only, mc_samples=50)
        assert report.akr_n == pytest.approx(1.0)
        assert report.ratio is None
        assert report.pairwise_rates == {}
        assert "akr_2" not in report.uncertainties

    def test_2qkd_only(self):
        _, bells, batches = ideal_batches()
        only = {k: v for k, v in batches.items() if k.startswith("bell")}
        report = build_report(None, bells, only, mc_samples=50)
        assert report.akr_2 == pytest.approx(0.5)
        assert report.ratio is None
        assert report.alice_choice is None

    def test_mc_disabled(self):
        ghz, bells, batches = ideal_batches()
        report = build_report(ghz, bells, batches, mc_samples=0)
        assert report.uncertainties == {}
