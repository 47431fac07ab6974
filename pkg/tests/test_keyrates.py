"""Key-rate estimators, protocol formulas, and round simulation tests."""

import itertools

import numpy as np
import pytest

from graphqcka import networks
from graphqcka.keyrates import (RoleAssignment, RoundBatch, akr_2, akr_n,
                                analytic_estimates, binary_entropy,
                                error_estimates, estimate_qber, estimate_qx,
                                outcome_distribution, pairwise_conference_rate,
                                pairwise_error, simulate_protocol, xor_combine)
from graphqcka.noise import NoiseModel, apply_noise
from graphqcka.routing import compile_round_settings


def batch(counts, participants=None):
    parts = participants or tuple(range(len(next(iter(counts)))))
    return RoundBatch(None, tuple(parts), dict(counts))


class TestRoles:
    def test_disjointness(self):
        with pytest.raises(ValueError):
            RoleAssignment(alice=0, bobs=(0, 1))
        with pytest.raises(ValueError):
            RoleAssignment(alice=0, bobs=())
        ra = RoleAssignment(alice=2, bobs=(0, 5), nonparticipants=(3,))
        assert ra.participants == (0, 2, 5)


class TestBinaryEntropy:
    def test_endpoints_and_peak(self):
        assert binary_entropy(0.0) == 0.0
        assert binary_entropy(1.0) == 0.0
        assert binary_entropy(0.5) == pytest.approx(1.0)

    def test_pinned_value(self):
        assert binary_entropy(0.11) == pytest.approx(0.499915958164528, abs=1e-12)

    def test_symmetry_and_domain(self):
        for x in (0.01, 0.2, 0.37):
            assert binary_entropy(x) == pytest.approx(binary_entropy(1 - x))
        with pytest.raises(ValueError):
            binary_entropy(-0.1)
        with pytest.raises(ValueError):
            binary_entropy(1.1)


class TestErrorEstimators:
    def test_pairwise_error_examples(self):
        b = batch({"0000": 50, "1111": 50})
        assert pairwise_error(b, 0, 3) == 0.0
        b = batch({"00": 45, "11": 45, "01": 5, "10": 5})
        assert pairwise_error(b, 0, 1) == pytest.approx(0.10)
        assert pairwise_error(batch({"01": 100}), 0, 1) == 1.0
        with pytest.raises(ValueError):
            pairwise_error(b, 1, 1)
        with pytest.raises(ValueError):
            pairwise_error(batch({"00": 0}), 0, 1)

    def test_qber_alice_minimax(self):
        # participant 2 is noisy: choosing it as Alice would be worst for all
        counts = {}
        for s, c in (("000", 90), ("111", 90), ("001", 10), ("110", 10)):
            counts[s] = counts.get(s, 0) + c
        est = estimate_qber(batch(counts))
        assert est.alice_choice in (0, 1)
        assert est.qber == pytest.approx(0.1)
        # every other choice of Alice is at least as bad
        parts = (0, 1, 2)
        for alice in parts:
            worst = max(est.pairwise_q[(alice, b)] for b in parts if b != alice)
            assert worst >= est.qber - 1e-12

    def test_qber_tie_breaks_lowest_label(self):
        est = estimate_qber(batch({"00": 50, "11": 50}, participants=(3, 7)))
        assert est.qber == 0.0
        assert est.alice_choice == 3

    def test_qber_two_participants(self):
        est = estimate_qber(batch({"00": 45, "11": 45, "01": 10}))
        assert est.qber == pytest.approx(0.1)

    def test_qx_examples(self):
        assert estimate_qx(batch({"0000": 60, "1100": 40})) == 0.0
        assert estimate_qx(batch({"00": 90, "01": 10})) == pytest.approx(0.1)
        assert estimate_qx(batch({"0": 50, "1": 50})) == pytest.approx(0.5)

    def test_error_estimates_combines_batches(self):
        t1 = batch({"00": 98, "01": 2})
        t2 = batch({"00": 95, "10": 5})
        est = error_estimates(t1, t2)
        assert est.qber == pytest.approx(0.02)
        assert est.qx == pytest.approx(0.05)


class TestRateFormulas:
    def test_akr_n_values(self):
        assert akr_n(0.0, 0.0) == pytest.approx(1.0)
        assert akr_n(0.5, 0.5) == pytest.approx(-1.0)
        assert akr_n(0.02, 0.05) == pytest.approx(0.572162500342223, abs=1e-12)

    def test_akr_n_monotone_and_symmetric(self):
        grid = np.linspace(0.0, 0.3, 7)
        for qx in (0.0, 0.1):
            vals = [akr_n(q, qx) for q in grid]
            assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))
        assert akr_n(0.07, 0.21) == pytest.approx(akr_n(0.21, 0.07))
        with pytest.raises(ValueError):
            akr_n(1.5, 0.0)

    def test_akr_2_values(self):
        assert akr_2(1.0, 1.0, 1.0) == pytest.approx(0.5)
        assert akr_2(1.0, 1.0, 0.5) == pytest.approx(1 / 3)
        assert akr_2(0.5, 1.0, 1.0) == pytest.approx(1 / 3)
        assert akr_2(1.0, 0.5, 1.0) == pytest.approx(akr_2(0.5, 1.0, 1.0))
        assert akr_2(0.0, 1.0, 1.0) == 0.0
        assert akr_2(1.0, 1.0, -0.2) == 0.0

    def test_pairwise_conference_rate_generalizes(self):
        assert pairwise_conference_rate([[1.0], [1.0]]) == pytest.approx(0.5)
        assert pairwise_conference_rate([[1.0, 1.0], [0.5]]) == pytest.approx(1 / 3)
        assert pairwise_conference_rate([[1.0], [0.0]]) == 0.0


class TestXorCombine:
    def test_matches_brute_force(self):
        keys = ["0110", "1011", "0001"]
        links = [(0, 1), (1, 2), (2, 3)]
        rec = xor_combine(keys, links, reference=0)
        assert set(rec) == {0, 1, 2, 3}
        assert all(v == keys[0] for v in rec.values())

    def test_star_topology(self):
        keys = ["10", "01", "11"]
        rec = xor_combine(keys, [(0, 1), (0, 2), (0, 3)], reference=0)
        assert all(v == keys[0] for v in rec.values())

    def test_validation(self):
        with pytest.raises(ValueError):
            xor_combine(["01"], [(0, 1), (1, 2)], 0)
        with pytest.raises(ValueError):
            xor_combine(["01", "011"], [(0, 1), (1, 2)], 0)
        with pytest.raises(ValueError):
            xor_combine(["01"], [(0, 1)], 5)
        with pytest.raises(ValueError):
            xor_combine(["01", "10"], [(0, 1), (2, 3)], 0)


class TestDistributions:
    def test_ghz_ideal_type1(self):
        dist = outcome_distribution(networks.ghz_plan(), "type-1")
        assert set(dist) == {"0000", "1111"}
        assert dist["0000"] == pytest.approx(0.5)

    def test_ghz_ideal_type2_even_parity(self):
        dist = outcome_distribution(networks.ghz_plan(), "type-2")
        assert all(k.count("1") % 2 == 0 for k in dist)
        assert sum(dist.values()) == pytest.approx(1.0)

    def test_bell_multicast_ideal(self):
        dist = outcome_distribution(networks.bell_multicast_plan(), "type-1")
        for key in dist:
            assert key[0] == key[1] and key[2] == key[3]

    def test_analytic_estimates_ideal(self):
        for plan in (networks.ghz_plan(), networks.bell_bridge_plan()):
            est = analytic_estimates(plan)
            assert est.qber == pytest.approx(0.0, abs=1e-12)
            assert est.qx == pytest.approx(0.0, abs=1e-12)
        # multicast pairs are only correlated within each pair
        plan = networks.bell_multicast_plan()
        s1 = compile_round_settings(plan, "type-1")
        d1 = RoundBatch(s1, plan.targets, outcome_distribution(plan, "type-1"))
        for pair in plan.pairs:
            assert pairwise_error(d1, *pair) == pytest.approx(0.0, abs=1e-12)


class TestSimulation:
    def test_deterministic_in_seed(self):
        plan = networks.ghz_plan()
        a1, a2 = simulate_protocol(plan, 2000, seed=5)
        b1, b2 = simulate_protocol(plan, 2000, seed=5)
        assert a1.counts == b1.counts and a2.counts == b2.counts
        c1, _ = simulate_protocol(plan, 2000, seed=6)
        assert c1.counts != a1.counts

    def test_round_split(self):
        t1, t2 = simulate_protocol(networks.ghz_plan(), 1000, seed=0,
                                   type2_fraction=0.25)
        assert t1.total == 750 and t2.total == 250
        with pytest.raises(ValueError):
            simulate_protocol(networks.ghz_plan(), 100, 0, type2_fraction=1.0)
        with pytest.raises(ValueError):
            simulate_protocol(networks.ghz_plan(), 0, 0)

    def test_depolarized_qber_within_three_sigma(self):
        plan = networks.ghz_plan()
        model = NoiseModel(depolarizing={v: 0.04 for v in range(6)})
        from graphqcka.graphstate import to_dense
        rho = apply_noise(to_dense(networks.six_vertex_network_state()),
                          range(6), model).matrix
        exact = analytic_estimates(plan, rho)
        n = 40000
        t1, t2 = simulate_protocol(plan, 2 * n, seed=12, state=rho)
        est = error_estimates(t1, t2)
        sigma_q = np.sqrt(exact.qber * (1 - exact.qber) / n)
        sigma_x = np.sqrt(exact.qx * (1 - exact.qx) / n)
        assert abs(est.qber - exact.qber) < 3 * sigma_q
        assert abs(est.qx - exact.qx) < 3 * sigma_x

    def test_marginal(self):
        b = batch({"000": 40, "011": 30, "110": 30})
        m = b.marginal((0, 2))
        assert m.counts == {"00": 40, "01": 30, "10": 30}
