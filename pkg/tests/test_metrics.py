"""Metric tests: conservation identities, hand-solved values, priority
orderings and figure-shape monotonicity."""

import math

import numpy as np
import pytest

from fsorf import (ChainParams, ProtocolConfig, ProtocolMode, ValidationError,
                   avg_buffer_size, cascade_solve, efficiency, loss_prob,
                   network_metrics, node_metrics, queue_delay,
                   rf_need_and_utilization, solve_chain, throughput)

HAND_CHAIN = ChainParams(0.7, 0.1, 0.3, 1, 2)
# steady state of the hand chain: [400, 1890, 651] / 2941


def persistence(n, p):
    return ProtocolConfig(mode=ProtocolMode.P_PERSISTENCE, n_nodes=n, p=p)


class TestThroughput:
    def test_no_arrivals(self):
        assert throughput(solve_chain(ChainParams(0.0, 0.2, 0.3, 2, 2))) == 0.0

    def test_perfect_fso_conserves_everything(self):
        for om in (0.1, 0.5, 1.0):
            cas = cascade_solve(0.0, 0.22, persistence(3, 0.5), om, 10, 2)
            for ns in cas.nodes:
                m = node_metrics(ns.chain, ns.node)
                assert m.throughput == pytest.approx(om, abs=1e-12)
                assert m.loss_prob == pytest.approx(0.0, abs=1e-12)
                assert m.avg_buffer == pytest.approx(0.0, abs=1e-12)
                assert m.efficiency == pytest.approx(1.0, abs=1e-12)

    def test_hand_chain_value(self):
        # (0.7, 0.1, 0.3, B=1, Om=2): Th = (70 + 472.5 + 325.5) / 2941
        th = throughput(solve_chain(HAND_CHAIN))
        assert th == pytest.approx(868.0 / 2941.0, abs=1e-12)

    def test_matches_chain_simulation(self):
        from fsorf import SimConfig, simulate_chain
        th = throughput(solve_chain(HAND_CHAIN))
        stats = simulate_chain(HAND_CHAIN, SimConfig(seed=101, steps=10 ** 6, warmup=10 ** 4))
        emp = stats.delivered_frames[0] / stats.steps_measured
        se = math.sqrt(th * (1 - th) / stats.steps_measured)
        assert abs(emp - th) <= 5 * se


class TestBufferAndDelay:
    def test_empty_cases(self):
        assert avg_buffer_size(solve_chain(ChainParams(0.0, 0.2, 0.3, 3, 2))) == 0.0
        assert avg_buffer_size(solve_chain(ChainParams(0.7, 1.0, 0.0, 3, 2))) == 0.0

    def test_saturation_fills_buffer(self):
        sol = solve_chain(ChainParams(1.0, 0.0, 0.0, 7, 2))
        assert avg_buffer_size(sol) == pytest.approx(7.0, abs=1e-12)

    def test_hand_chain_buffer(self):
        qa = avg_buffer_size(solve_chain(HAND_CHAIN))
        assert qa == pytest.approx((1890.0 + 651.0) / 2941.0, abs=1e-12)

    def test_little_law_ratio(self):
        sol = solve_chain(HAND_CHAIN)
        assert queue_delay(avg_buffer_size(sol), throughput(sol)) == pytest.approx(
            (2541.0 / 2941.0) / (868.0 / 2941.0), abs=1e-12)

    def test_delay_undefined_at_zero_throughput(self):
        assert queue_delay(3.0, 0.0) == math.inf
        assert queue_delay(0.0, 0.5) == 0.0


class TestLossAndEfficiency:
    def test_trivial_cases(self):
        assert loss_prob(0.0, 0.0) == 0.0
        assert loss_prob(0.5, 0.5) == 0.0

    def test_clamps_numeric_noise_quietly(self):
        assert loss_prob(0.5, 0.5 + 1e-12) == 0.0

    def test_warns_beyond_noise(self):
        with pytest.warns(UserWarning):
            loss_prob(0.5, 0.6)

    def test_efficiency_bounds_and_errors(self):
        assert efficiency(0.5, 0.5) == 1.0
        assert efficiency(0.5, 0.0) == 0.0
        with pytest.raises(ValidationError):
            efficiency(0.0, 0.1)


class TestRfNeedUtilization:
    def test_all_fso_down(self):
        ne, u = rf_need_and_utilization(1.0, 0.22, 0.5, 4)
        assert ne == 1.0
        assert u == pytest.approx(0.78 * 0.5, abs=1e-15)

    def test_two_node_enumeration(self):
        # N=2, a=0.5: failure subsets {1}, {2}, {1,2} each weighted by a^k (1-a)^(N-k)
        ne, u = rf_need_and_utilization(0.5, 0.22, 0.5, 2)
        enumerated = 0.25 + 0.25 + 0.25  # exactly one of three non-empty subsets
        assert ne == pytest.approx(0.75, abs=1e-15)
        assert ne == pytest.approx(enumerated, abs=1e-15)
        assert u == pytest.approx(0.78 * 0.5 * 0.75, abs=1e-15)
        assert u == pytest.approx(0.2925, abs=1e-15)

    def test_saturation_with_n(self):
        _, u_small = rf_need_and_utilization(0.9, 0.22, 0.5, 2)
        _, u_large = rf_need_and_utilization(0.9, 0.22, 0.5, 50)
        assert u_large > u_small
        assert abs(u_large - 0.78 * 0.5) < 1e-3


class TestIdentitiesAndOrderings:
    def test_conservation_on_random_grid(self):
        rng = np.random.default_rng(23)
        for _ in range(40):
            a = float(rng.uniform(0.0, 1.0))
            b = float(rng.uniform(0.0, 1.0))
            p = float(rng.uniform(0.001, 1.0))
            om = float(rng.uniform(0.01, 1.0))
            cas = cascade_solve(a, b, persistence(3, p), om,
                                int(rng.integers(1, 8)), int(rng.integers(1, 4)))
            for ns in cas.nodes:
                m = node_metrics(ns.chain, ns.node)
                assert m.throughput + m.loss_prob == pytest.approx(om, abs=1e-12)
                assert 0.0 <= m.throughput <= om + 1e-12
                assert m.efficiency == pytest.approx(m.throughput / om, abs=1e-12)
                assert 0.0 <= m.avg_buffer <= ns.chain.params.buffer_size + 1e-12

    def test_priority_orderings(self):
        for p in (0.5, 1.0):
            for om in np.linspace(0.05, 1.0, 12):
                cas = cascade_solve(0.9, 0.22, persistence(4, p), float(om), 10, 2)
                ms = [node_metrics(ns.chain, ns.node) for ns in cas.nodes]
                ths = [m.throughput for m in ms]
                qas = [m.avg_buffer for m in ms]
                pls = [m.loss_prob for m in ms]
                assert all(x >= y - 1e-12 for x, y in zip(ths, ths[1:]))
                assert all(x <= y + 1e-12 for x, y in zip(qas, qas[1:]))
                assert all(x <= y + 1e-12 for x, y in zip(pls, pls[1:]))

    def test_loss_monotone_in_omega_ratio(self):
        for node in range(4):
            prev = -1.0
            for omr in (1, 2, 3, 4, 6, 8):
                cas = cascade_solve(0.9, 0.22, persistence(4, 0.5), 0.7, 10, omr)
                pl = node_metrics(cas.nodes[node].chain, node + 1).loss_prob
                assert pl >= prev - 1e-12
                prev = pl

    def test_equal_priority_symmetry(self):
        cfg = ProtocolConfig(mode=ProtocolMode.EQUAL_PRIORITY, n_nodes=4)
        cas = cascade_solve(0.9, 0.22, cfg, 0.6, 10, 2)
        net = network_metrics(cas, 0.9, 0.22)
        ths = [m.throughput for m in net.per_node]
        assert max(ths) - min(ths) == 0.0
        assert net.total_throughput == pytest.approx(4 * ths[0], abs=1e-12)

    def test_throughput_bound(self):
        rng = np.random.default_rng(31)
        for _ in range(30):
            p = ChainParams(float(rng.uniform(0, 1)), 0.3, 0.2,
                            int(rng.integers(1, 6)), int(rng.integers(1, 4)))
            th = throughput(solve_chain(p))
            assert th <= 0.3 + 0.2 / p.omega_ratio + 1.0 / p.omega_ratio + 1e-12
