"""Markov chain tests: transition probabilities, block-matrix assembly,
steady-state solve, and degenerate-parameter behavior."""

import numpy as np
import pytest

import fsorf.markov as markov
from fsorf import (ChainParams, NumericError, ValidationError, build_matrix,
                   solve_chain, state_index, state_of, steady_state,
                   transition_probs)
from fsorf.markov import mean_buffer_occupancy


def random_params(rng, b_max=4, omr_max=3):
    pf = float(rng.uniform(0.0, 1.0))
    pr = float(rng.uniform(0.0, 1.0 - pf))
    return ChainParams(
        omega=float(rng.uniform(0.0, 1.0)),
        p_fso=pf, p_rf=pr,
        buffer_size=int(rng.integers(1, b_max + 1)),
        omega_ratio=int(rng.integers(1, omr_max + 1)),
    )


class TestTransitionProbs:
    def test_hand_example(self):
        t = transition_probs(ChainParams(0.7, 0.1, 0.3, 2, 2))
        assert t.u0 == pytest.approx(0.37, abs=1e-15)
        assert t.f == pytest.approx(0.42, abs=1e-15)
        assert t.u == pytest.approx(0.25, abs=1e-15)
        assert t.u_b == pytest.approx(0.67, abs=1e-15)
        assert t.v1 == pytest.approx(0.03, abs=1e-15)
        assert t.v2 == pytest.approx(0.21, abs=1e-15)
        assert t.v3 == pytest.approx(0.09, abs=1e-15)
        assert t.v4 == pytest.approx(0.30, abs=1e-15)

    def test_no_arrivals(self):
        t = transition_probs(ChainParams(0.0, 0.3, 0.3, 2, 2))
        assert t.u0 == 1.0 and t.f == 0.0 and t.v2 == 0.0

    def test_perfect_fso(self):
        t = transition_probs(ChainParams(0.6, 1.0, 0.0, 2, 2))
        assert t.f == 0.0
        assert t.v1 == pytest.approx(0.4, abs=1e-15)
        assert t.u0 == 1.0

    def test_column_sum_identities(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            p = random_params(rng)
            t = transition_probs(p)
            assert t.u0 + t.f + t.v2 == pytest.approx(1.0, abs=1e-12)
            assert t.u + t.v3 + t.f + t.v2 + t.v1 == pytest.approx(1.0, abs=1e-12)
            assert t.u_b + t.v4 + t.v1 == pytest.approx(1.0, abs=1e-12)

    def test_rejects_overlapping_service(self):
        with pytest.raises(ValidationError):
            ChainParams(0.5, 0.7, 0.4, 2, 2)

    def test_rejects_fractional_omega_ratio(self):
        with pytest.raises(ValidationError):
            ChainParams(0.5, 0.2, 0.2, 2, 1.5)


class TestStateIndexing:
    def test_bijection(self):
        for omr in (1, 2, 4):
            for b in (1, 3):
                seen = set()
                for i in range(b + 1):
                    for j in range(omr if i > 0 else 1):
                        k = state_index(i, j, omr)
                        assert state_of(k, omr) == (i, j)
                        seen.add(k)
                assert seen == set(range(omr * b + 1))

    def test_rejects_j_at_empty(self):
        with pytest.raises(ValidationError):
            state_index(0, 1, 2)


class TestBuildMatrix:
    def test_three_state_hand_assembly(self):
        # B=1, Omega=2 with (omega, p_fso, p_rf) = (0.7, 0.1, 0.3)
        mat = build_matrix(ChainParams(0.7, 0.1, 0.3, 1, 2))
        expected = np.array([
            [0.37, 0.03, 0.30],
            [0.42, 0.67, 0.70],
            [0.21, 0.30, 0.00],
        ])
        assert np.allclose(mat, expected, atol=1e-15)

    def test_column_stochastic_random(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            mat = build_matrix(random_params(rng))
            assert np.allclose(mat.sum(axis=0), 1.0, atol=1e-12)
            assert np.all(mat >= 0.0)

    def test_smallest_chain(self):
        # B=1, Omega=1 collapses to a two-state birth-death chain
        mat = build_matrix(ChainParams(0.5, 0.2, 0.3, 1, 1))
        ps = 0.5
        expected = np.array([
            [1 - 0.5 + 0.5 * ps, (1 - 0.5) * ps],
            [0.5 * (1 - ps), 1 - (1 - 0.5) * ps],
        ])
        assert np.allclose(mat, expected, atol=1e-15)


class TestSteadyState:
    def test_hand_solved_three_state(self):
        sol = solve_chain(ChainParams(0.7, 0.1, 0.3, 1, 2))
        expected = np.array([400.0, 1890.0, 651.0]) / 2941.0
        assert np.max(np.abs(sol.steady - expected)) < 1e-10

    def test_no_arrivals_point_mass(self):
        sol = solve_chain(ChainParams(0.0, 0.2, 0.3, 3, 2))
        assert sol.steady[0] == 1.0 and np.all(sol.steady[1:] == 0.0)

    def test_perfect_fso_point_mass(self):
        sol = solve_chain(ChainParams(0.8, 1.0, 0.0, 3, 2))
        assert sol.steady[0] == 1.0

    def test_residual_and_normalization(self):
        rng = np.random.default_rng(13)
        for _ in range(100):
            p = random_params(rng, b_max=6, omr_max=4)
            sol = solve_chain(p)
            s = sol.steady
            assert np.all(s >= 0.0)
            assert s.sum() == pytest.approx(1.0, abs=1e-12)
            assert np.max(np.abs(sol.matrix @ s - s)) <= 1e-10

    def test_birth_death_recursion_oracle(self):
        # Omega=1: s_i proportional to r^i with r = w(1-P)/((1-w)P), P = p_fso+p_rf
        for om, pf, pr, b in [(0.3, 0.4, 0.2, 3), (0.6, 0.1, 0.3, 2), (0.45, 0.5, 0.0, 3)]:
            sol = solve_chain(ChainParams(om, pf, pr, b, 1))
            ps = pf + pr
            r = om * (1 - ps) / ((1 - om) * ps)
            expected = np.array([r ** i for i in range(b + 1)])
            expected /= expected.sum()
            assert np.allclose(sol.steady, expected, atol=1e-12)

    def test_saturating_chain(self):
        # no service at all: everything piles up at (B, 0)
        sol = solve_chain(ChainParams(1.0, 0.0, 0.0, 4, 2))
        expected = np.zeros(9)
        expected[state_index(4, 0, 2)] = 1.0
        assert np.allclose(sol.steady, expected, atol=1e-12)

    def test_mean_occupancy_monotone_in_omega(self):
        prev = -1.0
        for om in np.linspace(0.0, 1.0, 21):
            sol = solve_chain(ChainParams(float(om), 0.1, 0.3, 5, 3))
            qa = mean_buffer_occupancy(sol)
            assert qa >= prev - 1e-12
            prev = qa

    def test_power_iteration_matches_dense(self, monkeypatch):
        p = ChainParams(0.6, 0.2, 0.3, 5, 3)
        mat = build_matrix(p)
        dense = steady_state(mat)
        monkeypatch.setattr(markov, "DENSE_SOLVE_LIMIT", 2)
        power = steady_state(mat)
        assert np.max(np.abs(dense - power)) < 1e-9

    def test_reducible_chain_reported(self):
        # two disjoint 2-cycles: stationary distribution is not unique
        mat = np.array([
            [0.0, 1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 1.0, 0.0],
        ])
        with pytest.raises(NumericError):
            steady_state(mat)

    def test_rejects_non_stochastic(self):
        with pytest.raises(ValidationError):
            steady_state(np.array([[0.5, 0.2], [0.2, 0.5]]))
