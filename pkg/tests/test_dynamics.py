import numpy as np
import pytest

from linkgames import (
    AdversaryAction,
    DesignerAction,
    InvalidMatrixError,
    ScheduleError,
    SwitchingSchedule,
    WeightFunction,
    WeightedGraph,
    costate,
    matrix_exponential_action,
    simulate,
    system_matrix,
    utility,
)
from linkgames.graph import NO_ATTACK, NO_BOOST, break_all

from conftest import random_connected_graph, seeded_rng

K1 = WeightFunction.constant()


def expm_series(A, t, x, tol=1e-18):
    """Independent oracle: truncated Taylor series of e^{At} x summed to
    machine precision."""
    term = np.asarray(x, dtype=float).copy()
    total = term.copy()
    k = 0
    while np.max(np.abs(term)) > tol * max(1.0, np.max(np.abs(total))):
        k += 1
        term = (t / k) * (A @ term)
        total += term
        assert k < 200
    return total


class TestMatrixExponentialAction:
    def test_zero_matrix_and_zero_time(self):
        x = np.array([1.0, -2.0, 0.5])
        assert np.array_equal(matrix_exponential_action(np.zeros((3, 3)), 1.0, x), x)
        A = np.array([[-1.0, 1.0], [1.0, -1.0]])
        out = matrix_exponential_action(A, 0.0, np.array([2.0, 0.0]))
        assert np.allclose(out, [2.0, 0.0], atol=1e-15)

    def test_two_node_closed_form_and_series_oracle(self):
        a = 0.8
        A = np.array([[-a, a], [a, -a]])
        x = np.array([1.0, 0.0])
        for t in (0.1, 0.7, 2.3):
            got = matrix_exponential_action(A, t, x)
            closed = np.array(
                [0.5 * (1 + np.exp(-2 * a * t)), 0.5 * (1 - np.exp(-2 * a * t))]
            )
            assert np.allclose(got, closed, atol=1e-14)
            assert np.allclose(got, expm_series(A, t, x), atol=1e-13)

    def test_random_against_series_oracle(self):
        rng = seeded_rng(5)
        for _ in range(25):
            n = int(rng.integers(2, 6))
            g = random_connected_graph(rng, n)
            A = system_matrix(g, NO_ATTACK, NO_BOOST)
            x = rng.normal(size=n)
            t = float(rng.uniform(0.0, 2.0))
            assert np.allclose(
                matrix_exponential_action(A, t, x), expm_series(A, t, x), atol=1e-12
            )

    def test_long_time_reaches_the_mean(self):
        rng = seeded_rng(6)
        for _ in range(10):
            n = int(rng.integers(2, 6))
            g = random_connected_graph(rng, n)
            A = system_matrix(g, NO_ATTACK, NO_BOOST)
            lam = np.linalg.eigvalsh(A)
            t = 1e3 / abs(lam[-2])
            x = rng.uniform(-2, 2, size=n)
            out = matrix_exponential_action(A, t, x)
            assert np.allclose(out, np.full(n, x.mean()), atol=1e-6)

    def test_rejects_non_symmetric(self):
        A = np.array([[0.0, 1.0], [0.0, 0.0]])
        with pytest.raises(InvalidMatrixError):
            matrix_exponential_action(A, 1.0, np.array([1.0, 0.0]))

    def test_doubly_stochastic_propagator(self):
        rng = seeded_rng(7)
        for _ in range(20):
            n = int(rng.integers(2, 6))
            g = random_connected_graph(rng, n)
            A = system_matrix(g, NO_ATTACK, NO_BOOST)
            t = float(rng.uniform(0.0, 10.0))
            P = np.column_stack(
                [matrix_exponential_action(A, t, e) for e in np.eye(n)]
            )
            assert np.allclose(P.sum(axis=0), 1.0, atol=1e-9)
            assert np.allclose(P.sum(axis=1), 1.0, atol=1e-9)
            assert np.all(P >= -1e-12)


class TestSwitchingSchedule:
    def test_dwell_violation_rejected(self):
        u, v = NO_ATTACK, NO_BOOST
        with pytest.raises(ScheduleError):
            SwitchingSchedule((0.0, 0.5, 0.6), ((u, v), (u, v)), dwell=0.2)

    def test_must_start_at_zero(self):
        with pytest.raises(ScheduleError):
            SwitchingSchedule((0.1, 0.5), ((NO_ATTACK, NO_BOOST),), dwell=0.1)

    def test_action_count_must_match(self):
        with pytest.raises(ScheduleError):
            SwitchingSchedule((0.0, 1.0), (), dwell=0.5)


class TestSimulate:
    def test_two_node_closed_form(self):
        g = WeightedGraph(2, [(0, 1, 1.2)])
        sched = SwitchingSchedule.constant(1.0, NO_ATTACK, NO_BOOST)
        traj = simulate(g, sched, (1.0, 0.0))
        for t in (0.0, 0.3, 1.0):
            expected = np.array(
                [0.5 * (1 + np.exp(-2.4 * t)), 0.5 * (1 - np.exp(-2.4 * t))]
            )
            assert np.allclose(traj.state(t), expected, atol=1e-14)

    def test_all_broken_freezes_the_state(self, triangle):
        sched = SwitchingSchedule.constant(2.0, break_all(triangle), NO_BOOST)
        traj = simulate(triangle, sched, (1.0, 2.0, 3.0))
        for t in (0.0, 0.5, 2.0):
            assert np.array_equal(traj.state(t), np.array([1.0, 2.0, 3.0]))

    def test_average_conservation_across_breakpoints(self, triangle):
        u1 = AdversaryAction([(0, 2)], budget=1)
        v1 = DesignerAction([(1, 2)], boost=0.7, budget=1)
        sched = SwitchingSchedule(
            (0.0, 0.4, 1.0), ((NO_ATTACK, v1), (u1, NO_BOOST)), dwell=0.4
        )
        traj = simulate(triangle, sched, (1.0, 2.0, 3.0))
        for state in traj.breakpoint_states:
            assert state.sum() == pytest.approx(6.0, abs=1e-9)

    def test_state_continuous_across_breakpoints(self, triangle):
        u1 = AdversaryAction([(0, 1)], budget=1)
        sched = SwitchingSchedule(
            (0.0, 0.5, 1.0), ((NO_ATTACK, NO_BOOST), (u1, NO_BOOST)), dwell=0.5
        )
        traj = simulate(triangle, sched, (3.0, -1.0, 0.5))
        left = traj.intervals[0].state(0.5)
        right = traj.intervals[1].state(0.5)
        assert np.allclose(left, right, atol=1e-14)

    def test_semigroup_consistency(self):
        rng = seeded_rng(8)
        for _ in range(20):
            n = int(rng.integers(2, 6))
            g = random_connected_graph(rng, n)
            x0 = rng.normal(size=n)
            t1, t2 = sorted(rng.uniform(0.1, 1.5, size=2))
            if t2 - t1 < 1e-3:
                continue
            whole = simulate(g, SwitchingSchedule.constant(t2, NO_ATTACK, NO_BOOST), x0)
            split = simulate(
                g,
                SwitchingSchedule(
                    (0.0, t1, t2),
                    ((NO_ATTACK, NO_BOOST), (NO_ATTACK, NO_BOOST)),
                    dwell=min(t1, t2 - t1),
                ),
                x0,
            )
            assert np.allclose(
                whole.breakpoint_states[-1], split.breakpoint_states[-1], atol=1e-10
            )

    def test_monotone_disagreement(self):
        rng = seeded_rng(10)
        for _ in range(15):
            n = int(rng.integers(2, 6))
            g = random_connected_graph(rng, n)
            x0 = rng.normal(size=n)
            traj = simulate(g, SwitchingSchedule.constant(3.0, NO_ATTACK, NO_BOOST), x0)
            ts = np.linspace(0.0, 3.0, 60)
            norms = [traj.deviation_norm(t) for t in ts]
            assert all(b <= a + 1e-12 for a, b in zip(norms, norms[1:]))


class TestUtility:
    def test_consensus_start_scores_zero(self, triangle):
        sched = SwitchingSchedule.constant(1e-3, NO_ATTACK, NO_BOOST)
        traj = simulate(triangle, sched, (2.0, 2.0, 2.0))
        assert utility(traj, K1) == pytest.approx(0.0, abs=1e-18)

    def test_attack_first_pair_value(self, triangle):
        # u breaks the (0,2) link, v boosts (1,2) by 1: integrand 12t + O(t^2).
        u = AdversaryAction([(0, 2)], budget=1)
        v = DesignerAction([(1, 2)], boost=1.0, budget=1)
        traj = simulate(
            triangle, SwitchingSchedule.constant(1e-3, u, v), (1.0, 2.0, 3.0)
        )
        assert 5.9 <= utility(traj, K1) / 1e-6 <= 6.1

    def test_defense_first_pair_value(self, triangle):
        # u and v both target (1,2): integrand 14t + O(t^2).
        u = AdversaryAction([(1, 2)], budget=1)
        v = DesignerAction([(1, 2)], boost=1.0, budget=1)
        traj = simulate(
            triangle, SwitchingSchedule.constant(1e-3, u, v), (1.0, 2.0, 3.0)
        )
        assert 6.9 <= utility(traj, K1) / 1e-6 <= 7.1

    def test_quadrature_convergence(self):
        rng = seeded_rng(12)
        for _ in range(10):
            n = int(rng.integers(2, 6))
            g = random_connected_graph(rng, n)
            x0 = rng.normal(size=n)
            traj = simulate(g, SwitchingSchedule.constant(1.0, NO_ATTACK, NO_BOOST), x0)
            k = WeightFunction.exponential_decay(0.7)
            v32 = utility(traj, k, quad_nodes=32)
            v64 = utility(traj, k, quad_nodes=64)
            assert abs(v64 - v32) <= 1e-8 * max(abs(v64), 1e-30)

    def test_exponential_weight_matches_dense_reference(self):
        g = WeightedGraph(2, [(0, 1, 0.9)])
        x0 = (1.0, -1.0)
        T = 0.8
        alpha = 1.3
        traj = simulate(g, SwitchingSchedule.constant(T, NO_ATTACK, NO_BOOST), x0)
        got = utility(traj, WeightFunction.exponential_decay(alpha))
        # ||y(t)||^2 = 2 e^{-3.6 t}; closed-form of the weighted drop integral.
        decay = 2 * 2 * 0.9
        f = lambda t: np.exp(-alpha * t) * (2.0 - 2.0 * np.exp(-decay * t))
        ts = np.linspace(0, T, 200001)
        reference = np.trapezoid(f(ts), ts)
        assert got == pytest.approx(reference, rel=1e-8)


class TestCostate:
    def test_terminal_condition(self, triangle):
        traj = simulate(
            triangle, SwitchingSchedule.constant(1.0, NO_ATTACK, NO_BOOST), (1.0, 2.0, 3.0)
        )
        times, P = costate(traj, K1)
        assert times[-1] == pytest.approx(1.0)
        assert np.allclose(P[-1], 0.0, atol=1e-18)

    def test_consensus_start_gives_zero_costate(self, triangle):
        traj = simulate(
            triangle, SwitchingSchedule.constant(1.0, NO_ATTACK, NO_BOOST), (2.0, 2.0, 2.0)
        )
        _, P = costate(traj, K1)
        assert np.allclose(P, 0.0, atol=1e-15)

    @pytest.mark.parametrize("weight", [K1, WeightFunction.exponential_decay(2.0)])
    def test_against_backward_euler_oracle(self, weight):
        g = WeightedGraph(2, [(0, 1, 1.3)])
        x0 = (1.0, 0.2)
        T = 0.05
        traj = simulate(g, SwitchingSchedule.constant(T, NO_ATTACK, NO_BOOST), x0)
        times, P = costate(traj, weight, samples_per_interval=11)
        h = 1e-6
        A = system_matrix(g, NO_ATTACK, NO_BOOST)
        xbar = np.full(2, np.mean(x0))
        steps = int(round(T / h))
        p = np.zeros(2)
        grid_index = {round(t / h): i for i, t in enumerate(times)}
        P_euler = np.zeros_like(P)
        P_euler[grid_index[steps]] = p
        for s in range(steps, 0, -1):
            t = s * h
            x = traj.state(t)
            p = p + h * (float(weight(t)) * (x - xbar) + A @ p)
            idx = grid_index.get(s - 1)
            if idx is not None:
                P_euler[idx] = p
        assert np.max(np.abs(P - P_euler)) <= 1e-7

    def test_continuous_across_breakpoints(self, triangle):
        u1 = AdversaryAction([(0, 1)], budget=1)
        sched = SwitchingSchedule(
            (0.0, 0.5, 1.0), ((NO_ATTACK, NO_BOOST), (u1, NO_BOOST)), dwell=0.5
        )
        traj = simulate(triangle, sched, (1.0, 2.0, 3.0))
        times, P = costate(traj, K1, samples_per_interval=9)
        # one (deduplicated) grid entry per breakpoint; values finite and the
        # backward recursion hands p(t_k) across without jumps
        assert np.count_nonzero(np.isclose(times, 0.5)) == 1
        assert np.all(np.isfinite(P))

    def test_trajectory_export_grid(self, triangle):
        traj = simulate(
            triangle, SwitchingSchedule.constant(1.0, NO_ATTACK, NO_BOOST), (1.0, 2.0, 3.0)
        )
        ts, X = traj.sample(11)
        assert ts.shape == (11,)
        assert X.shape == (11, 3)
        assert np.allclose(X[0], [1.0, 2.0, 3.0])
