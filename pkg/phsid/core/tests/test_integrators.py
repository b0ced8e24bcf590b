import numpy as np
import scipy.linalg
from django.test import SimpleTestCase, tag

from phsid.core.exceptions import DimensionMismatchError, DivergenceError, SingularStepError
from phsid.core.integrators import (
    energy_balance_residual,
    hamiltonian,
    midpoint_output,
    output,
    scheme_output,
    simulate,
    simulate_discrete_gradient,
    simulate_euler,
)
from phsid.core.matrices import PSDMatrix, SkewSymmetricMatrix, SymmetricMatrix
from phsid.core.quadrature import left_endpoint
from phsid.core.systems import ReducedPHSystem, Scheme, Signal, TimeGrid
from phsid.core.testing import random_skew, random_system


def two_state_reduced() -> ReducedPHSystem:
    return ReducedPHSystem(
        J_t=SkewSymmetricMatrix.from_array([[0.0, 1.0], [-1.0, 0.0]]),
        R_t=PSDMatrix.from_array([[0.5, 0.0], [0.0, 0.3]]),
        B_t=[[1.0], [1.0]],
        w_hat=[1.0, 2.0],
    )


class EulerTests(SimpleTestCase):
    def test_single_step_by_hand(self):
        u = Signal(TimeGrid(0.1, 1), np.ones(2))
        traj = simulate_euler(two_state_reduced(), u)
        self.assertTrue(np.array_equal(traj.states[0], [1.0, 2.0]))
        self.assertTrue(np.allclose(traj.states[1], [1.25, 1.94], rtol=0, atol=1e-15))
        self.assertEqual(traj.scheme, Scheme.EULER)

    def test_uses_input_at_left_node(self):
        sys = ReducedPHSystem(
            J_t=SkewSymmetricMatrix.zeros(1),
            R_t=PSDMatrix.from_array([[0.0]]),
            B_t=[[1.0]],
            w_hat=[0.0],
        )
        u = Signal(TimeGrid(1.0, 2), [1.0, 10.0, 100.0])
        traj = simulate_euler(sys, u)
        self.assertTrue(np.array_equal(traj.states[:, 0], [0.0, 0.5, 5.5]))

    def test_output_is_b_transpose_w(self):
        u = Signal(TimeGrid(1.0, 10), np.zeros(11))
        sys = two_state_reduced()
        traj = simulate_euler(sys, u)
        y = output(sys, traj)
        self.assertEqual(y.values[0, 0], 3.0)
        self.assertTrue(np.array_equal(y.values[:, 0], traj.states.sum(axis=1)))

    def test_matches_scripted_loop(self):
        sys = two_state_reduced()
        u = Signal(TimeGrid(1.0, 1000), 1.0 + 0.1 * np.sin(np.arange(1001)))
        traj = simulate_euler(sys, u)

        M = np.array([[-0.5, 1.0], [-1.0, -0.3]])
        w = np.array([1.0, 2.0])
        for j in range(1000):
            self.assertTrue(np.allclose(traj.states[j], w, rtol=0, atol=1e-12), j)
            w = w + 0.001 * (M @ w + u.values[j, 0])
        self.assertTrue(np.allclose(traj.states[-1], w, rtol=0, atol=1e-12))

    def test_first_order_convergence(self):
        sys = two_state_reduced()
        M = np.array([[-0.5, 1.0], [-1.0, -0.3]])
        w0, b = np.array([1.0, 2.0]), np.array([1.0, 1.0])
        # constant input: w(t) = e^{Mt} w0 + M^{-1} (e^{Mt} - I) b
        E = scipy.linalg.expm(M)
        exact = E @ w0 + np.linalg.solve(M, (E - np.eye(2)) @ b)

        errors = []
        for steps in (100, 200, 400):
            u = Signal(TimeGrid(1.0, steps), np.ones(steps + 1))
            errors.append(np.linalg.norm(simulate_euler(sys, u).states[-1] - exact))
        for coarse, fine in zip(errors, errors[1:]):
            self.assertGreaterEqual(np.log2(coarse / fine), 0.9)

    def test_input_ports_must_match(self):
        u = Signal(TimeGrid(1.0, 10), np.zeros((11, 2)))
        with self.assertRaises(DimensionMismatchError):
            simulate_euler(two_state_reduced(), u)

    def test_divergence(self):
        sys = ReducedPHSystem(
            J_t=SkewSymmetricMatrix.zeros(2),
            R_t=SymmetricMatrix.diagonal([-1e3, -1e3]),
            B_t=[[1.0], [1.0]],
            w_hat=[1.0, 1.0],
        )
        u = Signal(TimeGrid(100.0, 1000), np.zeros(1001))
        with self.assertRaises(DivergenceError) as ctx:
            simulate_euler(sys, u)
        self.assertGreater(ctx.exception.step, 0)


class DiscreteGradientTests(SimpleTestCase):
    def test_lossless_zero_input_conserves_energy(self):
        rng = np.random.default_rng(11)
        sys = ReducedPHSystem(
            J_t=random_skew(rng, 3),
            R_t=PSDMatrix.from_array(np.zeros((3, 3))),
            B_t=np.ones((3, 1)),
            w_hat=[1.0, -2.0, 0.5],
        )
        u = Signal(TimeGrid(1.0, 1000), np.zeros(1001))
        energy = hamiltonian(sys, simulate_discrete_gradient(sys, u))
        self.assertLessEqual(np.max(np.abs(energy - energy[0])), 1e-10)

    def test_energy_never_increases_without_input(self):
        sys = two_state_reduced()
        u = Signal(TimeGrid(1.0, 1000), np.zeros(1001))
        energy = hamiltonian(sys, simulate_discrete_gradient(sys, u))
        self.assertLessEqual(np.max(np.diff(energy)), 1e-12)
        self.assertLess(energy[-1], energy[0])

    def test_scheme_dispatch(self):
        u = Signal(TimeGrid(1.0, 10), np.ones(11))
        sys = two_state_reduced()
        self.assertEqual(simulate(sys, u, Scheme.MIDPOINT).scheme, Scheme.MIDPOINT)
        self.assertEqual(simulate(sys, u).scheme, Scheme.EULER)

    def test_midpoint_output(self):
        u = Signal(TimeGrid(1.0, 10), np.ones(11))
        sys = two_state_reduced()
        traj = simulate_discrete_gradient(sys, u)
        y = midpoint_output(sys, traj).values[:, 0]
        self.assertEqual(y[0], 3.0)
        expected = (traj.states[:-1] + traj.states[1:]).sum(axis=1) / 2
        self.assertTrue(np.allclose(y[1:], expected, rtol=0, atol=1e-15))
        self.assertTrue(np.array_equal(scheme_output(sys, traj).values[:, 0], y))

    def test_singular_step(self):
        sys = ReducedPHSystem(
            J_t=SkewSymmetricMatrix.zeros(2),
            R_t=SymmetricMatrix.diagonal([-4.0, -4.0]),
            B_t=[[1.0], [1.0]],
            w_hat=[1.0, 1.0],
        )
        u = Signal(TimeGrid(1.0, 2), np.zeros(3))
        with self.assertRaises(SingularStepError):
            simulate_discrete_gradient(sys, u)

    def test_balance_residual_needs_matching_grid(self):
        sys = two_state_reduced()
        traj = simulate_discrete_gradient(sys, Signal(TimeGrid(1.0, 10), np.ones(11)))
        with self.assertRaises(DimensionMismatchError):
            energy_balance_residual(sys, traj, Signal(TimeGrid(2.0, 10), np.ones(11)))


@tag("acceptance")
class EnergyBalanceTests(SimpleTestCase):
    def test_discrete_balance_holds_on_random_systems(self):
        rng = np.random.default_rng(7)
        grid = TimeGrid(1.0, 1000)
        for trial in range(20):
            n, k = int(rng.integers(2, 6)), int(rng.integers(1, 3))
            sys = random_system(rng, n, k, with_q=bool(trial % 2))
            u = Signal(grid, 1.0 + 0.1 * rng.standard_normal((grid.steps + 1, k)))
            residual = energy_balance_residual(sys, simulate_discrete_gradient(sys, u), u)
            with self.subTest(trial=trial):
                self.assertLessEqual(np.max(np.abs(residual)), 1e-10)

    def test_euler_does_not_balance_exactly(self):
        sys = two_state_reduced()
        u = Signal(TimeGrid(1.0, 100), np.ones(101))
        residual = energy_balance_residual(sys, simulate_euler(sys, u), u)
        self.assertGreater(np.max(np.abs(residual)), 1e-8)


class QuadratureTests(SimpleTestCase):
    def test_left_endpoint_skips_last_node(self):
        grid = TimeGrid(1.0, 4)
        self.assertEqual(left_endpoint(grid, [1.0, 1.0, 1.0, 1.0, 1e6]), 1.0)

    def test_integrand_length(self):
        with self.assertRaises(DimensionMismatchError):
            left_endpoint(TimeGrid(1.0, 4), np.ones(4))
