import warnings

import numpy as np
import pytest
import scipy.linalg

from stampc.mpc import MpcProblem
from stampc.plant import TerminalIngredients, linear_plant
from stampc.sets import IntervalBox, Zonotope
from stampc.sim.cart import cart_problem


@pytest.fixture(scope="session")
def cart_prob():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return cart_problem()


def lqr_problem(N=4, d=0.0):
    """Double integrator with DARE terminal ingredients; optional additive disturbance."""
    A = np.array([[1.0, 0.1], [0.0, 1.0]])
    B = np.array([[0.005], [0.1]])
    Q, R = np.eye(2), np.array([[1.0]])
    P = scipy.linalg.solve_discrete_are(A, B, Q, R)
    K = -np.linalg.solve(R + B.T @ P @ B, B.T @ P @ A)
    D = Zonotope([0.0, 0.0], [[0.0], [d]]) if d > 0 else Zonotope.singleton([0.0, 0.0])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        plant = linear_plant(A, B, state_box=IntervalBox([-5.0, -5.0], [5.0, 5.0]),
                             input_box=IntervalBox([-10.0], [10.0]), d_set=D,
                             v_prior=Zonotope.singleton([0.0]))
    return MpcProblem(plant, TerminalIngredients(P, 10.0, K), Q, R, N)


@pytest.fixture
def lqr():
    return lqr_problem()


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
