"""Cart with an exponential spring and a damper, sampled at period ``T``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..mpc import MpcProblem
from ..plant import PlantModel, TerminalIngredients
from ..sets import IntervalBox, IntervalMatrix, Zonotope


@dataclass(frozen=True)
class CartParams:
    mass: float = 1.0
    spring: float = 0.33
    damping: float = 1.1
    period: float = 0.4
    u_max: float = 4.5
    x1_max: float = 2.0
    x2_max: float = 10.0
    v_max: float = 0.15
    d_max: float = 0.1


def cart_step(x, u, v, d, params: CartParams = CartParams()) -> np.ndarray:
    """One step of the cart; ``u``, ``v`` and ``d`` are scalars (or broadcast)."""
    m, k, h, T = params.mass, params.spring, params.damping, params.period
    x = np.asarray(x, float)
    u, v, d = (np.asarray(a, float) for a in (u, v, d))
    x1, x2, u, v, d = np.broadcast_arrays(x[..., 0], x[..., 1], u, v, d)
    return np.stack([
        x1 + T * x2,
        -(k * T / m) * np.exp(-x1) + ((m - h * T) / m) * x2
        + (T / m) * u - (T / m) * v * x2 + (T / m) * d,
    ], axis=-1)


def cart_plant(params: CartParams = CartParams()) -> PlantModel:
    m, k, h, T = params.mass, params.spring, params.damping, params.period

    def f(x, u):
        x = np.asarray(x, float)
        u = np.asarray(u, float)
        x1, x2 = x[..., 0], x[..., 1]
        return np.stack([x1 + T * x2,
                         -(k * T / m) * np.exp(-x1) + ((m - h * T) / m) * x2
                         + (T / m) * u[..., 0]], axis=-1)

    def g(x, u):
        x = np.asarray(x, float)
        x2 = x[..., 1]
        out = np.zeros(np.broadcast_shapes(x.shape[:-1], np.shape(u)[:-1]) + (2, 1))
        out[..., 1, 0] = -(T / m) * x2
        return out

    def jac_f(box: IntervalBox, u):
        e_lo, e_hi = np.exp(-box.upper[0]), np.exp(-box.lower[0])
        lo = np.array([[1.0, T], [(k * T / m) * e_lo, (m - h * T) / m]])
        hi = np.array([[1.0, T], [(k * T / m) * e_hi, (m - h * T) / m]])
        return IntervalMatrix.from_bounds(lo, hi)

    def jac_g(box: IntervalBox, u):
        return [IntervalMatrix.point([[0.0, 0.0], [0.0, -T / m]])]

    return PlantModel(
        n_x=2, n_u=1, n_v=1, f=f, g=g, jac_x_f=jac_f, jac_x_g=jac_g,
        state_box=IntervalBox([-params.x1_max, -params.x2_max], [params.x1_max, params.x2_max]),
        input_box=IntervalBox([-params.u_max], [params.u_max]),
        d_set=Zonotope(np.zeros(2), [[0.0], [(T / m) * params.d_max]]),
        v_prior=Zonotope([0.0], [[params.v_max]]),
        name="cart", strict_origin=False,
    )


CART_P = np.array([[4.5678, 3.2018], [3.2018, 4.3500]])
CART_LEVEL = 3.8
CART_K = np.array([[-0.7797, -1.1029]])
CART_Q = np.diag([0.64, 0.64])
CART_R = np.array([[1.0]])


def cart_terminal() -> TerminalIngredients:
    return TerminalIngredients(CART_P, CART_LEVEL, CART_K)


def cart_problem(params: CartParams = CartParams(), N: int = 6) -> MpcProblem:
    return MpcProblem(cart_plant(params), cart_terminal(), CART_Q, CART_R, N)
