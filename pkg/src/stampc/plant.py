"""Plant description ``x+ = f(x, u) + g(x, u) v + d`` and terminal ingredients."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .sets import IntervalBox, IntervalMatrix, Zonotope


@dataclass(frozen=True)
class PlantModel:
    """Control-affine-in-uncertainty plant.

    ``f(x, u)`` and ``g(x, u)`` must broadcast over leading batch axes:
    ``x[..., n_x]`` and ``u[..., n_u]`` map to ``[..., n_x]`` and
    ``[..., n_x, n_v]``.  ``jac_x_f(box, u)`` returns an IntervalMatrix
    enclosing df/dx over the box; ``jac_x_g(box, u)`` returns one
    IntervalMatrix per column of g.
    """

    n_x: int
    n_u: int
    n_v: int
    f: Callable[[np.ndarray, np.ndarray], np.ndarray]
    g: Callable[[np.ndarray, np.ndarray], np.ndarray]
    jac_x_f: Callable[[IntervalBox, np.ndarray], IntervalMatrix]
    jac_x_g: Callable[[IntervalBox, np.ndarray], Sequence[IntervalMatrix]]
    state_box: IntervalBox
    input_box: IntervalBox
    d_set: Zonotope
    v_prior: Zonotope
    name: str = "plant"
    strict_origin: bool = True

    def __post_init__(self):
        if self.state_box.dim != self.n_x or self.input_box.dim != self.n_u:
            raise ValueError("constraint boxes disagree with plant dimensions")
        if self.d_set.dim != self.n_x or self.v_prior.dim != self.n_v:
            raise ValueError("D or V has the wrong dimension")
        for box, what in ((self.state_box, "X"), (self.input_box, "U")):
            if np.any(box.lower > 0) or np.any(box.upper < 0):
                raise ValueError(f"{what} must contain the origin")
        f0 = self.f(np.zeros(self.n_x), np.zeros(self.n_u))
        g0 = self.g(np.zeros(self.n_x), np.zeros(self.n_u))
        if np.abs(f0).max() > 1e-12 or np.abs(g0).max() > 1e-12:
            msg = f"{self.name}: nonzero at the origin (f(0,0)={f0}, g(0,0)={np.ravel(g0)})"
            if self.strict_origin:
                raise ValueError(msg)
            warnings.warn(msg, RuntimeWarning, stacklevel=3)

    def step(self, x, u, v, d) -> np.ndarray:
        """``F(x, u, v, d)``; broadcasts over leading axes."""
        x = np.asarray(x, float)
        u = np.asarray(u, float)
        G = self.g(x, u)
        return self.f(x, u) + np.einsum("...ij,...j->...i", G, np.asarray(v, float)) + d

    def jac_x(self, box: IntervalBox, u, v_box: IntervalBox) -> IntervalMatrix:
        """Enclosure of dF/dx over ``box`` for ``v`` in ``v_box``."""
        J = self.jac_x_f(box, u)
        for j, Jg in enumerate(self.jac_x_g(box, u)):
            J = J + Jg.scale(v_box.lower[j], v_box.upper[j])
        return J


@dataclass(frozen=True)
class TerminalIngredients:
    """Terminal cost ``x' P x``, set ``{x' P x <= level}`` and gain ``kappa_f(x) = K x``."""

    P: np.ndarray
    level: float
    k_gain: np.ndarray

    def __post_init__(self):
        P = np.array(self.P, dtype=float)
        K = np.atleast_2d(np.array(self.k_gain, dtype=float))
        if P.shape[0] != P.shape[1] or not np.allclose(P, P.T):
            raise ValueError("P must be symmetric")
        if np.linalg.eigvalsh(P).min() <= 0:
            raise ValueError("P must be positive definite")
        if self.level <= 0:
            raise ValueError("terminal level must be positive")
        if K.shape[1] != P.shape[0]:
            raise ValueError("k_gain has the wrong number of columns")
        P.setflags(write=False)
        K.setflags(write=False)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "k_gain", K)

    def kappa(self, x) -> np.ndarray:
        return np.asarray(x, float) @ self.k_gain.T

    def cost(self, x) -> np.ndarray:
        x = np.asarray(x, float)
        return np.einsum("...i,ij,...j->...", x, self.P, x)

    def contains(self, x, tol: float = 1e-9):
        return self.cost(x) <= self.level + tol

    def state_extent(self) -> np.ndarray:
        """Half-widths of the terminal ellipsoid along each axis."""
        return np.sqrt(np.diag(np.linalg.inv(self.P)) * self.level)

    def inside_box(self, box: IntervalBox) -> bool:
        r = self.state_extent()
        return bool(np.all(-r >= box.lower - 1e-12) and np.all(r <= box.upper + 1e-12))


def linear_plant(A, B, Gv=None, *, state_box: IntervalBox, input_box: IntervalBox,
                 d_set: Zonotope, v_prior: Zonotope | None = None) -> PlantModel:
    """``x+ = A x + B u + Gv v + d`` with constant ``Gv`` (zero by default)."""
    A = np.atleast_2d(np.asarray(A, float))
    B = np.atleast_2d(np.asarray(B, float))
    n_x, n_u = B.shape
    if Gv is None:
        Gv = np.zeros((n_x, 1))
    Gv = np.atleast_2d(np.asarray(Gv, float))
    n_v = Gv.shape[1]
    if v_prior is None:
        v_prior = Zonotope(np.zeros(n_v), np.eye(n_v))

    def f(x, u):
        return np.asarray(x, float) @ A.T + np.asarray(u, float) @ B.T

    def g(x, u):
        shape = np.broadcast_shapes(np.shape(x)[:-1], np.shape(u)[:-1])
        return np.broadcast_to(Gv, shape + Gv.shape)

    return PlantModel(
        n_x=n_x, n_u=n_u, n_v=n_v, f=f, g=g,
        jac_x_f=lambda box, u: IntervalMatrix.point(A),
        jac_x_g=lambda box, u: [IntervalMatrix.point(np.zeros((n_x, n_x)))] * n_v,
        state_box=state_box, input_box=input_box, d_set=d_set, v_prior=v_prior,
        name="linear", strict_origin=False,
    )
