"""Self-triggering: the next sampling interval and the adaptive open-loop penalty."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .mpc import (
    MpcProblem,
    MpcSolution,
    SolverConfig,
    build_scenario_tree,
    predicted_sets,
    solve_minmax,
)
from .sets import EmptySetError, diameter
from .uncertainty import Efss, UncertaintyModel

log = logging.getLogger(__name__)

VALUE_SLACK = 1e-9


class ControllerFault(RuntimeError):
    """The one-step problem is infeasible at a trigger."""

    def __init__(self, message: str, diagnostics: Optional[dict] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


@dataclass(frozen=True)
class TriggerConfig:
    H_max: int
    beta0: float
    beta_max: float
    xi0: float

    def __post_init__(self):
        if self.H_max < 1:
            raise ValueError("H_max must be >= 1")
        if self.beta0 < 1:
            raise ValueError("beta0 must be >= 1")
        if self.beta_max < self.beta0:
            raise ValueError("beta_max must be >= beta0")
        if self.xi0 <= 0:
            raise ValueError("xi0 must be positive")

    def check_horizon(self, N: int):
        if self.H_max > N:
            raise ValueError(f"H_max={self.H_max} exceeds the horizon N={N}")


@dataclass(frozen=True)
class TriggerDecision:
    H_star: int
    beta: float
    solutions: dict = field(default_factory=dict)

    @property
    def solution(self) -> MpcSolution:
        return self.solutions[self.H_star]

    @property
    def open_inputs(self) -> np.ndarray:
        return self.solution.open_inputs[:self.H_star]


def update_beta(efss: Efss, cfg: TriggerConfig) -> float:
    """``min(xi0 / xi * beta0, beta_max)`` with ``xi`` the EFSS diameter."""
    xi = diameter(efss.set)
    if xi <= 0:
        return cfg.beta_max
    return float(min(cfg.xi0 / xi * cfg.beta0, cfg.beta_max))


def compute_trigger(x, efss: Efss, beta: float, problem: MpcProblem, cfg: TriggerConfig,
                    solver: SolverConfig = SolverConfig(), *,
                    model: Optional[UncertaintyModel] = None,
                    warm_starts: Sequence = ()) -> TriggerDecision:
    """Solve for every ``H`` up to ``H_max`` and keep the longest admissible one.

    ``H`` is admissible when its problem is feasible and its value does not
    exceed the one-step value.  Each solve is warm-started from the previous
    ``H``.  Raises ControllerFault when the one-step problem is infeasible.
    """
    cfg.check_horizon(problem.N)
    seq = predicted_sets(efss, problem.N, model)
    tree = build_scenario_tree(seq, problem.plant.d_set, problem.N, solver.branch_depth)
    solutions: dict[int, MpcSolution] = {}
    starts = list(warm_starts)
    for H in range(1, cfg.H_max + 1):
        sol = solve_minmax(problem, x, seq, beta, H, solver, tree=tree, warm_starts=starts)
        solutions[H] = sol
        starts = [sol.warm_start(), *warm_starts]
    one = solutions[1]
    if not one.feasible:
        raise ControllerFault(
            f"one-step problem infeasible at x={np.asarray(x).tolist()}",
            {"x": np.asarray(x).tolist(), "beta": beta, "margins": one.margins,
             "value": one.value, "efss_hull": _hull_or_none(efss)})
    best = 1
    for H, sol in solutions.items():
        if sol.feasible and sol.value <= one.value + VALUE_SLACK:
            best = max(best, H)
    return TriggerDecision(best, float(beta), solutions)


def _hull_or_none(efss):
    try:
        h = efss.hull()
        return [h.lower.tolist(), h.upper.tolist()]
    except (EmptySetError, AttributeError):
        return None
