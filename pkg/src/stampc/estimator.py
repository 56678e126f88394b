"""Set-membership parameter estimation at triggering instants.

Between two triggers only the end-point states are measured.  The states in
between are enclosed by a reach tube, and the measurement at the later
trigger is turned into a (widened) strip of parameter values consistent with
some state of the tube.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .plant import PlantModel
from .sets import (
    EmptySetError,
    IntervalBox,
    Strip,
    Zonotope,
    interval_hull,
    intersect_strip,
    reduce_order,
    strip_box_hull,
    zonotope_inclusion,
)
from .uncertainty import Efss, UncertaintyModel, normalize_members, propagate_efss

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Measurement:
    x_prev_set: Zonotope
    x_now: np.ndarray
    u_prev: np.ndarray
    gap: int = 1

    def __post_init__(self):
        if self.gap < 1:
            raise ValueError("gap must be positive")
        if (self.gap == 1) != (self.x_prev_set.order == 0):
            raise ValueError("gap == 1 exactly when the previous state is a singleton")


@dataclass(frozen=True)
class ReachTube:
    """State enclosures for the time indices ``[t_k, t_{k+1} - 1]``."""

    sets: tuple

    def __post_init__(self):
        sets = tuple(self.sets)
        if not sets or sets[0].order != 0:
            raise ValueError("a reach tube starts at a measured (singleton) state")
        object.__setattr__(self, "sets", sets)

    def __len__(self):
        return len(self.sets)

    def __getitem__(self, i) -> Zonotope:
        return self.sets[i]


@dataclass(frozen=True)
class TriggerTrace:
    """What the estimator sees between two triggers."""

    t_prev: int
    t_now: int
    inputs: np.ndarray
    x_prev: np.ndarray
    x_now: np.ndarray

    def __post_init__(self):
        u = np.atleast_2d(np.asarray(self.inputs, float))
        if u.shape[0] != self.t_now - self.t_prev:
            if u.shape[1] == self.t_now - self.t_prev and u.shape[0] == 1:
                u = u.T
            else:
                raise ValueError("need one input per step between the triggers")
        if self.t_now <= self.t_prev:
            raise ValueError("t_now must come after t_prev")
        object.__setattr__(self, "inputs", u)
        object.__setattr__(self, "x_prev", np.asarray(self.x_prev, float))
        object.__setattr__(self, "x_now", np.asarray(self.x_now, float))

    @property
    def gap(self) -> int:
        return self.t_now - self.t_prev


class EstimateUpdate(NamedTuple):
    efss: Efss
    tube: ReachTube
    fault: bool = False


def information_set_consecutive(m: Measurement, plant: PlantModel) -> Strip:
    """Parameter values consistent with two consecutive measured states."""
    if m.gap != 1:
        raise ValueError("consecutive information set needs gap == 1")
    x = m.x_prev_set.center
    u = np.asarray(m.u_prev, float)
    return Strip(plant.g(x, u), np.asarray(m.x_now, float) - plant.f(x, u),
                 interval_hull(plant.d_set))


def reachable_step(x_set: Zonotope, u, efss, plant: PlantModel,
                   d_set: Optional[Zonotope] = None) -> Zonotope:
    """Guaranteed one-step image of ``x_set`` under every ``v`` in ``efss`` and ``d`` in ``d_set``.

    ``efss`` may be an Efss, a ZonoIntersection or an IntervalBox; only its
    interval hull is used.
    """
    D = plant.d_set if d_set is None else d_set
    v_box = efss.hull() if isinstance(efss, Efss) else interval_hull(efss)
    u = np.asarray(u, float)
    c = x_set.center
    V = v_box.to_zonotope()
    G = plant.g(c, u)
    base_c = plant.f(c, u) + G @ V.center + D.center
    base_g = np.hstack([G @ V.generators, D.generators])
    if x_set.order:
        J = plant.jac_x(interval_hull(x_set), u, v_box)
        block = zonotope_inclusion(J.times_point(x_set.generators))
        base_g = np.hstack([base_g, block])
    return reduce_order(Zonotope(base_c, base_g))


def information_set_aperiodic(tube_last: Zonotope, x_now, u_prev, plant: PlantModel,
                              v_box: Optional[IntervalBox] = None) -> Strip:
    """Parameter values consistent with ``x_now`` for *some* state in ``tube_last``.

    The regressor is taken at the tube centre; the strip bound is D inflated
    by an interval enclosure of how much ``f(x, u) + g(x, u) v`` can move as
    ``x`` ranges over the tube and ``v`` over ``v_box`` (the prior hull by
    default).
    """
    if v_box is None:
        v_box = interval_hull(plant.v_prior)
    u = np.asarray(u_prev, float)
    c = tube_last.center
    D = interval_hull(plant.d_set)
    lo, hi = D.lower, D.upper
    if tube_last.order:
        J = plant.jac_x(interval_hull(tube_last), u, v_box)
        Gabs = np.abs(tube_last.generators)
        spread = ((np.abs(J.midpoint) + J.radius) @ Gabs).sum(axis=1)
        lo, hi = lo - spread, hi + spread
    return Strip(plant.g(c, u), np.asarray(x_now, float) - plant.f(c, u), IntervalBox(lo, hi))


def refine(e: Efss, strip: Strip) -> Efss:
    """Intersect an EFSS with a strip; raises EmptySetError if nothing survives.

    Every member is refined by the strip, and the exact hull of the strip
    within the current hull is added as a member of its own.
    """
    exact = strip_box_hull(strip, e.hull())
    if exact is None:
        raise EmptySetError("strip misses the estimated set")
    members = [intersect_strip(z, strip) for z in e.set.members]
    members.append(exact.to_zonotope())
    out = normalize_members(e.set.members[0], members)
    out.hull()
    return Efss(out, e.timestamp)


def update_efss(e_prev: Efss, trace: TriggerTrace, model: UncertaintyModel,
                plant: PlantModel) -> EstimateUpdate:
    """EFSS at ``trace.t_now`` from the EFSS at ``trace.t_prev``.

    The measurement ``x_now`` depends on the parameter value of the last
    step before the trigger, so the strip is applied to the set propagated
    to ``t_now - 1`` and the result is propagated one more step.  For a gap
    of one step the tube is the measured state and the strip reduces to the
    consecutive information set.
    """
    if e_prev.timestamp != trace.t_prev:
        raise ValueError(f"EFSS is stamped {e_prev.timestamp}, trace starts at {trace.t_prev}")
    x_set = Zonotope.singleton(trace.x_prev)
    tube = [x_set]
    e = e_prev
    for j in range(trace.gap - 1):
        x_set = reachable_step(x_set, trace.inputs[j], e, plant)
        tube.append(x_set)
        e = propagate_efss(e, model)
    strip = information_set_aperiodic(tube[-1], trace.x_now, trace.inputs[-1], plant,
                                      v_box=e.hull())
    fault = False
    try:
        e = refine(e, strip)
    except EmptySetError:
        log.warning("t=%d: measurement inconsistent with the EFSS; keeping the prediction",
                    trace.t_now)
        fault = True
    e_new = propagate_efss(e, model)
    return EstimateUpdate(Efss(e_new.set, trace.t_now), ReachTube(tuple(tube)), fault)
