"""Parameter-uncertainty dynamics ``v+ = eta(v, delta)`` and EFSS propagation."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .sets import (
    IntervalBox,
    IntervalMatrix,
    Zonotope,
    ZonoIntersection,
    box_intersection,
    centered_inclusion,
    contains_points,
    interval_hull,
    reduce_order,
)

MAX_MEMBERS = 8


@dataclass(frozen=True)
class UncertaintyModel:
    """How the uncertain parameter evolves between samples.

    ``eta_point(p, m_set)`` encloses ``eta(p, m_set)`` by a zonotope,
    ``eta_jacobian_v(box, m_set)`` encloses the v-Jacobian over
    ``box x m_set``.  ``eta`` is the pointwise map, used by simulators and
    tests only.
    """

    eta_point: Callable[[np.ndarray, Zonotope], Zonotope]
    eta_jacobian_v: Callable[[IntervalBox, Zonotope], IntervalMatrix]
    m_set: Zonotope
    prior: Zonotope
    eta: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None

    @property
    def n_v(self) -> int:
        return self.prior.dim


def bounded_rate_model(prior: Zonotope, rate: float) -> UncertaintyModel:
    """``v+ = v + delta`` with ``|delta_i| <= rate``."""
    n = prior.dim
    m_set = Zonotope(np.zeros(n), rate * np.eye(n))
    return UncertaintyModel(
        eta_point=lambda p, M: Zonotope(np.asarray(p, float) + M.center, M.generators),
        eta_jacobian_v=lambda box, M: IntervalMatrix.point(np.eye(n)),
        m_set=m_set,
        prior=prior,
        eta=lambda v, d: np.asarray(v, float) + np.asarray(d, float),
    )


def affine_delta_model(eta1, eta2, jacobian, m_set: Zonotope, prior: Zonotope) -> UncertaintyModel:
    """``eta(v, delta) = eta1(v) + eta2(v) @ delta``; the point image is exact."""

    def point(p, M):
        A = np.atleast_2d(eta2(p))
        return Zonotope(eta1(p) + A @ M.center, A @ M.generators)

    return UncertaintyModel(
        eta_point=point,
        eta_jacobian_v=jacobian,
        m_set=m_set,
        prior=prior,
        eta=lambda v, d: eta1(v) + np.atleast_2d(eta2(v)) @ np.asarray(d, float),
    )


@dataclass(frozen=True)
class Efss:
    """Estimated feasible solution set of the parameter at an absolute time index.

    ``set.members[0]`` is always the prior bound.
    """

    set: ZonoIntersection
    timestamp: int = 0

    @classmethod
    def initial(cls, prior: Zonotope, timestamp: int = 0) -> "Efss":
        return cls(ZonoIntersection((prior,)), timestamp)

    def hull(self) -> IntervalBox:
        return self.set.hull()

    def contains(self, v, tol: float = 1e-9) -> bool:
        return bool(contains_points(self.set, np.atleast_2d(v), tol)[0])


def _covers(z: Zonotope, box: IntervalBox) -> bool:
    return bool(np.all(contains_points(z, box.vertices(), 1e-9)))


def normalize_members(prior: Zonotope, members) -> ZonoIntersection:
    """Put the prior first, drop members that contain it, cap the member count.

    When more than ``MAX_MEMBERS`` remain, the oldest non-prior members are
    merged into the box of their hull intersection.
    """
    prior_box = interval_hull(prior)
    rest = [reduce_order(z) for z in members if not _covers(z, prior_box)]
    while len(rest) + 1 > MAX_MEMBERS:
        k = len(rest) - (MAX_MEMBERS - 1) + 1
        merged = box_intersection([interval_hull(z) for z in rest[:k]])
        if merged is None:
            merged = box_intersection([interval_hull(z) for z in rest[:k]] + [prior_box])
        rest = [merged.to_zonotope()] + rest[k:]
    return ZonoIntersection((prior, *rest))


def propagate_efss(e: Efss, model: UncertaintyModel,
                   m_set: Optional[Zonotope] = None) -> Efss:
    """One step of parameter dynamics without measurements.

    Each member is pushed through the centered inclusion function on its
    own; the prior is re-attached as a member.  ``m_set`` overrides the
    model's set for time-varying bounds.
    """
    M = model.m_set if m_set is None else m_set
    images = [
        centered_inclusion(model.eta_point, model.eta_jacobian_v, z, M)
        for z in e.set.members[1:]
    ]
    if len(e.set.members) == 1 or not _is_prior(e.set.members[0], model.prior):
        # the first member is not the prior (foreign EFSS): propagate it too
        images.insert(0, centered_inclusion(model.eta_point, model.eta_jacobian_v,
                                            e.set.members[0], M))
    return Efss(normalize_members(model.prior, images), e.timestamp + 1)


def _is_prior(z: Zonotope, prior: Zonotope) -> bool:
    return (z is prior or (z.center.shape == prior.center.shape
                           and z.generators.shape == prior.generators.shape
                           and np.allclose(z.center, prior.center)
                           and np.allclose(z.generators, prior.generators)))


def predicted_efss_sequence(e: Efss, steps: int, model: UncertaintyModel) -> list[Efss]:
    """``[e, propagate(e), propagate^2(e), ...]`` of length ``steps + 1``."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    seq = [e]
    for _ in range(steps):
        seq.append(propagate_efss(seq[-1], model))
    return seq


def with_timestamp(e: Efss, t: int) -> Efss:
    return replace(e, timestamp=t)
