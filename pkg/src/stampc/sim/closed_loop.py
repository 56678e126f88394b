"""Closed-loop self-triggered adaptive (or robust) MPC on the cart."""

from __future__ import annotations

import logging
import time
import warnings
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from ..estimator import ReachTube, TriggerTrace, update_efss
from ..mpc import MpcSolution, SolverConfig
from ..scheduler import ControllerFault, TriggerConfig, compute_trigger, update_beta
from ..sets import contains_points, diameter
from ..uncertainty import Efss, bounded_rate_model
from .cart import CartParams, cart_problem
from .profiles import sinusoid_sequences, random_sequences

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SimConfig:
    cart: CartParams = CartParams()
    rate: float = 0.008
    N: int = 6
    H_max: int = 5
    beta0: float = 1.1
    beta_max: float = 5.0
    x0: tuple = (1.0, 1.0)
    steps: int = 60
    profile: str = "sinusoid"
    v_sequence: Optional[tuple] = None
    d_sequence: Optional[tuple] = None
    mode: str = "adaptive"
    seed: int = 0
    solver: SolverConfig = SolverConfig()

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.mode not in ("adaptive", "robust"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.profile not in ("sinusoid", "random", "inline", "zero"):
            raise ValueError(f"unknown disturbance profile {self.profile!r}")
        if self.profile == "inline" and (self.v_sequence is None or self.d_sequence is None):
            raise ValueError("inline profile needs v_sequence and d_sequence")
        if not 1 <= self.H_max <= self.N:
            raise ValueError("H_max must lie in [1, N]")


@dataclass
class TraceRecord:
    t: int
    x: np.ndarray
    u: np.ndarray
    v_true: np.ndarray
    d_true: np.ndarray
    is_trigger: bool = False
    H_star: Optional[int] = None
    beta: Optional[float] = None
    V_value: Optional[float] = None
    efss_lo: Optional[np.ndarray] = None
    efss_hi: Optional[np.ndarray] = None


@dataclass
class Metrics:
    J_p: float
    average_sampling_time: float
    constraint_violations: int
    trigger_count: int
    efss_final_width: float
    estimator_faults: int = 0
    runtime_s: float = 0.0


@dataclass
class TriggerInfo:
    t: int
    x: np.ndarray
    efss: Efss
    beta: float
    H_star: int
    values: dict
    v_true: np.ndarray
    v_in_efss: bool
    tube: Optional[ReachTube] = None
    tube_ok: Optional[bool] = None
    fault: bool = False


@dataclass
class RunResult:
    trace: list
    metrics: Metrics
    triggers: list = field(default_factory=list)

    def __iter__(self):
        yield self.trace
        yield self.metrics


def uncertainty_sequences(cfg: SimConfig):
    """True ``(v, d)`` per step as arrays of shape (steps,)."""
    c = cfg.cart
    if cfg.profile == "sinusoid":
        return sinusoid_sequences(cfg.steps, cfg.rate, c.v_max, c.d_max)
    if cfg.profile == "random":
        return random_sequences(cfg.steps, cfg.rate, c.v_max, c.d_max,
                                np.random.default_rng(cfg.seed))
    if cfg.profile == "zero":
        return np.zeros(cfg.steps), np.zeros(cfg.steps)
    v = np.asarray(cfg.v_sequence, float)
    d = np.asarray(cfg.d_sequence, float)
    if len(v) < cfg.steps or len(d) < cfg.steps:
        raise ValueError("inline sequences are shorter than the run")
    return v[:cfg.steps], d[:cfg.steps]


def _shifted_start(sol: MpcSolution, shift: int, x_now, problem):
    """The tail of the previous plan, re-anchored at the new measured state."""
    coeffs = np.asarray(sol.policies.coeffs)
    if len(coeffs) == 0:
        return None
    a, b, c = coeffs[0]
    t = problem.terminal
    U = problem.plant.input_box
    x_now = np.asarray(x_now, float)
    u0 = np.clip(a * t.kappa(x_now) + b * (x_now @ x_now) + c, U.lower, U.upper)
    tail = np.vstack([coeffs[1:], np.tile([1.0, 0.0, 0.0], (shift, 1))])
    return u0.reshape(1, -1), tail


def run_closed_loop(cfg: SimConfig) -> RunResult:
    """Run the self-triggered loop for ``cfg.steps`` steps.

    At each trigger the state is measured, the EFSS is updated from the
    states and inputs since the previous trigger (adaptive mode), beta is
    adapted, and the H-sweep picks how many open-loop inputs to apply.  The
    robust mode keeps the EFSS at the prior and beta at ``beta0``.
    """
    started = time.perf_counter()
    problem = cart_problem(cfg.cart, cfg.N)
    plant = problem.plant
    model = bounded_rate_model(plant.v_prior, cfg.rate)
    prior = Efss.initial(plant.v_prior)
    tcfg = TriggerConfig(cfg.H_max, cfg.beta0, cfg.beta_max, diameter(prior.set))
    v_seq, d_seq = uncertainty_sequences(cfg)
    d_scale = cfg.cart.period / cfg.cart.mass

    trace: list[TraceRecord] = []
    triggers: list[TriggerInfo] = []
    x = np.asarray(cfg.x0, float)
    states = [x]
    t = 0
    efss = prior
    prev_t, prev_x, prev_sol, prev_inputs = None, None, None, []
    faults = 0
    while t < cfg.steps:
        tube, tube_ok, fault = None, None, False
        if cfg.mode == "adaptive" and prev_t is not None:
            upd = update_efss(efss, TriggerTrace(prev_t, t, np.array(prev_inputs), prev_x, x),
                              model, plant)
            efss, tube, fault = upd
            faults += int(fault)
            realized = np.array(states[prev_t:t])
            tube_ok = all(bool(contains_points(z, xs[None, :], 1e-9)[0])
                          for z, xs in zip(tube.sets, realized))
        beta = update_beta(efss, tcfg) if cfg.mode == "adaptive" else cfg.beta0
        warm = []
        if prev_sol is not None:
            cand = _shifted_start(prev_sol, t - prev_t, x, problem)
            if cand is not None:
                warm.append(cand)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                decision = compute_trigger(
                    x, efss, beta, problem, tcfg, cfg.solver,
                    model=model if cfg.mode == "adaptive" else None, warm_starts=warm)
        except ControllerFault as exc:
            exc.diagnostics["t"] = t
            exc.diagnostics["trace"] = trace
            raise
        H = decision.H_star
        hull = efss.hull()
        v_now = np.atleast_1d(v_seq[t])
        triggers.append(TriggerInfo(
            t=t, x=x, efss=efss, beta=beta, H_star=H,
            values={h: s.value for h, s in decision.solutions.items()},
            v_true=v_now, v_in_efss=efss.contains(v_now), tube=tube, tube_ok=tube_ok,
            fault=fault))
        prev_t, prev_x, prev_sol = t, x, decision.solution
        prev_inputs = []
        for i, u in enumerate(decision.open_inputs):
            if t >= cfg.steps:
                break
            rec = TraceRecord(t, x, np.atleast_1d(u), np.atleast_1d(v_seq[t]),
                              np.atleast_1d(d_seq[t]))
            if i == 0:
                rec.is_trigger = True
                rec.H_star, rec.beta, rec.V_value = H, beta, decision.solution.value
                rec.efss_lo, rec.efss_hi = hull.lower, hull.upper
            trace.append(rec)
            d_vec = np.array([0.0, d_scale * d_seq[t]])
            x = plant.step(x, u, np.atleast_1d(v_seq[t]), d_vec)
            states.append(x)
            prev_inputs.append(u)
            t += 1
    metrics = compute_metrics(trace, problem, efss, faults)
    metrics.runtime_s = time.perf_counter() - started
    return RunResult(trace, metrics, triggers)


def compute_metrics(trace: Sequence[TraceRecord], problem, efss: Efss, faults: int = 0) -> Metrics:
    X, U = problem.plant.state_box, problem.plant.input_box
    J = 0.0
    violations = 0
    for r in trace:
        J += float(r.x @ problem.Q @ r.x + r.u @ problem.R @ r.u)
        if (np.any(r.x < X.lower - 1e-9) or np.any(r.x > X.upper + 1e-9)
                or np.any(r.u < U.lower - 1e-9) or np.any(r.u > U.upper + 1e-9)):
            violations += 1
    n_trig = sum(r.is_trigger for r in trace)
    return Metrics(
        J_p=J,
        average_sampling_time=len(trace) / max(n_trig, 1),
        constraint_violations=violations,
        trigger_count=n_trig,
        efss_final_width=diameter(efss.set),
        estimator_faults=faults,
    )


def robust_config(cfg: SimConfig) -> SimConfig:
    return replace(cfg, mode="robust")
