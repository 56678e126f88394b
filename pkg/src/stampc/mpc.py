"""Beta-penalised min-max MPC over a vertex scenario tree.

Decision variables are the first ``H`` inputs (applied open loop) and, for
every later stage, three numbers ``(a, b, c)`` of the feedback law
``u(x) = a * kappa_f(x) + b * x'x + c`` clamped to the input box.  The worst
case is taken over the leaves of a tree that branches over the corners of
the predicted parameter hull and of the disturbance hull.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .optimize import pattern_search
from .plant import PlantModel, TerminalIngredients
from .sets import IntervalBox, interval_hull
from .uncertainty import Efss, UncertaintyModel, predicted_efss_sequence

log = logging.getLogger(__name__)

MAX_LEAVES = 4096
FEAS_TOL = 1e-6
DECREASE_TOL = 1e-9
_BIG = 1e10
POLICY_GAIN_BOUNDS = (-3.0, 3.0)
POLICY_QUAD_BOUNDS = (-5.0, 5.0)


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class MpcProblem:
    plant: PlantModel
    terminal: TerminalIngredients
    Q: np.ndarray
    R: np.ndarray
    N: int

    def __post_init__(self):
        Q = np.atleast_2d(np.asarray(self.Q, float))
        R = np.atleast_2d(np.asarray(self.R, float))
        if Q.shape != (self.plant.n_x,) * 2 or R.shape != (self.plant.n_u,) * 2:
            raise ValueError("Q/R shapes do not match the plant")
        if np.linalg.eigvalsh(Q).min() <= 0 or np.linalg.eigvalsh(R).min() <= 0:
            raise ValueError("Q and R must be positive definite")
        if self.N < 1:
            raise ValueError("horizon must be positive")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "R", R)


@dataclass(frozen=True)
class PolicyParams:
    """Rows ``(a_i, b_i, c_i)`` for the closed-loop stages ``i = H .. N-1``."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float).reshape(-1, 3)
        if not np.all(np.isfinite(c)):
            raise ValueError("policy coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def terminal_law(cls, stages: int) -> "PolicyParams":
        return cls(np.tile([1.0, 0.0, 0.0], (stages, 1)))

    def __len__(self):
        return self.coeffs.shape[0]


@dataclass(frozen=True)
class ScenarioTree:
    """Leaf-wise uncertainty sequences, ``v[L, N, n_v]`` and ``d[L, N, n_x]``."""

    depth: int
    v: np.ndarray
    d: np.ndarray
    patterns: np.ndarray

    @property
    def n_leaves(self) -> int:
        return self.v.shape[0]

    @property
    def horizon(self) -> int:
        return self.v.shape[1]

    def leaf(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        return self.v[i], self.d[i]


@dataclass(frozen=True)
class WorstCase:
    value: float
    feasible: bool
    margins: dict
    worst_leaf: int


@dataclass(frozen=True)
class MpcSolution:
    value: float
    open_inputs: np.ndarray
    policies: PolicyParams
    feasible: bool
    worst_leaf: int
    margins: dict
    H: int
    beta: float
    starts: int = 0

    def warm_start(self) -> tuple[np.ndarray, np.ndarray]:
        return self.open_inputs, self.policies.coeffs


@dataclass(frozen=True)
class SolverConfig:
    branch_depth: int = 2
    n_starts: int = 8
    tol: float = 1e-6
    max_iter: int = 2000
    slsqp_iter: int = 150
    polish: bool = True
    seed: int = 0


# --- costs -----------------------------------------------------------------

def stage_cost(x, u, Q, R):
    x = np.asarray(x, float)
    u = np.asarray(u, float)
    Q = np.atleast_2d(np.asarray(Q, float))
    R = np.atleast_2d(np.asarray(R, float))
    val = np.einsum("...i,ij,...j->...", x, Q, x) + np.einsum("...i,ij,...j->...", u, R, u)
    return float(val) if np.ndim(val) == 0 else val


def terminal_cost(x, t: TerminalIngredients):
    val = t.cost(x)
    return float(val) if np.ndim(val) == 0 else val


def trajectory_cost(x_path, u_path, H: int, beta: float, Q, R, t: TerminalIngredients) -> float:
    """``(1/beta) sum_{l<H} l(x,u) + sum_{H<=l<N} l(x,u) + l_f(x_N)``."""
    x_path = np.atleast_2d(np.asarray(x_path, float))
    u_path = np.atleast_2d(np.asarray(u_path, float))
    N = u_path.shape[0]
    if x_path.shape[0] != N + 1:
        raise ValueError(f"need {N + 1} states for {N} inputs, got {x_path.shape[0]}")
    if not 1 <= H <= N:
        raise ValueError("H must lie in [1, N]")
    if beta < 1:
        raise ValueError("beta must be >= 1")
    ell = stage_cost(x_path[:N], u_path, Q, R)
    w = np.where(np.arange(N) < H, 1.0 / beta, 1.0)
    return float(w @ ell + terminal_cost(x_path[N], t))


# --- scenario tree ---------------------------------------------------------

def _as_box(item) -> IntervalBox:
    if isinstance(item, Efss):
        return item.hull()
    return interval_hull(item)


def build_scenario_tree(efss_seq, d_set, N: int, B: int,
                        max_leaves: int = MAX_LEAVES) -> ScenarioTree:
    """Branch over hull corners for the first ``B`` stages, then freeze.

    A corner pattern is a sign vector over the active (non-degenerate)
    parameter and disturbance axes.  Leaves hold one pattern per branching
    stage; later stages repeat the stage ``B-1`` pattern applied to that
    stage's own hulls.  ``B = 0`` gives the single nominal (centre) leaf.
    """
    if len(efss_seq) < N:
        raise ValueError(f"need at least {N} predicted sets, got {len(efss_seq)}")
    if not 0 <= B <= N:
        raise ValueError("branch depth must lie in [0, N]")
    v_boxes = [_as_box(e) for e in efss_seq[:N]]
    d_box = interval_hull(d_set)
    v_active = [i for i in range(v_boxes[0].dim)
                if any(bx.radius[i] > 0 for bx in v_boxes)]
    d_active = [i for i in range(d_box.dim) if d_box.radius[i] > 0]
    n_signs = len(v_active) + len(d_active)
    combos = list(itertools.product((-1.0, 1.0), repeat=n_signs))
    patterns = np.array(combos, dtype=float).reshape(len(combos), n_signs)
    K = len(patterns)
    n_leaves = K ** B
    if n_leaves > max_leaves:
        raise ValueError(f"scenario tree would have {n_leaves} leaves (limit {max_leaves})")
    seqs = np.array(list(itertools.product(range(K), repeat=B)), dtype=int).reshape(n_leaves, B)
    n_v, n_x = v_boxes[0].dim, d_box.dim
    v = np.empty((n_leaves, N, n_v))
    d = np.empty((n_leaves, N, n_x))
    for l in range(N):
        vb = v_boxes[l]
        v[:, l, :] = vb.center
        d[:, l, :] = d_box.center
        if B == 0:
            continue
        pat = patterns[seqs[:, min(l, B - 1)]]
        v[:, l, v_active] += pat[:, :len(v_active)] * vb.radius[v_active]
        d[:, l, d_active] += pat[:, len(v_active):] * d_box.radius[d_active]
    return ScenarioTree(B, v, d, seqs)


# --- simulation ------------------------------------------------------------

def _policy_inputs(x, coeffs, terminal: TerminalIngredients, U: IntervalBox):
    """Policy input for states ``x[C, L, n_x]`` and coefficients ``coeffs[C, 3]``."""
    a = coeffs[:, 0][:, None, None]
    b = coeffs[:, 1][:, None, None]
    c = coeffs[:, 2][:, None, None]
    u = a * terminal.kappa(x) + b * np.sum(x * x, axis=-1, keepdims=True) + c
    return np.clip(u, U.lower, U.upper)


def _simulate(x0, U_open, coeffs, v, d, plant: PlantModel, terminal: TerminalIngredients):
    """States ``[C, L, N+1, n_x]`` and inputs ``[C, L, N, n_u]`` for C candidates."""
    C, H, n_u = U_open.shape
    L, N, _ = v.shape
    xs = np.empty((C, L, N + 1, plant.n_x))
    us = np.empty((C, L, N, n_u))
    x = np.broadcast_to(np.asarray(x0, float), (C, L, plant.n_x))
    xs[:, :, 0] = x
    with np.errstate(over="ignore", invalid="ignore"):
        for l in range(N):
            if l < H:
                u = np.broadcast_to(U_open[:, None, l, :], (C, L, n_u))
            else:
                u = _policy_inputs(x, coeffs[:, l - H, :], terminal, plant.input_box)
            x = plant.step(x, u, v[None, :, l, :], d[None, :, l, :])
            us[:, :, l] = u
            xs[:, :, l + 1] = x
    return xs, us


def rollout(x0, open_inputs, policies: PolicyParams, leaf, plant: PlantModel,
            terminal: TerminalIngredients):
    """Simulate one uncertainty realization ``leaf = (v_seq, d_seq)``."""
    v_seq, d_seq = (np.asarray(a, float) for a in leaf)
    U_open = np.asarray(open_inputs, float).reshape(1, -1, plant.n_u)
    coeffs = np.asarray(policies.coeffs).reshape(1, -1, 3)
    if U_open.shape[1] + coeffs.shape[1] != v_seq.shape[0]:
        raise ValueError("open inputs + policy stages must equal the horizon")
    xs, us = _simulate(x0, U_open, coeffs, v_seq[None], d_seq[None], plant, terminal)
    return xs[0, 0], us[0, 0]


class _Evaluator:
    """Batched cost and constraint slacks for one (x0, tree, H, beta) problem."""

    def __init__(self, problem: MpcProblem, x0, tree: ScenarioTree, H: int, beta: float):
        self.p = problem
        self.x0 = np.asarray(x0, float)
        self.tree = tree
        self.H = H
        self.beta = float(beta)
        N = problem.N
        self.weights = np.where(np.arange(N) < H, 1.0 / beta, 1.0)
        X = problem.plant.state_box
        self.lo_idx = np.flatnonzero(np.isfinite(X.lower))
        self.hi_idx = np.flatnonzero(np.isfinite(X.upper))
        U = problem.plant.input_box
        n_u = problem.plant.n_u
        self.n_open = H * n_u
        self.n_pol = 3 * (N - H)
        umin, umax = np.tile(U.lower, H), np.tile(U.upper, H)
        pol_lo = np.tile([POLICY_GAIN_BOUNDS[0], POLICY_QUAD_BOUNDS[0], U.lower.min()], N - H)
        pol_hi = np.tile([POLICY_GAIN_BOUNDS[1], POLICY_QUAD_BOUNDS[1], U.upper.max()], N - H)
        self.lower = np.concatenate([umin, pol_lo])
        self.upper = np.concatenate([umax, pol_hi])

    def split(self, Z):
        Z = np.atleast_2d(Z)
        C = Z.shape[0]
        U_open = Z[:, :self.n_open].reshape(C, self.H, self.p.plant.n_u)
        coeffs = Z[:, self.n_open:].reshape(C, self.p.N - self.H, 3)
        return U_open, coeffs

    def pack(self, open_inputs, coeffs) -> np.ndarray:
        return np.concatenate([np.asarray(open_inputs, float).ravel(),
                               np.asarray(coeffs, float).ravel()])

    def run(self, Z):
        """Leaf costs [C, L], state slacks [C, L, N, k], terminal slacks [C, L], input slacks [C]."""
        U_open, coeffs = self.split(Z)
        xs, us = _simulate(self.x0, U_open, coeffs, self.tree.v, self.tree.d,
                           self.p.plant, self.p.terminal)
        N = self.p.N
        ell = (np.einsum("clni,ij,clnj->cln", xs[:, :, :N], self.p.Q, xs[:, :, :N])
               + np.einsum("clni,ij,clnj->cln", us, self.p.R, us))
        cost = ell @ self.weights + self.p.terminal.cost(xs[:, :, N])
        X = self.p.plant.state_box
        xr = xs[:, :, :N]
        slack = np.concatenate([xr[..., self.lo_idx] - X.lower[self.lo_idx],
                                X.upper[self.hi_idx] - xr[..., self.hi_idx]], axis=-1)
        term = self.p.terminal.level - self.p.terminal.cost(xs[:, :, N])
        U = self.p.plant.input_box
        if self.H:
            uin = np.minimum(U_open - U.lower, U.upper - U_open).reshape(len(U_open), -1).min(axis=1)
        else:
            uin = np.full(len(U_open), np.inf)
        bad = ~np.isfinite(cost)
        cost = np.where(bad, _BIG, cost)
        slack = np.where(np.isfinite(slack), slack, -_BIG)
        term = np.where(np.isfinite(term), term, -_BIG)
        return cost, slack, term, uin, xs, us

    def worst_case(self, z) -> WorstCase:
        cost, slack, term, uin, xs, us = self.run(z[None, :])
        if not np.all(np.isfinite(xs)):
            raise SolverError("non-finite state in plant evaluation")
        cost, slack, term = cost[0], slack[0], term[0]
        worst = int(np.argmax(cost))
        margins = {
            "state": float(slack.min()) if slack.size else np.inf,
            "terminal": float(term.min()),
            "input": float(uin[0]),
        }
        U = self.p.plant.input_box
        pol_u = us[0, :, self.H:]
        if pol_u.size:
            margins["input"] = float(min(margins["input"],
                                         np.minimum(pol_u - U.lower, U.upper - pol_u).min()))
        feasible = all(m >= -FEAS_TOL for m in margins.values())
        return WorstCase(float(cost[worst]), feasible, margins, worst)

    def penalized(self, Z) -> np.ndarray:
        cost, slack, term, uin, _, _ = self.run(Z)
        viol = np.maximum(0.0, -np.minimum(slack.reshape(len(Z), -1).min(axis=1, initial=np.inf),
                                           term.min(axis=1)))
        return cost.max(axis=1) + 1e3 * viol + 1e3 * np.maximum(0.0, -uin)


def evaluate_worst_case(problem: MpcProblem, x0, open_inputs, policies: PolicyParams,
                        tree: ScenarioTree, H: int, beta: float) -> WorstCase:
    """Worst leaf cost, joint feasibility and minimum constraint slacks."""
    ev = _Evaluator(problem, x0, tree, H, beta)
    return ev.worst_case(ev.pack(open_inputs, policies.coeffs))


# --- solver ----------------------------------------------------------------

def _slsqp(ev: _Evaluator, z0: np.ndarray, maxiter: int, backoff: float = 1e-6):
    L = ev.tree.n_leaves
    n = z0.size
    cache: dict = {}

    def constraints_at(Z):
        cost, slack, term, _, _, _ = ev.run(Z)
        return cost, slack.reshape(len(Z), -1) - backoff, term - backoff

    def block(w):
        key = w.tobytes()
        if key not in cache:
            z, gamma = w[:-1], w[-1]
            h = 1e-7 * np.maximum(1.0, np.abs(z))
            Z = np.vstack([z, z + np.diag(h)])
            cost, slack, term = constraints_at(Z)
            g_all = np.concatenate([gamma - cost, slack, term], axis=1)
            val = g_all[0]
            jac = np.empty((val.size, n + 1))
            jac[:, :n] = ((g_all[1:] - g_all[0]) / h[:, None]).T
            jac[:, n] = 0.0
            jac[:L, n] = 1.0
            cache.clear()
            cache[key] = (val, jac)
        return cache[key]

    cost0 = constraints_at(z0[None, :])[0][0]
    w0 = np.append(z0, cost0.max())
    bounds = list(zip(ev.lower, ev.upper)) + [(None, None)]
    res = minimize(lambda w: w[-1], w0, jac=lambda w: np.eye(1, n + 1, n).ravel(),
                   method="SLSQP", bounds=bounds,
                   constraints=[{"type": "ineq", "fun": lambda w: block(w)[0],
                                 "jac": lambda w: block(w)[1]}],
                   options={"maxiter": maxiter, "ftol": 1e-9})
    return np.clip(res.x[:-1], ev.lower, ev.upper)


def adapt_warm_start(open_inputs, coeffs, H: int, N: int, x0, problem: MpcProblem,
                     tree: Optional[ScenarioTree] = None):
    """Reshape a solution computed for another H into the layout for ``H``.

    Open inputs beyond the old split are filled with the nominal policy
    input; missing policy stages become constant inputs equal to the old
    open inputs.
    """
    U_open = np.asarray(open_inputs, float).reshape(-1, problem.plant.n_u)
    coeffs = np.asarray(coeffs, float).reshape(-1, 3)
    H_old = U_open.shape[0]
    if H_old == H:
        return U_open, coeffs
    if H < H_old:
        extra = np.column_stack([np.zeros(H_old - H), np.zeros(H_old - H),
                                 U_open[H:, 0]])
        return U_open[:H], np.vstack([extra, coeffs])
    if tree is None:
        v = np.zeros((1, N, problem.plant.n_v))
        d = np.zeros((1, N, problem.plant.n_x))
    else:
        mid = tree.n_leaves // 2
        v, d = tree.v[mid:mid + 1], tree.d[mid:mid + 1]
    _, us = _simulate(x0, U_open[None], coeffs[None], v, d, problem.plant, problem.terminal)
    return us[0, 0, :H], coeffs[H - H_old:]


def solve_minmax(problem: MpcProblem, x0, efss, beta: float, H: int,
                 config: SolverConfig = SolverConfig(), *,
                 model: Optional[UncertaintyModel] = None,
                 tree: Optional[ScenarioTree] = None,
                 warm_starts: Sequence = ()) -> MpcSolution:
    """Approximately solve the min-max problem for one split point ``H``.

    ``efss`` is the current EFSS (propagated with ``model`` when given,
    held constant otherwise) or an explicit predicted sequence.  Starts are
    the warm starts, the terminal law, and seeded random points; each is
    improved by SLSQP on the epigraph form and the best one is polished by
    pattern search on an exact-penalty objective.  Infeasibility is
    reported through ``feasible``, never raised.
    """
    N = problem.N
    if not 1 <= H <= N:
        raise ValueError("H must lie in [1, N]")
    x0 = np.asarray(x0, float)
    if not np.all(np.isfinite(x0)):
        raise SolverError("non-finite initial state")
    if tree is None:
        tree = build_scenario_tree(predicted_sets(efss, N, model), problem.plant.d_set,
                                   N, config.branch_depth)
    ev = _Evaluator(problem, x0, tree, H, beta)
    rng = np.random.default_rng(config.seed + 7919 * H)

    starts = []
    for ws in warm_starts:
        U_w, c_w = adapt_warm_start(ws[0], ws[1], H, N, x0, problem, tree)
        starts.append(ev.pack(U_w, c_w))
    kappa_coeffs = np.tile([1.0, 0.0, 0.0], (N - H, 1))
    _, us = _simulate(x0, np.zeros((1, 0, problem.plant.n_u)),
                      np.tile([1.0, 0.0, 0.0], (1, N, 1)),
                      tree.v.mean(axis=0, keepdims=True), tree.d.mean(axis=0, keepdims=True),
                      problem.plant, problem.terminal)
    starts.append(ev.pack(us[0, 0, :H], kappa_coeffs))
    starts.append(ev.pack(np.zeros((H, problem.plant.n_u)), kappa_coeffs))
    while len(starts) < config.n_starts:
        starts.append(rng.uniform(ev.lower, ev.upper))
    starts = [np.clip(s, ev.lower, ev.upper) for s in starts[:max(config.n_starts, len(warm_starts) + 1)]]

    best_z, best_key = None, None
    for z0 in starts:
        cands = [z0]
        try:
            cands.append(_slsqp(ev, z0, config.slsqp_iter))
        except (ValueError, FloatingPointError) as exc:
            log.debug("SLSQP failed from a start: %s", exc)
        for z in cands:
            wc = ev.worst_case(z)
            key = (not wc.feasible, -min(wc.margins.values()) if not wc.feasible else wc.value)
            if best_key is None or key < best_key:
                best_z, best_key = z, key

    if config.polish:
        res = pattern_search(ev.penalized, best_z, ev.lower, ev.upper, step=0.05,
                             tol=config.tol, max_iter=config.max_iter)
        wc_new = ev.worst_case(res.x)
        key = (not wc_new.feasible,
               -min(wc_new.margins.values()) if not wc_new.feasible else wc_new.value)
        if key < best_key:
            best_z, best_key = res.x, key

    wc = ev.worst_case(best_z)
    U_open, coeffs = ev.split(best_z)
    return MpcSolution(
        value=wc.value, open_inputs=U_open[0].copy(), policies=PolicyParams(coeffs[0]),
        feasible=wc.feasible, worst_leaf=wc.worst_leaf, margins=wc.margins,
        H=H, beta=float(beta), starts=len(starts),
    )


def predicted_sets(efss, N: int, model: Optional[UncertaintyModel]):
    """Predicted parameter sets for stages ``0 .. N``."""
    if isinstance(efss, (list, tuple)):
        return list(efss)
    if model is None:
        return [efss] * (N + 1)
    return predicted_efss_sequence(efss, N, model)


# --- terminal ingredients --------------------------------------------------

@dataclass
class TerminalReport:
    input_bound: float
    input_limit: float
    input_ok: bool
    boundary_pass_fraction: float
    interior_pass_fraction: float
    min_margin_d0: float
    rho: float
    rpi_fraction: float
    failures: list = field(default_factory=list)

    def summary(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if k != "failures"} | {
            "n_failures": len(self.failures)}


def verify_terminal_assumption(problem: MpcProblem, samples: int = 10000,
                               seed: int = 0) -> TerminalReport:
    """Sampled check of the terminal-ingredient conditions.

    Samples the terminal ellipsoid boundary and interior and reports: the
    closed-form max of ``|kappa_f|`` over the set against the input box; the
    fraction of samples where ``l_f(F(x, kf, v, 0)) - l_f(x) + l(x, kf) <= 0``
    for every parameter corner; the smallest ``rho`` with the decrease
    bounded by ``rho * |d|`` over disturbance corners; and the fraction of
    samples mapped back into the set for every corner pair.
    """
    plant, t = problem.plant, problem.terminal
    rng = np.random.default_rng(seed)
    K = t.k_gain
    Pinv = np.linalg.inv(t.P)
    input_bound = float(np.sqrt(np.max(np.einsum("ij,jk,ik->i", K, Pinv, K)) * t.level))
    U = plant.input_box
    input_limit = float(np.min(np.minimum(-U.lower, U.upper)))
    Lc = np.linalg.cholesky(t.P)

    def on_level(y):
        return np.linalg.solve(Lc.T, y.T).T

    n = plant.n_x
    dirs = rng.normal(size=(samples, n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    boundary = on_level(dirs * np.sqrt(t.level))
    radii = rng.uniform(0, 1, size=(samples, 1)) ** (1.0 / n)
    interior = on_level(dirs * radii * np.sqrt(t.level))
    v_corners = interval_hull(plant.v_prior).vertices()
    d_corners = interval_hull(plant.d_set).vertices()

    def decrease(x, v, d):
        u = t.kappa(x)
        xn = plant.step(x, u, np.broadcast_to(v, (len(x), v.size)), d)
        return t.cost(xn) - t.cost(x) + stage_cost(x, u, problem.Q, problem.R), xn

    def worst_d0(x):
        return np.max([decrease(x, v, np.zeros(n))[0] for v in v_corners], axis=0)

    lhs_b = worst_d0(boundary)
    lhs_i = worst_d0(interior)
    everything = np.vstack([boundary, interior])
    rho = 0.0
    in_set = np.ones(len(everything), dtype=bool)
    for v in v_corners:
        for d in d_corners:
            lhs, xn = decrease(everything, v, d)
            in_set &= t.contains(xn)
            nd = np.linalg.norm(d)
            if nd > 0:
                rho = max(rho, float(np.max(lhs) / nd))
    failures = [(x.tolist(), float(m)) for x, m in zip(boundary, lhs_b) if m > DECREASE_TOL]
    return TerminalReport(
        input_bound=input_bound, input_limit=input_limit,
        input_ok=input_bound <= input_limit + 1e-12,
        boundary_pass_fraction=float(np.mean(lhs_b <= DECREASE_TOL)),
        interior_pass_fraction=float(np.mean(lhs_i <= DECREASE_TOL)),
        min_margin_d0=float(-max(lhs_b.max(), lhs_i.max())),
        rho=max(rho, 0.0),
        rpi_fraction=float(np.mean(in_set)),
        failures=failures,
    )
