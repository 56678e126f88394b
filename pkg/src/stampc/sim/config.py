"""TOML run configuration.

Sections and defaults::

    [plant]       name = "cart", mass = 1.0, spring = 0.33, damping = 1.1,
                  period = 0.4, u_max = 4.5, x1_max = 2.0, x2_max = 10.0,
                  v_max = 0.15, d_max = 0.1, rate = 0.008
    [mpc]         N = 6, branch_depth = 2, n_starts = 8, tol = 1e-6,
                  max_iter = 2000, slsqp_iter = 150, polish = true, seed = 0
    [scheduler]   H_max = 5, beta0 = 1.1, beta_max = 5.0
    [sim]         x0 = [1.0, 1.0], steps = 60, profile = "sinusoid",
                  v_sequence = [], d_sequence = [], mode = "adaptive",
                  seed = 0, out_dir = "out"

``profile`` is one of ``sinusoid``, ``random``, ``zero`` or ``inline`` (the
last uses ``v_sequence`` and ``d_sequence``).  Unknown sections or keys
are rejected.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from ..mpc import SolverConfig
from .cart import CartParams
from .closed_loop import SimConfig

_PLANT_EXTRA = {"name", "rate"}
_SCHED = {"H_max", "beta0", "beta_max"}
_SIM = {"x0", "steps", "profile", "v_sequence", "d_sequence", "mode", "seed", "out_dir"}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    sim: SimConfig
    out_dir: str = "out"


def _names(cls) -> set:
    return {f.name for f in fields(cls)}


def _check(section: str, table: dict, allowed: set):
    unknown = set(table) - allowed
    if unknown:
        raise ConfigError(f"[{section}]: unknown key(s) {sorted(unknown)}")


def parse_config(data: dict) -> RunConfig:
    sections = {"plant", "mpc", "scheduler", "sim"}
    unknown = set(data) - sections
    if unknown:
        raise ConfigError(f"unknown section(s) {sorted(unknown)}")
    plant = dict(data.get("plant", {}))
    mpc = dict(data.get("mpc", {}))
    sched = dict(data.get("scheduler", {}))
    sim = dict(data.get("sim", {}))
    _check("plant", plant, _names(CartParams) | _PLANT_EXTRA)
    _check("mpc", mpc, _names(SolverConfig) | {"N"})
    _check("scheduler", sched, _SCHED)
    _check("sim", sim, _SIM)

    name = plant.pop("name", "cart")
    if name != "cart":
        raise ConfigError(f"[plant]: unsupported plant {name!r}")
    rate = float(plant.pop("rate", 0.008))
    N = int(mpc.pop("N", 6))
    out_dir = str(sim.pop("out_dir", "out"))
    for key in ("v_sequence", "d_sequence"):
        if key in sim:
            sim[key] = tuple(float(v) for v in sim[key]) or None
    if "x0" in sim:
        sim["x0"] = tuple(float(v) for v in sim["x0"])
        if len(sim["x0"]) != 2:
            raise ConfigError("[sim]: x0 must have two entries")
    try:
        cfg = SimConfig(cart=CartParams(**plant), rate=rate, N=N,
                        solver=SolverConfig(**mpc), **sched, **sim)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return RunConfig(cfg, out_dir)


def load_config(path) -> RunConfig:
    with open(Path(path), "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    return parse_config(data)


def with_overrides(rc: RunConfig, *, seed=None, mode=None, out_dir=None) -> RunConfig:
    sim = rc.sim
    if seed is not None:
        sim = replace(sim, seed=seed)
    if mode is not None:
        sim = replace(sim, mode=mode)
    return RunConfig(sim, out_dir if out_dir is not None else rc.out_dir)
