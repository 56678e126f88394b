"""Parameter and disturbance sequences for closed-loop runs."""

from __future__ import annotations

import logging

import numpy as np

log = logging.getLogger(__name__)


def disturbance_profiles(t) -> tuple:
    """The sinusoids ``v = 0.1 sin(4t/pi)`` and ``d = 0.15 sin(t/pi)``, unclipped."""
    t = np.asarray(t, float)
    return 0.1 * np.sin(4.0 * t / np.pi), 0.15 * np.sin(t / np.pi)


def rate_clip(raw, rate: float, start: float = None) -> tuple[np.ndarray, int]:
    """Follow ``raw`` while moving at most ``rate`` per step; returns (sequence, clip count)."""
    raw = np.asarray(raw, float)
    out = np.empty_like(raw)
    prev = raw[0] if start is None else start
    clips = 0
    for i, target in enumerate(raw):
        if i == 0 and start is None:
            out[0] = prev
            continue
        step = np.clip(target - prev, -rate, rate)
        clips += int(step != target - prev)
        prev = prev + step
        out[i] = prev
    return out, clips


def sinusoid_sequences(steps: int, rate: float, v_max: float, d_max: float):
    """Sinusoidal sequences made admissible: rate-clipped ``v`` and magnitude-clipped ``d``."""
    v_raw, d_raw = disturbance_profiles(np.arange(steps))
    v, v_clips = rate_clip(np.clip(v_raw, -v_max, v_max), rate)
    d = np.clip(d_raw, -d_max, d_max)
    d_clips = int(np.sum(d != d_raw))
    if v_clips:
        log.info("parameter profile rate-clipped at %d of %d steps", v_clips, steps)
    if d_clips:
        log.info("disturbance profile clipped to |d| <= %g at %d of %d steps",
                 d_max, d_clips, steps)
    return v, d


def random_sequences(steps: int, rate: float, v_max: float, d_max: float,
                     rng: np.random.Generator):
    """Random admissible sequences: a bounded-rate walk for ``v``, uniform ``d``."""
    v = np.empty(steps)
    v[0] = rng.uniform(-v_max, v_max)
    for t in range(1, steps):
        v[t] = np.clip(v[t - 1] + rng.uniform(-rate, rate), -v_max, v_max)
    d = rng.uniform(-d_max, d_max, size=steps)
    return v, d
