"""Waiting-time Monte Carlo of the doubling repeater chain, plus its exact two-link oracle.

A level-0 link takes a geometric number of attempts. A level-i link waits
for both halves, then swaps; a failed swap destroys both halves, which are
regenerated from scratch. Time is counted in attempt periods and scaled at
the end, so doubling the period doubles every estimate exactly.

Each trial draws from its own SplitMix64 stream keyed by (seed, trial
index), so estimates do not depend on how trials are spread over threads.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numba as nb
import numpy as np

from .model import ChainConfig
from .rates import SchemeModel, propagate

THREADS_ENV = "REPEATER_THREADS"

if "NUMBA_THREADING_LAYER" not in os.environ:
    # prefer OpenMP; older system TBB builds only produce a warning
    nb.config.THREADING_LAYER_PRIORITY = ["omp", "tbb", "workqueue"]

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53


class AttemptCapExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class SimConfig:
    trials: int = 10_000
    seed: int = 0
    max_attempt_cap: int = 10**15

    def __post_init__(self):
        if self.trials < 1 or self.max_attempt_cap < 1:
            raise ValueError("trials and max_attempt_cap must be >= 1")


@dataclass(frozen=True)
class SimEstimate:
    mean_time_s: float
    std_error_s: float
    rate_hz: float
    success_fraction: float
    trials: int


@nb.njit(cache=True)
def _mix(z):
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


@nb.njit(cache=True)
def _uniform(state):
    """Next value in (0, 1] and the advanced stream state."""
    state = state + _GOLDEN
    x = _mix(state)
    return ((x >> _S11) + _ONE) * _INV53, state


@nb.njit(cache=True)
def _geometric(p, state):
    if p >= 1.0:
        return 1.0, state
    u, state = _uniform(state)
    k = math.ceil(math.log(u) / math.log1p(-p))
    return max(k, 1.0), state


@nb.njit(cache=True)
def _level_time(level, p0, swap_probs, cap, state):
    """Attempts until a level-``level`` link exists; -1 once past ``cap``."""
    if level == 0:
        return _geometric(p0, state)
    total = 0.0
    while True:
        a, state = _level_time(level - 1, p0, swap_probs, cap, state)
        if a < 0:
            return -1.0, state
        b, state = _level_time(level - 1, p0, swap_probs, cap, state)
        if b < 0:
            return -1.0, state
        total += max(a, b)
        if total > cap:
            return -1.0, state
        u, state = _uniform(state)
        if u <= swap_probs[level - 1]:
            return total, state


@nb.njit(parallel=True, cache=True)
def _run_trials(seed, trials, nesting_s, p0, swap_probs, cap):
    out = np.empty(trials)
    key = _mix(np.uint64(seed))
    for i in nb.prange(trials):
        state = _mix(key ^ _mix(np.uint64(i) + _GOLDEN))
        t, state = _level_time(nesting_s, p0, swap_probs, cap, state)
        out[i] = t
    return out


def thread_count(env=None) -> int | None:
    """Positive integer from REPEATER_THREADS, or None when unset."""
    raw = (env if env is not None else os.environ).get(THREADS_ENV)
    if raw is None or raw == "":
        return None
    n = int(raw)
    if n < 1:
        raise ValueError(f"{THREADS_ENV} must be a positive integer")
    return n


def simulate_attempts(
    p0: float,
    swap_probs,
    sim: SimConfig,
    attempt_period: float = 1.0,
    abort_on_cap: bool = True,
    threads: int | None = None,
) -> SimEstimate:
    """Estimate the root-link time for explicit per-level swap probabilities."""
    if not 0.0 < p0 <= 1.0:
        raise ValueError("p0 must be in (0,1]")
    probs = np.asarray(swap_probs, dtype=float)
    if np.any(probs <= 0) or np.any(probs > 1):
        raise ValueError("swap probabilities must be in (0,1]")
    n_threads = threads if threads is not None else thread_count()
    if n_threads is not None:
        nb.set_num_threads(min(n_threads, nb.config.NUMBA_NUM_THREADS))
    times = _run_trials(np.uint64(sim.seed % 2**64), sim.trials, len(probs), float(p0), probs, float(sim.max_attempt_cap))
    done = times >= 0
    n_done = int(done.sum())
    if n_done < sim.trials and abort_on_cap:
        raise AttemptCapExceeded(f"{sim.trials - n_done} trial(s) exceeded {sim.max_attempt_cap} attempts")
    if n_done == 0:
        return SimEstimate(math.inf, math.inf, 0.0, 0.0, sim.trials)
    completed = times[done]
    mean = float(np.mean(completed))
    sem = float(np.std(completed, ddof=1) / math.sqrt(n_done)) if n_done > 1 else 0.0
    mean_s = mean * attempt_period
    return SimEstimate(
        mean_time_s=mean_s,
        std_error_s=sem * attempt_period,
        rate_hz=1.0 / mean_s,
        success_fraction=n_done / sim.trials,
        trials=sim.trials,
    )


def simulate_chain(model: SchemeModel, chain: ChainConfig, sim: SimConfig, **kwargs) -> SimEstimate:
    """Monte Carlo estimate of the time to the root link of ``chain``.

    Per-level swap success probabilities are the same ones the analytic
    recursion uses.
    """
    probs = propagate(model, chain.nesting_s).swap_probs
    return simulate_attempts(model.generation_prob, probs, sim, model.attempt_period, **kwargs)


def exact_two_link_expectation(p0: float, p_swap: float, attempt_period: float = 1.0) -> float:
    """Expected completion time of two links plus one destructive swap.

    Transient states: no link, one link. Both missing links attempt every
    period; the swap is tried as soon as both exist, and a failure returns
    the chain to the empty state.
    """
    if not (0.0 < p0 <= 1.0 and 0.0 < p_swap <= 1.0):
        raise ValueError("probabilities must be in (0,1]")
    fail = 1.0 - p_swap
    Q = np.array(
        [
            [(1.0 - p0) ** 2 + p0 * p0 * fail, 2.0 * p0 * (1.0 - p0)],
            [p0 * fail, 1.0 - p0],
        ]
    )
    steps = np.linalg.solve(np.eye(2) - Q, np.ones(2))
    return float(steps[0]) * attempt_period
