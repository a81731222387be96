"""Rate maximization under a final-fidelity constraint, and distance sweeps.

The search is exhaustive over the nesting level; at each level the
excitation probability is the largest one meeting the target (bisection),
and the PIR pulse sits at the eta-level operating point unless
``chain.optimize_pir`` asks for a small grid around it.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import physics
from .model import ChainConfig, LinkParams, PhysicalParams, RateResult, Scheme
from .rates import (
    PirInfeasibleError,
    analytic_rate,
    build_scheme_model,
    max_q_for_fidelity,
)

PIR_GRID = (0.5, 0.75, 1.0, 1.5, 2.0)


@dataclass(frozen=True)
class GridPoint:
    nesting_s: int
    q: float
    delta_loss: float
    rate_hz: float
    fidelity: float
    feasible: bool


@dataclass(frozen=True)
class OptimizationResult:
    best: RateResult | None
    grid_trace: tuple[GridPoint, ...]
    feasible: bool
    nesting_s: int | None = None
    error: str | None = None

    @property
    def rate_hz(self) -> float:
        return self.best.rate_hz if self.best is not None else 0.0

    @property
    def segments(self) -> int | None:
        return None if self.nesting_s is None else 2**self.nesting_s

    @property
    def q(self) -> float:
        return self.best.q if self.best is not None else math.nan


def _pir_candidates(chain: ChainConfig, physical: PhysicalParams):
    if not (chain.scheme.is_new and chain.pir_enabled):
        return (None,)
    target = physics.pir_cost_for_target(physical.eta, physical.depth_d)
    if not chain.optimize_pir:
        return (target,)
    return tuple(target * f for f in PIR_GRID)


def optimize_at_distance(
    total_km: float,
    physical: PhysicalParams,
    link: LinkParams,
    chain: ChainConfig,
    scheme: Scheme | None = None,
    target_f: float | None = None,
) -> OptimizationResult:
    """Best rate over nesting levels chain.s_min..chain.s_max at one distance."""
    scheme = Scheme(scheme) if scheme is not None else chain.scheme
    target_f = chain.target_fidelity if target_f is None else target_f
    base = replace(chain, total_km=total_km, scheme=scheme, target_fidelity=target_f)
    trace: list[GridPoint] = []
    best: RateResult | None = None
    best_s = None
    with warnings.catch_warnings():
        # the scan crosses regimes where leading-order formulas clamp
        warnings.simplefilter("ignore", physics.RegimeWarning)
        for s in range(base.s_min, base.s_max + 1):
            c = replace(base, nesting_s=s)
            for delta_loss in _pir_candidates(c, physical):
                try:
                    model = build_scheme_model(c, physical, link, delta_loss)
                except PirInfeasibleError:
                    trace.append(GridPoint(s, 0.0, math.nan if delta_loss is None else delta_loss, 0.0, 0.0, False))
                    continue
                dl = model.pir.delta_loss if model.pir is not None else 0.0
                q = max_q_for_fidelity(model, c, physical, link, target_f)
                if q == 0.0:
                    trace.append(GridPoint(s, 0.0, dl, 0.0, 0.0, False))
                    continue
                result = analytic_rate(model.with_q(q), c, physical, link)
                trace.append(GridPoint(s, q, dl, result.rate_hz, result.fidelity, True))
                if best is None or result.rate_hz > best.rate_hz:
                    best, best_s = result, s
    return OptimizationResult(best, tuple(trace), best is not None, best_s)


@dataclass
class SweepTable:
    distances_km: list[float]
    schemes: list[Scheme]
    results: dict[tuple[int, Scheme], OptimizationResult] = field(default_factory=dict)

    def rate(self, i: int, scheme: Scheme) -> float:
        return self.results[(i, scheme)].rate_hz

    def ratio(self, i: int, new: Scheme) -> float:
        """Rate of a new variant over its retrieval-based counterpart."""
        num, den = self.rate(i, new), self.rate(i, new.reference())
        if den == 0.0:
            return math.inf if num > 0 else math.nan
        return num / den


def distance_grid(d_min_km: float, d_max_km: float, points: int, extra_km=()) -> list[float]:
    if not d_min_km < d_max_km:
        raise ValueError("d_min must be < d_max")
    if points < 2:
        raise ValueError("points must be >= 2")
    grid = set(float(d) for d in np.geomspace(d_min_km, d_max_km, points))
    grid.update(float(d) for d in extra_km)
    return sorted(grid)


def sweep_distances(
    d_min_km: float,
    d_max_km: float,
    points: int,
    schemes,
    physical: PhysicalParams,
    link: LinkParams,
    chain: ChainConfig,
    extra_km=(),
    threads: int | None = None,
) -> SweepTable:
    """Optimize every (distance, scheme) pair on a log-spaced grid.

    A point that raises is recorded as infeasible with its error message;
    the rest of the sweep proceeds.
    """
    distances = distance_grid(d_min_km, d_max_km, points, extra_km)
    schemes = [Scheme(s) for s in schemes]
    table = SweepTable(distances, schemes)
    tasks = [(i, d, s) for i, d in enumerate(distances) for s in schemes]

    def run(task):
        i, d, s = task
        try:
            return (i, s), optimize_at_distance(d, physical, link, chain, s)
        except Exception as exc:  # keep sweeping; the row records the failure
            return (i, s), OptimizationResult(None, (), False, None, f"{type(exc).__name__}: {exc}")

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outputs = list(pool.map(run, tasks))
    else:
        outputs = [run(t) for t in tasks]
    table.results.update(outputs)
    return table
