"""Analytic rate and fidelity-budget models for the new and the retrieval-based schemes.

Two multiexcitation error models are available (``ChainConfig.error_model``):

``quadratic``
    eps_multi = kappa_m * q_eff * (2**s)**2 and a constant per-level swap
    success ``swap_base_prob * connection_efficiency``.

``loss_aware``
    Each link is a classical distribution over the excitation numbers
    (left end, right end), W[a, b] for a, b in {0, 1, 2}. A swap of two links
    maps W -> W A W, where A[m1, m2] is the probability that the middle
    node's detectors report exactly one excitation given m1 and m2 stored
    excitations (beam-splitter statistics, per-excitation efficiency
    eta_c). Fluorescent readout resolves excitation number; the reference
    schemes use threshold single-photon detectors. Connection loss then
    shows up as a growing vacuum component and as multiexcitation errors
    that pass the herald. The final pair is postselected across two chains
    (one excitation at each end), which removes the vacuum at the cost of
    a (1 - v)**2 rate factor and leaves vacuum x double-excitation events
    as the fidelity error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from . import physics
from .model import (
    ETA_Q_MAX,
    ChainConfig,
    ErrorModel,
    LinkParams,
    PhysicalParams,
    RateResult,
    Scheme,
)

# cap on the per-attempt excitation probability explored by the optimizer
Q_MAX = 0.5
WAITING_FACTOR = 1.5
BISECTION_RTOL = 1e-6
Q_FLOOR = 1e-12
_OCC = 3  # occupations 0, 1, 2 per link end


class PirInfeasibleError(ValueError):
    pass


class ZeroProbabilityError(ValueError):
    pass


@dataclass(frozen=True)
class SchemeModel:
    scheme: Scheme
    connection_efficiency: float
    generation_prob: float
    attempt_period: float
    swap_base_prob: float
    q: float = 0.0
    link_eta: float = 0.0
    # q_eff / q for the multiexcitation error
    multi_scale: float = 1.0
    number_resolving: bool = True
    kappa_m: float = 1.0
    error_model: ErrorModel = ErrorModel.QUADRATIC
    pir: physics.PirResult | None = None

    def with_q(self, q: float) -> "SchemeModel":
        p0 = 2.0 * q * self.link_eta
        return replace(self, q=q, generation_prob=p0 * p0 if self.scheme.is_dual else p0)

    @property
    def q_eff(self) -> float:
        return self.q * self.multi_scale


def reference_connection_efficiency(c_r: float, depth_d: float, eta_d_ref: float) -> float:
    """Retrieval efficiency 1 - c_r/sqrt(d) times single-photon detection."""
    return max(0.0, 1.0 - c_r / math.sqrt(depth_d)) * eta_d_ref


def build_scheme_model(
    chain: ChainConfig,
    physical: PhysicalParams,
    link: LinkParams,
    delta_loss: float | None = None,
) -> SchemeModel:
    """Per-segment model for ``chain.scheme`` at segment length total/2**s.

    ``delta_loss`` overrides the PIR operating point (default: the loss
    that pushes non-symmetric excitations down to the eta level).
    """
    l0 = chain.l0_km
    eta_prime = physics.link_efficiency(physical.eta, link.eta_d, l0, link.latt_km)
    pir = None
    if chain.scheme.is_new:
        if chain.pir_enabled:
            pir = physics.pir_operating_point(physical, chain.pir_margin, delta_loss)
            if not pir.feasible:
                raise PirInfeasibleError(
                    f"PIR window infeasible (depth {physical.depth_d} vs margin {chain.pir_margin})"
                )
            conn = link.eta_f * (1.0 - pir.delta_loss)
            multi = pir.suppression
        else:
            conn = link.eta_f
            multi = 1.0
        swap_base = physics.swap_success_ideal(physical.n_atoms)
        resolving = True
    else:
        conn = reference_connection_efficiency(chain.c_r, physical.depth_d, chain.eta_d_ref)
        multi = physical.eta
        swap_base = 0.5
        resolving = False
    model = SchemeModel(
        scheme=chain.scheme,
        connection_efficiency=conn,
        generation_prob=0.0,
        attempt_period=l0 * 1e3 / chain.fiber_light_speed,
        swap_base_prob=swap_base,
        link_eta=eta_prime,
        multi_scale=multi,
        number_resolving=resolving,
        kappa_m=chain.kappa_m,
        error_model=chain.error_model,
        pir=pir,
    )
    return model.with_q(link.q)


# --- loss-aware population propagation -------------------------------------

@lru_cache(maxsize=256)
def _beam_splitter_counts(m1: int, m2: int) -> tuple[tuple[int, float], ...]:
    """Output distribution (k1, P) of Fock input |m1, m2> on a balanced beam splitter."""
    n = m1 + m2
    amps: dict[int, float] = {}
    for i in range(m1 + 1):
        for j in range(m2 + 1):
            k1 = i + j
            c = math.comb(m1, i) * math.comb(m2, j) * (-1) ** (m2 - j)
            amps[k1] = amps.get(k1, 0.0) + c
    norm = math.sqrt(math.factorial(m1) * math.factorial(m2)) * math.sqrt(2.0) ** n
    out = []
    for k1, c in sorted(amps.items()):
        a = c * math.sqrt(math.factorial(k1) * math.factorial(n - k1)) / norm
        if abs(a) > 1e-15:
            out.append((k1, a * a))
    return tuple(out)


@lru_cache(maxsize=256)
def herald_matrix(eta_c: float, number_resolving: bool) -> np.ndarray:
    """A[m1, m2]: probability of a single-excitation herald from m1, m2 stored excitations."""
    A = np.zeros((_OCC, _OCC))
    for m1 in range(_OCC):
        for m2 in range(_OCC):
            total = 0.0
            for k1, p in _beam_splitter_counts(m1, m2):
                k2 = m1 + m2 - k1
                miss1 = (1.0 - eta_c) ** k1
                miss2 = (1.0 - eta_c) ** k2
                if number_resolving:
                    one1 = k1 * eta_c * (1.0 - eta_c) ** (k1 - 1) if k1 else 0.0
                    one2 = k2 * eta_c * (1.0 - eta_c) ** (k2 - 1) if k2 else 0.0
                    total += p * (one1 * miss2 + one2 * miss1)
                else:
                    total += p * ((1.0 - miss1) * miss2 + (1.0 - miss2) * miss1)
            A[m1, m2] = total
    A.setflags(write=False)
    return A


@dataclass(frozen=True)
class ChainPopulations:
    swap_probs: tuple[float, ...]
    vacuum_fraction: float
    # multiexcitation-limited fidelity of the delivered pair
    multi_fidelity: float


def initial_link(error_weight: float) -> tuple[np.ndarray, np.ndarray]:
    """(all, error-free) populations of a freshly heralded link.

    The two-excitation part is (s_a^+ + s_b^+)^2|vac>, i.e. populations
    1/4, 1/2, 1/4 on (2,0), (1,1), (0,2).
    """
    W = np.zeros((_OCC, _OCC))
    W[1, 0] = W[0, 1] = 0.5
    G = W.copy()
    W[2, 0] = W[0, 2] = error_weight / 4.0
    W[1, 1] = error_weight / 2.0
    total = W.sum()
    return W / total, G / total


def propagate(model: SchemeModel, nesting_s: int) -> ChainPopulations:
    if model.error_model is ErrorModel.QUADRATIC:
        p = model.swap_base_prob * model.connection_efficiency
        eps = model.kappa_m * model.q_eff * float(4**nesting_s)
        return ChainPopulations((p,) * nesting_s, 0.0, max(0.0, 1.0 - eps))

    A = herald_matrix(model.connection_efficiency, model.number_resolving)
    W, G = initial_link(model.kappa_m * model.q_eff)
    probs = []
    for _ in range(nesting_s):
        W_next = W @ A @ W
        G_next = G @ A @ G
        p = float(W_next.sum())
        probs.append(p)
        if p == 0.0:
            return ChainPopulations(tuple(probs), 1.0, 0.0)
        W, G = W_next / p, G_next / p
    accepted = 2.0 * (W[1, 0] * W[0, 1] + W[1, 1] * W[0, 0])
    good = 2.0 * G[1, 0] * G[0, 1]
    fid = good / accepted if accepted > 0 else 0.0
    return ChainPopulations(tuple(probs), float(W[0, 0]), float(min(1.0, fid)))


# --- rates and budgets -----------------------------------------------------

def link_time(model: SchemeModel, swap_probs) -> float:
    """Mean time to the root link by the 3/2 waiting-time recursion."""
    if model.generation_prob <= 0:
        raise ZeroProbabilityError("generation probability is zero")
    t = model.attempt_period / model.generation_prob
    for i, p in enumerate(swap_probs):
        if p <= 0:
            raise ZeroProbabilityError(f"swap success probability at level {i} is zero")
        t = WAITING_FACTOR * t / p
    return t


@dataclass(frozen=True)
class FidelityBudget:
    errors: dict[str, float]
    fidelity: float


def fidelity_budget(
    model: SchemeModel,
    chain: ChainConfig,
    physical: PhysicalParams,
    link: LinkParams,
    populations: ChainPopulations | None = None,
) -> FidelityBudget:
    """Additive error budget of the delivered pair.

    Mismatch and dark-count errors are specific to fluorescent readout and
    enter once per swap; the retrieval-based schemes carry neither.
    ``pir_loss`` is reported for reference but is a rate loss, not a
    fidelity error.
    """
    s = chain.nesting_s
    pops = populations if populations is not None else propagate(model, s)
    eps_multi = 1.0 - pops.multi_fidelity
    swaps = 2**s - 1
    if model.scheme.is_new and swaps:
        eps_mismatch = swaps * physics.mismatch_separable_prob(physical.beta, model.link_eta, physical.n_atoms)
        eps_dark = swaps * min(1.0, physics.dark_count_expectation(physical, link))
    else:
        eps_mismatch = eps_dark = 0.0
    errors = {
        "multiexcitation": min(1.0, eps_multi),
        "mismatch": min(1.0, eps_mismatch),
        "dark_count": min(1.0, eps_dark),
        "pir_loss": model.pir.delta_loss if model.pir is not None else 0.0,
    }
    fid = max(0.0, 1.0 - eps_multi - eps_mismatch - eps_dark)
    return FidelityBudget(errors, fid)


def analytic_rate(
    model: SchemeModel,
    chain: ChainConfig,
    physical: PhysicalParams | None = None,
    link: LinkParams | None = None,
) -> RateResult:
    """Delivered rate at nesting level ``chain.nesting_s``.

    ``link_rate_hz`` is 1/T_s from the waiting-time recursion; ``rate_hz``
    multiplies it by the two-chain postselection factor (1 - v)**2, which is
    1 in the quadratic model. Without physical/link parameters only the
    multiexcitation term enters the fidelity.
    """
    pops = propagate(model, chain.nesting_s)
    link_rate = 1.0 / link_time(model, pops.swap_probs)
    if physical is not None and link is not None:
        budget = fidelity_budget(model, chain, physical, link, pops)
        errors, fid, params = budget.errors, budget.fidelity, (chain, link, physical)
    else:
        eps = 1.0 - pops.multi_fidelity
        errors, fid, params = {"multiexcitation": eps}, pops.multi_fidelity, None
    return RateResult(
        rate_hz=link_rate * (1.0 - pops.vacuum_fraction) ** 2,
        fidelity=fid,
        error_budget=errors,
        params=params,
        link_rate_hz=link_rate,
        vacuum_fraction=pops.vacuum_fraction,
        q=model.q,
    )


def q_upper_bound(physical: PhysicalParams) -> float:
    return min(Q_MAX, ETA_Q_MAX / physical.eta)


def max_q_for_fidelity(
    model: SchemeModel,
    chain: ChainConfig,
    physical: PhysicalParams,
    link: LinkParams,
    target_f: float,
) -> float:
    """Largest q with fidelity >= target_f, by bisection in log q.

    Returns 0.0 when the q-independent errors alone break the target, and
    the regime cap ``q_upper_bound`` when the target holds all the way up.
    """
    if not 0.0 < target_f < 1.0:
        raise ValueError("target_f must be in (0,1)")

    def fid(q: float) -> float:
        return fidelity_budget(model.with_q(q), chain, physical, link).fidelity

    lo, hi = Q_FLOOR, q_upper_bound(physical)
    if fid(lo) < target_f:
        return 0.0
    if fid(hi) >= target_f:
        return hi
    while hi / lo - 1.0 > BISECTION_RTOL:
        mid = math.sqrt(lo * hi)
        if fid(mid) >= target_f:
            lo = mid
        else:
            hi = mid
    return lo
