"""Closed-form rates, efficiencies and error probabilities of the fluorescent-detection repeater.

All frequencies are angular (rad/s); lengths of ensembles are in metres and
fibre lengths in km. Probability-like outputs that leave [0, 1] outside the
asymptotic regime are clamped with a :class:`RegimeWarning`, never silently.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .model import ETA_Q_MAX, MISMATCH_PRODUCT_MIN, LinkParams, PhysicalParams


class DomainError(ValueError):
    pass


class RegimeWarning(UserWarning):
    """An input lies outside the regime a leading-order formula assumes."""


def _clamp_probability(value: float, what: str) -> float:
    if value > 1.0:
        warnings.warn(f"{what} = {value:.6g} exceeds 1; clamped", RegimeWarning, stacklevel=3)
        return 1.0
    return max(value, 0.0)


def _require_positive(**kwargs: float) -> None:
    for name, value in kwargs.items():
        if not value > 0:
            raise DomainError(f"{name} must be > 0, got {value!r}")


# --- fluorescent detection and dark counts ---------------------------------

def fluorescence_rate(gamma: float, omega_p: float) -> float:
    """Scattering rate on the cycling transition, saturating at gamma/2."""
    _require_positive(gamma=gamma)
    if omega_p < 0:
        raise DomainError("omega_p must be >= 0")
    op2 = omega_p * omega_p
    return gamma * op2 / (gamma * gamma + 2.0 * op2)


def leak_rate(gamma: float, omega_p: float, beta: float, delta: float) -> float:
    """Off-resonant probe transfer rate from the reservoir into a storage level."""
    _require_positive(delta=delta)
    return beta * gamma * omega_p * omega_p / (4.0 * delta * delta)


def dark_count_expectation(physical: PhysicalParams, link: LinkParams) -> float:
    """Expected reservoir population transferred while collecting ``n_photons``.

    The measurement lasts n / (eta eta_d r); during it the N reservoir atoms
    leak into the detected level at rate r'.
    """
    p = physical
    r = fluorescence_rate(p.gamma, p.omega_p)
    collection = p.eta * link.eta_d * r
    if collection == 0:
        raise DomainError("eta * eta_d * fluorescence_rate is zero; measurement never completes")
    r_leak = leak_rate(p.gamma, p.omega_p, p.beta, p.delta)
    return link.n_photons * r_leak * p.n_atoms / collection


# --- purification by interrupted retrieval ---------------------------------

@dataclass(frozen=True)
class PirResult:
    t_min: float
    t_max: float
    t_chosen: float = math.nan
    delta_loss: float = math.nan
    suppression: float = math.nan
    feasible: bool = False


def group_velocity(omega_c: float, length_l: float, gamma: float, depth_d: float) -> float:
    _require_positive(omega_c=omega_c, length_l=length_l, gamma=gamma, depth_d=depth_d)
    return omega_c * omega_c * length_l / (gamma * depth_d)


def pir_window(physical: PhysicalParams, margin: float = 10.0) -> PirResult:
    """Control-pulse window: long enough for single-emitter decay, short against transit.

    The window ratio t_max/t_min equals the optical depth, so feasibility is
    ``depth_d >= margin``.
    """
    if not margin > 1:
        raise DomainError("margin must be > 1")
    p = physical
    v_g = group_velocity(p.omega_c, p.length_l, p.gamma, p.depth_d)
    t_min = p.gamma / (p.omega_c * p.omega_c)
    t_max = p.length_l / v_g
    return PirResult(t_min=t_min, t_max=t_max, feasible=t_max / t_min >= margin)


def pir_loss(t_chosen: float, v_g: float, length_l: float) -> float:
    """Upper bound on the symmetric spin-wave fraction lost during a pulse of length t_chosen."""
    if t_chosen < 0:
        raise DomainError("t_chosen must be >= 0")
    _require_positive(v_g=v_g, length_l=length_l)
    return _clamp_probability(2.0 * v_g * t_chosen / length_l, "PIR loss")


def pir_suppression(eta: float, delta_loss: float, depth_d: float) -> float:
    """Surviving fraction of non-symmetric excitations after the pulse."""
    return eta + (1.0 - eta) * math.exp(-delta_loss * depth_d / 2.0)


def pir_cost_for_target(eta: float, depth_d: float) -> float:
    """Spin-wave loss needed to push non-symmetric excitations down to the eta level.

    Natural log, so that exp(-delta d / 2) == eta exactly.
    """
    if not 0.0 < eta < 1.0:
        raise DomainError("eta must be in (0,1)")
    _require_positive(depth_d=depth_d)
    return -2.0 * math.log(eta) / depth_d


def pir_operating_point(
    physical: PhysicalParams, margin: float = 10.0, delta_loss: float | None = None
) -> PirResult:
    """Fill a PirResult for a target loss (default: the eta-level target)."""
    p = physical
    window = pir_window(p, margin)
    if delta_loss is None:
        delta_loss = pir_cost_for_target(p.eta, p.depth_d)
    v_g = group_velocity(p.omega_c, p.length_l, p.gamma, p.depth_d)
    t_chosen = delta_loss * p.length_l / (2.0 * v_g)
    loss = pir_loss(t_chosen, v_g, p.length_l)
    return PirResult(
        t_min=window.t_min,
        t_max=window.t_max,
        t_chosen=t_chosen,
        delta_loss=loss,
        suppression=pir_suppression(p.eta, loss, p.depth_d),
        feasible=window.feasible and window.t_min < t_chosen < window.t_max,
    )


# --- link level ------------------------------------------------------------

def link_efficiency(eta: float, eta_d: float, l0_km: float, latt_km: float) -> float:
    """Heralding efficiency over half a segment of fibre."""
    return eta * eta_d * math.exp(-l0_km / (2.0 * latt_km))


def mismatch_separable_prob(beta: float, eta_prime: float, n_atoms: float) -> float:
    """Chance that red/blue spin-wave mismatch leaves a separable state after a swap."""
    if beta <= 0:
        raise DomainError("beta must be > 0")
    _require_positive(eta_prime=eta_prime, n_atoms=n_atoms)
    product = beta * eta_prime * n_atoms
    if product < MISMATCH_PRODUCT_MIN:
        warnings.warn(f"beta*eta'*N = {product:.3g} is not >> 1", RegimeWarning, stacklevel=2)
    return _clamp_probability((1.0 - beta) / product, "mismatch probability")


def mismatch_expected_attempts(beta: float, eta_prime: float, q: float) -> float:
    _require_positive(beta=beta, eta_prime=eta_prime, q=q)
    return 1.0 / (beta * eta_prime * q)


def swap_success_ideal(n_atoms: int) -> float:
    """Probability that exactly one atom fluoresces after the pi/2 rotation; -> 1/2."""
    if n_atoms < 1:
        raise DomainError("n_atoms must be >= 1")
    return 2.0 * n_atoms / (4.0 * n_atoms - 1.0)


def generation_success_prob(q: float, eta: float, eta_d: float, l0_km: float, latt_km: float) -> float:
    """Single-click heralding probability per attempt, to first order in eta*q.

    Either ensemble can supply the click, hence the factor 2.
    """
    if eta * q > ETA_Q_MAX:
        warnings.warn(f"eta*q = {eta * q:.3g} is not << 1", RegimeWarning, stacklevel=2)
    return 2.0 * q * link_efficiency(eta, eta_d, l0_km, latt_km)
