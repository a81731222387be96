"""Exact occupation-basis states for short chains of two-colour atomic ensembles.

Each node stores a red and a blue symmetric spin wave; a state is a dense
complex array indexed by the occupation of every (node, colour) mode, with
axis ``2*node`` for red and ``2*node + 1`` for blue. With ``finite_n`` set,
creation operators carry the symmetric-subspace factors of an ensemble of N
atoms instead of the bosonic sqrt(m+1).

Nodes are 0-indexed: the three-ensemble chain of the protocol is nodes 0, 1, 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from itertools import product

import numpy as np

DEFAULT_DIM_CAP = 10**6
NORM_TOL = 1e-12


class Color(str, Enum):
    RED = "red"
    BLUE = "blue"


class ResourceError(RuntimeError):
    pass


class TruncationError(RuntimeError):
    """An operation would populate a mode beyond the occupation cutoff."""


def _axis(node: int, color: Color) -> int:
    return 2 * node + (0 if Color(color) is Color.RED else 1)


@dataclass(frozen=True, eq=False)
class StateVector:
    num_nodes: int
    n_max: int
    amplitudes: np.ndarray
    finite_n: int | None = None

    def __post_init__(self):
        self.amplitudes.setflags(write=False)

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.amplitudes, self.amplitudes).real))

    def normalized(self) -> "StateVector":
        nrm = self.norm
        if nrm == 0:
            raise ZeroDivisionError("cannot normalize the zero vector")
        return self._with(self.amplitudes / nrm)

    def amplitude(self, occupation: tuple[int, ...]) -> complex:
        return complex(self.amplitudes[occupation])

    def support(self, tol: float = 1e-14) -> dict[tuple[int, ...], complex]:
        """Non-zero amplitudes keyed by occupation tuple."""
        idx = np.argwhere(np.abs(self.amplitudes) > tol)
        return {tuple(int(i) for i in row): complex(self.amplitudes[tuple(row)]) for row in idx}

    def _with(self, amplitudes: np.ndarray) -> "StateVector":
        return StateVector(self.num_nodes, self.n_max, np.ascontiguousarray(amplitudes), self.finite_n)

    def _check_node(self, node: int) -> None:
        if not 0 <= node < self.num_nodes:
            raise IndexError(f"node {node} out of range for {self.num_nodes} nodes")


def vacuum(num_nodes: int, n_max: int = 2, finite_n: int | None = None, dim_cap: int = DEFAULT_DIM_CAP) -> StateVector:
    if num_nodes < 1 or n_max < 1:
        raise ValueError("num_nodes and n_max must be >= 1")
    if finite_n is not None and finite_n < 1:
        raise ValueError("finite_n must be >= 1")
    dim = (n_max + 1) ** (2 * num_nodes)
    if dim > dim_cap:
        raise ResourceError(f"basis dimension {dim} exceeds cap {dim_cap}")
    amps = np.zeros((n_max + 1,) * (2 * num_nodes), dtype=complex)
    amps[(0,) * (2 * num_nodes)] = 1.0
    return StateVector(num_nodes, n_max, amps, finite_n)


def _node_view(amps: np.ndarray, node: int) -> np.ndarray:
    """Array with the node's (red, blue) axes moved to the front."""
    return np.moveaxis(amps, (2 * node, 2 * node + 1), (0, 1))


def _from_node_view(view: np.ndarray, node: int) -> np.ndarray:
    return np.moveaxis(view, (0, 1), (2 * node, 2 * node + 1))


def create_spin_wave(state: StateVector, node: int, color: Color) -> StateVector:
    """Apply a collective creation operator; the result is not renormalized.

    Matrix elements are sqrt(m+1) for bosonic modes and
    sqrt((m+1)(N-r-b)/N) in the N-atom symmetric subspace.
    """
    state._check_node(node)
    color = Color(color)
    view = _node_view(state.amplitudes, node)
    out = np.zeros_like(view)
    top = state.n_max
    N = state.finite_n
    for r, b in product(range(top + 1), repeat=2):
        block = view[r, b]
        if not np.any(block):
            continue
        m = r if color is Color.RED else b
        if m == top:
            raise TruncationError(f"occupation of node {node} {color.value} would exceed n_max={top}")
        factor = math.sqrt(m + 1) if N is None else math.sqrt((m + 1) * max(N - r - b, 0) / N)
        target = (r + 1, b) if color is Color.RED else (r, b + 1)
        out[target] += factor * block
    return state._with(_from_node_view(out, node))


def prepare_link_ideal(state: StateVector, node_a: int, node_b: int, color: Color) -> StateVector:
    """Herald a single shared excitation: (s_a^+ + s_b^+) applied and renormalized."""
    if node_a == node_b:
        raise ValueError("link endpoints must be distinct")
    created = create_spin_wave(state, node_a, color).amplitudes + create_spin_wave(state, node_b, color).amplitudes
    return state._with(created).normalized()


@dataclass(frozen=True)
class EnsembleComponent:
    weight: float
    state: StateVector
    # classical count of non-symmetric (incoherent) excitations per node
    incoherent: tuple[int, ...]
    coherent_excitations: int


def prepare_link_noisy(
    state: StateVector,
    node_a: int,
    node_b: int,
    color: Color,
    q: float,
    eta: float,
    pir_survival: float = 1.0,
) -> list[EnsembleComponent]:
    """Post-click ensemble to second order in the excitation probability.

    Conditioned on one detector firing, the symmetric-mode part is the ideal
    single-excitation link with relative weight 1 and the two-excitation
    state (s_a^+ + s_b^+)^2|.> with relative weight eta*q. Independently,
    each node carries a non-symmetric excitation with probability
    (1-eta)*q*pir_survival, tracked only as a classical count.
    """
    if not eta * q < 0.5:
        raise ValueError("prepare_link_noisy requires eta*q < 0.5")
    single = prepare_link_ideal(state, node_a, node_b, color)
    pair = state._with(create_spin_wave(state, node_a, color).amplitudes + create_spin_wave(state, node_b, color).amplitudes)
    double_amps = create_spin_wave(pair, node_a, color).amplitudes + create_spin_wave(pair, node_b, color).amplitudes
    double = state._with(double_amps)
    coherent = [(1.0 / (1.0 + eta * q), single, 1)]
    if double.norm > 0:
        coherent.append((eta * q / (1.0 + eta * q), double.normalized(), 2))
    p_inc = (1.0 - eta) * q * pir_survival
    components = []
    for weight, vec, n_exc in coherent:
        for inc_a, inc_b in product((0, 1), repeat=2):
            w_inc = (p_inc if inc_a else 1.0 - p_inc) * (p_inc if inc_b else 1.0 - p_inc)
            counts = [0] * state.num_nodes
            counts[node_a] += inc_a
            counts[node_b] += inc_b
            components.append(EnsembleComponent(weight * w_inc, vec, tuple(counts), n_exc))
    return components


@lru_cache(maxsize=None)
def _rotation_elements(r: int, b: int) -> tuple[tuple[int, int, float], ...]:
    """<r', b'| U |r, b> for s_b^+ -> (s_b^+ + s_r^+)/sqrt2, s_r^+ -> (s_b^+ - s_r^+)/sqrt2."""
    n = r + b
    coeffs: dict[int, float] = {}
    # (B - R)^r (B + R)^b, keyed by the resulting power of R
    for i in range(r + 1):
        for j in range(b + 1):
            power_r = i + j
            c = math.comb(r, i) * (-1) ** i * math.comb(b, j)
            coeffs[power_r] = coeffs.get(power_r, 0) + c
    scale = 1.0 / (math.sqrt(2.0) ** n * math.sqrt(math.factorial(r) * math.factorial(b)))
    elements = []
    for power_r, c in coeffs.items():
        if c == 0:
            continue
        rb, bb = power_r, n - power_r
        elements.append((rb, bb, c * scale * math.sqrt(math.factorial(rb) * math.factorial(bb))))
    return tuple(elements)


def swap_rotation(state: StateVector, node: int) -> StateVector:
    """Pi/2 pulse between the node's storage levels, acting as a beam splitter.

    The map is its own inverse. Within the symmetric N-atom subspace it acts
    on (red, blue) occupations exactly as on two bosonic modes.
    """
    state._check_node(node)
    view = _node_view(state.amplitudes, node)
    out = np.zeros_like(view)
    top = state.n_max
    for r, b in product(range(top + 1), repeat=2):
        block = view[r, b]
        if not np.any(block):
            continue
        for r2, b2, c in _rotation_elements(r, b):
            if r2 > top or b2 > top:
                raise TruncationError(f"rotation on node {node} would exceed n_max={top}")
            out[r2, b2] += c * block
    return state._with(_from_node_view(out, node))


@dataclass(frozen=True)
class OutcomeLabel:
    detected_red: int
    detected_blue: int
    # true stored occupation; undetected excitations show up here only
    true_red: int
    true_blue: int

    @property
    def detected_total(self) -> int:
        return self.detected_red + self.detected_blue

    @property
    def phase_flip(self) -> bool:
        """A single red click leaves the outer link with a known sign flip."""
        return (self.detected_red, self.detected_blue) == (1, 0)


@dataclass(frozen=True)
class MeasurementOutcome:
    label: OutcomeLabel
    probability: float
    post_state: StateVector


def _binomial_pmf(n: int, p: float) -> list[float]:
    return [math.comb(n, k) * p**k * (1.0 - p) ** (n - k) for k in range(n + 1)]


def _extra_click_pmf(eta_f: float, dark_lambda: float, incoherent: int) -> dict[tuple[int, int], float]:
    """Distribution of spurious (red, blue) counts from incoherent excitations and dark events.

    Each incoherent excitation sits in either level after the rotation with
    equal odds; a dark event (probability 1 - exp(-lambda)) adds one count
    to a random level.
    """
    dist = {(0, 0): 1.0}

    def convolve(dist, step):
        out: dict[tuple[int, int], float] = {}
        for (a, b), p in dist.items():
            for (da, db), q in step.items():
                if p * q:
                    out[(a + da, b + db)] = out.get((a + da, b + db), 0.0) + p * q
        return out

    inc_step = {(0, 0): 1.0 - eta_f, (1, 0): eta_f / 2, (0, 1): eta_f / 2}
    for _ in range(incoherent):
        dist = convolve(dist, inc_step)
    p_dark = -math.expm1(-dark_lambda)
    if p_dark > 0:
        dist = convolve(dist, {(0, 0): 1.0 - p_dark, (1, 0): p_dark / 2, (0, 1): p_dark / 2})
    return dist


def fluorescent_measure(
    state: StateVector,
    node: int,
    eta_f: float = 1.0,
    dark_lambda: float = 0.0,
    incoherent: int = 0,
) -> list[MeasurementOutcome]:
    """Count excitations in both storage levels of ``node``.

    Each stored excitation is detected with probability ``eta_f``. Outcomes
    are resolved by (detected counts, true occupation) so that every
    post-state is pure; the measured node is reset to vacuum. Sum outcomes
    with equal detected counts to get observable probabilities.
    """
    state._check_node(node)
    if not 0.0 < eta_f <= 1.0:
        raise ValueError("eta_f must be in (0,1]")
    if dark_lambda < 0:
        raise ValueError("dark_lambda must be >= 0")
    total = state.norm ** 2
    view = _node_view(state.amplitudes, node)
    extra = _extra_click_pmf(eta_f, dark_lambda, incoherent)
    outcomes = []
    for r, b in product(range(state.n_max + 1), repeat=2):
        block = view[r, b]
        p_sector = float(np.vdot(block, block).real) / total
        if p_sector == 0.0:
            continue
        post = np.zeros_like(view)
        post[0, 0] = block
        post_state = state._with(_from_node_view(post, node)).normalized()
        counts: dict[tuple[int, int], float] = {}
        for (tr, pr), (tb, pb) in product(enumerate(_binomial_pmf(r, eta_f)), enumerate(_binomial_pmf(b, eta_f))):
            for (er, eb), pe in extra.items():
                key = (tr + er, tb + eb)
                counts[key] = counts.get(key, 0.0) + pr * pb * pe
        for (dr, db), p in sorted(counts.items()):
            if p > 0:
                outcomes.append(MeasurementOutcome(OutcomeLabel(dr, db, r, b), p_sector * p, post_state))
    return outcomes


def detection_probabilities(outcomes: list[MeasurementOutcome]) -> dict[tuple[int, int], float]:
    """Observable distribution over (detected red, detected blue)."""
    dist: dict[tuple[int, int], float] = {}
    for o in outcomes:
        key = (o.label.detected_red, o.label.detected_blue)
        dist[key] = dist.get(key, 0.0) + o.probability
    return dist


def single_click_probability(outcomes: list[MeasurementOutcome]) -> float:
    return sum(o.probability for o in outcomes if o.label.detected_total == 1)


def correct_phase(state: StateVector, node: int, color: Color) -> StateVector:
    """Apply the sign flip (-1)^m on one mode."""
    axis = _axis(node, color)
    signs = (-1.0) ** np.arange(state.n_max + 1)
    shape = [1] * state.amplitudes.ndim
    shape[axis] = -1
    return state._with(state.amplitudes * signs.reshape(shape))


def fidelity(state: StateVector, target: StateVector) -> float:
    if state.amplitudes.shape != target.amplitudes.shape:
        raise ValueError(f"mode structure mismatch: {state.amplitudes.shape} vs {target.amplitudes.shape}")
    overlap = np.vdot(target.amplitudes, state.amplitudes)
    value = abs(overlap) ** 2 / (state.norm**2 * target.norm**2)
    return float(min(value, 1.0))


# --- protocol building blocks ----------------------------------------------

def two_link_state(n_max: int = 2, finite_n: int | None = None) -> StateVector:
    """Blue link on nodes 0-1 and red link on nodes 1-2 of a three-node chain."""
    vac = vacuum(3, n_max, finite_n)
    return prepare_link_ideal(prepare_link_ideal(vac, 0, 1, Color.BLUE), 1, 2, Color.RED)


def connected_target(n_max: int = 2, finite_n: int | None = None) -> StateVector:
    """Outer link after a successful swap: blue on node 0 or red on node 2."""
    vac = vacuum(3, n_max, finite_n)
    amps = create_spin_wave(vac, 0, Color.BLUE).amplitudes + create_spin_wave(vac, 2, Color.RED).amplitudes
    return vac._with(amps).normalized()


@dataclass(frozen=True)
class SwapCheck:
    success_probability: float
    raw_fidelity: float
    corrected_fidelity: float


def swap_check(eta_f: float = 1.0, dark_lambda: float = 0.0, finite_n: int | None = None) -> SwapCheck:
    """Run rotation plus fluorescent readout on the middle node of the two-link chain.

    Fidelities are the probability-weighted averages over single-click
    outcomes, before and after applying the heralded sign correction on
    node 0's blue mode.
    """
    rotated = swap_rotation(two_link_state(finite_n=finite_n), 1)
    target = connected_target(finite_n=finite_n)
    outcomes = [o for o in fluorescent_measure(rotated, 1, eta_f, dark_lambda) if o.label.detected_total == 1]
    p = sum(o.probability for o in outcomes)
    raw = sum(o.probability * fidelity(o.post_state, target) for o in outcomes) / p
    corrected = sum(
        o.probability
        * fidelity(correct_phase(o.post_state, 0, Color.BLUE) if o.label.phase_flip else o.post_state, target)
        for o in outcomes
    ) / p
    return SwapCheck(p, raw, corrected)


# --- exact finite-N oracle --------------------------------------------------

_G, _R, _B = 0, 1, 2
MAX_BRUTE_FORCE_N = 6


def brute_force_swap_success(n_atoms: int) -> Fraction:
    """Single-atom fluorescence probability by enumerating individual atoms.

    Builds the two-link state of three N-atom ensembles atom by atom, with
    collective operators written as plain sums over atoms (the 1/sqrt(N)
    normalizations are common to every term and drop out). The middle
    ensemble's atoms are then rotated one by one and the stored excitation
    count is read out. Amplitudes stay integers; the 1/sqrt2 per rotated
    excitation is tracked as a power of two, so the result is exact.
    """
    if not 1 <= n_atoms <= MAX_BRUTE_FORCE_N:
        raise ResourceError(f"brute force limited to 1 <= N <= {MAX_BRUTE_FORCE_N}")
    N = n_atoms
    vac = ((_G,) * N,) * 3

    def raise_atom(config, node, atom, level):
        if config[node][atom] != _G:
            return None
        ens = list(config[node])
        ens[atom] = level
        new = list(config)
        new[node] = tuple(ens)
        return tuple(new)

    def apply_collective(amps, nodes, level):
        out: dict = {}
        for config, a in amps.items():
            for node in nodes:
                for atom in range(N):
                    new = raise_atom(config, node, atom, level)
                    if new is not None:
                        out[new] = out.get(new, 0) + a
        return out

    psi = apply_collective({vac: 1}, (0, 1), _B)
    psi = apply_collective(psi, (1, 2), _R)
    norm2 = Fraction(sum(a * a for a in psi.values()))

    # rotate every middle atom: |b> -> |b> + |r>, |r> -> |b> - |r>  (times 1/sqrt2 each)
    rotated: dict = {}
    for config, a in psi.items():
        branches = [((), a)]
        for level in config[1]:
            nxt = []
            for prefix, amp in branches:
                if level == _G:
                    nxt.append((prefix + (_G,), amp))
                elif level == _B:
                    nxt += [(prefix + (_B,), amp), (prefix + (_R,), amp)]
                else:
                    nxt += [(prefix + (_B,), amp), (prefix + (_R,), -amp)]
            branches = nxt
        for middle, amp in branches:
            key = (config[0], middle, config[2])
            rotated[key] = rotated.get(key, 0) + amp

    success = Fraction(0)
    for config, a in rotated.items():
        excited = sum(1 for level in config[1] if level != _G)
        if excited == 1:
            success += Fraction(a * a, 2**excited)
    return success / norm2
