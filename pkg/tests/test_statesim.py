import math
import time
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fluorep import statesim as ss
from fluorep.statesim import Color

SQRT_HALF = 1 / math.sqrt(2)


def occ(*pairs):
    """Occupation tuple from per-node (red, blue) pairs."""
    return tuple(x for pair in pairs for x in pair)


def random_state(rng, num_nodes=2, n_max=2):
    shape = (n_max + 1,) * (2 * num_nodes)
    amps = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    vac = ss.vacuum(num_nodes, n_max)
    return vac._with(amps).normalized()


# --- vacuum and creation ----------------------------------------------------

def test_vacuum_shape_and_norm():
    v = ss.vacuum(3, 2)
    assert v.amplitudes.size == 3**6
    assert v.support() == {(0,) * 6: 1}
    assert v.norm == 1.0


def test_vacuum_finite_n_one_is_same_vacuum():
    assert np.array_equal(ss.vacuum(2, 2, finite_n=1).amplitudes, ss.vacuum(2, 2).amplitudes)


def test_vacuum_dimension_cap():
    with pytest.raises(ss.ResourceError):
        ss.vacuum(6, 3, dim_cap=10**6)


def test_amplitudes_are_read_only():
    with pytest.raises(ValueError):
        ss.vacuum(1).amplitudes[0, 0] = 2


def test_single_creation_norm():
    s = ss.create_spin_wave(ss.vacuum(2), 0, Color.BLUE)
    assert s.norm == pytest.approx(1.0, abs=1e-12)
    assert s.support() == {occ((0, 1), (0, 0)): 1}


def test_one_atom_cannot_hold_two_excitations():
    s = ss.vacuum(1, finite_n=1)
    s = ss.create_spin_wave(ss.create_spin_wave(s, 0, Color.RED), 0, Color.BLUE)
    assert s.norm == 0.0


def test_mixed_pair_norm_at_three_atoms():
    s = ss.vacuum(1, finite_n=3)
    s = ss.create_spin_wave(ss.create_spin_wave(s, 0, Color.BLUE), 0, Color.RED)
    # atom-configuration count oracle: 2/3
    assert s.norm**2 == pytest.approx(2 / 3, abs=1e-12)


def test_bosonic_double_creation():
    s = ss.create_spin_wave(ss.create_spin_wave(ss.vacuum(1), 0, Color.RED), 0, Color.RED)
    assert s.amplitude((2, 0)) == pytest.approx(math.sqrt(2))


def test_truncation_is_flagged():
    s = ss.vacuum(1, n_max=1)
    s = ss.create_spin_wave(s, 0, Color.RED)
    with pytest.raises(ss.TruncationError):
        ss.create_spin_wave(s, 0, Color.RED)


def test_bad_node_index():
    with pytest.raises(IndexError):
        ss.create_spin_wave(ss.vacuum(2), 2, Color.RED)


# --- links ------------------------------------------------------------------

def test_ideal_link_equal_superposition():
    s = ss.prepare_link_ideal(ss.vacuum(2), 0, 1, Color.RED)
    sup = s.support()
    assert set(sup) == {occ((1, 0), (0, 0)), occ((0, 0), (1, 0))}
    assert all(a == pytest.approx(SQRT_HALF) for a in sup.values())
    assert s.norm == pytest.approx(1.0, abs=1e-12)


def test_two_link_state_components():
    s = ss.two_link_state()
    sup = s.support()
    assert len(sup) == 4
    assert all(a == pytest.approx(0.5) for a in sup.values())
    expected = {
        occ((0, 1), (1, 0), (0, 0)),
        occ((0, 1), (0, 0), (1, 0)),
        occ((0, 0), (1, 1), (0, 0)),
        occ((0, 0), (0, 1), (1, 0)),
    }
    assert set(sup) == expected
    assert s.norm == pytest.approx(1.0, abs=1e-12)


def test_noisy_link_weights_sum_to_one():
    comps = ss.prepare_link_noisy(ss.vacuum(2, 3), 0, 1, Color.RED, q=0.02, eta=0.05, pir_survival=0.1)
    assert sum(c.weight for c in comps) == pytest.approx(1.0, abs=1e-12)
    assert all(c.state.norm == pytest.approx(1.0, abs=1e-12) for c in comps)


def _coherent_weights(q, eta):
    comps = ss.prepare_link_noisy(ss.vacuum(2, 3), 0, 1, Color.RED, q=q, eta=eta)
    single = sum(c.weight for c in comps if c.coherent_excitations == 1)
    double = sum(c.weight for c in comps if c.coherent_excitations == 2)
    return single, double


def test_noisy_link_ideal_limit():
    single, _ = _coherent_weights(1e-9, 0.05)
    assert single == pytest.approx(1.0, abs=1e-9)
    comps = ss.prepare_link_noisy(ss.vacuum(2, 3), 0, 1, Color.RED, q=1e-9, eta=0.05)
    top = max(comps, key=lambda c: c.weight)
    assert ss.fidelity(top.state, ss.prepare_link_ideal(ss.vacuum(2, 3), 0, 1, Color.RED)) == pytest.approx(1.0)


def test_double_excitation_ratio_scales_with_eta_q():
    eta = 0.05
    r1 = np.divide(*_coherent_weights(1e-3, eta)[::-1])
    r2 = np.divide(*_coherent_weights(1e-2, eta)[::-1])
    assert r1 == pytest.approx(eta * 1e-3, rel=1e-12)
    assert r2 / r1 == pytest.approx(10.0, rel=1e-12)


def test_noisy_link_incoherent_probability():
    q, eta, surv = 0.02, 0.05, 0.1
    comps = ss.prepare_link_noisy(ss.vacuum(2, 3), 0, 1, Color.RED, q=q, eta=eta, pir_survival=surv)
    p_node0 = sum(c.weight for c in comps if c.incoherent[0] == 1)
    assert p_node0 == pytest.approx((1 - eta) * q * surv, rel=1e-12)


# --- rotation ---------------------------------------------------------------

def test_rotation_vacuum():
    v = ss.vacuum(1)
    assert np.array_equal(ss.swap_rotation(v, 0).amplitudes, v.amplitudes)


def test_rotation_single_excitations():
    blue = ss.swap_rotation(ss.create_spin_wave(ss.vacuum(1), 0, Color.BLUE), 0)
    red = ss.swap_rotation(ss.create_spin_wave(ss.vacuum(1), 0, Color.RED), 0)
    assert blue.amplitude((0, 1)) == pytest.approx(SQRT_HALF)
    assert blue.amplitude((1, 0)) == pytest.approx(SQRT_HALF)
    assert red.amplitude((0, 1)) == pytest.approx(SQRT_HALF)
    assert red.amplitude((1, 0)) == pytest.approx(-SQRT_HALF)


def test_rotation_is_an_involution():
    rng = np.random.default_rng(3)
    for _ in range(20):
        s = random_state(rng, num_nodes=1, n_max=4)
        # keep total occupation within the cutoff
        amps = np.array(s.amplitudes)
        for r in range(5):
            for b in range(5):
                if r + b > 4:
                    amps[r, b] = 0
        s = s._with(amps).normalized()
        twice = ss.swap_rotation(ss.swap_rotation(s, 0), 0)
        assert np.allclose(twice.amplitudes, s.amplitudes, atol=1e-12)
        assert twice.norm == pytest.approx(1.0, abs=1e-12)


def test_rotation_preserves_norm_on_protocol_state():
    s = ss.swap_rotation(ss.two_link_state(), 1)
    assert s.norm == pytest.approx(1.0, abs=1e-12)


def test_rotation_beyond_cutoff_raises():
    s = ss.vacuum(1, n_max=2)
    s = ss.create_spin_wave(ss.create_spin_wave(s, 0, Color.RED), 0, Color.BLUE)
    s = ss.create_spin_wave(s, 0, Color.BLUE)  # (1, 2)
    with pytest.raises(ss.TruncationError):
        ss.swap_rotation(s, 0)


# --- measurement ------------------------------------------------------------

def test_swap_bosonic():
    check = ss.swap_check()
    assert check.success_probability == pytest.approx(0.5, abs=1e-12)
    assert check.corrected_fidelity == pytest.approx(1.0, abs=1e-12)
    assert check.raw_fidelity <= 1.0


def test_swap_single_atom_ensembles():
    assert ss.swap_check(finite_n=1).success_probability == pytest.approx(2 / 3, abs=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_state_vector_swap_matches_formula(n):
    assert ss.swap_check(finite_n=n).success_probability == pytest.approx(2 * n / (4 * n - 1), abs=1e-12)


def test_vacuum_measures_zero():
    outcomes = ss.fluorescent_measure(ss.vacuum(2), 0)
    assert ss.detection_probabilities(outcomes) == {(0, 0): 1.0}


def test_measured_node_is_reset():
    s = ss.swap_rotation(ss.two_link_state(), 1)
    for o in ss.fluorescent_measure(s, 1, eta_f=0.9, dark_lambda=0.1):
        view = np.moveaxis(o.post_state.amplitudes, (2, 3), (0, 1))
        assert np.count_nonzero(view[1:, :]) == 0 and np.count_nonzero(view[:, 1:]) == 0


@settings(max_examples=50, deadline=None)
@given(
    seed=st.integers(0, 2**32 - 1),
    eta_f=st.floats(0.01, 1.0),
    dark=st.floats(0.0, 3.0),
    incoherent=st.integers(0, 2),
    node=st.integers(0, 1),
)
def test_measurement_completeness(seed, eta_f, dark, incoherent, node):
    s = random_state(np.random.default_rng(seed))
    total = sum(o.probability for o in ss.fluorescent_measure(s, node, eta_f, dark, incoherent))
    assert total == pytest.approx(1.0, abs=1e-12)


def test_single_click_monotone_in_efficiency():
    s = ss.swap_rotation(ss.two_link_state(), 1)
    etas = np.linspace(1.0, 0.05, 40)
    p = [ss.single_click_probability(ss.fluorescent_measure(s, 1, e)) for e in etas]
    assert all(b <= a + 1e-15 for a, b in zip(p, p[1:]))


def test_dark_events_degrade_fidelity():
    assert ss.swap_check(dark_lambda=0.2).corrected_fidelity < 1.0


def test_phase_flip_label_and_correction():
    rotated = ss.swap_rotation(ss.two_link_state(), 1)
    target = ss.connected_target()
    singles = [o for o in ss.fluorescent_measure(rotated, 1) if o.label.detected_total == 1]
    flipped = [o for o in singles if o.label.phase_flip]
    assert len(flipped) == 1 and flipped[0].label.detected_red == 1
    raw = ss.fidelity(flipped[0].post_state, target)
    fixed = ss.fidelity(ss.correct_phase(flipped[0].post_state, 0, Color.BLUE), target)
    assert raw <= 1.0
    assert fixed == pytest.approx(1.0, abs=1e-12)


# --- fidelity ---------------------------------------------------------------

def test_fidelity_identical_and_orthogonal():
    a = ss.create_spin_wave(ss.vacuum(2), 0, Color.RED)
    b = ss.create_spin_wave(ss.vacuum(2), 1, Color.RED)
    assert ss.fidelity(a, a) == pytest.approx(1.0)
    assert ss.fidelity(a, b) == 0.0


def test_fidelity_shape_mismatch():
    with pytest.raises(ValueError):
        ss.fidelity(ss.vacuum(2), ss.vacuum(3))


# --- exact finite-N oracle --------------------------------------------------

@pytest.mark.parametrize("n, expected", [(1, Fraction(2, 3)), (2, Fraction(4, 7)), (3, Fraction(6, 11)), (4, Fraction(8, 15))])
def test_brute_force_exact(n, expected):
    assert ss.brute_force_swap_success(n) == expected


def test_brute_force_limits():
    with pytest.raises(ss.ResourceError):
        ss.brute_force_swap_success(0)
    with pytest.raises(ss.ResourceError):
        ss.brute_force_swap_success(ss.MAX_BRUTE_FORCE_N + 1)


def test_brute_force_is_fast():
    t0 = time.perf_counter()
    ss.brute_force_swap_success(4)
    assert time.perf_counter() - t0 < 10
