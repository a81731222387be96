from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import CONFIGS, rb_link, rb_physical
from fluorep.model import (
    ChainConfig,
    ConfigError,
    ErrorModel,
    Scheme,
    dump_config,
    load_config,
    validate,
)

LONG_HAUL_TEXT = (CONFIGS / "long_haul.conf").read_text()


def rb_chain(**kw):
    base = dict(total_km=10.0, nesting_s=0, scheme=Scheme.NEW_SINGLE_RAIL, target_fidelity=0.9)
    base.update(kw)
    return ChainConfig(**base)


def drop_line(text, key):
    return "\n".join(l for l in text.splitlines() if not l.startswith(key + " ")) + "\n"


def set_line(text, key, value):
    out = []
    for l in text.splitlines():
        out.append(f"{key} = {value}" if l.startswith(key + " ") else l)
    return "\n".join(out) + "\n"


def test_rb_parameters_validate_clean():
    report = validate(rb_physical(), rb_link(), rb_chain())
    assert report.errors == []
    assert report.ok


def test_q_zero_is_an_error():
    report = validate(rb_physical(), rb_link(q=0.0), rb_chain())
    assert "q must be in (0,1)" in report.errors


def test_large_eta_q_warns():
    report = validate(rb_physical(eta=0.5), rb_link(q=0.999), rb_chain())
    assert report.ok
    assert "eta*q << 1 regime violated" in report.warnings


def test_small_detuning_warns():
    p = rb_physical(delta=rb_physical().gamma * 2)
    assert "delta >> max(gamma, omega_p) regime violated" in validate(p, rb_link(), rb_chain()).warnings


def test_weak_mismatch_product_warns():
    p = rb_physical(n_atoms=10)
    assert "beta*eta'*N >> 1 regime violated" in validate(p, rb_link(), rb_chain()).warnings


def test_negative_nesting_is_an_error():
    report = validate(rb_physical(), rb_link(), rb_chain(nesting_s=-1))
    assert "nesting_s must be >= 0" in report.errors


def test_validate_is_pure():
    args = (rb_physical(n_atoms=10), rb_link(q=0.0), rb_chain())
    assert validate(*args) == validate(*args)


def test_load_long_haul_populates_records(long_haul):
    physical, link, chain = long_haul
    assert physical.depth_d == 100
    assert physical.gamma == pytest.approx(2 * 3.141592653589793 * 30e6)
    assert link.latt_km == 20 and link.eta_f == 0.95
    assert link.l0_km == pytest.approx(chain.total_km / 2)
    assert chain.scheme is Scheme.NEW_SINGLE_RAIL
    assert chain.error_model is ErrorModel.LOSS_AWARE


def test_missing_key_is_named():
    with pytest.raises(ConfigError, match="physical.gamma"):
        load_config(drop_line(LONG_HAUL_TEXT, "physical.gamma"))


def test_negative_nesting_in_document_rejected():
    with pytest.raises(ConfigError, match="nesting_s must be >= 0"):
        load_config(set_line(LONG_HAUL_TEXT, "chain.nesting_s", "-1"))


@pytest.mark.parametrize(
    "text, fragment",
    [
        (LONG_HAUL_TEXT + "bogus.key = 1\n", "unknown key"),
        (LONG_HAUL_TEXT + "link.q = 0.02\n", "duplicate key"),
        (LONG_HAUL_TEXT + "just words\n", "expected 'key = value'"),
        (set_line(LONG_HAUL_TEXT, "link.q", "abc"), "bad value"),
        (set_line(LONG_HAUL_TEXT, "chain.scheme", "Teleport"), "bad value"),
        (set_line(LONG_HAUL_TEXT, "physical.n_atoms", "10.5"), "not an integer"),
        (set_line(LONG_HAUL_TEXT, "units.frequencies", "ghz"), "bad value"),
    ],
)
def test_malformed_documents(text, fragment):
    with pytest.raises(ConfigError, match=fragment):
        load_config(text)


def test_error_carries_line_context():
    with pytest.raises(ConfigError) as info:
        load_config(set_line(LONG_HAUL_TEXT, "link.q", "abc"))
    assert info.value.key == "link.q"
    assert LONG_HAUL_TEXT.splitlines()[info.value.line - 1].startswith("link.q")


def test_rad_per_s_units_are_taken_verbatim():
    text = set_line(LONG_HAUL_TEXT, "units.frequencies", "rad_per_s")
    physical, _, _ = load_config(text)
    assert physical.gamma == 30e6


def test_units_default_to_hz_over_2pi(long_haul):
    text = drop_line(LONG_HAUL_TEXT, "units.frequencies")
    assert load_config(text) == long_haul


def test_round_trip_long_haul(long_haul):
    assert load_config(dump_config(*long_haul)) == long_haul


@settings(max_examples=60, deadline=None)
@given(
    gamma=st.floats(1e5, 1e9),
    eta=st.floats(1e-3, 0.5),
    q=st.floats(1e-4, 0.5),
    total=st.floats(1.0, 5000.0),
    s=st.integers(0, 6),
    beta=st.floats(0.0, 1.0),
    n_atoms=st.integers(1, 10**6),
    scheme=st.sampled_from(list(Scheme)),
    model=st.sampled_from(list(ErrorModel)),
    pir=st.booleans(),
)
def test_round_trip_property(gamma, eta, q, total, s, beta, n_atoms, scheme, model, pir):
    physical = rb_physical(gamma=gamma, eta=eta, beta=beta, n_atoms=n_atoms)
    chain = rb_chain(total_km=total, nesting_s=s, scheme=scheme, error_model=model, pir_enabled=pir)
    link = rb_link(q=q, l0_km=chain.l0_km)
    assert load_config(dump_config(physical, link, chain)) == (physical, link, chain)


def test_scheme_pairs():
    assert Scheme.NEW_SINGLE_RAIL.reference() is Scheme.REF_DLCZ
    assert Scheme.NEW_DUAL_RAIL.reference() is Scheme.REF_DUAL_RAIL
    assert Scheme.NEW_DUAL_RAIL.is_dual and not Scheme.REF_DLCZ.is_new


def test_chain_geometry():
    chain = rb_chain(total_km=1000.0, nesting_s=3)
    assert chain.segments == 8
    assert chain.l0_km == 125.0
    assert replace(chain, nesting_s=0).l0_km == 1000.0
