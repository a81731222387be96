"""Parameter records, validation and the flat ``key = value`` config format."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from enum import Enum

TWO_PI = 2.0 * math.pi

# regime thresholds for validation warnings
ETA_Q_MAX = 0.1
DETUNING_RATIO_MIN = 10.0
MISMATCH_PRODUCT_MIN = 10.0


class Scheme(str, Enum):
    NEW_SINGLE_RAIL = "NewSingleRail"
    NEW_DUAL_RAIL = "NewDualRail"
    REF_DLCZ = "RefDlcz"
    REF_DUAL_RAIL = "RefDualRail"

    @property
    def is_new(self) -> bool:
        return self in (Scheme.NEW_SINGLE_RAIL, Scheme.NEW_DUAL_RAIL)

    @property
    def is_dual(self) -> bool:
        return self in (Scheme.NEW_DUAL_RAIL, Scheme.REF_DUAL_RAIL)

    def reference(self) -> "Scheme":
        """The retrieval-based scheme a new variant is compared against."""
        if self is Scheme.NEW_SINGLE_RAIL:
            return Scheme.REF_DLCZ
        if self is Scheme.NEW_DUAL_RAIL:
            return Scheme.REF_DUAL_RAIL
        return self


class ErrorModel(str, Enum):
    # kappa * q_eff * (2**s)**2, no loss bookkeeping
    QUADRATIC = "quadratic"
    # excitation-number populations propagated through lossy swaps
    LOSS_AWARE = "loss_aware"


@dataclass(frozen=True)
class PhysicalParams:
    """Atomic and optical constants of one repeater node.

    Frequencies (``gamma``, ``delta``, ``omega_p``, ``omega_c``) are angular,
    in rad/s. ``length_l`` is in metres.
    """

    gamma: float
    delta: float
    beta: float
    omega_p: float
    omega_c: float
    length_l: float
    depth_d: float
    eta: float
    n_atoms: int


@dataclass(frozen=True)
class LinkParams:
    l0_km: float
    latt_km: float
    q: float
    eta_d: float
    eta_f: float
    n_photons: float


@dataclass(frozen=True)
class ChainConfig:
    total_km: float
    nesting_s: int
    scheme: Scheme
    target_fidelity: float
    pir_enabled: bool = True
    fiber_light_speed: float = 2.0e8
    # rate-model knobs not fixed by the physics
    kappa_m: float = 1.0
    c_r: float = 1.0
    eta_d_ref: float = 0.4
    error_model: ErrorModel = ErrorModel.LOSS_AWARE
    pir_margin: float = 10.0
    s_min: int = 0
    s_max: int = 10
    optimize_pir: bool = False

    @property
    def segments(self) -> int:
        return 2**self.nesting_s

    @property
    def l0_km(self) -> float:
        return self.total_km / self.segments


@dataclass(frozen=True)
class RateResult:
    rate_hz: float
    fidelity: float
    error_budget: dict[str, float]
    params: tuple[ChainConfig, LinkParams, PhysicalParams] | None = None
    # rate of the root link before final postselection
    link_rate_hz: float = 0.0
    vacuum_fraction: float = 0.0
    q: float = 0.0


@dataclass
class ValidationReport:
    errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def __bool__(self) -> bool:
        return self.ok


class ConfigError(ValueError):
    """Malformed configuration document or invalid parameter values."""

    def __init__(self, message: str, *, line: int | None = None, key: str | None = None):
        ctx = []
        if line is not None:
            ctx.append(f"line {line}")
        if key is not None:
            ctx.append(f"key {key!r}")
        super().__init__(f"{message} ({', '.join(ctx)})" if ctx else message)
        self.line = line
        self.key = key


def _open_unit(x: float) -> bool:
    return 0.0 < x < 1.0


def validate(physical: PhysicalParams, link: LinkParams, chain: ChainConfig) -> ValidationReport:
    report = ValidationReport()
    err = report.errors.append
    warn = report.warnings.append

    p = physical
    if not p.gamma > 0:
        err("gamma must be > 0")
    if not p.omega_p >= 0:
        err("omega_p must be >= 0")
    if not p.omega_c >= 0:
        err("omega_c must be >= 0")
    if not p.length_l > 0:
        err("length_l must be > 0")
    if not p.depth_d > 0:
        err("depth_d must be > 0")
    if not _open_unit(p.eta):
        err("eta must be in (0,1)")
    if not 0.0 <= p.beta <= 1.0:
        err("beta must be in [0,1]")
    if not p.n_atoms >= 1:
        err("n_atoms must be >= 1")
    if not p.delta > 0:
        err("delta must be > 0")
    elif p.delta < DETUNING_RATIO_MIN * max(p.gamma, p.omega_p):
        warn("delta >> max(gamma, omega_p) regime violated")

    if not _open_unit(link.q):
        err("q must be in (0,1)")
    if not 0.0 < link.eta_d <= 1.0:
        err("eta_d must be in (0,1]")
    if not 0.0 < link.eta_f <= 1.0:
        err("eta_f must be in (0,1]")
    if not link.l0_km > 0:
        err("l0_km must be > 0")
    if not link.latt_km > 0:
        err("latt_km must be > 0")
    if not link.n_photons >= 1:
        err("n_photons must be >= 1")

    if not chain.total_km > 0:
        err("total_km must be > 0")
    if not chain.nesting_s >= 0:
        err("nesting_s must be >= 0")
    if not _open_unit(chain.target_fidelity):
        err("target_fidelity must be in (0,1)")
    if not chain.fiber_light_speed > 0:
        err("fiber_light_speed must be > 0")
    if not chain.kappa_m > 0:
        err("kappa_m must be > 0")
    if not chain.c_r >= 0:
        err("c_r must be >= 0")
    if not 0.0 < chain.eta_d_ref <= 1.0:
        err("eta_d_ref must be in (0,1]")
    if not chain.pir_margin > 1:
        err("pir_margin must be > 1")
    if not chain.s_max >= 0:
        err("s_max must be >= 0")
    if not 0 <= chain.s_min <= chain.s_max:
        err("s_min must be in [0, s_max]")

    if report.errors:
        return report

    if p.eta * link.q > ETA_Q_MAX:
        warn("eta*q << 1 regime violated")
    eta_prime = p.eta * link.eta_d * math.exp(-chain.l0_km / (2.0 * link.latt_km))
    if p.beta * eta_prime * p.n_atoms < MISMATCH_PRODUCT_MIN:
        warn("beta*eta'*N >> 1 regime violated")
    if chain.pir_enabled and p.depth_d < chain.pir_margin:
        warn("PIR window infeasible: depth_d below pir_margin")
    if not math.isclose(link.l0_km, chain.l0_km, rel_tol=1e-9):
        warn("link.l0_km differs from total_km / 2**nesting_s; rate models use the derived value")
    return report


# --- config document -------------------------------------------------------

_FREQ_KEYS = {"gamma", "delta", "omega_p", "omega_c"}

# config key -> (record, field, required)
_SCHEMA: dict[str, tuple[str, str, bool]] = {
    **{f"physical.{f.name}": ("physical", f.name, True) for f in fields(PhysicalParams)},
    "link.l0_km": ("link", "l0_km", False),
    "link.latt_km": ("link", "latt_km", True),
    "link.q": ("link", "q", True),
    "link.eta_d": ("link", "eta_d", True),
    "link.eta_f": ("link", "eta_f", True),
    "link.n_photons": ("link", "n_photons", True),
    "chain.total_km": ("chain", "total_km", True),
    "chain.nesting_s": ("chain", "nesting_s", True),
    "chain.scheme": ("chain", "scheme", True),
    "chain.target_fidelity": ("chain", "target_fidelity", True),
    "chain.pir_enabled": ("chain", "pir_enabled", True),
    "chain.fiber_light_speed": ("chain", "fiber_light_speed", False),
    "rates.kappa_m": ("chain", "kappa_m", False),
    "rates.c_r": ("chain", "c_r", False),
    "rates.eta_d_ref": ("chain", "eta_d_ref", False),
    "rates.error_model": ("chain", "error_model", False),
    "optimizer.pir_margin": ("chain", "pir_margin", False),
    "optimizer.s_min": ("chain", "s_min", False),
    "optimizer.s_max": ("chain", "s_max", False),
    "optimizer.optimize_pir": ("chain", "optimize_pir", False),
    "units.frequencies": ("units", "frequencies", False),
}
_INT_FIELDS = {"n_atoms", "nesting_s", "s_min", "s_max"}
_BOOL_FIELDS = {"pir_enabled", "optimize_pir"}
_UNITS = ("hz_over_2pi", "rad_per_s")


def _parse_bool(raw: str) -> bool:
    low = raw.lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _parse_int(raw: str) -> int:
    value = float(raw)
    if not value.is_integer():
        raise ValueError(f"not an integer: {raw!r}")
    return int(value)


def _convert(name: str, raw: str):
    if name in _BOOL_FIELDS:
        return _parse_bool(raw)
    if name in _INT_FIELDS:
        return _parse_int(raw)
    if name == "scheme":
        return Scheme(raw)
    if name == "error_model":
        return ErrorModel(raw)
    if name == "frequencies":
        if raw not in _UNITS:
            raise ValueError(f"expected one of {_UNITS}")
        return raw
    return float(raw)


def parse_config(text: str) -> dict[str, tuple[int, str]]:
    """Split a document into ``{key: (line_number, raw_value)}``."""
    entries: dict[str, tuple[int, str]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, _, value = stripped.partition("=")
        key, value = key.strip(), value.strip().strip('"').strip("'")
        if key not in _SCHEMA:
            raise ConfigError("unknown key", line=lineno, key=key)
        if key in entries:
            raise ConfigError("duplicate key", line=lineno, key=key)
        if not value:
            raise ConfigError("empty value", line=lineno, key=key)
        entries[key] = (lineno, value)
    return entries


def load_config(text: str) -> tuple[PhysicalParams, LinkParams, ChainConfig]:
    """Parse and validate a config document.

    Raises ConfigError on unknown or missing keys, malformed values, or any
    failed invariant.
    """
    entries = parse_config(text)
    for key, (_, _, required) in _SCHEMA.items():
        if required and key not in entries:
            raise ConfigError("missing required key", key=key)

    values: dict[str, dict[str, object]] = {"physical": {}, "link": {}, "chain": {}, "units": {}}
    for key, (lineno, raw) in entries.items():
        record, name, _ = _SCHEMA[key]
        try:
            values[record][name] = _convert(name, raw)
        except ValueError as exc:
            raise ConfigError(f"bad value {raw!r}: {exc}", line=lineno, key=key) from None

    if values["units"].get("frequencies", "hz_over_2pi") == "hz_over_2pi":
        for name in _FREQ_KEYS:
            values["physical"][name] = TWO_PI * values["physical"][name]

    chain = ChainConfig(**values["chain"])
    if "l0_km" not in values["link"]:
        values["link"]["l0_km"] = chain.l0_km if chain.nesting_s >= 0 else float("nan")
    physical = PhysicalParams(**values["physical"])
    link = LinkParams(**values["link"])

    report = validate(physical, link, chain)
    if report.errors:
        raise ConfigError("validation failed: " + "; ".join(report.errors))
    return physical, link, chain


def dump_config(physical: PhysicalParams, link: LinkParams, chain: ChainConfig) -> str:
    """Serialize records; frequencies are written in rad/s so reloads are exact."""
    lines = ["units.frequencies = rad_per_s"]
    records = {"physical": physical, "link": link, "chain": chain}
    for key, (record, name, _) in _SCHEMA.items():
        if record == "units":
            continue
        value = getattr(records[record], name)
        if isinstance(value, Enum):
            text = value.value
        elif isinstance(value, bool):
            text = "true" if value else "false"
        else:
            text = repr(value)
        lines.append(f"{key} = {text}")
    return "\n".join(lines) + "\n"
