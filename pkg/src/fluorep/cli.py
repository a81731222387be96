"""Command-line entry point: ``fluorep {rates,sweep,simulate,verify}``.

Exit codes: 0 success, 1 config/validation/I-O error, 2 fidelity target
infeasible, 3 Monte Carlo attempt cap hit, 4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path

from . import physics, statesim
from .model import ConfigError, PhysicalParams, Scheme, load_config
from .montecarlo import AttemptCapExceeded, SimConfig, exact_two_link_expectation, simulate_attempts, thread_count
from .optimizer import optimize_at_distance, sweep_distances
from .rates import PirInfeasibleError, build_scheme_model, link_time, propagate

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_SIM_CAP, EXIT_VERIFY = 0, 1, 2, 3, 4

SWEEP_SCHEMES = (Scheme.NEW_SINGLE_RAIL, Scheme.NEW_DUAL_RAIL, Scheme.REF_DLCZ, Scheme.REF_DUAL_RAIL)
_SCHEME_TAGS = {
    Scheme.NEW_SINGLE_RAIL: "new_single",
    Scheme.NEW_DUAL_RAIL: "new_dual",
    Scheme.REF_DLCZ: "ref_dlcz",
    Scheme.REF_DUAL_RAIL: "ref_dual",
}
SWEEP_COLUMNS = [
    "distance_km",
    "rate_new_single_hz",
    "rate_new_dual_hz",
    "rate_ref_dlcz_hz",
    "rate_ref_dual_hz",
    "ratio_single",
    "ratio_dual",
] + [f"opt_{kind}_{_SCHEME_TAGS[s]}" for s in SWEEP_SCHEMES for kind in ("segments", "q")]


def fmt(x) -> str:
    """Nine significant digits; integers verbatim."""
    if isinstance(x, int):
        return str(x)
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".9g")


@dataclass
class CsvTable:
    header: list[str]
    rows: list[list]

    def __post_init__(self):
        for row in self.rows:
            if len(row) != len(self.header):
                raise ValueError(f"row arity {len(row)} != header arity {len(self.header)}")

    def to_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.header)
        for row in self.rows:
            writer.writerow([fmt(v) for v in row])
        return buf.getvalue()


def _load(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return load_config(text)


# --- rates -----------------------------------------------------------------

def cmd_rates(args, out, err) -> int:
    physical, link, chain = _load(args.config)
    scheme = Scheme(args.scheme) if args.scheme else chain.scheme
    distance = args.distance_km if args.distance_km is not None else chain.total_km
    result = optimize_at_distance(distance, physical, link, chain, scheme)
    if not result.feasible:
        print(f"fidelity target infeasible: {scheme.value} at {fmt(distance)} km, F >= {fmt(chain.target_fidelity)}", file=err)
        return EXIT_INFEASIBLE
    best = result.best
    lines = [
        f"scheme: {scheme.value}",
        f"distance_km: {fmt(distance)}",
        f"segments: {result.segments}",
        f"q: {fmt(best.q)}",
        f"rate_hz: {fmt(best.rate_hz)}",
        f"link_rate_hz: {fmt(best.link_rate_hz)}",
        f"vacuum_fraction: {fmt(best.vacuum_fraction)}",
        f"fidelity: {fmt(best.fidelity)}",
        "error_budget:",
    ]
    lines += [f"  {name}: {fmt(value)}" for name, value in best.error_budget.items()]
    print("\n".join(lines), file=out)
    return EXIT_OK


# --- sweep -----------------------------------------------------------------

def sweep_table(table) -> CsvTable:
    rows = []
    for i, d in enumerate(table.distances_km):
        row = [d]
        row += [table.rate(i, s) for s in SWEEP_SCHEMES]
        row += [table.ratio(i, Scheme.NEW_SINGLE_RAIL), table.ratio(i, Scheme.NEW_DUAL_RAIL)]
        for s in SWEEP_SCHEMES:
            res = table.results[(i, s)]
            row += [res.segments if res.segments is not None else 0, res.q]
        rows.append(row)
    return CsvTable(list(SWEEP_COLUMNS), rows)


def cmd_sweep(args, out, err) -> int:
    physical, link, chain = _load(args.config)
    table = sweep_distances(
        args.dmin_km,
        args.dmax_km,
        args.points,
        SWEEP_SCHEMES,
        physical,
        link,
        chain,
        extra_km=args.include_km or (),
        threads=thread_count(),
    )
    for (i, s), res in sorted(table.results.items(), key=lambda kv: (kv[0][0], kv[0][1].value)):
        if res.error:
            print(f"warning: {s.value} at {fmt(table.distances_km[i])} km: {res.error}", file=err)
    text = sweep_table(table).to_text()
    try:
        Path(args.out).write_text(text, encoding="utf-8", newline="")
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=err)
        return EXIT_CONFIG
    print(f"wrote {len(table.distances_km)} rows to {args.out}", file=out)
    return EXIT_OK


# --- simulate --------------------------------------------------------------

def cmd_simulate(args, out, err) -> int:
    physical, link, chain = _load(args.config)
    segments = args.segments
    if segments < 1 or segments & (segments - 1):
        raise ConfigError(f"segments must be a power of two, got {segments}")
    s = segments.bit_length() - 1
    chain = replace(chain, nesting_s=s)
    model = build_scheme_model(chain, physical, link)
    if args.p0 is not None:
        model = replace(model, generation_prob=args.p0)
    probs = propagate(model, s).swap_probs
    if args.p_swap is not None:
        probs = (args.p_swap,) * s
    sim = SimConfig(trials=args.trials, seed=args.seed, max_attempt_cap=args.cap)
    try:
        est = simulate_attempts(model.generation_prob, probs, sim, model.attempt_period, threads=thread_count())
    except AttemptCapExceeded as exc:
        print(f"simulation aborted: {exc}", file=err)
        return EXIT_SIM_CAP
    t_analytic = link_time(model, probs)
    ratio = est.rate_hz * t_analytic
    if s == 0:
        exact = model.attempt_period / model.generation_prob
    elif s == 1:
        exact = exact_two_link_expectation(model.generation_prob, probs[0], model.attempt_period)
    else:
        exact = None
    if exact is not None:
        tol = 3.0 * est.std_error_s
        ok = abs(est.mean_time_s - exact) <= tol or est.mean_time_s == exact
        verdict = f"{'PASS' if ok else 'FAIL'} (|MC - exact| <= 3 standard errors)"
    else:
        ok = 1 / 1.5 <= ratio <= 1.5
        verdict = f"{'PASS' if ok else 'FAIL'} (MC/analytic rate within a factor 1.5)"
    lines = [
        f"scheme: {chain.scheme.value}",
        f"segments: {segments}",
        f"trials: {sim.trials}",
        f"seed: {sim.seed}",
        f"attempt_period_s: {fmt(model.attempt_period)}",
        f"p0: {fmt(model.generation_prob)}",
        "swap_probs: " + " ".join(fmt(p) for p in probs),
        f"mc_mean_time_s: {fmt(est.mean_time_s)}",
        f"mc_std_error_s: {fmt(est.std_error_s)}",
        f"mc_rate_hz: {fmt(est.rate_hz)}",
        f"analytic_link_rate_hz: {fmt(1.0 / t_analytic)}",
        f"mc_over_analytic: {fmt(ratio)}",
    ]
    if exact is not None:
        lines.append(f"exact_mean_time_s: {fmt(exact)}")
    lines.append(f"verdict: {verdict}")
    print("\n".join(lines), file=out)
    return EXIT_OK


# --- verify ----------------------------------------------------------------

@dataclass
class Check:
    name: str
    expected: object
    actual: object
    passed: bool


def _close(a: float, b: float, tol: float = 1e-12) -> bool:
    return abs(a - b) <= tol


def verification_checks() -> list[Check]:
    checks = []
    bosonic = statesim.swap_check()
    checks.append(Check("swap success (bosonic)", 0.5, bosonic.success_probability, _close(bosonic.success_probability, 0.5)))
    checks.append(
        Check("outer-link fidelity after phase correction", 1.0, bosonic.corrected_fidelity, _close(bosonic.corrected_fidelity, 1.0))
    )
    for n in range(1, 5):
        expected = Fraction(2 * n, 4 * n - 1)
        actual = statesim.brute_force_swap_success(n)
        checks.append(Check(f"2N/(4N-1), N={n}", expected, actual, actual == expected))
    for n in range(1, 5):
        p = statesim.swap_check(finite_n=n).success_probability
        expected = physics.swap_success_ideal(n)
        checks.append(Check(f"finite-N state vector swap, N={n}", expected, p, _close(p, expected)))

    eta, d = 0.05, 100.0
    delta_loss = physics.pir_cost_for_target(eta, d)
    checks.append(Check("PIR loss at eta=0.05, d=100 below 0.1", "< 0.1", delta_loss, delta_loss < 0.1))
    supp = physics.pir_suppression(eta, delta_loss, d)
    checks.append(Check("PIR suppression = eta(2-eta)", eta * (2 - eta), supp, _close(supp, eta * (2 - eta))))
    phys = physics_sample()
    window = physics.pir_window(phys)
    ratio = window.t_max / window.t_min
    checks.append(Check("PIR window ratio = optical depth", phys.depth_d, ratio, abs(ratio / phys.depth_d - 1) <= 1e-12))
    return checks


def physics_sample() -> PhysicalParams:
    two_pi = 2 * math.pi
    return PhysicalParams(
        gamma=two_pi * 6e6,
        delta=two_pi * 6.8e9,
        beta=0.5,
        omega_p=two_pi * 0.6e6,
        omega_c=two_pi * 3e6,
        length_l=0.01,
        depth_d=100.0,
        eta=0.05,
        n_atoms=2000,
    )


def cmd_verify(args, out, err, checks=None) -> int:
    checks = verification_checks() if checks is None else checks
    first_failure = None
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"{status} {c.name}: expected {c.expected}, actual {c.actual}", file=out)
        if not c.passed and first_failure is None:
            first_failure = c
    if first_failure is not None:
        print(f"verification failed: {first_failure.name}", file=err)
        return EXIT_VERIFY
    print(f"all {len(checks)} checks passed", file=out)
    return EXIT_OK


# --- entry -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fluorep", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rates", help="optimized rate and error budget at one distance")
    p.add_argument("config")
    p.add_argument("--distance-km", type=float)
    p.add_argument("--scheme", choices=[s.value for s in Scheme])
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("sweep", help="rate-vs-distance table for all schemes (CSV)")
    p.add_argument("config")
    p.add_argument("--dmin-km", type=float, default=100.0)
    p.add_argument("--dmax-km", type=float, default=2000.0)
    p.add_argument("--points", type=int, default=20)
    p.add_argument("--include-km", type=float, action="append", help="extra distance to evaluate (repeatable)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", help="Monte Carlo vs analytic waiting time")
    p.add_argument("config")
    p.add_argument("--segments", type=int, default=2)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--cap", type=int, default=10**15, help="max attempts per trial")
    p.add_argument("--p0", type=float, help="override the generation probability")
    p.add_argument("--p-swap", type=float, help="override every level's swap probability")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="protocol-correctness checks")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None, out=None, err=None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out, err)
    except (ConfigError, PirInfeasibleError, physics.DomainError, ValueError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
