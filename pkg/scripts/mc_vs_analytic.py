"""Monte Carlo root-link time against the 3/2 recursion and the exact two-link chain.

Usage: python3 scripts/mc_vs_analytic.py [trials]
"""

import sys
import warnings
from dataclasses import replace
from pathlib import Path

from fluorep.model import Scheme, load_config
from fluorep.montecarlo import SimConfig, exact_two_link_expectation, simulate_chain
from fluorep.physics import RegimeWarning
from fluorep.rates import analytic_rate, build_scheme_model, propagate

ROOT = Path(__file__).resolve().parents[1]


def main():
    trials = int(sys.argv[1]) if len(sys.argv) > 1 else 20_000
    physical, link, chain = load_config((ROOT / "configs" / "long_haul.conf").read_text())
    warnings.simplefilter("ignore", RegimeWarning)
    print(f"{'scheme':>14} {'s':>2} {'MC/analytic':>12} {'MC/exact':>10}")
    for scheme in Scheme:
        for s in range(0, 5):
            c = replace(chain, scheme=scheme, nesting_s=s, total_km=100.0 * 2**s)
            model = build_scheme_model(c, physical, link)
            est = simulate_chain(model, c, SimConfig(trials=trials, seed=s))
            ratio = est.rate_hz / analytic_rate(model, c).link_rate_hz
            exact = ""
            if s == 1:
                t = exact_two_link_expectation(model.generation_prob, propagate(model, 1).swap_probs[0], model.attempt_period)
                exact = f"{t / est.mean_time_s:10.4f}"
            print(f"{scheme.value:>14} {s:>2} {ratio:12.4f} {exact:>10}")


if __name__ == "__main__":
    main()
