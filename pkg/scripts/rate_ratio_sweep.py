"""Rate and rate-ratio table over 100-2000 km at the comparison operating point.

Usage: python3 scripts/rate_ratio_sweep.py [config] [out.csv]
"""

import sys
from pathlib import Path

from fluorep.cli import SWEEP_SCHEMES, fmt, sweep_table
from fluorep.model import Scheme, load_config
from fluorep.optimizer import sweep_distances

ROOT = Path(__file__).resolve().parents[1]


def main():
    conf = Path(sys.argv[1]) if len(sys.argv) > 1 else ROOT / "configs" / "long_haul.conf"
    out = Path(sys.argv[2]) if len(sys.argv) > 2 else Path("rate_ratio_sweep.csv")
    physical, link, chain = load_config(conf.read_text())
    table = sweep_distances(100, 2000, 20, SWEEP_SCHEMES, physical, link, chain, extra_km=(1000.0,))
    out.write_text(sweep_table(table).to_text())

    print(f"{'km':>8} {'ratio_1rail':>12} {'ratio_2rail':>12} {'segs(new)':>10} {'segs(ref)':>10}")
    for i, d in enumerate(table.distances_km):
        single = table.ratio(i, Scheme.NEW_SINGLE_RAIL)
        dual = table.ratio(i, Scheme.NEW_DUAL_RAIL)
        seg_new = table.results[(i, Scheme.NEW_SINGLE_RAIL)].segments
        seg_ref = table.results[(i, Scheme.REF_DLCZ)].segments
        print(f"{d:8.1f} {fmt(single):>12} {fmt(dual):>12} {seg_new:>10} {seg_ref:>10}")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
