#!/usr/bin/env python3
"""Reproduce the two benchmark bargaining tables.

Scenario A: equal sizes (100/100 servers), standalone blocking 6% / 1%.
Scenario B: unequal sizes (200/50 servers), both standalone 5%.

Prints every bargaining concept (linear and logarithmic) under the
bounded-overflow model.
"""

from trunkpool import SharingModel, SystemConfig, invert_erlang_b
from trunkpool.bargaining import Concept, solve

BO = SharingModel.BOUNDED_OVERFLOW

SCENARIOS = [
    ("equal sizes, 6% vs 1% standalone", 100, 100, 0.06, 0.01),
    ("unequal sizes, both 5% standalone", 200, 50, 0.05, 0.05),
]


def main():
    for title, n1, n2, t1, t2 in SCENARIOS:
        a1 = invert_erlang_b(n1, t1)
        a2 = invert_erlang_b(n2, t2)
        sysc = SystemConfig(n1, n2, a1, a2, 1.0, 1.0)
        print(f"\n{title}  (N1={n1}, N2={n2}, a1={a1:.3f}, a2={a2:.3f})")
        print(f"{'concept':10s} {'k1*':>8s} {'k2*':>8s} {'B1':>9s} {'B2':>9s} "
              f"{'B_ov':>9s}  notes")
        for concept in Concept:
            out = solve(sysc, BO, concept)
            notes = []
            if out.near_ties:
                notes.append(f"{len(out.near_ties)} near-ties")
            if out.numeric_fallback:
                notes.append("numeric")
            print(f"{concept.value:10s} {out.point.share1:8.2f} "
                  f"{out.point.share2:8.3f} {out.blocking.b1:9.4%} "
                  f"{out.blocking.b2:9.4%} {out.blocking.b_overall:9.4%}  "
                  f"{'; '.join(notes)}")


if __name__ == "__main__":
    main()
