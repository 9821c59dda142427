"""
Counter-examples: drop one hypothesis, lose the conclusion
==========================================================

Each case pairs a subsolution u with a supersolution v touching it at a
boundary point. Exactly one hypothesis fails, and with it the strict
slope gap or the finite order of the zero of v - u.
"""
from bpplab import CASES, instantiate, verify

for case_id in CASES:
    case = instantiate(case_id)
    rep = verify(case, budget=2000, seed=0)
    print(f"\n{case_id}: {case.description}")
    for c in rep.checks:
        flag = "ok " if c["observed"] == c["expected"] else "BAD"
        print(f"  [{flag}] {c['kind']:14s} {c['name']:30s} observed={c['observed']!s:5s} "
              f"margin={c['margin']:.3g}")
