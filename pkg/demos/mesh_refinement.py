#!/usr/bin/env python3
"""Self-convergence of the computed blow-up time under mesh refinement.

Runs the standard hat case at a ladder of resolutions and prints the
threshold-crossing times.  There is no exact reference value; the check is
that successive estimates settle down.
"""

import numpy as np

from blowup1d import NodalField, SchemeParams, build_initial_grid, run

m, p = 1.0, 1.5
print(f"hat of peak 1 on [-1, 1], m={m}, p={p}\n")
print(f"{'N':>5} {'steps':>7} {'t(1e4)':>10} {'t(1e5)':>10} {'t(1e6)':>10}")

previous = None
for n in (25, 50, 100, 200):
    grid = build_initial_grid(1.0, n)
    u0 = NodalField(grid, np.maximum(0.0, 1.0 - np.abs(grid.nodes())))
    trace = run(u0, SchemeParams(m=m, p=p, t_end=50.0, strict=True))
    t4 = trace.threshold_times[1e4]
    t5 = trace.threshold_times[1e5]
    t6 = trace.threshold_times[1e6]
    drift = "" if previous is None else f"   change {abs(t6 - previous) / t6:.2e}"
    print(f"{n:>5} {len(trace.reports):>7} {t4:>10.5f} {t5:>10.5f} {t6:>10.5f}{drift}")
    previous = t6
