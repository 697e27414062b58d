"""Rate versus antenna count, with pilot reuse 1 and 3.

Reuse 3 gives every cell a third of the pilot sharers, so estimates are
cleaner, at the price of three times the training overhead.  The users who
gain most are the ones near the cell edge, whose serving gain is closest to
the interference they pick up.

    python3 demos/02_antennas_and_reuse.py
"""

import numpy as np

from pilotsim import SystemConfig, SweepSpec, run_sweep

values = [32, 64, 128, 256]
print(f"{'f':>2} {'M':>5} {'MRT cell':>9} {'ZF cell':>8} {'MRT edge user':>14}")
for f in (1, 3):
    spec = SweepSpec("antennas", values, SystemConfig(pilot_reuse_factor=f), n_drops=10, seed=2)
    rows = {(r["value"], r["precoder"]): r for r in run_sweep(spec).rows}
    for M in values:
        mrt, zf = rows[M, "MRT"], rows[M, "ZF"]
        print(f"{f:>2} {M:>5} {mrt['rate_total']:9.2f} {zf['rate_total']:8.2f} {mrt['rate_edge_mean']:14.3f}")
print("\nrates in bits/s/Hz; 'cell' is the sum rate of one cell averaged over cells and drops")
