"""More cells, more contamination.

With reuse 1 every added cell adds one more sharer per pilot and more
non-coherent interference.  The same user drops are reused at every L, so
the downward trend is not masked by placement noise.

    python3 demos/04_cell_count.py
"""

from pilotsim import SystemConfig, SweepSpec, run_sweep

spec = SweepSpec("cells", list(range(2, 19, 2)), SystemConfig(), n_drops=100, seed=4)
rows = run_sweep(spec).rows
print(f"{'L':>3} {'MRT':>7} {'ZF':>7}")
for L in spec.values:
    mrt = next(r for r in rows if r["value"] == L and r["precoder"] == "MRT")
    zf = next(r for r in rows if r["value"] == L and r["precoder"] == "ZF")
    print(f"{L:>3} {mrt['rate_total']:7.2f} {zf['rate_total']:7.2f}")
