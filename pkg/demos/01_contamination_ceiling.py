"""Why more antennas stop helping under pilot reuse.

One user drop in the default 7-cell layout.  With every cell reusing the
same K pilots, each base station's estimate of its own user is polluted by
the users sharing that pilot elsewhere.  The closed-form SINR climbs with M
but flattens against a ceiling that only depends on the estimate variances.
A short Monte Carlo run checks the closed form at one antenna count.

    python3 demos/01_contamination_ceiling.py
"""

import numpy as np

from pilotsim import (SystemConfig, allocate_pilots, asymptotic_ceiling, estimate_variance, make_scenario,
                      sinr_closed_form, sinr_monte_carlo)

config = SystemConfig()
_, beta = make_scenario(config, seed=1)
pilots = allocate_pilots(config)
q = estimate_variance(beta, pilots, config)
cells = np.arange(config.num_cells)

quality = q[cells, cells] / beta[cells, cells]
print(f"{config.num_cells} cells, {config.users_per_cell} users each, reuse factor {config.pilot_reuse_factor}")
print(f"estimate quality q/beta for served users: median {np.median(quality):.2f}, "
      f"worst {quality.min():.3f}")

ceiling = asymptotic_ceiling(q, pilots)
print(f"median SINR ceiling: {10 * np.log10(np.median(ceiling)):.1f} dB\n")

print(f"{'M':>6} {'MRT dB':>8} {'ZF dB':>8} {'fraction of ceiling':>20}")
for M in (16, 64, 256, 1024, 4096, 16384):
    cfg = config.replace(num_antennas=M)
    mrt = sinr_closed_form(beta, q, pilots, cfg, precoder="MRT").gamma_cf
    zf = sinr_closed_form(beta, q, pilots, cfg, precoder="ZF").gamma_cf
    print(f"{M:>6} {10 * np.log10(np.median(mrt)):8.2f} {10 * np.log10(np.median(zf)):8.2f} "
          f"{np.median(mrt / ceiling):20.2f}")

# Monte Carlo on a smaller system to keep the demo fast
small = SystemConfig(num_cells=3, users_per_cell=4, num_antennas=64)
_, beta_s = make_scenario(small, seed=1)
pa_s = allocate_pilots(small)
mc = sinr_monte_carlo(beta_s, pa_s, small, "MRT", n_trials=2000, seed=0)
err = np.abs(mc.gamma_mc - mc.gamma_cf) / mc.gamma_cf
print(f"\nMonte Carlo check (L=3, K=4, M=64, 2000 trials): "
      f"median relative gap to closed form {np.median(err):.3f}")
