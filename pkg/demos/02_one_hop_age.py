"""Average AoI and peak AoI of the two one-hop schemes.

Direct transmission and amplify-and-forward both deliver a packet per
successful cycle, so their age follows from the first two moments of the
inter-delivery time. The simulator reproduces those numbers.
"""
from dataclasses import replace

from wpaoi import analysis as an
from wpaoi import simulator as sim
from wpaoi.presets import BASELINE, FIG4_PT
from wpaoi.system import derive

print(f"{'P_t':>8}  {'scheme':6}  {'PAoI':>9} {'sim':>9}  {'AoI':>9} {'sim':>9}")
for pt in FIG4_PT[::2]:
    params = replace(BASELINE, p_t=pt)
    d = derive(params)
    for scheme in ("direct", "af"):
        res = an.analyze_scheme(d, scheme)
        st = sim.run(sim.SimConfig(scheme, params, target_deliveries=20_000, seed=2, replications=10))
        print(f"{pt:8.0f}  {scheme:6}  {res.paoi:9.3f} {st.mean_paoi:9.3f}  {res.aoi:9.3f} {st.mean_aoi:9.3f}")

# the AoI exceeds half the mean cycle because long cycles weigh more
x = an.direct_cycle(derive(BASELINE))
print(f"\nE[X]={x.mean:.3f}, var={x.variance:.1f}; AoI {an.aoi_onehop(x):.3f} >= (E[X]+1)/2 = {(x.mean + 1) / 2:.3f}")
