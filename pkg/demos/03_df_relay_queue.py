"""Decode-and-forward: the relay is a queue.

The source feeds decoded packets to the relay, which charges and
retransmits them in order. Peak age is bounded with Kingman's formula for
the relay wait. Here the bound is checked against the simulator, and the
one queue with a known exact wait (full capacitors, Geo/Geo/1) is examined.
"""
from dataclasses import replace

from wpaoi import analysis as an
from wpaoi import simulator as sim
from wpaoi.presets import BASELINE, FIG4_PT
from wpaoi.system import derive

print("DF peak AoI: Kingman bound versus simulation")
for pt in FIG4_PT:
    params = replace(BASELINE, p_t=pt)
    d = derive(params)
    res = an.analyze_scheme(d, "df")
    st = sim.run(sim.SimConfig("df", params, target_deliveries=20_000, seed=3, replications=10))
    floor = res.x.mean + res.xr.mean
    print(f"  P_t={pt:7.0f}  no-wait floor {floor:8.3f}  sim {st.mean_paoi:8.3f}  bound {res.paoi:8.3f}"
          f"  (sim wait {st.mean_wait:.3f})")

# Geo/Geo/1: tabulated wait, slotted wait and the simulated queue
print("\nGeo/Geo/1 relay queue")
for p_s, p_r in ((0.2, 0.5), (0.3, 0.9), (0.772, 0.8)):
    xs, xr = an.geometric_moments(p_s), an.geometric_moments(p_r)
    q = sim.simulate_geo_geo_queue(p_s, p_r, 2_000_000, seed=4)
    print(f"  p_s={p_s} p_r={p_r}: tabulated {an.waiting_exact('geo_geo', p_s, xr):.4f} "
          f"(sim, arrival slot counted {q.mean_wait_arrival_inclusive:.4f}); "
          f"slotted {an.waiting_slotted(p_s, xr):.4f} (sim {q.mean_wait:.4f}); "
          f"Kingman {an.kingman_waiting_upper(xs, xr):.4f}")
print("near saturation the tabulated value overtakes Kingman; the slotted wait never does")
