"""Charging time and link success at the baseline operating point.

A node harvests from the power station until its capacitor is full, then
spends the whole charge on one transmission. Larger capacitors mean fewer,
stronger transmissions. This script prints both sides of that trade.
"""
from dataclasses import replace

import numpy as np

from wpaoi import charging as ch
from wpaoi.presets import BASELINE
from wpaoi.streams import split_stream
from wpaoi.system import derive

print("baseline:", BASELINE)
d = derive(BASELINE)
print(f"normalized capacitors  B'_s={d.bprime_s:.3f}  B'_r={d.bprime_r:.3f}")
print(f"success per attempt    S->R {d.p_suc_s:.4f}  R->D {d.p_suc_r:.4f}  "
      f"AF end-to-end {d.p_suc_af:.4f}  direct {d.p_suc_direct:.4f}")

# charging time is 1 + Poisson(B'), one slot to transmit plus the harvest
dist = ch.ChargeTimeDist(d.bprime_s)
pmf = ch.charge_pmf_array(dist, 8)
draws = ch.sample_charge_time(dist, split_stream(1, 0), 200_000)
print("\nslots  pmf       empirical")
for m in range(1, 9):
    print(f"{m:5d}  {pmf[m - 1]:.5f}   {np.mean(draws == m):.5f}")

# AF waits for both capacitors, so its charging time is the larger of the two
af = ch.AfWaitDist(d.bprime_s, d.bprime_r)
mean, second = ch.af_wait_moments(af)
print(f"\nAF charging time: E[T]={mean:.4f}, E[T^2]={second:.4f} "
      f"(one node alone: {1 + d.bprime_s:.4f})")

print("\ncapacitor size versus link quality, direct link, P_t=1000")
for b in (250, 500, 1000, 2000, 4000):
    dd = derive(replace(BASELINE, b_s=b))
    print(f"  B_s={b:5d}  E[T]={1 + dd.bprime_s:6.3f} slots  p_suc={dd.p_suc_direct:.4f}")
