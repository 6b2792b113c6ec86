"""The sixteen DF special cases and the four AF cases.

Each node either has a full capacitor or must charge, and each hop either
always succeeds or fades. Every DF row is the general bound with the
corresponding moments made degenerate.
"""
from wpaoi import analysis as an
from wpaoi.presets import BASELINE
from wpaoi.system import derive

d = derive(BASELINE)
print(f"{'queue':10} {'stable':7} {'PAoI':>10} {'general':>10} {'exact':>10}")
for spec in an.all_special_cases():
    res = an.special_case(spec, d)
    if not res.stable:
        print(f"{res.queue_label:10} {'no':7} {'':>10} {'':>10}")
        continue
    general = an.table1_general(spec, d)
    exact = f"{res.exact_value:10.4f}" if res.exact_value is not None else ""
    print(f"{res.queue_label:10} {'yes':7} {res.value:10.4f} {general:10.4f} {exact:>10}")

print("\nAF")
for full in (True, False):
    for det in (True, False):
        v = an.af_special_case(full, det, d)
        print(f"  capacitors {'full' if full else 'charging':8}  success {'certain' if det else 'random':7}  PAoI {v:.4f}")
