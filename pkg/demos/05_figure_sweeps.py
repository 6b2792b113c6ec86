"""Analytic sweeps behind the figure presets.

The same grids drive ``wpaoi --preset NAME``; this script prints the
analytic columns only, which takes well under a second.
"""
import math

from wpaoi import analysis as an
from wpaoi.presets import PRESETS
from wpaoi.system import derive

for name, preset in PRESETS.items():
    print(f"\n{name}: {preset.note}")
    series = None
    for pt in preset.points():
        if pt.series != series:
            series = pt.series
            if series:
                print(f"  {series}")
        d = derive(pt.params, require_relay=False)
        cells = []
        for scheme in preset.schemes:
            if scheme == "df" and math.isnan(d.p_suc_r):
                cells.append(f"{scheme}=n/a")
                continue
            v = an.analyze_scheme(d, scheme).paoi
            cells.append(f"{scheme}={v:.3f}" if v is not None else f"{scheme}=unstable")
        print(f"    {pt.x_name}={pt.x_value:<10.4g} " + "  ".join(cells))
