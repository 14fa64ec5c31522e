"""Writes the parametric reflector cut shipped as the default satellite pattern.

Main lobe: G = 34.4 - 12 * (offset / 3.3)^2 dBi (3 dB down at 1.65 deg),
floored 30 dB below the peak.
"""
import csv
import pathlib

PEAK = 34.4
HPBW = 3.3
FLOOR = PEAK - 30.0

out = pathlib.Path(__file__).resolve().parent.parent / "data" / "antenna" / "amsu_a_surrogate_cut.csv"
offsets = [round(0.05 * i, 2) for i in range(0, 121)] + [float(d) for d in range(7, 181)]
with out.open("w", newline="") as f:
    w = csv.writer(f, lineterminator="\n")
    w.writerow(["offaxis_deg", "gain_dbi"])
    for x in offsets:
        g = max(PEAK - 12.0 * (x / HPBW) ** 2, FLOOR)
        w.writerow([f"{x:g}", f"{g:.6f}"])
