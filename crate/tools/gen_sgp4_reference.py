"""Freeze reference SGP4 states for the near-earth verification element sets.

Uses python-sgp4 (Vallado's C++ reference, WGS72 constants, improved mode).
Run from the repository root:  python3 tools/gen_sgp4_reference.py
"""
from sgp4.api import Satrec, WGS72

SETS = ["00005", "06251", "28057", "28350", "29238", "88888"]
TLE_OUT = "crates/core/tests/data/sgp4_near_earth.tle"
CSV_OUT = "crates/core/tests/data/sgp4_reference.csv"


def read_ver():
    import os, sgp4
    path = os.path.join(os.path.dirname(sgp4.__file__), "SGP4-VER.TLE")
    lines = [l.rstrip("\n") for l in open(path) if l[:2] in ("1 ", "2 ")]
    pairs = {}
    for a, b in zip(lines[0::2], lines[1::2]):
        pairs.setdefault(a[2:7], (a[:69], b[:69]))
    return pairs


def main():
    pairs = read_ver()
    metop = [l.rstrip("\n") for l in open("data/tle/metop-b.tle")][1:3]
    chosen = [(k, pairs[k]) for k in SETS] + [("38771", tuple(metop))]
    with open(TLE_OUT, "w") as f:
        for _, (l1, l2) in chosen:
            f.write(l1 + "\n" + l2 + "\n")
    with open(CSV_OUT, "w") as f:
        f.write("satnum,tsince_min,x_km,y_km,z_km,vx_km_s,vy_km_s,vz_km_s\n")
        for num, (l1, l2) in chosen:
            sat = Satrec.twoline2rv(l1, l2, WGS72)
            for t in range(0, 1441, 60):
                e, r, v = sat.sgp4_tsince(float(t))
                if e != 0:
                    break
                f.write("%s,%d,%.9f,%.9f,%.9f,%.12f,%.12f,%.12f\n" % ((num, t) + tuple(r) + tuple(v)))


if __name__ == "__main__":
    main()
