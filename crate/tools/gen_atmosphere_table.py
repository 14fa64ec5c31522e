"""Generate the default 23.8 GHz attenuation table for a Manhattan ground station.

Uses ITU-Rpy (P.618 / P.676 / P.840 / P.837 / P.836). Single effective slant
path at 45 deg elevation, 0.5 m aperture, efficiency 0.5.
Run from the repository root:  python3 tools/gen_atmosphere_table.py
"""
import itur

LAT, LON = 40.758, -73.985
FREQ_GHZ = 23.8
ELEVATION_DEG = 45.0
DIAMETER_M = 0.5
P_GRID = [0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1, 2, 3, 5, 10, 20, 30, 50]


def main():
    rows = []
    for p in P_GRID:
        ag, ac, ar, as_, _ = itur.atmospheric_attenuation_slant_path(
            LAT, LON, FREQ_GHZ, ELEVATION_DEG, p, DIAMETER_M, return_contributions=True)
        rows.append([p] + [float(x.value) for x in (ag, ar, ac, as_)])
    # Components must be non-increasing in p; clamp tiny numerical wiggles.
    for col in range(1, 5):
        for i in range(len(rows) - 2, -1, -1):
            rows[i][col] = max(rows[i][col], rows[i + 1][col])
    with open("data/atmosphere/nyc_23p8ghz_el45.csv", "w") as f:
        f.write("p_percent,a_g_db,a_r_db,a_c_db,a_s_db\n")
        for r in rows:
            f.write("%g,%.4f,%.4f,%.4f,%.4f\n" % tuple(r))


if __name__ == "__main__":
    main()
