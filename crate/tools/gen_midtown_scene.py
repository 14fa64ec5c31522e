"""Generates the synthetic Manhattan-like scene shipped as data/scenes/midtown_grid.json.

North-south avenues 30 m wide every 250 m, east-west streets 18 m wide every
80 m, blocks split into 3-5 buildings of seeded random heights. One block is
left empty as a plaza and one is cut by an 8 m alley. Prints the block
extents along each axis.
"""
import json
import pathlib
import random

rng = random.Random(20211001)
EXTENT = 500.0
AVENUES = [-375.0, -125.0, 125.0, 375.0]
AVENUE_W = 30.0
STREET_W = 18.0
STREETS = [-480.0 + 80.0 * k for k in range(13)]

def spans(centers, width, lo, hi):
    edges = [lo]
    for c in centers:
        edges += [c - width / 2, c + width / 2]
    edges.append(hi)
    return [(edges[i], edges[i + 1]) for i in range(0, len(edges), 2) if edges[i + 1] - edges[i] > 1.0]

xs = spans(AVENUES, AVENUE_W, -490.0, 490.0)
ys = spans(STREETS, STREET_W, -490.0, 490.0)

buildings = []
plaza = (2, 6)
alley = (1, 6)
for i, (x0, x1) in enumerate(xs):
    for j, (y0, y1) in enumerate(ys):
        if (i, j) == plaza:
            continue
        parts = rng.randint(3, 5)
        cuts = sorted(rng.uniform(x0 + 15, x1 - 15) for _ in range(parts - 1)) if x1 - x0 > 60 else []
        bounds = [x0] + cuts + [x1]
        rows = [(y0, y1)]
        if (i, j) == alley:
            mid = 0.5 * (y0 + y1)
            rows = [(y0, mid - 4.0), (mid + 4.0, y1)]
        for ya, yb in rows:
            for a, b in zip(bounds, bounds[1:]):
                if b - a < 5.0:
                    continue
                h = round(rng.choice([rng.uniform(18, 45), rng.uniform(45, 120), rng.uniform(120, 250)]), 1)
                buildings.append({
                    "footprint": [[round(a, 2), round(ya, 2)], [round(b, 2), round(ya, 2)],
                                  [round(b, 2), round(yb, 2)], [round(a, 2), round(yb, 2)]],
                    "height_m": h,
                    "reflection_loss_db": 3.0,
                })

scene = {
    "origin": {"lat": 40.758, "lon": -73.985},
    "ground": {"x_min": -EXTENT, "y_min": -EXTENT, "x_max": EXTENT, "y_max": EXTENT, "reflection_loss_db": 4.7},
    "buildings": buildings,
}
out = pathlib.Path(__file__).resolve().parent.parent / "data" / "scenes" / "midtown_grid.json"
out.write_text(json.dumps(scene, indent=1) + "\n")
print(f"{len(buildings)} buildings")
print("blocks x:", xs)
print("blocks y:", ys)
