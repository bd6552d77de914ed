#!/usr/bin/env python3
"""Writes data/benchmark_scene.json, the synthetic four-route benchmark.

Layout (metres, east/north/up):
  path4  straight east-west street through a building canyon (shortest)
  path3  northern bypass along an open boulevard
  path1  far-northern bypass passing close to a slender tower
  path2  southern bypass, exposed to reflections off the canyon's south faces
Four tall LTE sites sit west, east and south of the area.
"""

import json
import math
import pathlib

ANTENNA = 1.5
SAT_RADIUS = 2.02e7


def rect(x0, y0, x1, y1):
    return [[x0, y0], [x1, y0], [x1, y1], [x0, y1]]


def satellite(sid, az_deg, el_deg, drift_deg):
    positions = []
    for epoch, daz in ((0.0, 0.0), (3600.0, drift_deg)):
        az = math.radians(az_deg + daz)
        el = math.radians(el_deg)
        positions.append({
            "epoch": epoch,
            "position": [
                round(SAT_RADIUS * math.cos(el) * math.sin(az), 3),
                round(SAT_RADIUS * math.cos(el) * math.cos(az), 3),
                round(SAT_RADIUS * math.sin(el), 3),
            ],
        })
    return {"id": sid, "positions": positions}


DEFAULTS = {
    "towers": [("tower_n1", 700, 612, 720, 640, 80.0)],
    "lte": [(-300, 0, 45), (1300, 0, 45), (200, -1000, 60), (800, -1000, 60)],
}


def build_scene(p=None):
    p = dict(DEFAULTS, **(p or {}))
    buildings = []

    def add(bid, poly, height):
        buildings.append({"id": bid, "footprint": poly, "height": height, "material": "concrete"})

    # Canyon along path4: four blocks per side separated by 20 m cross streets.
    blocks = [(210, 340), (360, 490), (510, 640), (660, 790)]
    for i, (x0, x1) in enumerate(blocks):
        add(f"canyon_n{i + 1}", rect(x0, 12, x1, 60), 40.0)
        add(f"canyon_s{i + 1}", rect(x0, -60, x1, -12), 40.0)

    # A slender tower beside path1 hides most of the northern sky for a few nodes.
    for tid, x0, y0, x1, y1, h in p["towers"]:
        add(tid, rect(x0, y0, x1, y1), h)

    nodes = {
        "S": [0, 0], "T": [1000, 0],
        "C1": [200, 0], "C2": [500, 0], "C3": [800, 0],
        "N1": [150, 350], "N2": [500, 350], "N3": [850, 350],
        "F1": [100, 600], "F2": [500, 600], "F3": [900, 600],
        "R1": [150, -400], "R2": [500, -400], "R3": [850, -400],
    }
    routes = {
        "path1": ["S", "F1", "F2", "F3", "T"],
        "path2": ["S", "R1", "R2", "R3", "T"],
        "path3": ["S", "N1", "N2", "N3", "T"],
        "path4": ["S", "C1", "C2", "C3", "T"],
    }
    edges = []
    for ids in routes.values():
        for a, b in zip(ids, ids[1:]):
            edges.append({"from": a, "to": b})

    sats = [
        ("G01", 20, 72, 4), ("G02", 95, 55, 3), ("G03", 160, 38, 3), ("G04", 215, 62, 4),
        ("G05", 280, 30, 3), ("G06", 330, 47, 4), ("G07", 40, 25, 3), ("G08", 250, 18, 3),
        ("G09", 130, 20, 3),
    ]

    scene = {
        "ground_elevation": 0.0,
        "materials": {"concrete": {"reflection_loss_db": 6.0}},
        "buildings": buildings,
        "graph": {
            "nodes": [{"id": k, "position": [v[0], v[1], ANTENNA]} for k, v in nodes.items()],
            "edges": edges,
        },
        "gps_satellites": [satellite(*s) for s in sats],
        "lte_base_stations": [
            {"id": f"L{i + 1}", "position": list(pos), "carrier_frequency_hz": 2.1e9, "tx_power_dbm": 43}
            for i, pos in enumerate(p["lte"])
        ],
        "routes": routes,
    }
    return scene


def main():
    scene = build_scene()
    out = pathlib.Path(__file__).resolve().parent.parent / "data" / "benchmark_scene.json"
    out.write_text(json.dumps(scene, indent=2) + "\n")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
