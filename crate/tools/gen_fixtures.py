#!/usr/bin/env python3
"""Regenerate the bundled geo and fixture data under crates/core/data.

Outputs:
  geo/india_states.geojson   simplified state partition (Voronoi over anchor
                             points, clipped to a coarse national outline)
  fixtures/covid_daily.json  daily case records, 2020-03-14..2020-05-06, whose
                             per-state sums equal the Con/Rec/Dec columns of
                             fixtures/state_totals.csv
  fixtures/posts_5000.jsonl  synthetic geotagged post corpus, 2020-04-04..2020-05-06

Deterministic: rerunning produces byte-identical files.
Requires shapely and numpy.
"""

import csv
import json
import math
import random
from datetime import date, datetime, timedelta, timezone
from pathlib import Path

from shapely.geometry import MultiPoint, Point, Polygon, box, mapping
from shapely.ops import unary_union, voronoi_diagram

DATA = Path(__file__).resolve().parent.parent / "crates" / "core" / "data"

# (lat, lon) outline of the mainland, coarse.
OUTLINE = [
    (23.7, 68.1), (24.3, 68.8), (24.6, 71.0), (27.0, 70.0), (28.0, 70.6),
    (30.0, 73.4), (32.5, 74.6), (34.5, 73.9), (36.0, 75.5), (35.5, 78.0),
    (32.7, 79.5), (31.0, 79.0), (30.2, 81.0), (28.7, 80.2), (27.4, 83.3),
    (26.4, 86.0), (26.5, 88.1), (27.9, 88.1), (28.1, 88.8), (27.1, 88.9),
    (26.9, 89.8), (26.8, 92.0), (27.8, 91.6), (29.0, 94.0), (29.3, 96.0),
    (28.2, 97.3), (27.2, 97.1), (25.6, 94.7), (23.8, 93.4), (22.0, 93.2),
    (22.0, 92.6), (22.9, 91.6), (23.0, 91.2), (24.2, 91.2), (24.4, 91.9),
    (24.2, 92.3), (25.0, 92.2), (25.2, 90.0), (25.9, 89.8), (26.2, 89.0),
    (25.3, 88.5), (24.3, 88.1), (22.0, 89.0), (21.6, 87.8), (20.3, 86.7),
    (19.2, 84.9), (17.7, 83.4), (15.9, 81.1), (14.0, 80.3), (13.0, 80.4),
    (11.8, 79.9), (10.3, 79.9), (9.2, 79.0), (8.0, 77.5), (8.9, 76.4),
    (10.8, 75.8), (12.6, 74.8), (14.8, 74.0), (15.6, 73.6), (17.0, 73.2),
    (19.0, 72.7), (20.7, 72.7), (21.6, 72.6), (20.9, 71.5), (20.6, 70.8),
    (21.6, 69.2), (22.3, 68.9),
]

# Anchor points per region. JK, LA and UT are not part of the served region
# set; their cells are dropped so points there resolve to nothing.
ANCHORS = {
    "JK": [(33.7, 74.8), (32.7, 74.9), (34.1, 74.3)],
    "LA": [(34.2, 77.6), (34.9, 76.1), (33.5, 78.5)],
    "UT": [(30.3, 78.0), (30.6, 79.3), (29.6, 80.0), (29.2, 79.5)],
    "HP": [(31.1, 77.2), (32.2, 76.3), (31.7, 77.8), (32.5, 77.0)],
    "PB": [(30.9, 75.8), (31.6, 74.9), (30.3, 74.9), (30.7, 76.2), (30.2, 75.5)],
    "HR": [(29.1, 76.1), (28.2, 76.8), (30.0, 76.9), (29.2, 75.7), (28.9, 76.6)],
    "UP": [(26.8, 80.9), (27.2, 78.0), (25.4, 81.8), (25.3, 83.0), (29.0, 77.7),
           (28.7, 77.45), (26.76, 83.37), (28.37, 79.43), (25.45, 78.57)],
    "RJ": [(26.9, 75.8), (26.3, 73.0), (28.0, 73.3), (24.6, 73.7), (25.2, 75.8),
           (27.0, 71.0), (29.9, 73.9)],
    "GJ": [(23.0, 72.6), (22.3, 70.8), (21.2, 72.8), (23.5, 69.8), (22.3, 73.2),
           (21.5, 70.5)],
    "MP": [(23.3, 77.4), (22.7, 75.9), (23.2, 79.9), (26.2, 78.2), (24.5, 81.3),
           (21.8, 76.4), (23.8, 78.7)],
    "MH": [(19.076, 72.8777), (18.5204, 73.8567), (21.15, 79.09), (19.9, 75.3),
           (20.0, 73.8), (17.7, 75.9), (16.7, 74.2), (20.9, 77.75), (19.1, 77.3)],
    "KA": [(12.9716, 77.5946), (15.35, 75.14), (12.3, 76.6), (12.9, 74.85),
           (16.83, 75.71), (17.33, 76.83), (14.2, 75.9), (15.1, 76.9)],
    "TG": [(17.385, 78.4867), (18.0, 79.6), (18.67, 78.09), (17.05, 79.27),
           (16.74, 78.0), (19.67, 78.53)],
    "AP": [(16.5, 80.6), (17.7, 83.2), (13.6288, 79.4192), (14.7, 77.6), (15.8, 78.0),
           (14.45, 79.99), (16.7, 81.1), (18.3, 83.9)],
    "TN": [(13.0827, 80.2707), (11.0, 76.96), (9.93, 78.12), (10.8, 78.7), (8.7, 77.7),
           (11.66, 78.15), (12.23, 79.07), (10.8, 79.8)],
    "KL": [(8.5, 76.95), (9.93, 76.27), (11.25, 75.78), (10.5, 76.2), (12.3, 75.15),
           (9.59, 76.52)],
    "CT": [(21.25, 81.63), (22.1, 82.15), (19.08, 82.03), (23.12, 83.2)],
    "OR": [(20.3, 85.8), (21.5, 84.0), (19.3, 84.8), (22.2, 84.85), (19.9, 83.17),
           (21.5, 86.9)],
    "JH": [(23.34, 85.31), (23.8, 86.4), (22.8, 86.2), (24.48, 86.7), (24.03, 84.07)],
    "BR": [(25.6, 85.1), (26.1, 85.4), (24.8, 85.0), (25.25, 87.0), (25.78, 87.47),
           (26.8, 84.5)],
    "WB": [(22.57, 88.36), (23.5, 87.3), (26.7, 88.4), (25.0, 88.1), (22.3, 87.3),
           (26.3, 89.4), (24.0, 88.0)],
    "SK": [(27.33, 88.61), (27.6, 88.4)],
    "AS": [(26.14, 91.74), (27.47, 94.9), (26.6, 92.8), (24.8, 92.8), (26.35, 92.68),
           (26.02, 89.98), (26.75, 94.2)],
    "ML": [(25.57, 91.88), (25.5, 90.2), (25.5, 91.2)],
    "AR": [(27.1, 93.6), (28.1, 95.8), (27.59, 91.87), (28.3, 94.0)],
    "NL": [(25.67, 94.1), (26.33, 94.5), (25.9, 93.7)],
    "MN": [(24.8, 93.94), (24.33, 93.68)],
    "MZ": [(23.73, 92.72), (22.9, 92.7), (22.3, 92.9)],
    "TR": [(23.83, 91.28), (23.5, 91.6), (24.2, 91.85)],
}
EXCLUDED = {"JK", "LA", "UT"}

# Small territories as explicit boxes (lat_min, lat_max, lon_min, lon_max).
# They take precedence over the surrounding partition cells.
BOXES = {
    "CH": [(30.66, 30.80, 76.70, 76.86)],
    "DL": [(28.40, 28.88, 76.84, 77.35)],
    "DN": [(20.05, 20.35, 72.95, 73.20)],
    "DD": [(20.35, 20.48, 72.80, 72.92), (20.68, 20.75, 70.87, 71.02)],
    "GA": [(14.90, 15.78, 73.68, 74.30)],
    "PY": [(11.85, 12.05, 79.74, 79.88)],
    "AN": [(6.70, 13.70, 92.20, 94.00)],
}


def lonlat_box(b):
    lat0, lat1, lon0, lon1 = b
    return box(lon0, lat0, lon1, lat1)


def round_ring(coords):
    return [[round(x, 4), round(y, 4)] for x, y in coords]


def geometry_json(geom):
    polys = [geom] if geom.geom_type == "Polygon" else list(geom.geoms)
    out = []
    for p in polys:
        if p.is_empty or p.area < 1e-6:
            continue
        rings = [round_ring(p.exterior.coords)]
        rings += [round_ring(r.coords) for r in p.interiors]
        out.append(rings)
    return {"type": "MultiPolygon", "coordinates": out}


def build_states(names):
    outline = Polygon([(lon, lat) for lat, lon in OUTLINE]).buffer(0)
    seeds = []
    for code, pts in ANCHORS.items():
        for lat, lon in pts:
            seeds.append((code, Point(lon, lat)))
    envelope = box(60, 0, 105, 40)
    cells = voronoi_diagram(MultiPoint([p for _, p in seeds]), envelope=envelope)
    by_code = {}
    for cell in cells.geoms:
        owner = [code for code, p in seeds if cell.contains(p)]
        assert len(owner) == 1, owner
        by_code.setdefault(owner[0], []).append(cell)

    carve = unary_union([lonlat_box(b) for bs in BOXES.values() for b in bs])
    features = []
    for code, name in names.items():
        if code in BOXES:
            geom = unary_union([lonlat_box(b) for b in BOXES[code]])
        else:
            geom = unary_union(by_code[code]).intersection(outline).difference(carve)
        features.append({
            "type": "Feature",
            "properties": {"state_code": code, "name": name},
            "geometry": geometry_json(geom),
        })
    return features


def split_total(total, weights):
    """Largest-remainder split of an integer total proportional to weights."""
    s = sum(weights)
    raw = [total * w / s for w in weights]
    base = [int(math.floor(r)) for r in raw]
    rest = total - sum(base)
    order = sorted(range(len(raw)), key=lambda i: (-(raw[i] - base[i]), i))
    for i in order[:rest]:
        base[i] += 1
    return base


def daterange(a, b):
    d = a
    while d <= b:
        yield d
        d += timedelta(days=1)


def build_covid(rows):
    days = list(daterange(date(2020, 3, 14), date(2020, 5, 6)))
    growth = [math.exp(0.07 * i) for i in range(len(days))]
    lagged = [math.exp(0.07 * max(i - 10, 0)) if i >= 10 else 0.0 for i in range(len(days))]
    records = []
    for r in rows:
        con = split_total(int(r["Con"]), growth)
        rec = split_total(int(r["Rec"]), lagged) if int(r["Rec"]) else [0] * len(days)
        dec = split_total(int(r["Dec"]), lagged) if int(r["Dec"]) else [0] * len(days)
        for i, d in enumerate(days):
            records.append({
                "date": d.isoformat(),
                "state_code": r["state_code"],
                "confirmed": con[i],
                "recovered": rec[i],
                "deceased": dec[i],
            })
    records.sort(key=lambda x: (x["date"], x["state_code"]))
    return {"records": records}


def load_lexicon():
    lex = {}
    with open(DATA / "lexicon" / "sample_emotions.csv") as f:
        for row in csv.DictReader(f):
            lex.setdefault(row["emotion"], []).append(row["word"])
    return lex


LABEL_KEYS = {"A": "anger", "D": "disgust", "F": "fear", "H": "joy",
              "SA": "sadness", "S": "surprise"}
FILLER = ["today", "people", "news", "lockdown", "india", "update", "cases",
          "hospital", "government", "doctors", "streets", "city", "home",
          "family", "week", "announcement", "masks", "vaccine", "testing",
          "district", "workers", "police", "market", "village", "relief"]
HASHTAGS = ["CoronaVirus", "Covid", "Lockdown", "IndiaFightCorona", "covid19"]
MENTIONS = ["@WHO", "@MoHFW_INDIA", "@PMOIndia", "@ndtv"]
IST = timezone(timedelta(hours=5, minutes=30))


def post_text(rng, label, lex):
    words = [rng.choice(FILLER) for _ in range(rng.randint(2, 6))]
    if label != "N":
        own = lex[LABEL_KEYS[label]]
        words += [rng.choice(own), rng.choice(own)]
        if rng.random() < 0.3:
            other = rng.choice([k for k in LABEL_KEYS if k != label])
            words.append(rng.choice(lex[LABEL_KEYS[other]]))
    rng.shuffle(words)
    if rng.random() < 0.3:
        words.insert(0, rng.choice(["The", "In", "And", "I am", "We are"]))
    text = " ".join(words)
    if rng.random() < 0.4:
        text += " " + rng.choice(MENTIONS)
    if rng.random() < 0.3:
        text += " https://t.co/" + "".join(rng.choice("abcdefXYZ123") for _ in range(8))
    return text


def sample_point(rng, code, features):
    geom = next(f for f in features if f["properties"]["state_code"] == code)["geometry"]
    from shapely.geometry import shape
    poly = shape(geom)
    minx, miny, maxx, maxy = poly.bounds
    while True:
        p = Point(rng.uniform(minx, maxx), rng.uniform(miny, maxy))
        if poly.contains(p) and all(
            not shape(f["geometry"]).contains(p)
            for f in features if f["properties"]["state_code"] != code
        ):
            return round(p.y, 5), round(p.x, 5)


def build_posts(rows, features, lex):
    rng = random.Random(20200504)
    labels = ["A", "D", "F", "H", "SA", "S", "N"]
    nat_weights = [sum(int(r[l]) for r in rows) for l in labels]
    state_codes = [r["state_code"] for r in rows if int(r["Tot"]) > 0]
    state_weights = [max(int(r["Tot"]) ** 0.5, 1.0) for r in rows if int(r["Tot"]) > 0]

    plan = []  # (day, state, label)
    # Punjab, 2020-05-04: 45% Neutral, 30% Happiness.
    pb = {"N": 90, "H": 60, "SA": 20, "A": 10, "F": 10, "S": 6, "D": 4}
    for lab, n in pb.items():
        plan += [(date(2020, 5, 4), "PB", lab)] * n
    # Nation, 2020-05-01: 26% Happiness, 18% Sadness.
    may1 = {"H": 104, "SA": 72, "N": 120, "A": 40, "F": 32, "S": 20, "D": 12}
    for lab, n in may1.items():
        for _ in range(n):
            plan.append((date(2020, 5, 1), rng.choices(state_codes, state_weights)[0], lab))
    other_days = [d for d in daterange(date(2020, 4, 4), date(2020, 5, 6))
                  if d != date(2020, 5, 1)]
    while len(plan) < 5000:
        d = rng.choice(other_days)
        st = rng.choices(state_codes, state_weights)[0]
        if d == date(2020, 5, 4) and st == "PB":
            continue
        plan.append((d, st, rng.choices(labels, nat_weights)[0]))
    plan.sort(key=lambda x: x[0])

    cache = {}
    out = []
    for i, (d, st, lab) in enumerate(plan):
        local = datetime(d.year, d.month, d.day, tzinfo=IST) + timedelta(
            seconds=rng.randint(0, 86399))
        created = local.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
        key = st
        if key not in cache:
            cache[key] = [sample_point(rng, st, features) for _ in range(12)]
        lat, lon = rng.choice(cache[key])
        tags = rng.sample(HASHTAGS, rng.randint(1, 2))
        text = post_text(rng, lab, lex) + " " + " ".join("#" + t for t in tags)
        out.append({
            "id": f"syn-{i:05d}",
            "created_at": created,
            "text": text,
            "lat": lat,
            "lon": lon,
            "hashtags": tags,
        })
    return out


def main():
    with open(DATA / "fixtures" / "state_totals.csv") as f:
        rows = list(csv.DictReader(f))
    names = {r["state_code"]: r["name"] for r in rows}
    features = build_states(names)
    with open(DATA / "geo" / "india_states.geojson", "w") as f:
        json.dump({"type": "FeatureCollection", "features": features}, f,
                  separators=(",", ":"))
        f.write("\n")
    with open(DATA / "fixtures" / "covid_daily.json", "w") as f:
        json.dump(build_covid(rows), f, indent=1)
        f.write("\n")
    posts = build_posts(rows, features, load_lexicon())
    with open(DATA / "fixtures" / "posts_5000.jsonl", "w") as f:
        for p in posts:
            f.write(json.dumps(p, separators=(",", ":")) + "\n")


if __name__ == "__main__":
    main()
