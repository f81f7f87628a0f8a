#!/usr/bin/env python3
"""Generate the synthetic trip file shipped in data/.

The file uses the column layout of the 2017 household travel survey trip
table (HOUSEID, VEHID, TRAVDAY, STRTTIME, ENDTIME, TRVLCMIN, TRPMILES,
WHYFROM, WHYTO). Every vehicle-day is written from a known pattern, so the
expected ingest result (chains per type, rejected rows, discarded segments)
is recorded alongside the data as it is generated.

    python3 tools/make_fixture.py [--rows 200] [--seed 7] [--out data]
"""

import argparse
import json
import math
import random
from collections import Counter
from pathlib import Path

# Purpose codes used for each site class (first entry is the usual one).
CODES = {"H": [1, 2], "W": [3, 5], "SE": [9, 10, 12], "SR": [11, 13, 15], "O": [6, 18, 19]}

# (arrival-at-midway mean, sd) in minutes and dwell (median, log-sd) in minutes.
ARRIVAL = {"W": (8 * 60 + 15, 40), "SE": (11 * 60, 90), "SR": (18 * 60 + 15, 70), "O": (8 * 60, 60)}
DWELL = {"W": (540, 0.12), "SE": (50, 0.5), "SR": (120, 0.45), "O": (60, 0.5)}
# Trip length: median miles, log-sd.
LENGTH = {"W": (13.0, 0.8), "SE": (6.0, 0.9), "SR": (8.0, 0.9), "O": (7.0, 0.9)}

SIMPLE_WEIGHTS = [("W", 40), ("SE", 16), ("SR", 12), ("O", 8)]
COMPLEX_WEIGHTS = [(("W", "SE"), 8), (("SE", "SR"), 4), (("W", "SR"), 4), (("SE", "SE"), 3),
                   (("O", "W"), 3), (("W", "W"), 2)]


def hhmm(minutes):
    m = int(round(minutes)) % 1440
    return f"{m // 60:02d}{m % 60:02d}"


class Writer:
    def __init__(self, rng):
        self.rng = rng
        self.rows = []
        self.expected_chains = Counter()
        self.rejected = Counter()
        self.discarded = Counter()
        self.house = 30000000

    def new_household(self):
        self.house += self.rng.randint(1, 97)
        return str(self.house)

    def row(self, house, veh, day, start, end, dur, miles, wfrom, wto):
        self.rows.append([house, veh, day, start, end, dur, miles, wfrom, wto])

    def code(self, site):
        return self.rng.choice(CODES[site])

    def trip(self, house, veh, day, depart, miles, wfrom, wto, speed=None):
        speed = speed or self.rng.uniform(22.0, 42.0)
        assert 0 <= depart < 1440, "trips must depart within the travel day"
        dur = max(1, int(round(miles / speed * 60.0)))
        self.row(house, veh, day, hhmm(depart), hhmm(depart + dur), dur, f"{miles:.3f}", wfrom, wto)
        return depart + dur

    def length(self, site):
        med, sd = LENGTH[site]
        return med * math.exp(self.rng.gauss(0.0, sd))

    def dwell(self, site):
        med, sd = DWELL[site]
        return max(5.0, med * math.exp(self.rng.gauss(0.0, sd)))

    def chain(self, house, veh, day, sites, depart=None):
        """Writes H -> sites... -> H; returns the home arrival minute.

        Draws are repeated until every trip departs before midnight."""
        for _ in range(100):
            mark = len(self.rows)
            try:
                arrival = self._chain_once(house, veh, day, sites, depart)
            except ValueError:
                del self.rows[mark:]
                continue
            self.expected_chains["H-" + "-".join(sites) + "-H"] += 1
            return arrival
        raise RuntimeError("could not place chain within one day")

    def _chain_once(self, house, veh, day, sites, depart):
        first = sites[0]
        miles = self.length(first)
        if depart is None:
            mean, sd = ARRIVAL[first]
            arrive = self.rng.gauss(mean, sd)
            depart = arrive - miles / 30.0 * 60.0
        depart = max(5.0, depart)
        prev_code = self.code("H")
        t = depart
        legs = list(sites) + ["H"]
        for k, site in enumerate(legs):
            if t >= 1435:
                raise ValueError("past midnight")
            code = self.code(site)
            leg_miles = miles if k == 0 else self.length(sites[k - 1] if site == "H" else site)
            t = self.trip(house, veh, day, t, leg_miles, prev_code, code)
            prev_code = code
            if site != "H":
                t += self.dwell(site)
        return t


def weighted(rng, items):
    total = sum(w for _, w in items)
    x = rng.uniform(0, total)
    for item, w in items:
        x -= w
        if x <= 0:
            return item
    return items[-1][0]


def special_cases(w):
    rng = w.rng
    h = w.new_household()
    # Two chains in one day: commute, then an evening outing.
    back = w.chain(h, "1", 3, ["W"])
    w.chain(h, "1", 3, ["SR"], depart=back + 45)

    # Five trips before returning home: one discarded segment.
    h = w.new_household()
    t = 7 * 60 + 30
    seq = [("H", "W"), ("W", "SE"), ("SE", "O"), ("O", "SR"), ("SR", "H")]
    for a, b in seq:
        t = w.trip(h, "1", 2, t, 4.0, w.code(a), w.code(b)) + 30
    w.discarded["too_many_trips"] += 1

    # Day starting away from home (first trip departs from work).
    h = w.new_household()
    t = w.trip(h, "2", 4, 16 * 60, 3.0, w.code("W"), w.code("SE")) + 20
    w.trip(h, "2", 4, t, 3.5, w.code("SE"), w.code("H"))
    w.discarded["not_from_home"] += 1

    # Never returns home.
    h = w.new_household()
    t = w.trip(h, "1", 5, 9 * 60, 8.0, w.code("H"), w.code("W")) + 240
    w.trip(h, "1", 5, t, 2.0, w.code("W"), w.code("SE"))
    w.discarded["never_returns_home"] += 1

    # Single-trip loop (home to home).
    h = w.new_household()
    w.trip(h, "1", 6, 10 * 60, 1.5, w.code("H"), w.code("H"))
    w.discarded["single_trip"] += 1

    # Overlapping trips: second trip departs before the first arrives.
    h = w.new_household()
    w.row(h, "1", 1, "0800", "0840", 40, "15.000", 1, 3)
    w.row(h, "1", 1, "0830", "0900", 30, "14.000", 3, 1)
    w.discarded["overlapping_trips"] += 1

    # Evening chain returning after midnight (kept, times unwrapped).
    h = w.new_household()
    w.row(h, "1", 6, "2010", "2035", 25, "9.000", 1, 15)
    w.row(h, "1", 6, "2340", "0010", 30, "10.000", 15, 1)
    w.expected_chains["H-SR-H"] += 1

    # Rows that must be rejected by validation.
    h = w.new_household()
    w.row(h, "1", 2, "0700", "0730", -9, "5.000", 1, 3)
    w.rejected["non-positive duration"] += 1
    w.row(h, "1", 2, "0700", "0730", 30, "-9", 1, 3)
    w.rejected["negative length"] += 1
    w.row(h, "-1", 2, "0915", "0940", 25, "3.000", 1, 9)
    w.rejected["non-household vehicle"] += 1
    w.row(h, "1", 2, "2575", "2600", 25, "3.000", 1, 9)
    w.rejected["invalid HHMM time"] += 1
    w.row(h, "1", 2, "1500", "1400", 30, "3.000", 1, 9)
    w.rejected["end before start without midnight wrap"] += 1
    del rng


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=200)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--out", default="data")
    args = ap.parse_args()

    rng = random.Random(args.seed)
    w = Writer(rng)
    special_cases(w)

    veh_day = 0
    while True:
        remaining = args.rows - len(w.rows)
        if remaining < 2:
            break
        h = w.new_household()
        veh = str(1 + veh_day % 2)
        day = 1 + veh_day % 7
        veh_day += 1
        if rng.random() < 0.25 and remaining >= 3:
            sites = list(weighted(rng, COMPLEX_WEIGHTS))
        else:
            sites = [weighted(rng, SIMPLE_WEIGHTS)]
        if len(sites) + 1 > remaining:
            sites = sites[:1]
        w.chain(h, veh, day, sites)
    if len(w.rows) < args.rows:
        w.row(w.new_household(), "1", 1, "1200", "1230", 30, "-9", 1, 9)
        w.rejected["negative length"] += 1
    assert len(w.rows) == args.rows, len(w.rows)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    header = ["HOUSEID", "VEHID", "TRAVDAY", "STRTTIME", "ENDTIME", "TRVLCMIN", "TRPMILES", "WHYFROM", "WHYTO"]
    with open(out / "trips_fixture.csv", "w", newline="") as f:
        f.write(",".join(header) + "\n")
        for r in w.rows:
            f.write(",".join(str(v) for v in r) + "\n")
    expected = {
        "rows": len(w.rows),
        "rows_rejected": sum(w.rejected.values()),
        "rejected_by_reason": dict(sorted(w.rejected.items())),
        "chains": sum(w.expected_chains.values()),
        "chains_by_type": dict(sorted(w.expected_chains.items())),
        "discarded_segments": dict(sorted(w.discarded.items())),
    }
    with open(out / "trips_fixture_expected.json", "w") as f:
        json.dump(expected, f, indent=2)
        f.write("\n")
    print(json.dumps(expected, indent=2))


if __name__ == "__main__":
    main()
