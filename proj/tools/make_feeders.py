#!/usr/bin/env python3
"""Regenerates the feeder files under data/feeders.

The shipped JSON files are the source of truth; this script records how they
were produced so that profiles can be changed consistently.
"""
import json
import math
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent.parent / "data" / "feeders"

RESIDENTIAL = [0.55, 0.5, 0.48, 0.47, 0.48, 0.52, 0.6, 0.7, 0.75, 0.75, 0.74, 0.74,
               0.75, 0.76, 0.78, 0.82, 0.88, 0.95, 1.0, 0.98, 0.92, 0.82, 0.7, 0.6]
# Daytime-peaking load: offices, schools, irrigation pumping.
COMMERCIAL = [0.45, 0.42, 0.4, 0.4, 0.42, 0.5, 0.62, 0.75, 0.86, 0.93, 0.97, 1.0,
              1.0, 0.99, 0.96, 0.9, 0.8, 0.7, 0.62, 0.56, 0.52, 0.5, 0.48, 0.46]

THREE_DAYS = [{"label": "peak_load", "weight": 1}, {"label": "max_solar", "weight": 1},
              {"label": "average", "weight": 363}]
ONE_DAY = [{"label": "peak_load", "weight": 365}]
DAY_SCALE = {"peak_load": 1.0, "max_solar": 0.8, "average": 0.7}
SOLAR_PEAK = {"peak_load": 0.6, "max_solar": 0.9, "average": 0.7}


def solar_shape(peak):
    return [round(max(0.0, peak * math.sin(math.pi * (h - 6) / 12)), 4) if 6 < h < 18 else 0.0
            for h in range(24)]


def profile(days, fn):
    return {d["label"]: fn(d["label"]) for d in days}


def load(days, peak, shape=RESIDENTIAL, pf_ratio=0.3, scale=None):
    scale = scale or DAY_SCALE
    p = profile(days, lambda d: [round(peak * scale[d] * s, 4) for s in shape])
    q = profile(days, lambda d: [round(pf_ratio * peak * scale[d] * s, 4) for s in shape])
    return p, q


def solar_cf(days, peaks=None):
    peaks = peaks or SOLAR_PEAK
    return profile(days, lambda d: solar_shape(peaks[d]))


def bus(bid, days=None, peak=0.0, shape=RESIDENTIAL, vmin=0.95, vmax=1.05, scale=None):
    b = {"id": bid, "vmin": vmin, "vmax": vmax}
    if peak > 0:
        b["load"], b["qload"] = load(days, peak, shape, scale=scale)
    return b


def feeder_head(frm, to, cap, r=0.002, x=0.01, upgrade=5.0, cost=40000.0):
    return {"id": "fh", "from": frm, "to": to, "kind": "feeder_head", "r": r, "x": x,
            "capacity_mva": cap, "upgrade_capacity_mva": upgrade, "upgrade_cost": cost,
            "tap_min": 0.95, "tap_max": 1.05}


def option(label, cap, r, x, cost):
    return {"label": label, "capacity_mva": cap, "r": r, "x": x, "cost_per_mva_yr": cost}


def candidate(sid, frm, to, r, x, cap, upgrades):
    opts = [option("keep", cap, r, x, 0.0)] + upgrades
    return {"id": sid, "from": frm, "to": to, "kind": "candidate", "r": r, "x": x, "options": opts}


def line(sid, frm, to, r, x, cap, upgrades=None, placement="rural-OH"):
    seg = {"id": sid, "from": frm, "to": to, "kind": "line", "r": r, "x": x, "capacity_mva": cap,
           "conductor": {"label": "ACSR-4/0", "length_mi": 1.0, "kv": 12.47, "placement": placement}}
    if upgrades:
        seg["upgrades"] = upgrades
    return seg


STORAGE_TEMPLATE = {"p_in_max_mw": 1.0, "p_out_max_mw": 1.0, "duration_h": 2.0, "efficiency": 0.9,
                    "reactive_fraction": 0.0, "annualized_cost_per_mw": 61081.0, "invest_cap_mw": 3.0}
REGULATOR_TEMPLATE = {"install_cost": 14423.0, "tap_min": 0.9, "tap_max": 1.1}
UPGRADES = [option("ACSR-336", 3.5, 0.003, 0.009, 1500.0), option("ACSR-556", 5.0, 0.002, 0.0085, 2200.0)]


def base_doc(name, days, buses, segments, **extra):
    doc = {"name": name, "base_mva": 1.0, "v_ref": 1.0, "region": "CA", "imbalance_cost": 10000.0,
           "days": days, "buses": buses, "segments": segments,
           "prices": profile(days, lambda d: [30.0] * 24), "cs_profile": solar_cf(days),
           "storage_template": STORAGE_TEMPLATE, "regulator_template": REGULATOR_TEMPLATE}
    doc.update(extra)
    return doc


def tutorial():
    d = THREE_DAYS
    cf = solar_cf(d)
    return base_doc(
        "tutorial-4bus", d,
        [bus("b0"), bus("b1", d, 0.8), bus("b2", d, 1.0), bus("b3", d, 1.2)],
        [feeder_head("b0", "b1", 5.0),
         line("l12", "b1", "b2", 0.004, 0.008, 4.0),
         candidate("l23", "b2", "b3", 0.005, 0.01, 2.2, UPGRADES)],
        solar=[{"id": "pv2", "bus": "b2", "role": "rooftop", "capacity_mw": 0.6, "profile": cf},
               {"id": "pv3", "bus": "b3", "role": "rooftop", "capacity_mw": 0.4, "profile": cf}],
        storage=[{"id": "bess1", "bus": "b2", "status": "existing", "p_in_max_mw": 0.25, "p_out_max_mw": 0.25,
                  "duration_h": 2.0, "efficiency": 0.9, "reactive_fraction": 0.2}])


def deferral():
    """Daytime-peaking load at the far end overloads l23 around noon; a
    community-solar plant at b3 relieves it, so the reconductoring is
    deferred."""
    d = THREE_DAYS
    return base_doc(
        "deferral-4bus", d,
        [bus("b0"), bus("b1", d, 0.5), bus("b2", d, 0.5), bus("b3", d, 2.5, COMMERCIAL)],
        [feeder_head("b0", "b1", 6.0),
         line("l12", "b1", "b2", 0.002, 0.004, 5.0),
         candidate("l23", "b2", "b3", 0.002, 0.004, 2.3,
                   [option("ACSR-336", 3.5, 0.0015, 0.0038, 1500.0)])])


def hosting():
    """Sunny feeder whose reverse flow through the feeder head sits near its
    rating once rooftop PV is scaled up; the extra community solar needs the
    head upgrade or year-round curtailment."""
    d = THREE_DAYS
    scale = {"peak_load": 1.0, "max_solar": 0.8, "average": 0.8}
    peaks = {"peak_load": 0.7, "max_solar": 0.9, "average": 0.9}
    cf = solar_cf(d, peaks)
    return base_doc(
        "hosting-4bus", d,
        [bus("b0"), bus("b1", d, 0.6, COMMERCIAL, scale=scale), bus("b2", d, 0.8, COMMERCIAL, scale=scale),
         bus("b3", d, 0.8, COMMERCIAL, scale=scale)],
        [feeder_head("b0", "b1", 3.0, upgrade=3.0, cost=15000.0),
         line("l12", "b1", "b2", 0.002, 0.004, 6.0),
         line("l23", "b2", "b3", 0.002, 0.004, 6.0)],
        solar=[{"id": "pv2", "bus": "b2", "role": "rooftop", "capacity_mw": 0.5, "profile": cf},
               {"id": "pv3", "bus": "b3", "role": "rooftop", "capacity_mw": 0.5, "profile": cf}],
        cs_profile=cf, prices=profile(d, lambda _: [60.0] * 24))


def oracle_feeders():
    d = ONE_DAY
    cf = solar_cf(d)
    out = {}
    out["oracle-chain3"] = base_doc(
        "oracle-chain3", d,
        [bus("b0"), bus("b1", d, 1.0), bus("b2", d, 2.6)],
        [feeder_head("b0", "b1", 3.2, upgrade=3.0, cost=25000.0),
         candidate("l12", "b1", "b2", 0.004, 0.008, 2.2, UPGRADES)])
    out["oracle-vr4"] = base_doc(
        "oracle-vr4", d,
        [bus("b0"), bus("b1", d, 0.5), bus("b2", d, 1.0), bus("b3", d, 1.5)],
        [feeder_head("b0", "b1", 5.0),
         line("l12", "b1", "b2", 0.012, 0.024, 5.0),
         line("l23", "b2", "b3", 0.012, 0.024, 5.0)])
    out["oracle-branch5"] = base_doc(
        "oracle-branch5", d,
        [bus("b0"), bus("b1", d, 0.4), bus("b2", d, 1.6), bus("b3", d, 0.6), bus("b4", d, 1.7)],
        [feeder_head("b0", "b1", 4.0, upgrade=4.0, cost=30000.0),
         candidate("l12", "b1", "b2", 0.004, 0.008, 1.5, UPGRADES),
         line("l13", "b1", "b3", 0.003, 0.006, 4.0),
         candidate("l34", "b3", "b4", 0.004, 0.008, 1.6, [UPGRADES[0]])])
    out["oracle-pv6"] = base_doc(
        "oracle-pv6", d,
        [bus("b0"), bus("b1", d, 0.3), bus("b2", d, 0.3), bus("b3", d, 0.3), bus("b4", d, 0.3),
         bus("b5", d, 0.3)],
        [feeder_head("b0", "b1", 5.0),
         line("l12", "b1", "b2", 0.004, 0.006, 4.0),
         candidate("l23", "b2", "b3", 0.004, 0.006, 1.8, [UPGRADES[0]]),
         line("l34", "b3", "b4", 0.004, 0.006, 4.0),
         line("l45", "b4", "b5", 0.004, 0.006, 4.0)],
        solar=[{"id": "pv4", "bus": "b4", "role": "rooftop", "capacity_mw": 1.5, "profile": cf},
               {"id": "pv5", "bus": "b5", "role": "rooftop", "capacity_mw": 1.5, "profile": cf}])
    out["oracle-storage4"] = base_doc(
        "oracle-storage4", d,
        [bus("b0"), bus("b1", d, 1.2), bus("b2", d, 1.4), bus("b3", d, 1.3)],
        [feeder_head("b0", "b1", 3.6, upgrade=2.0, cost=90000.0),
         line("l12", "b1", "b2", 0.003, 0.006, 4.0),
         candidate("l23", "b2", "b3", 0.003, 0.006, 1.4, [UPGRADES[0]])],
        storage=[{"id": "bess2", "bus": "b2", "status": "existing", "p_in_max_mw": 0.3, "p_out_max_mw": 0.3,
                  "duration_h": 2.0, "efficiency": 0.9, "reactive_fraction": 0.1}],
        storage_template=dict(STORAGE_TEMPLATE, annualized_cost_per_mw=20000.0))
    return out


def main():
    ROOT.mkdir(parents=True, exist_ok=True)
    (ROOT / "oracle").mkdir(exist_ok=True)
    docs = {"tutorial": tutorial(), "deferral": deferral(), "hosting": hosting()}
    for name, doc in docs.items():
        (ROOT / f"{name}.json").write_text(json.dumps(doc, indent=1) + "\n")
    for name, doc in oracle_feeders().items():
        (ROOT / "oracle" / f"{name}.json").write_text(json.dumps(doc, indent=1) + "\n")


if __name__ == "__main__":
    main()
