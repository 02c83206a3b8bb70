"""Trace export (CSV / JSON).

CSV column order: ``tick, state, com_x, com_y, com_z``, then for every
contact in declaration order ``<id>_fx .. <id>_tz`` (world frame, torque
about the origin), then ``radius, r_w``, then ``<id>_mu_mes, <id>_mu_filt``
for each contact that slides somewhere in the scenario, then
``solve_time_us, max_violation``. Wall-clock columns are left empty unless
timing output is requested, so traces are byte-reproducible for a seed.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict
from importlib import resources
from typing import List, Optional, Sequence

from chebalance.harness import RunSummary, Scenario, TraceRow

AXES = ("fx", "fy", "fz", "tx", "ty", "tz")


def columns(contact_ids: Sequence[str], sliding_ids: Sequence[str]) -> List[str]:
    cols = ["tick", "state", "com_x", "com_y", "com_z"]
    for cid in contact_ids:
        cols += [f"{cid}_{a}" for a in AXES]
    cols += ["radius", "r_w"]
    for cid in sliding_ids:
        cols += [f"{cid}_mu_mes", f"{cid}_mu_filt"]
    cols += ["solve_time_us", "max_violation"]
    return cols


def _fmt(x) -> str:
    if x is None:
        return ""
    x = float(x)
    return "nan" if math.isnan(x) else repr(x)


def _json_num(x):
    if x is None:
        return None
    x = float(x)
    return None if math.isnan(x) else x


def row_values(row: TraceRow, contact_ids, sliding_ids, timing: bool) -> list:
    vals = [row.tick, row.state, *row.com]
    for cid in contact_ids:
        vals += list(row.wrenches[cid])
    vals += [row.radius, row.r_w]
    for cid in sliding_ids:
        vals += [row.mu_mes.get(cid), row.mu_filt.get(cid)]
    vals += [row.solve_time * 1e6 if timing else None, row.max_violation]
    return vals


def to_csv(rows: Sequence[TraceRow], scenario: Scenario, timing: bool = False) -> str:
    ids = [c.id for c in scenario.contacts]
    sliding = scenario.sliding_ids()
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns(ids, sliding))
    for r in rows:
        vals = row_values(r, ids, sliding, timing)
        w.writerow([vals[0], vals[1]] + [_fmt(v) for v in vals[2:]])
    return buf.getvalue()


def to_json(rows: Sequence[TraceRow], scenario: Scenario, summary: Optional[RunSummary] = None,
            timing: bool = False) -> str:
    ids = [c.id for c in scenario.contacts]
    sliding = scenario.sliding_ids()
    doc = {
        "format": "chebalance-trace",
        "version": 1,
        "columns": columns(ids, sliding),
        "contacts": ids,
        "sliding_contacts": sliding,
        "rows": [],
    }
    for r in rows:
        vals = row_values(r, ids, sliding, timing)
        doc["rows"].append({
            "tick": vals[0],
            "state": vals[1],
            "status": r.status,
            "values": [_json_num(v) for v in vals[2:]],
        })
    if summary is not None:
        s = asdict(summary)
        if not timing:
            for k in ("mean_solve_time", "max_solve_time", "mean_step_time"):
                s.pop(k)
        doc["summary"] = {k: (_json_num(v) if isinstance(v, float) else v) for k, v in s.items()}
    return json.dumps(doc, indent=1, sort_keys=False) + "\n"


def json_schema() -> dict:
    text = resources.files("chebalance").joinpath("data/trace_schema.json").read_text(encoding="utf-8")
    return json.loads(text)
