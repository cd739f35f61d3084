"""Tidy long-format plot data and deterministic table writers."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, is_dataclass

__all__ = ["fmt", "emit_plot_data", "rows_to_records", "dump_json"]


def fmt(x) -> str:
    return format(float(x), ".17g")


def emit_plot_data(report) -> str:
    """Reshape a completed report into ``series,x,y`` rows.

    ``report`` maps a kind (``"residuals"``, ``"blowup"``, ``"convergence"``
    or any ``"convergence_*"``) to the list of rows produced for it.
    """
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["series", "x", "y"])
    for kind in sorted(report):
        rows = report[kind]
        if kind == "residuals":
            series = (("rel_val_res", "rel_val_res"), ("rel_der_res", "rel_der_res"))
        elif kind == "blowup":
            series = (("length_E", "length_E"), ("lower_bound", "lower_bound"))
        elif kind.startswith("convergence"):
            suffix = kind[len("convergence"):]
            series = (("dev_full_map" + suffix, "dev_full_map"),
                      ("dev_first_coord" + suffix, "dev_first_coord"))
        else:
            continue
        for name, attr in series:
            for r in rows:
                writer.writerow([name, r.j, fmt(getattr(r, attr))])
    return buf.getvalue()


def _plain(value):
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, float):
        return float(fmt(value))
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if hasattr(value, "tolist"):
        return _plain(value.tolist())
    return value


def rows_to_records(rows) -> list:
    return [_plain(asdict(r) if is_dataclass(r) else r) for r in rows]


def dump_json(obj) -> str:
    return json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n"
