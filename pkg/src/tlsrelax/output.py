"""CSV records and SVG plots for scenario output.

CSV layout: ``# key=value`` header lines, one column-name line, then data
rows ``t,value[,stderr]``.  Numbers are written with a fixed format so the
same data always gives the same bytes.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

_FMT = "{:.10e}"


@dataclass
class CurveRecord:
    scenario: str
    method: str
    tag: str
    times: np.ndarray
    values: np.ndarray
    stderr: Optional[np.ndarray] = None
    value_name: str = "value"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.times.shape:
            raise ValueError("values must match times")
        if self.times.size > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")
        if self.stderr is not None:
            self.stderr = np.asarray(self.stderr, dtype=float)
            if self.stderr.shape != self.times.shape:
                raise ValueError("stderr must match times")

    @property
    def columns(self) -> list:
        cols = ["t", self.value_name]
        if self.stderr is not None:
            cols.append("stderr")
        return cols

    def filename(self) -> str:
        return f"{self.scenario}_{self.value_name}_{self.method}_{self.tag}.csv"

    def to_csv(self) -> str:
        head = {"scenario": self.scenario, "method": self.method, "tag": self.tag,
                "time_unit": "1/omega0 (column t is omega0*t)", **self.meta}
        lines = [f"# {k}={_meta_str(v)}" for k, v in head.items()]
        lines.append(",".join(self.columns))
        for i, t in enumerate(self.times):
            row = [_FMT.format(t), _FMT.format(self.values[i])]
            if self.stderr is not None:
                row.append(_FMT.format(self.stderr[i]))
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"

    def write(self, directory) -> str:
        os.makedirs(directory, exist_ok=True)
        path = os.path.join(directory, self.filename())
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_csv())
        return path


def _meta_str(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (tuple, list)):
        return ";".join(_meta_str(x) for x in v)
    return str(v).replace("\n", " ")


def read_csv(path) -> CurveRecord:
    """Inverse of :meth:`CurveRecord.write` (meta values come back as strings)."""
    meta, rows, columns = {}, [], None
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("# "):
                k, _, v = line[2:].partition("=")
                meta[k] = v
            elif columns is None:
                columns = line.split(",")
            elif line:
                rows.append([float(x) for x in line.split(",")])
    data = np.array(rows, dtype=float).reshape(-1, len(columns))
    for r in rows:
        if len(r) != len(columns):
            raise ValueError("column count does not match header")
    scenario, method, tag = meta.pop("scenario"), meta.pop("method"), meta.pop("tag")
    meta.pop("time_unit", None)
    stderr = data[:, 2] if len(columns) > 2 else None
    return CurveRecord(scenario, method, tag, data[:, 0], data[:, 1], stderr,
                       value_name=columns[1], meta=meta)


def plot_records(records, path, xlabel="omega0 t", ylabel="", logx=False, title=""):
    """Write the records as one standalone SVG figure."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "tlsrelax"
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    styles = {"pde": "-", "theory": "--", "mc": "o", "static": "-."}
    for rec in records:
        x = rec.times
        mask = x > 0 if logx else np.ones_like(x, dtype=bool)
        style = styles.get(rec.method, "-")
        label = f"{rec.method} {rec.tag}"
        if rec.stderr is not None and style == "o":
            ax.errorbar(x[mask], rec.values[mask], yerr=rec.stderr[mask], fmt="o", ms=2.5,
                        lw=0.8, label=label)
        else:
            ax.plot(x[mask], rec.values[mask], style, lw=1.2, label=label)
    if logx:
        ax.set_xscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.legend(fontsize=7)
    fig.tight_layout()
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    return path


def format_check(name: str, passed: bool, measured: float, tolerance: float, **extra) -> str:
    """One machine-readable validation line."""
    parts = [f"CHECK name={name}", f"status={'PASS' if passed else 'FAIL'}",
             f"measured={_num(measured)}", f"tolerance={_num(tolerance)}"]
    parts += [f"{k}={_num(v) if isinstance(v, float) else v}" for k, v in extra.items()]
    return " ".join(parts)


def _num(x) -> str:
    x = float(x)
    if math.isinf(x) or math.isnan(x):
        return str(x)
    return f"{x:.4g}"
