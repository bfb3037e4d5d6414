"""Trace, summary and plot-data files.

Trace files are comma-separated with one header row and one row per sample.
Floats are written with ``repr`` so reading a trace back gives bit-identical
values.  Column order (stable):

    time, q1_1..q1_6, q2_1..q2_<n2>, ee_x, ee_y, ee_z,
    ee_qx, ee_qy, ee_qz, ee_qw, brace_x, brace_y, brace_z,
    Ci, prod_sigma_t, prod_sigma_o, k, g, theta_z, d, residual,
    sigma_t_min, sigma_o_min, k_free, tracking_error, brace_normal_offset

``k`` is the Frobenius condition number of the constrained Jacobian used for
reporting; ``k_free`` is the free-space one that enters the objective.
"""

import csv
import math
from dataclasses import fields
from pathlib import Path

import numpy as np

from ..robot import Configuration
from .runner import SummaryStats, TrajectorySample

METRIC_COLUMNS = ("Ci", "prod_sigma_t", "prod_sigma_o", "k", "g", "theta_z", "d", "residual",
                  "sigma_t_min", "sigma_o_min", "k_free", "tracking_error", "brace_normal_offset")
SUMMARY_COLUMNS = tuple(f.name for f in fields(SummaryStats))
PLOT_METRICS = ("Ci", "prod_sigma_t", "prod_sigma_o", "k", "g", "theta_z", "d", "tracking_error")


def _fmt(x):
    return repr(float(x))


def trace_header(n1=6, n2=5):
    return (["time"]
            + [f"q1_{i + 1}" for i in range(n1)]
            + [f"q2_{i + 1}" for i in range(n2)]
            + ["ee_x", "ee_y", "ee_z", "ee_qx", "ee_qy", "ee_qz", "ee_qw",
               "brace_x", "brace_y", "brace_z"]
            + list(METRIC_COLUMNS))


def _row(s):
    return ([_fmt(s.time)]
            + [_fmt(v) for v in s.cfg.q1] + [_fmt(v) for v in s.cfg.q2]
            + [_fmt(v) for v in s.ee_position] + [_fmt(v) for v in s.ee_quaternion]
            + [_fmt(v) for v in s.brace_position]
            + [_fmt(getattr(s, c)) for c in METRIC_COLUMNS])


def write_trace(samples, path, n1=6, n2=None):
    if n2 is None:
        n2 = samples[0].cfg.q2.size if samples else 0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(trace_header(n1, n2))
        for s in samples:
            w.writerow(_row(s))


def read_trace(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    n1 = sum(1 for h in header if h.startswith("q1_"))
    n2 = sum(1 for h in header if h.startswith("q2_"))
    col = {h: i for i, h in enumerate(header)}
    samples = []
    for row in rows[1:]:
        v = [float(x) for x in row]

        def take(names):
            return np.array([v[col[n]] for n in names])

        samples.append(TrajectorySample(
            time=v[col["time"]],
            cfg=Configuration(take([f"q1_{i + 1}" for i in range(n1)]),
                              take([f"q2_{i + 1}" for i in range(n2)])),
            ee_position=take(["ee_x", "ee_y", "ee_z"]),
            ee_quaternion=take(["ee_qx", "ee_qy", "ee_qz", "ee_qw"]),
            brace_position=take(["brace_x", "brace_y", "brace_z"]),
            **{c: v[col[c]] for c in METRIC_COLUMNS},
        ))
    return samples


def write_summary(stats, path):
    """One row per strategy; ``stats`` is a list of :class:`SummaryStats`."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for st in stats:
            row = []
            for name in SUMMARY_COLUMNS:
                value = getattr(st, name)
                row.append(_fmt(value) if isinstance(value, float) else str(value))
            w.writerow(row)


def read_summary(path):
    out = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            kw = {}
            for f in fields(SummaryStats):
                raw = rec[f.name]
                if f.name in ("strategy", "status"):
                    kw[f.name] = raw
                elif f.name == "n_samples":
                    kw[f.name] = int(raw)
                else:
                    kw[f.name] = float(raw)
            out.append(SummaryStats(**kw))
    return out


def write_plot_data(samples, directory):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for metric in PLOT_METRICS:
        p = directory / f"{metric}.dat"
        with open(p, "w") as fh:
            fh.write(f"# time {metric}\n")
            for s in samples:
                fh.write(f"{_fmt(s.time)} {_fmt(getattr(s, metric))}\n")
        paths.append(p)
    return paths


def emit_outputs(samples, stats, out_dir, n2=None):
    """Write the trace, a one-row summary and plot data for one strategy run.

    Files are named after ``stats.strategy`` so several runs can share
    ``out_dir`` without touching each other's files.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    name = stats.strategy or "run"
    trace = out / f"trace_{name}.csv"
    summary = out / f"summary_{name}.csv"
    write_trace(samples, trace, n2=n2)
    write_summary([stats], summary)
    plots = write_plot_data(samples, out / "plots" / name)
    return {"trace": trace, "summary": summary, "plots": plots}


def is_error_summary(stats):
    return stats.status != "ok" or math.isnan(stats.mean_Ci)
