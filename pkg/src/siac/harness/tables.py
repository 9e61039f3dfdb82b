"""Render convergence reports as CSV and aligned text tables."""

from __future__ import annotations

import io
from typing import Optional

from .runner import ConvergenceReport


def fmt_float(v: Optional[float]) -> str:
    """Shortest representation that round-trips binary64."""
    if v is None:
        return ""
    return repr(float(v))


def fmt_sci(v: Optional[float]) -> str:
    return "--" if v is None else f"{v:.2e}"


def fmt_order(v: Optional[float]) -> str:
    return "--" if v is None else f"{v:.2f}"


def report_csv(report: ConvergenceReport) -> str:
    names = report.filter_names
    header = ["degree", "elements", "dg_error", "dg_order"]
    for name in names:
        header += [f"{name}_error", f"{name}_order"]
    out = io.StringIO()
    out.write(",".join(header) + "\n")
    for row in report.rows:
        cells = [str(row["degree"]), str(row["elements"])]
        for col in ["dg"] + names:
            cells.append(fmt_float(row.get(f"{col}_error")))
            cells.append(fmt_float(row.get(f"{col}_order")))
        out.write(",".join(cells) + "\n")
    return out.getvalue()


def report_text(report: ConvergenceReport) -> str:
    """Aligned table: Degree x Elements x {DG, each filter} (error, order)."""
    names = report.filter_names
    cols = ["dg"] + names
    titles = {"dg": "DG"}
    titles.update({n: n.replace("_", " ") for n in names})
    width = max(18, max(len(titles[c]) for c in cols) + 2)
    out = io.StringIO()
    if report.config.title:
        out.write(report.config.title + "\n")
    head = f"{'Degree':<8}{'Elements':<10}"
    for c in cols:
        head += f"{titles[c]:>{width}}{'Order':>8}"
    out.write(head + "\n")
    out.write("-" * len(head) + "\n")
    last_degree = None
    for row in report.rows:
        deg = row["degree"]
        label = f"k = {deg}" if deg != last_degree else ""
        last_degree = deg
        line = f"{label:<8}{row['elements']:<10}"
        for c in cols:
            line += f"{fmt_sci(row.get(f'{c}_error')):>{width}}{fmt_order(row.get(f'{c}_order')):>8}"
        out.write(line + "\n")
    return out.getvalue()


def pointwise_csv(data: dict) -> str:
    """Columns: x, u_exact, u_h, |err_h|, then per filter u_star, |err_star|, shift."""
    names = sorted(data["filtered"])
    header = ["x", "u_exact", "u_h", "abs_err_h"]
    for name in names:
        header += [f"u_star_{name}", f"abs_err_star_{name}", f"shift_{name}"]
    out = io.StringIO()
    out.write(",".join(header) + "\n")
    n = len(data["x"])
    for i in range(n):
        cells = [
            fmt_float(data["x"][i]),
            fmt_float(data["u_exact"][i]),
            fmt_float(data["u_h"][i]),
            fmt_float(data["dg_error"][i]),
        ]
        for name in names:
            cells += [
                fmt_float(data["filtered"][name][i]),
                fmt_float(data["filtered_error"][name][i]),
                fmt_float(data["shifts"][name][i]),
            ]
        out.write(",".join(cells) + "\n")
    return out.getvalue()


def pointwise_plot_script(csv_name: str, data: dict) -> str:
    """gnuplot script plotting DG vs filtered point-wise errors from the CSV."""
    names = sorted(data["filtered"])
    lines = [
        "set datafile separator ','",
        "set logscale y",
        "set xlabel 'x'",
        "set ylabel 'point-wise error'",
        "set key outside",
    ]
    for name, (left, right) in data.get("markers", {}).items():
        lines.append(f"set arrow from {left}, graph 0 to {left}, graph 1 nohead dt 2")
        lines.append(f"set arrow from {right}, graph 0 to {right}, graph 1 nohead dt 2")
        # big dots mark the hand-off between shifted and symmetric filtering
        lines.append(f"set label at {left}, graph 0.5 point pt 7 ps 2")
        lines.append(f"set label at {right}, graph 0.5 point pt 7 ps 2")
    plot = [f"'{csv_name}' using 1:4 with lines title 'DG'"]
    for i, name in enumerate(names):
        col = 6 + 3 * i
        plot.append(f"'{csv_name}' using 1:{col} with lines title '{name.replace('_', ' ')}'")
    lines.append("plot " + ", \\\n     ".join(plot))
    lines.append("pause -1")
    return "\n".join(lines) + "\n"


def comparison_text(report: ConvergenceReport) -> str:
    """Side-by-side measured vs reference errors where references exist."""
    cfg = report.config
    if not cfg.reference:
        return ""
    out = io.StringIO()
    out.write(f"{'column':<18}{'k':>3}{'N':>6}{'measured':>13}{'reference':>13}{'ratio':>9}\n")
    for row in report.rows:
        deg, n = row["degree"], row["elements"]
        for col in ["dg"] + report.filter_names:
            ref = cfg.reference_value(col, deg, n)
            got = row.get(f"{col}_error")
            if ref is None or got is None:
                continue
            if ref < cfg.floor:
                out.write(f"{col:<18}{deg:>3}{n:>6}{got:>13.3e}{ref:>13.3e}{'floor':>9}\n")
            else:
                out.write(f"{col:<18}{deg:>3}{n:>6}{got:>13.3e}{ref:>13.3e}{got / ref:>9.3f}\n")
    return out.getvalue()
