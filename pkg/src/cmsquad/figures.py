"""Plot kinds: data columns plus a chart drawn from exactly those columns."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import canonical, extremal, svgplot, weightfn

PROFILE_KINDS = ("pi-family", "lambda", "pi-prime-minus-w")
KINDS = PROFILE_KINDS + ("phi-psi", "q_x", "p_x")


def node_markers(tables):
    """Gaussian nodes (circles) and Lobatto nodes including +-1 (squares)."""
    return {
        "circle": np.asarray(canonical.gaussian_nodes(tables), float),
        "square": np.asarray(canonical.eta_all(tables), float),
    }


def profile_columns(cols, spec):
    """Plotted columns for the profile-based kinds, from a profile CSV."""
    x = cols["x"]
    return {
        "x": x,
        "pi": cols["pi"],
        "integral": np.asarray(weightfn.cumulative_mass(spec, x), float),
        "pi_lower": cols["pi_lower"],
        "lambda": cols["lambda"],
        "pi_prime_minus_w": cols["pi_prime"] - cols["w"],
    }


def polynomial_columns(kind, tables, grid, x0=None):
    t = np.linspace(-1.0, 1.0, max(grid, 2))
    if kind == "phi-psi":
        return {"t": t, "phi": tables.phi(t)[0], "psi": tables.psi(t)[0]}, None
    if x0 is None:
        raise ValueError(f"plot kind {kind} needs x0")
    rep = canonical.rep_of_x(tables, x0)
    if kind == "q_x":
        return {"t": t, "q_x": extremal.build_qx(rep, tables)(t)}, rep
    p, pl = extremal.build_px(rep), extremal.build_px_lower(rep)
    return {"t": t, "p_x": p(t), "p_x_lower": pl(t)}, rep


def _title(kind, n, name, x0=None):
    extra = f", x = {x0:g}" if x0 is not None else ""
    return f"{kind}: n = {n}, w = {name}{extra}"


def chart_for(kind, data, tables, name, rep=None, x0=None):
    n = tables.n
    chart = svgplot.Chart(_title(kind, n, name, x0), markers=node_markers(tables))
    if kind == "pi-family":
        chart.ylabel = "mass"
        chart.add("pi", data["x"], data["pi"])
        chart.add("integral of w over [-1, x]", data["x"], data["integral"], dashed=True)
        chart.add("pi_lower", data["x"], data["pi_lower"])
    elif kind == "lambda":
        chart.ylabel = "lambda"
        chart.add("lambda", data["x"], data["lambda"])
    elif kind == "pi-prime-minus-w":
        chart.ylabel = "pi' - w"
        chart.add("pi' - w", data["x"], data["pi_prime_minus_w"])
    elif kind == "phi-psi":
        chart.add("phi", data["t"], data["phi"])
        chart.add("psi", data["t"], data["psi"], dashed=True)
    elif kind == "q_x":
        chart.add("q_x", data["t"], data["q_x"])
    elif kind == "p_x":
        chart.add("p_x", data["t"], data["p_x"])
        chart.add("p_x_lower", data["t"], data["p_x_lower"], dashed=True)
    else:
        raise ValueError(f"unknown plot kind {kind!r}")
    if rep is not None:
        chart.markers["triangle"] = np.asarray(rep.nodes, float)
    return chart


def write_columns(data, path):
    names = list(data)
    rows = np.column_stack([np.asarray(data[k], float) for k in names])
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(names) + "\n")
        for row in rows:
            fh.write(",".join("" if not np.isfinite(v) else f"{v + 0.0:.17g}" for v in row) + "\n")


@dataclass(frozen=True)
class FigureJob:
    weight: str
    kind: str
    n: int = 5
    x0: float | None = None
    grid: int = 400

    @property
    def stem(self):
        return f"{self.weight}_{self.kind}"

    def argv(self, out_dir):
        args = ["plot", "--weight", self.weight, "--n", str(self.n), "--grid", str(self.grid),
                "--plot", self.kind, "--out", str(Path(out_dir) / f"{self.stem}.svg")]
        if self.x0 is not None:
            args += ["--x0", repr(self.x0)]
        return args


# the figure set: n = 5 for the ramp max{1, 1 + 4t} and the 1/5 step
FIGURE_SET = (
    FigureJob("ramp", "pi-family"),
    FigureJob("ramp", "lambda"),
    FigureJob("ramp", "pi-prime-minus-w"),
    FigureJob("ramp", "phi-psi"),
    FigureJob("ramp", "q_x", x0=0.2),
    FigureJob("ramp", "p_x", x0=0.2),
    FigureJob("step", "pi-family"),
    FigureJob("step", "pi-prime-minus-w"),
    FigureJob("step", "lambda"),
)
