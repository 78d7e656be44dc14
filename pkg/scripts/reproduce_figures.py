"""Regenerate the four figure datasets (and plots, if matplotlib is installed).

    python3 scripts/reproduce_figures.py [OUTDIR]

fig1: running coupling for n = 2, nu = 1 (fixed branch and bound-state-count policy)
fig2: running coupling for n = 4, natural phase, with both branch formulas
fig3: zero-energy wavefunction against Born iterates of order 0, 1, 2
fig4: phase shifts and cutoff differences, natural and unnatural anchors
"""

from __future__ import annotations

import sys
from pathlib import Path

from singflow.cli import main

NATURAL = ["--anchor-k", "0.1", "--anchor-delta", "0.1"]
UNNATURAL = ["--anchor-k", "0.1", "--anchor-delta", "1.0471975511965976"]  # pi / 3
CUTOFFS = ["--cutoffs", "0.16,0.08,0.04,0.02,0.01"]

RUNS = {
    "fig1_flow_n2_branch1": ["flow", "--n", "2", "--lambda-l", "1.25", "--phi", "0", "--r-min", "0.01",
                             "--r-max", "1", "--r-points", "400", "--branch", "1"],
    "fig1_flow_n2_cycle": ["flow", "--n", "2", "--lambda-l", "1.25", "--phi", "0", "--r-min", "0.01",
                           "--r-max", "1", "--r-points", "400", "--branch", "cycle"],
    "fig2_flow_n4": ["flow", *NATURAL, "--r-min", "0.01", "--r-max", "0.3", "--r-points", "400"],
    "fig3_perturb": ["perturb", "--lambda-l", "1", "--phi", "0.3", "--x-points", "80"],
    "fig4_phases_natural": ["phases", *NATURAL, *CUTOFFS, "--k-min", "0.02", "--k-max", "1", "--k-points", "40"],
    "fig4_errors_natural": ["errors", *NATURAL, *CUTOFFS, "--k-min", "0.05", "--k-max", "0.5", "--k-points", "12"],
    "fig4_phases_unnatural": ["phases", *UNNATURAL, *CUTOFFS, "--k-min", "0.02", "--k-max", "1", "--k-points", "40"],
    "fig4_errors_unnatural": ["errors", *UNNATURAL, *CUTOFFS, "--k-min", "0.05", "--k-max", "0.5", "--k-points", "12"],
}

PLOTS = {  # dataset -> (x column, y columns, group column, log axes)
    "fig1_flow_n2_branch1": ("R", ["H_numeric", "H_formula_A", "H_formula_B"], None, "x"),
    "fig1_flow_n2_cycle": ("R", ["H_numeric"], None, "x"),
    "fig2_flow_n4": ("R", ["H_numeric", "H_formula_A", "H_formula_B"], None, "x"),
    "fig3_perturb": ("x", ["u_exact", "u_order0", "u_order1", "u_order2"], None, "x"),
    "fig4_phases_natural": ("E", ["delta_unwrapped"], "R", ""),
    "fig4_errors_natural": ("log_E", ["log_abs_delta_diff"], "pair", ""),
    "fig4_phases_unnatural": ("E", ["delta_unwrapped"], "R", ""),
    "fig4_errors_unnatural": ("log_E", ["log_abs_delta_diff"], "pair", ""),
}


def _plot(csv: Path, spec) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import numpy as np

    xcol, ycols, group, logs = spec
    lines = [ln for ln in csv.read_text().splitlines() if not ln.startswith("#")]
    names = lines[0].split(",")
    rows = [ln.split(",") for ln in lines[1:]]
    col = lambda name: [r[names.index(name)] for r in rows]  # noqa: E731
    fig, ax = plt.subplots(figsize=(5, 3.5))
    groups = sorted(set(col(group))) if group else [None]
    for g in groups:
        sel = [i for i, r in enumerate(rows) if g is None or r[names.index(group)] == g]
        x = np.array([float(col(xcol)[i]) for i in sel])
        for y in ycols:
            yy = np.array([float(col(y)[i]) for i in sel])
            if y.startswith("H_formula"):
                # draw each formula only where its validity indicator allows
                rl = np.array([float(col("abs_RL")[i]) for i in sel])
                yy = np.where((rl > 5) if y.endswith("A") else (rl <= 5), yy, np.nan)
            ax.plot(x, yy, label=y if g is None else f"{group}={g}")
    if "H_numeric" in ycols:
        ax.set_ylim(0, 1.1 * max(float(v) for v in col("H_numeric")))
    if "x" in logs:
        ax.set_xscale("log")
    ax.set_xlabel(xcol)
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(csv.with_suffix(".png"), dpi=120)
    plt.close(fig)


def run(outdir: Path) -> int:
    outdir.mkdir(parents=True, exist_ok=True)
    try:
        import matplotlib  # noqa: F401

        plotting = True
    except ImportError:
        plotting = False
    status = 0
    for name, argv in RUNS.items():
        path = outdir / f"{name}.csv"
        code = main([*argv, "--out", str(path)])
        print(f"{name}: exit {code}")
        status = status or code
        if code == 0 and plotting:
            _plot(path, PLOTS[name])
    return status


if __name__ == "__main__":
    sys.exit(run(Path(sys.argv[1] if len(sys.argv) > 1 else "figures")))
