"""``singflow`` command-line front end.

Every subcommand builds a ``Dataset`` (ordered columns, rows, metadata) and
writes it as CSV with a ``#`` metadata preamble or as JSON.  ``tune`` prints a
single JSON object instead.  Exit codes: 0 success, 2 invalid input,
3 numerical failure; failures also print a JSON error object on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Sequence

import numpy as np

from . import __version__
from .core import (
    DomainError,
    PotentialSpec,
    PreconditionError,
    SingflowError,
    Tolerances,
    nu_of,
    reduce_angle,
)
from .flow import FixedBoundStateCount, FixedBranch, trace_flow, tune_counterterm
from .perturbation import exact_zero_energy, perturbative_series
from .radial import bound_states_shooting, phase_shift
from .zero_energy import (
    PhaseAtK,
    ScatteringLength,
    ZeroEnergyPhase,
    phase_from_observable,
    spectrum_n2,
)

COMMANDS = ("flow", "phases", "errors", "spectrum", "perturb", "tune")
EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3


class ConfigError(DomainError):
    pass


@dataclass
class RunConfig:
    command: str = "flow"
    n: int = 4
    lambda_l: float = 1.0
    phi: float | None = None
    anchor_k: float | None = None
    anchor_delta: float | None = None
    scattering_length: float | None = None
    cutoffs: tuple[float, ...] = (0.16, 0.08, 0.04, 0.02, 0.01)
    pairs: tuple[tuple[float, float], ...] | None = None
    branch: str = "min"  # an integer, "min" or "cycle"
    R: float | None = None
    k_min: float = 0.05
    k_max: float = 0.5
    k_points: int = 10
    r_min: float = 0.01
    r_max: float = 0.3
    r_points: int = 200
    kappa_min: float = 1e-6
    kappa_max: float = 10.0
    x_min: float | None = None
    x_max: float | None = None
    x_points: int = 60
    orders: tuple[int, ...] = (0, 1, 2)
    format: str = "csv"
    out: str | None = None

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        sources = [self.phi is not None, self.anchor_k is not None or self.anchor_delta is not None,
                   self.scattering_length is not None]
        if sum(sources) > 1:
            raise ConfigError("give only one of --phi, --anchor-k/--anchor-delta, --scattering-length")
        if (self.anchor_k is None) != (self.anchor_delta is None):
            raise ConfigError("--anchor-k and --anchor-delta go together")
        if self.branch not in ("min", "cycle"):
            try:
                if int(self.branch) < 0:
                    raise ValueError
            except ValueError:
                raise ConfigError(f"branch must be a non-negative integer, 'min' or 'cycle', got {self.branch!r}")
        for name in ("k_points", "r_points", "x_points"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")
        if self.k_points > 0 and not 0 < self.k_min <= self.k_max:
            raise ConfigError("need 0 < k_min <= k_max")
        if not 0 < self.r_min <= self.r_max:
            raise ConfigError("need 0 < r_min <= r_max")
        if not 0 < self.kappa_min < self.kappa_max:
            raise ConfigError("need 0 < kappa_min < kappa_max")
        if any(not c > 0 for c in self.cutoffs):
            raise ConfigError("cutoffs must be positive")
        if any(o not in (0, 1, 2) for o in self.orders):
            raise ConfigError("orders must be a subset of {0, 1, 2}")
        if self.command == "flow" and self.r_points < 1:
            raise ConfigError("r_points must be >= 1")
        if self.command == "spectrum" and self.n != 2:
            raise ConfigError("spectrum needs n = 2")
        if self.command == "perturb" and self.n != 4:
            raise ConfigError("perturb needs n = 4")
        self.spec()  # validates n and lambda_L

    def spec(self) -> PotentialSpec:
        return PotentialSpec(self.n, self.lambda_l)

    def echo(self) -> dict[str, Any]:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(self).items()}


# -- config parsing -------------------------------------------------------------------


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in text.replace(";", ",").split(",") if t.strip())


def _pairs(text: str) -> tuple[tuple[float, float], ...]:
    out = []
    for item in text.split(","):
        if item.strip():
            a, b = item.split(":")
            out.append((float(a), float(b)))
    return tuple(out)


_CONVERTERS = {
    "n": int,
    "k_points": int,
    "r_points": int,
    "x_points": int,
    "cutoffs": _floats,
    "pairs": _pairs,
    "orders": lambda s: tuple(int(float(t)) for t in _floats(s)),
    "branch": str,
    "format": str,
    "out": str,
    "command": str,
}


def _convert(key: str, raw: str):
    conv = _CONVERTERS.get(key, float)
    try:
        return conv(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc


def read_config_file(path: str) -> dict[str, Any]:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    names = {f.name for f in fields(RunConfig)}
    out = {}
    try:
        text = open(path, encoding="utf-8").read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in names:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = _convert(key, value)
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="singflow", description="Renormalized singular potentials.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config")
    p.add_argument("--version", action="version", version=__version__)
    for flag in (
        "n", "lambda-l", "phi", "anchor-k", "anchor-delta", "scattering-length", "cutoffs", "pairs",
        "branch", "R", "k-min", "k-max", "k-points", "r-min", "r-max", "r-points", "kappa-min",
        "kappa-max", "x-min", "x-max", "x-points", "orders", "format", "out",
    ):
        p.add_argument(f"--{flag}", dest=flag.replace("-", "_"), default=None)
    return p


def config_from_args(argv: Sequence[str]) -> RunConfig:
    ns = build_parser().parse_args(argv)
    values: dict[str, Any] = {}
    if ns.config:
        values.update(read_config_file(ns.config))
    for f in fields(RunConfig):
        raw = getattr(ns, f.name, None)
        if raw is not None and f.name != "command":
            values[f.name] = _convert(f.name, raw)
    values["command"] = ns.command
    cfg = replace(RunConfig(), **values)
    cfg.validate()
    return cfg


# -- datasets -------------------------------------------------------------------------


@dataclass
class Dataset:
    columns: list[tuple[str, str]]  # (name, unit)
    rows: list[tuple]
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def names(self) -> list[str]:
        return [c for c, _ in self.columns]


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.11e}"


def to_csv(ds: Dataset) -> str:
    lines = [f"# {key}: {json.dumps(val, sort_keys=True)}" for key, val in ds.metadata.items()]
    lines.append("# units: " + ",".join(u for _, u in ds.columns))
    lines.append(",".join(ds.names))
    lines += [",".join(_fmt(v) for v in row) for row in ds.rows]
    return "\n".join(lines) + "\n"


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, str):
        return v
    v = float(v)
    return v if math.isfinite(v) else str(v)


def to_json(ds: Dataset) -> str:
    doc = {
        "columns": [{"name": n, "unit": u} for n, u in ds.columns],
        "rows": [[_json_value(v) for v in row] for row in ds.rows],
        "metadata": ds.metadata,
    }
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"


# -- commands -------------------------------------------------------------------------


def resolve_phase(cfg: RunConfig, tol: Tolerances) -> ZeroEnergyPhase:
    spec = cfg.spec()
    if cfg.scattering_length is not None:
        return phase_from_observable(spec, ScatteringLength(cfg.scattering_length))
    if cfg.anchor_k is not None:
        return phase_from_observable(spec, PhaseAtK(cfg.anchor_k, cfg.anchor_delta), tol)
    return ZeroEnergyPhase(cfg.n, cfg.phi if cfg.phi is not None else 0.0)


def _branch(cfg: RunConfig) -> int | None:
    return None if cfg.branch in ("min", "cycle") else int(cfg.branch)


def _k_grid(cfg: RunConfig) -> np.ndarray:
    if cfg.k_points == 0:
        return np.array([])
    if cfg.k_points == 1 or cfg.k_min == cfg.k_max:
        return np.array([cfg.k_min])
    return np.geomspace(cfg.k_min, cfg.k_max, cfg.k_points)


def cmd_flow(cfg: RunConfig, tol: Tolerances) -> Dataset:
    spec, phase = cfg.spec(), resolve_phase(cfg, tol)
    policy = FixedBoundStateCount() if cfg.branch == "cycle" else FixedBranch(_branch(cfg) if _branch(cfg) is not None else 1)
    r_max = cfg.r_min if cfg.r_points == 1 else cfg.r_max
    trace = trace_flow(spec, phase, (cfg.r_min, r_max), max(cfg.r_points, 2), policy)
    dlog = math.log(cfg.r_max / cfg.r_min) / max(cfg.r_points - 1, 1)
    rows = []
    for p, a, b in zip(trace.points, trace.formula_A, trace.formula_B):
        near = any(abs(math.log(p.R / z)) < 0.5 * dlog for z in trace.pole_locations)
        rows.append((p.R, p.lambda_S, p.H, a.H, b.H, p.branch, near, p.indicator))
    cols = [("R", "r0"), ("lambda_S_numeric", "1"), ("H_numeric", "rad"), ("H_formula_A", "rad"),
            ("H_formula_B", "rad"), ("branch", "1"), ("near_pole", "bool"), ("abs_RL", "1")]
    meta = {"phi_raw": phase.phi_raw, "pole_locations": trace.pole_locations, "gaps": trace.gaps,
            "policy": type(policy).__name__}
    return Dataset(cols, rows, meta)


def _tuned_phases(spec, phase, R, ks, m, tol):
    ct = tune_counterterm(spec, phase, R, m)
    pts = [phase_shift(spec, ct, float(k), tol) for k in ks]
    unwrapped = np.unwrap([p.delta for p in pts], period=math.pi) if pts else []
    return ct, pts, unwrapped


def cmd_phases(cfg: RunConfig, tol: Tolerances) -> Dataset:
    spec, phase = cfg.spec(), resolve_phase(cfg, tol)
    ks = _k_grid(cfg)
    rows = []
    for R in cfg.cutoffs:
        _, pts, unwrapped = _tuned_phases(spec, phase, R, ks, _branch(cfg), tol)
        for p, w in zip(pts, unwrapped):
            rows.append((p.k, 0.5 * p.k**2, R, p.delta, float(w), p.stability))
    cols = [("k", "1/r0"), ("E", "k^2/2"), ("R", "r0"), ("delta", "rad"), ("delta_unwrapped", "rad"),
            ("stability", "rad")]
    return Dataset(cols, rows, {"phi_raw": phase.phi_raw, "ir_sensitive": spec.n <= 3})


def cutoff_pairs(cfg: RunConfig) -> list[tuple[float, float]]:
    if cfg.pairs:
        return [tuple(p) for p in cfg.pairs]
    cs = sorted(cfg.cutoffs, reverse=True)
    return list(zip(cs[:-1], cs[1:]))


def cmd_errors(cfg: RunConfig, tol: Tolerances) -> Dataset:
    spec, phase = cfg.spec(), resolve_phase(cfg, tol)
    ks = _k_grid(cfg)
    cache: dict[float, np.ndarray] = {}

    def deltas(R):
        if R not in cache:
            _, pts, _ = _tuned_phases(spec, phase, R, ks, _branch(cfg), tol)
            cache[R] = np.array([p.delta for p in pts])
        return cache[R]

    rows, slopes, degenerate = [], {}, []
    logE = np.log(0.5 * ks**2)
    for R, Rp in cutoff_pairs(cfg):
        label = f"{R:g}/{Rp:g}"
        diff = np.abs(reduce_angle(deltas(R) - deltas(Rp))) if len(ks) else np.array([])
        with np.errstate(divide="ignore"):
            logd = np.log(diff)
        ok = np.isfinite(logd)
        if ok.sum() >= 2:
            slope = float(np.polyfit(logE[ok], logd[ok], 1)[0])
        else:
            slope = math.nan
            degenerate.append(label)
        slopes[label] = slope
        rows += [(e, d, label, slope) for e, d in zip(logE, logd)]
    cols = [("log_E", "log(k^2/2)"), ("log_abs_delta_diff", "log(rad)"), ("pair", "R/R'"), ("fitted_slope", "1")]
    meta = {"phi_raw": phase.phi_raw, "slopes_in_log_E": slopes, "undefined_slope_pairs": degenerate}
    return Dataset(cols, rows, meta)


def cmd_spectrum(cfg: RunConfig, tol: Tolerances) -> Dataset:
    spec, phase = cfg.spec(), resolve_phase(cfg, tol)
    R = cfg.R if cfg.R is not None else min(cfg.cutoffs)
    ct = tune_counterterm(spec, phase, R, _branch(cfg))
    kmax = min(cfg.kappa_max, 0.5 * math.sqrt(ct.lambda_S))
    states = bound_states_shooting(spec, ct, (cfg.kappa_min, kmax), tol) if cfg.kappa_min < kmax else []
    nu = nu_of(spec.lambda_L)
    ratio = math.exp(-math.pi / nu)
    rows = []
    offset = None
    for i, s in enumerate(states):
        if offset is None:
            # formula labels differ from node counts by a constant
            label = round((phase.phi_raw + _imlg(nu) - nu * math.log(0.5 * s.kappa)) / math.pi - 0.5)
            offset = s.m - label
        kf = spectrum_n2(spec.lambda_L, phase, [s.m - offset])[0].kappa
        prev = s.kappa / states[i - 1].kappa if i else math.nan
        rows.append((s.m, s.kappa, kf, prev, ratio))
    cols = [("m", "nodes"), ("kappa_shooting", "1/r0"), ("kappa_formula", "1/r0"),
            ("ratio_to_previous", "1"), ("e_to_minus_pi_over_nu", "1")]
    return Dataset(cols, rows, {"phi_raw": phase.phi_raw, "R": R, "lambda_S": ct.lambda_S, "nu": nu})


def _imlg(nu):
    from .specfun import im_log_gamma_one_plus_i

    return im_log_gamma_one_plus_i(nu)


def cmd_perturb(cfg: RunConfig, tol: Tolerances) -> Dataset:
    spec = cfg.spec()
    if spec.lambda_L == 0:
        phase = ZeroEnergyPhase(4, 0.0)
    else:
        phase = resolve_phase(cfg, tol)
    scale = math.sqrt(spec.lambda_L) if spec.lambda_L > 0 else 1.0
    x_min = cfg.x_min if cfg.x_min is not None else 0.1 * scale
    x_max = cfg.x_max if cfg.x_max is not None else 10.0 * scale
    if not 0 < x_min <= x_max:
        raise ConfigError("need 0 < x_min <= x_max")
    xs = np.geomspace(x_min, x_max, cfg.x_points) if cfg.x_points > 1 else np.array([x_min] * cfg.x_points)
    orders = sorted(set(cfg.orders))
    series = perturbative_series(phase, spec.lambda_L, max(orders) if orders else 0)
    rows = []
    for x in xs:
        x = float(x)
        rows.append((x, exact_zero_energy(phase, spec.lambda_L, x), *[series(x, o) for o in orders]))
    cols = [("x", "r0"), ("u_exact", "r0")] + [(f"u_order{o}", "r0") for o in orders]
    return Dataset(cols, rows, {"phi_raw": phase.phi_raw, "a4": series.a4})


def cmd_tune(cfg: RunConfig, tol: Tolerances) -> dict[str, Any]:
    spec, phase = cfg.spec(), resolve_phase(cfg, tol)
    R = cfg.R if cfg.R is not None else min(cfg.cutoffs)
    ct = tune_counterterm(spec, phase, R, _branch(cfg))
    return {"R": ct.R, "lambda_S": ct.lambda_S, "H": ct.H, "branch": ct.branch, "phi_mod_pi": phase.phi}


HANDLERS = {
    "flow": cmd_flow,
    "phases": cmd_phases,
    "errors": cmd_errors,
    "spectrum": cmd_spectrum,
    "perturb": cmd_perturb,
}


def run(cfg: RunConfig, tol: Tolerances | None = None) -> Dataset | dict:
    tol = tol or Tolerances.from_env()
    if cfg.command == "tune":
        return cmd_tune(cfg, tol)
    ds = HANDLERS[cfg.command](cfg, tol)
    ds.metadata = {
        "command": cfg.command,
        "config": cfg.echo(),
        "tolerances": asdict(tol),
        "version": __version__,
        "reproducibility": "deterministic; rerunning this config on the same build reproduces the rows",
        **ds.metadata,
    }
    return ds


def _error(exc: Exception, code: int) -> int:
    print(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}), file=sys.stderr)
    return code


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        cfg = config_from_args(argv)
        tol = Tolerances.from_env()
        result = run(cfg, tol)
    except SystemExit as exc:  # argparse usage errors
        return EXIT_INVALID if exc.code not in (0, None) else EXIT_OK
    except (DomainError, PreconditionError) as exc:
        return _error(exc, EXIT_INVALID)
    except SingflowError as exc:
        return _error(exc, EXIT_NUMERIC)
    if isinstance(result, dict):
        text = json.dumps(result, sort_keys=True) + "\n"
    else:
        text = to_csv(result) if cfg.format == "csv" else to_json(result)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
