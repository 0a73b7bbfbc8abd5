"""Experiment configuration, persistence, sweeps and plot emission.

Configs are plain JSON with numbers only, so reruns with the same file and
seed are bit-reproducible; CSV bodies carry no timestamps (those live in the
JSON summary). Sweeps fan independent runs out to worker processes and sort
rows by axes order regardless of completion order.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

from .energy import diagnostics
from .errors import ChemosimError, InvalidParameterError
from .initdata import (CompactPolynomial, Gaussian, LaneEmdenMinimizer,
                       TableData, build_field, check_blowup_condition,
                       compact_poly_amplitude_for_mass, iota_exponents)
from .radial import RadialGrid, SystemState, mass
from .regimes import ModelParams, classify
from .stepper import DiagnosticsSeries, RunOutcome, SolverConfig, run


class ConfigError(ChemosimError, ValueError):
    """Malformed configuration; message carries the offending field path."""


def _need(table: dict, key: str, kind, path: str):
    if key not in table:
        raise ConfigError(f"{path}.{key}: missing required field")
    val = table[key]
    if kind is float:
        if not isinstance(val, (int, float)) or isinstance(val, bool):
            raise ConfigError(f"{path}.{key}: expected a number, got {val!r}")
        return float(val)
    if kind is int:
        if not isinstance(val, int) or isinstance(val, bool):
            raise ConfigError(f"{path}.{key}: expected an integer, got {val!r}")
        return val
    if kind is str and not isinstance(val, str):
        raise ConfigError(f"{path}.{key}: expected a string, got {val!r}")
    return val


def _optional(table: dict, key: str, kind, path: str, default):
    if key not in table or table[key] is None:
        return default
    return _need(table, key, kind, path)


@dataclass(frozen=True)
class GridConfig:
    n_cells: int
    r_max: float
    grading: float = 1.0

    def build(self, d: int) -> RadialGrid:
        if self.grading == 1.0:
            return RadialGrid.uniform(d, self.r_max, self.n_cells)
        return RadialGrid.graded(d, self.r_max, self.n_cells, self.grading)


@dataclass(frozen=True)
class RunConfig:
    """Full description of one experiment."""

    params: ModelParams
    grid: GridConfig
    solver: SolverConfig
    init_u: dict
    init_w: dict
    outputs: str = "out"
    seed: int = 0
    c_d_paper: float | None = None

    def as_dict(self) -> dict:
        return {
            "params": {"d": self.params.d, "m1": self.params.m1, "m2": self.params.m2},
            "grid": {"N": self.grid.n_cells, "R": self.grid.r_max,
                     "grading": self.grid.grading},
            "solver": {
                "t_end": self.solver.t_end, "epsilon": self.solver.epsilon,
                "cfl": self.solver.cfl, "dt_min": self.solver.dt_min,
                "dt_max": self.solver.dt_max, "linf_factor": self.solver.linf_factor,
                "norm_factor": self.solver.norm_factor,
                "record_every": self.solver.record_every,
            },
            "init_u": self.init_u, "init_w": self.init_w,
            "outputs": self.outputs, "seed": self.seed,
            "c_d_paper": self.c_d_paper,
        }


_VARIANTS = ("gaussian", "compact-polynomial", "critical-polynomial",
             "lane-emden", "table")


def _check_init_spec(spec, path: str) -> dict:
    if not isinstance(spec, dict):
        raise ConfigError(f"{path}: expected an object")
    variant = _need(spec, "variant", str, path)
    if variant not in _VARIANTS:
        raise ConfigError(f"{path}.variant: unknown variant {variant!r}, "
                          f"expected one of {_VARIANTS}")
    if variant == "gaussian":
        _need(spec, "mass", float, path)
        _need(spec, "spread", float, path)
    elif variant == "compact-polynomial":
        for key in ("amplitude", "radius", "exponent"):
            _need(spec, key, float, path)
    elif variant == "critical-polynomial":
        _need(spec, "mass", float, path)
        _need(spec, "radius", float, path)
    elif variant == "lane-emden":
        _need(spec, "radius", float, path)
        if spec.get("mass") is not None:
            _need(spec, "mass", float, path)
    else:
        _need(spec, "path", str, path)
    return dict(spec)


def parse_run_config(raw: dict, path: str = "config") -> RunConfig:
    """Validate a config dictionary with field-path diagnostics."""
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    ptab = raw.get("params")
    if not isinstance(ptab, dict):
        raise ConfigError(f"{path}.params: missing or not an object")
    params = ModelParams(
        d=_need(ptab, "d", int, f"{path}.params"),
        m1=_need(ptab, "m1", float, f"{path}.params"),
        m2=_need(ptab, "m2", float, f"{path}.params"),
    )
    gtab = raw.get("grid")
    if not isinstance(gtab, dict):
        raise ConfigError(f"{path}.grid: missing or not an object")
    grid = GridConfig(
        n_cells=_need(gtab, "N", int, f"{path}.grid"),
        r_max=_need(gtab, "R", float, f"{path}.grid"),
        grading=_optional(gtab, "grading", float, f"{path}.grid", 1.0),
    )
    if grid.n_cells < 16:
        raise ConfigError(f"{path}.grid.N: need at least 16 cells, got {grid.n_cells}")
    stab = raw.get("solver")
    if not isinstance(stab, dict):
        raise ConfigError(f"{path}.solver: missing or not an object")
    sp = f"{path}.solver"
    try:
        solver = SolverConfig(
            t_end=_need(stab, "t_end", float, sp),
            epsilon=_optional(stab, "epsilon", float, sp, 0.0),
            cfl=_optional(stab, "cfl", float, sp, 0.4),
            dt_min=_optional(stab, "dt_min", float, sp, 1e-12),
            dt_max=_optional(stab, "dt_max", float, sp, 1.0),
            linf_factor=_optional(stab, "linf_factor", float, sp, 10.0),
            norm_factor=_optional(stab, "norm_factor", float, sp, 2.0),
            record_every=_optional(stab, "record_every", int, sp, 50),
        )
    except InvalidParameterError as exc:
        raise ConfigError(f"{sp}: {exc}") from exc
    return RunConfig(
        params=params,
        grid=grid,
        solver=solver,
        init_u=_check_init_spec(raw.get("init_u"), f"{path}.init_u"),
        init_w=_check_init_spec(raw.get("init_w"), f"{path}.init_w"),
        outputs=_optional(raw, "outputs", str, path, "out"),
        seed=_optional(raw, "seed", int, path, 0),
        c_d_paper=_optional(raw, "c_d_paper", float, path, None),
    )


def load_run_config(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno} col {exc.colno}: {exc.msg}") from exc
    return parse_run_config(raw, path=str(path))


def resolve_init_spec(spec: dict, params: ModelParams, species: str,
                      mass_override: float | None = None):
    """Turn a config init table into an initial data spec object.

    `critical-polynomial` resolves the species exponent from the parameter
    point; a mass override rescales mass-parameterized variants (and the
    amplitude of an explicit compact polynomial, whose mass is linear in it).
    """
    variant = spec["variant"]
    if variant == "gaussian":
        m = mass_override if mass_override is not None else spec["mass"]
        return Gaussian(mass=m, spread=spec["spread"])
    if variant == "compact-polynomial":
        amp = spec["amplitude"]
        if mass_override is not None:
            base = compact_poly_amplitude_for_mass(
                mass_override, spec["radius"], spec["exponent"], params.d)
            amp = base
        return CompactPolynomial(amplitude=amp, radius=spec["radius"],
                                 exponent=spec["exponent"])
    if variant == "critical-polynomial":
        i1, i2 = iota_exponents(params)
        iota = i1 if species == "u" else i2
        m = mass_override if mass_override is not None else spec["mass"]
        amp = compact_poly_amplitude_for_mass(m, spec["radius"], iota, params.d)
        return CompactPolynomial(amplitude=amp, radius=spec["radius"], exponent=iota)
    if variant == "lane-emden":
        m = mass_override if mass_override is not None else spec.get("mass")
        return LaneEmdenMinimizer(mass=m, radius=spec["radius"])
    return TableData(path=spec["path"])


@dataclass(frozen=True)
class RunArtifacts:
    outcome: RunOutcome
    series: DiagnosticsSeries
    series_path: Path | None
    summary_path: Path | None
    plot_path: Path | None


def simulate(config: RunConfig, out_dir=None, svg: bool = False,
             write: bool = True) -> RunArtifacts:
    """Execute one configured run and persist series CSV plus summary JSON."""
    grid = config.grid.build(config.params.d)
    u0 = build_field(resolve_init_spec(config.init_u, config.params, "u"), grid)
    w0 = build_field(resolve_init_spec(config.init_w, config.params, "w"), grid)
    state = SystemState(u0, w0, 0.0)
    outcome, series = run(state, config.params, config.solver)

    series_path = summary_path = plot_path = None
    if write:
        out = Path(out_dir if out_dir is not None else config.outputs)
        out.mkdir(parents=True, exist_ok=True)
        series_path = out / "series.csv"
        series.write_csv(series_path)
        first, last = series.records[0], series.records[-1]
        summary = {
            **outcome.as_dict(),
            "steps": series.steps,
            "records": len(series.records),
            "mass_u0": first.mass_u, "mass_w0": first.mass_w,
            "mass_drift_u": abs(last.mass_u - first.mass_u) / max(first.mass_u, 1e-300),
            "mass_drift_w": abs(last.mass_w - first.mass_w) / max(first.mass_w, 1e-300),
            "F0": first.F, "F_final": last.F,
            "max_step_energy_increase": series.max_step_energy_increase,
            "regime": classify(config.params).tag.value,
            "config": config.as_dict(),
            "wall_time_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        }
        summary_path = out / "summary.json"
        summary_path.write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
        if series.final_state is not None:
            from .radial import write_field_csv
            write_field_csv(series.final_state.u, out / "final_u.csv")
            write_field_csv(series.final_state.w, out / "final_w.csv")
        if svg:
            plot_path = out / "traces.svg"
            plot_series(series, plot_path)
    return RunArtifacts(outcome, series, series_path, summary_path, plot_path)


def plot_series(series: DiagnosticsSeries, path) -> None:
    """Static SVG line charts of the free energy, second moment and sup norms."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    t = series.column("t")
    fig, axes = plt.subplots(3, 1, figsize=(7, 8), sharex=True)
    axes[0].plot(t, series.column("F"), color="tab:blue")
    axes[0].set_ylabel("free energy F")
    axes[1].plot(t, series.column("I"), color="tab:green")
    axes[1].set_ylabel("second moment I")
    axes[2].plot(t, series.column("linf_u"), label="sup u", color="tab:red")
    axes[2].plot(t, series.column("linf_w"), label="sup w", color="tab:orange")
    axes[2].set_yscale("log")
    axes[2].set_ylabel("sup norms")
    axes[2].set_xlabel("t")
    axes[2].legend()
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


@dataclass(frozen=True)
class SweepConfig:
    """Cartesian sweep over exponents and masses around a base run."""

    axes: dict
    base: RunConfig
    workers: int = 1
    max_runs: int = 512
    mc: float | None = None

    AXIS_NAMES = ("m1", "m2", "M1", "M2")


def parse_sweep_config(raw: dict, path: str = "sweep") -> SweepConfig:
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    axes_tab = raw.get("axes")
    if not isinstance(axes_tab, dict) or not axes_tab:
        raise ConfigError(f"{path}.axes: need a nonempty object of axis lists")
    axes = {}
    for key, vals in axes_tab.items():
        if key not in SweepConfig.AXIS_NAMES:
            raise ConfigError(f"{path}.axes.{key}: unknown axis, "
                              f"expected one of {SweepConfig.AXIS_NAMES}")
        if not isinstance(vals, list) or not vals or \
                not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in vals):
            raise ConfigError(f"{path}.axes.{key}: expected a nonempty list of numbers")
        axes[key] = [float(v) for v in vals]
    base = parse_run_config(raw.get("base"), path=f"{path}.base")
    workers = _optional(raw, "workers", int, path, 1)
    if workers < 1:
        raise ConfigError(f"{path}.workers: must be >= 1")
    max_runs = _optional(raw, "max_runs", int, path, 512)
    total = math.prod(len(v) for v in axes.values())
    if total > max_runs:
        raise ConfigError(f"{path}: {total} runs exceed the cap max_runs={max_runs}")
    return SweepConfig(axes=axes, base=base, workers=workers, max_runs=max_runs,
                       mc=_optional(raw, "mc", float, path, None))


def load_sweep_config(path) -> SweepConfig:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: line {exc.lineno} col {exc.colno}: {exc.msg}") from exc
    return parse_sweep_config(raw, path=str(path))


SWEEP_COLUMNS = ("m1", "m2", "M1", "M2", "regime", "status", "t_final",
                 "F0", "G0", "margin")


def _sweep_point(args):
    """Worker body: one sweep point to one CSV row; failures become rows too."""
    index, base_dict, point, mc = args
    try:
        base = parse_run_config(base_dict)
        m1 = point.get("m1", base.params.m1)
        m2 = point.get("m2", base.params.m2)
        params = ModelParams(base.params.d, m1, m2)
        grid = base.grid.build(params.d)
        u0 = build_field(
            resolve_init_spec(base.init_u, params, "u", point.get("M1")), grid)
        w0 = build_field(
            resolve_init_spec(base.init_w, params, "w", point.get("M2")), grid)
        rec0 = diagnostics(SystemState(u0, w0, 0.0), params, c_d=base.c_d_paper)
        try:
            report = check_blowup_condition(u0, w0, params, mc=mc,
                                            c_d=base.c_d_paper)
            margin = report.margin
        except ChemosimError:
            margin = math.nan
        outcome, _ = run(SystemState(u0, w0, 0.0), params, base.solver)
        row = (m1, m2, mass(u0), mass(w0), classify(params).tag.value,
               outcome.status.value, outcome.t_final, rec0.F, rec0.G, margin)
    except ChemosimError:
        row = (point.get("m1", math.nan), point.get("m2", math.nan),
               point.get("M1", math.nan), point.get("M2", math.nan),
               "", "Failed", math.nan, math.nan, math.nan, math.nan)
    return index, row


def sweep(config: SweepConfig, out_path=None) -> list[tuple]:
    """Run the Cartesian product, return rows sorted by axes order.

    Worker count is capped by the CHEMOSIM_THREADS environment variable.
    A point that fails numerically yields a 'Failed' row and the sweep
    continues.
    """
    names = [k for k in SweepConfig.AXIS_NAMES if k in config.axes]
    combos = list(product(*(config.axes[k] for k in names)))
    points = [dict(zip(names, combo)) for combo in combos]
    base_dict = config.base.as_dict()
    jobs = [(i, base_dict, pt, config.mc) for i, pt in enumerate(points)]

    cap = os.environ.get("CHEMOSIM_THREADS")
    workers = config.workers
    if cap is not None:
        try:
            workers = min(workers, max(int(cap), 1))
        except ValueError:
            pass
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_point, jobs))
    else:
        results = [_sweep_point(job) for job in jobs]
    results.sort(key=lambda pair: pair[0])
    rows = [row for _, row in results]
    if out_path is not None:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(",".join(SWEEP_COLUMNS) + "\n")
            for row in rows:
                cells = [x if isinstance(x, str) else repr(float(x)) for x in row]
                fh.write(",".join(cells) + "\n")
    return rows


def constants_report(d: int, seed: int = 0, n_samples: int = 200,
                     c_d: float | None = None, grid_cells: int = 1024,
                     m1_on_l1: float | None = None) -> dict:
    """Estimate the sharp constants and critical masses for dimension d.

    The line constants depend on the parameter point along each curve, so a
    representative point is used: the midpoint of the admissible m1 range on
    L1 (overridable) and its swap on L2.
    """
    from .regimes import critical_exponent, l1_partner
    from .variational import (ConstantEstimates, critical_mass_crossing,
                              critical_mass_m1c, critical_mass_m2c,
                              estimate_Cc, estimate_line_constant)

    m_c = critical_exponent(d)
    grid = RadialGrid.uniform(d, 2.0, grid_cells)
    m1 = m1_on_l1 if m1_on_l1 is not None else 0.5 * (m_c + d / 2.0)
    params_l1 = ModelParams(d, m1, l1_partner(m1, d))
    params_l2 = params_l1.swapped()
    c_c = estimate_Cc(d, grid, seed=seed, n_samples=n_samples)
    c_star_l1 = estimate_line_constant(params_l1, grid, "L1", seed=seed,
                                       n_samples=n_samples)
    c_star_l2 = estimate_line_constant(params_l2, grid, "L2", seed=seed,
                                       n_samples=n_samples)
    est = ConstantEstimates(
        C_c=c_c, C_star_L1=c_star_l1, C_star_L2=c_star_l2,
        M_c=critical_mass_crossing(d, c_c, c_d),
        M_1c=critical_mass_m1c(params_l2, c_star_l2, c_d),
        M_2c=critical_mass_m2c(params_l1, c_star_l1, c_d),
        c_d_convention="newtonian" if c_d is None else f"override({c_d!r})",
        seed=seed,
    )
    out = est.as_dict()
    out["m_on_L1"] = [params_l1.m1, params_l1.m2]
    out["m_on_L2"] = [params_l2.m1, params_l2.m2]
    return out
