"""Scenario execution and output writers."""
from __future__ import annotations

import io
import logging
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .costs import CostCurve, CostTable, cost_curve, default_cost_table, read_cost_table
from .dynamics import COMPARTMENTS, SarParameters, Trajectory, convergence_time, simulate
from .exceptions import NegativeCompartmentWarning, NoNonnegativeDFEError, UndefinedR0Error
from .network import EpidemicState
from .scenario import Scenario
from .stability import StabilityReport, analyze_stability, build_dfe_matrix, solve_dfe

logger = logging.getLogger(__name__)

PATTERNS = ("constant", "birth-growth-decrease", "birth-decrease", "growth-plateau", "other")


def classify_pattern(series, total: float, rel: float = 0.01, tail: float = 0.1) -> str:
    """Label the shape of one compartment's time series.

    ``rel * total`` is the significance margin for rises and falls. A series
    that rises by at least the margin above its start and then falls by at
    least the margin is ``birth-growth-decrease``; one that is non-increasing
    after its peak (with no significant rise) is ``birth-decrease``; one that
    is non-decreasing with its last ``tail`` fraction of samples within ``rel``
    of the final value is ``growth-plateau``.
    """
    x = np.asarray(series, dtype=float)
    if not np.all(np.isfinite(x)):
        return "other"
    margin = rel * total
    noise = 1e-12 * max(total, 1.0)
    if x.max() - x.min() <= noise:
        return "constant"
    steps = np.diff(x)
    peak = int(x.argmax())
    final = x[-1]
    if np.all(steps >= -noise):
        tail_x = x[int(len(x) * (1 - tail)):]
        if final > 0 and tail_x.max() - tail_x.min() <= rel * abs(final):
            return "growth-plateau"
        return "other"
    if x[peak] - x[0] >= margin and x[peak] - final >= margin:
        return "birth-growth-decrease"
    if x[peak] - x[0] < margin and np.all(steps[peak:] <= noise) and final < x[0]:
        return "birth-decrease"
    return "other"


def format_number(x: float) -> str:
    """Positional decimal with 15 significant digits."""
    return np.format_float_positional(float(x), precision=15, unique=False, fractional=False, trim="k")


def trajectory_csv(traj: Trajectory) -> str:
    m = traj.m
    header = ["t"] + [f"{c}_{i}" for c in COMPARTMENTS for i in range(1, m + 1)]
    out = io.StringIO()
    out.write(",".join(header) + "\n")
    flat = traj.values.reshape(len(traj), 3 * m)
    for t, row in zip(traj.times, flat):
        out.write(format_number(t) + "," + ",".join(format_number(v) for v in row) + "\n")
    return out.getvalue()


def _column(network: str, state: EpidemicState) -> str:
    return f"{network.replace(' ', '_')}_{state.label}"


def cost_csv(curves: list[CostCurve]) -> str:
    header = ["t"] + [_column(n, c.state) for c in curves for n in c.value]
    columns = [c.value[n] for c in curves for n in c.value]
    out = io.StringIO()
    out.write(",".join(header) + "\n")
    for k, t in enumerate(curves[0].times):
        out.write(format_number(t) + "," + ",".join(format_number(col[k]) for col in columns) + "\n")
    return out.getvalue()


@dataclass
class RunResult:
    label: str
    params: SarParameters
    trajectory: Trajectory
    report: StabilityReport | None
    stability_text: str
    convergence: dict
    patterns: dict
    costs: list | None
    diagnostics: list

    @property
    def tau(self):
        return self.convergence


def _stability_text(params: SarParameters, mass) -> tuple[StabilityReport | None, str]:
    try:
        report = analyze_stability(params, susceptible_mass=mass)
        return report, report.to_text()
    except (UndefinedR0Error, NoNonnegativeDFEError) as exc:
        mat = build_dfe_matrix(params)
        lines = [f"det(A): {mat.det:.12g}"]
        try:
            case, dfe = solve_dfe(mat, params, susceptible_mass=mass)
            lines += [f"case: {case.value}", "dfe: " + " ".join(f"{x:.12g}" for x in dfe)]
        except NoNonnegativeDFEError:
            lines.append("case: DetZero")
            lines.append("dfe: none")
        lines += [f"R0: undefined ({exc})", "verdict: undefined"]
        return None, "\n".join(lines) + "\n"


def run_params(scenario: Scenario, params: SarParameters, label: str = "baseline", cost_table: CostTable | None = None):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NegativeCompartmentWarning)
        traj = simulate(params, scenario.initial, scenario.h, scenario.horizon)
    diagnostics = [str(w.message) for w in caught if issubclass(w.category, NegativeCompartmentWarning)]
    for msg in diagnostics:
        logger.warning("%s: %s", label, msg)
    total = float(traj.values[0].sum())
    convergence, patterns = {}, {}
    for comp in COMPARTMENTS:
        for i in range(1, traj.m + 1):
            key = f"{comp}{i}"
            convergence[key] = convergence_time(traj, key, scenario.epsilon)
            patterns[key] = classify_pattern(traj.series(key), total)
    report, text = _stability_text(params, scenario.initial.s)
    costs = None
    if cost_table is not None:
        costs = [cost_curve(traj, cost_table, state) for state in EpidemicState]
    return RunResult(label, params, traj, report, text, convergence, patterns, costs, diagnostics)


def resolve_cost_table(scenario: Scenario, base_dir=None) -> CostTable | None:
    if scenario.cost_table is None:
        return None
    if scenario.cost_table == "default":
        return default_cost_table()
    path = Path(scenario.cost_table)
    if not path.is_absolute() and base_dir is not None:
        path = Path(base_dir) / path
    return read_cost_table(path)


def run_scenario(scenario: Scenario, base_dir=None) -> dict[str, RunResult]:
    """Run the baseline and every variant; keys are ``"baseline"`` and variant names."""
    table = resolve_cost_table(scenario, base_dir)
    results = {"baseline": run_params(scenario, scenario.params, "baseline", table)}
    for name in scenario.variants:
        results[name] = run_params(scenario, scenario.variant_params(name), name, table)
    return results


def _fmt_tau(x):
    return "never" if x is None else f"{x:.6g}"


def summary_text(scenario: Scenario, result: RunResult, baseline: RunResult | None = None) -> str:
    traj = result.trajectory
    lines = [
        f"run: {result.label}",
        f"sets: {traj.m}  steps: {len(traj) - 1}  h: {scenario.h:g}  horizon: {scenario.horizon:g}  "
        f"epsilon: {scenario.epsilon:g}",
        f"population N: {result.params.population:g}  initial total: {traj.values[0].sum():g}",
        "",
    ]
    head = f"{'compartment':<12}{'pattern':<24}{'tau':>12}{'initial':>14}{'peak':>14}{'final':>14}"
    if baseline is not None:
        head += f"{'baseline tau':>14}"
    lines.append(head)
    for key, pattern in result.patterns.items():
        x = traj.series(key)
        row = (
            f"{key:<12}{pattern:<24}{_fmt_tau(result.convergence[key]):>12}"
            f"{x[0]:>14.6g}{x.max():>14.6g}{x[-1]:>14.6g}"
        )
        if baseline is not None:
            row += f"{_fmt_tau(baseline.convergence[key]):>14}"
        lines.append(row)
    lines += ["", "stability:"] + ["  " + s for s in result.stability_text.splitlines()]
    if result.diagnostics:
        lines += ["", "diagnostics:"] + ["  " + d for d in result.diagnostics]
    return "\n".join(lines) + "\n"


def write_outputs(scenario: Scenario, results: dict[str, RunResult], outdir) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    baseline = results.get("baseline")
    written = []
    for label, res in results.items():
        suffix = "" if label == "baseline" else f"_{label}"
        files = {
            f"trajectory{suffix}.csv": trajectory_csv(res.trajectory),
            f"stability{suffix}.txt": res.stability_text,
            f"summary{suffix}.txt": summary_text(scenario, res, None if res is baseline else baseline),
        }
        if res.costs is not None:
            files[f"costs{suffix}.csv"] = cost_csv(res.costs)
        for name, content in files.items():
            path = outdir / name
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(content)
            written.append(path)
    return written
