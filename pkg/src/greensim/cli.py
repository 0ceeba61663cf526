"""Command-line front end: batch runs, actuator step tests, and
run-to-run comparisons.

Every command writes CSV files under --out; those files, not the log
lines, are the machine-readable interface. Exit codes: 0 success,
1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import sys
from datetime import timedelta
from pathlib import Path

import click

from greensim.empc import NempcConfig
from greensim.external import (
    CoverageError,
    fetch_carbon_intensity,
    fetch_weather,
    series_for_scenario,
)
from greensim.params import ACTUATOR_ORDER, ValidationError
from greensim.scenario import NO_CONTROL, ScenarioConfig, load_scenario
from greensim.service import packaged_fixtures
from greensim.simulate import StepTestPolicy, result_document, run_scenario
from greensim.store import scenario_hash

STEP_CASES = ("none", "heater", "fan", "humidifier", "co2")
_CASE_TO_ACTUATOR = {"co2": "co2gen"}


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


def _load(scenario_path: str) -> ScenarioConfig:
    try:
        return load_scenario(scenario_path)
    except FileNotFoundError:
        _fail(f"scenario file not found: {scenario_path}")
    except ValidationError as exc:
        _fail(f"invalid scenario: {exc}")


def _series(config: ScenarioConfig, offline: bool,
            weather_fixture: str | None, carbon_fixture: str | None):
    fixtures = packaged_fixtures()
    wfix = weather_fixture or next(iter(sorted(fixtures.glob("weather_*.csv"))), None)
    cfix = carbon_fixture or next(iter(sorted(fixtures.glob("carbon_*.csv"))), None)
    horizon = (config.control.horizon_steps
               if config.control != NO_CONTROL else 0)
    start = config.start_time - timedelta(hours=1)
    end = (config.end_time
           + timedelta(seconds=horizon * config.sample_time + 3600))
    weather = fetch_weather(config.latitude, config.longitude, start, end,
                            fixture=wfix, offline=offline or None)
    carbon = fetch_carbon_intensity("fixture", start, end, fixture=cfix,
                                    offline=offline or None)
    return series_for_scenario(config, weather, carbon)


def _write_run(out: Path, config: ScenarioConfig, traj, label: str,
               source_hash: str) -> dict:
    out.mkdir(parents=True, exist_ok=True)
    doc = result_document(traj, config)
    (out / "trajectory.csv").write_text(traj.to_csv())
    revenue = doc["summary"]["revenue_eur"]
    (out / "ledger.csv").write_text(traj.ledger.to_csv(revenue))
    summary = {
        "label": label,
        "controller": doc["controller"],
        # hash of the scenario as loaded, before controller overrides, so
        # runs of one scenario under different controllers compare cleanly
        "scenario_hash": source_hash,
        "summary": doc["summary"],
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2))
    (out / "result.json").write_text(json.dumps(doc))
    return doc


def _emit_plot(out: Path, traj) -> None:
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        click.echo("warning: matplotlib not installed, skipping plot", err=True)
        return
    fig, axes = plt.subplots(3, 1, figsize=(9, 9), sharex=True)
    t = traj.timestamps / 3600.0
    axes[0].plot(t, traj.states[:, 1] - 273.15, label="interior")
    axes[0].set_ylabel("T [degC]")
    for i, name in enumerate(ACTUATOR_ORDER):
        axes[1].step(t[:-1], traj.inputs[:, i], where="post", label=name)
    axes[1].set_ylabel("u [%]")
    axes[2].plot(t, traj.states[:, 9], label="structural")
    axes[2].plot(t, traj.states[:, 10], label="non-structural")
    axes[2].set_ylabel("dry weight [g/m2]")
    axes[2].set_xlabel("time [h]")
    for ax in axes:
        ax.grid(True, alpha=0.3)
        ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(out / "run.png", dpi=120)
    plt.close(fig)


@click.group()
def main() -> None:
    """Greenhouse climate simulation and economic predictive control."""


@main.command()
@click.option("--scenario", "scenario_path", required=True,
              type=click.Path(), help="Scenario YAML file.")
@click.option("--controller", type=click.Choice(["none", "nempc"]),
              default="nempc", show_default=True)
@click.option("--social-cost", type=click.Choice(["on", "off"]),
              default="on", show_default=True,
              help="Bill grid CO2 emissions inside the controller objective.")
@click.option("--offline", is_flag=True, default=False,
              help="Never touch the network; use fixture data.")
@click.option("--weather-fixture", type=click.Path(), default=None)
@click.option("--carbon-fixture", type=click.Path(), default=None)
@click.option("--out", "out_dir", type=click.Path(), default="run-out",
              show_default=True)
@click.option("--plot", is_flag=True, default=False,
              help="Also write a static overview image.")
def run(scenario_path, controller, social_cost, offline, weather_fixture,
        carbon_fixture, out_dir, plot) -> None:
    """Run one scenario and write trajectory, ledger, and summary files."""
    config = _load(scenario_path)
    source_hash = scenario_hash(config.to_dict())
    if controller == "none":
        config = dataclasses.replace(config, control=NO_CONTROL)
    else:
        ctrl = config.control
        if ctrl == NO_CONTROL:
            ctrl = NempcConfig(sample_time=config.sample_time)
        ctrl = dataclasses.replace(ctrl, include_social_cost=social_cost == "on")
        config = dataclasses.replace(config, control=ctrl)
    try:
        series = _series(config, offline, weather_fixture, carbon_fixture)
        traj = run_scenario(config, series)
    except (CoverageError, ValidationError, RuntimeError) as exc:
        _fail(str(exc))
    doc = _write_run(Path(out_dir), config, traj,
                     label=f"{controller}" + ("" if controller == "none"
                           else f"-social-{social_cost}"),
                     source_hash=source_hash)
    if plot:
        _emit_plot(Path(out_dir), traj)
    click.echo(f"wrote {out_dir}/trajectory.csv, ledger.csv, summary.json")
    click.echo(f"total: {doc['summary']['total_eur']:.2f} EUR")


@main.command()
@click.option("--scenario", "scenario_path", required=True, type=click.Path())
@click.option("--actuator", type=click.Choice(["all", *STEP_CASES]),
              default="all", show_default=True,
              help="Which step column to run; 'all' runs the full set.")
@click.option("--offline", is_flag=True, default=False)
@click.option("--weather-fixture", type=click.Path(), default=None)
@click.option("--carbon-fixture", type=click.Path(), default=None)
@click.option("--out", "out_dir", type=click.Path(), default="steptest-out",
              show_default=True)
def steptest(scenario_path, actuator, offline, weather_fixture,
             carbon_fixture, out_dir) -> None:
    """Step each actuator from off to maximum and compare plant growth."""
    config = _load(scenario_path)
    source_hash = scenario_hash(config.to_dict())
    config = dataclasses.replace(config, control=NO_CONTROL)
    cases = list(STEP_CASES) if actuator == "all" else [actuator]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    growth: dict[str, object] = {}
    try:
        series = _series(config, offline, weather_fixture, carbon_fixture)
        for case in cases:
            if case == "none":
                policy = None  # u = 0 throughout
            else:
                kind = _CASE_TO_ACTUATOR.get(case, case)
                policy = StepTestPolicy(actuator=kind)
            traj = run_scenario(config, series, policy=policy)
            _write_run(out / case, config, traj, label=f"step-{case}",
                       source_hash=source_hash)
            growth.setdefault("time_s", traj.timestamps.tolist())
            growth[f"sdw_{case}"] = traj.states[:, 9].tolist()
            growth[f"nsdw_{case}"] = traj.states[:, 10].tolist()
    except (CoverageError, ValidationError, RuntimeError) as exc:
        _fail(str(exc))
    buf = io.StringIO()
    w = csv.writer(buf)
    cols = list(growth)
    w.writerow(cols)
    for i in range(len(growth["time_s"])):
        w.writerow([f"{growth[c][i]:.9g}" for c in cols])
    (out / "growth.csv").write_text(buf.getvalue())
    click.echo(f"wrote {out}/growth.csv and per-case run files for: "
               + ", ".join(cases))


@main.command()
@click.option("--runs", "run_dirs", type=click.Path(), multiple=True,
              required=True, help="Run output directory (repeatable).")
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Also write the comparison table as CSV.")
def compare(run_dirs, out_path) -> None:
    """Tabulate two or more runs side by side, one ledger row per line."""
    if len(run_dirs) < 2:
        raise click.UsageError("need at least two --runs directories")
    columns = []
    for d in run_dirs:
        d = Path(d)
        ledger = d / "ledger.csv"
        summary = d / "summary.json"
        if not ledger.exists() or not summary.exists():
            _fail(f"{d} is not a run directory (missing ledger.csv/summary.json)")
        meta = json.loads(summary.read_text())
        rows = {}
        with ledger.open() as fh:
            for rec in csv.DictReader(fh):
                rows[rec["Parameter"]] = float(rec["EUR"])
        columns.append({"name": meta.get("label") or d.name,
                        "hash": meta.get("scenario_hash"),
                        "rows": rows})
    hashes = {c["hash"] for c in columns}
    if len(hashes) > 1:
        click.echo("warning: comparing runs from different scenarios "
                   f"({len(hashes)} distinct hashes)", err=True)
    labels = [lbl for lbl in columns[0]["rows"] if lbl != "Total"]
    table = [["Parameter", *[c["name"] for c in columns]]]
    for lbl in labels:
        table.append([lbl, *[f"{c['rows'].get(lbl, 0.0):.2f}" for c in columns]])
    table.append(["Total",
                  *[f"{sum(c['rows'].get(l, 0.0) for l in labels):.2f}"
                    for c in columns]])
    widths = [max(len(r[i]) for r in table) for i in range(len(table[0]))]
    for r in table:
        click.echo("  ".join(cell.rjust(w) for cell, w in zip(r, widths)))
    if out_path:
        buf = io.StringIO()
        csv.writer(buf).writerows(table)
        Path(out_path).write_text(buf.getvalue())
        click.echo(f"wrote {out_path}")


if __name__ == "__main__":
    main()
