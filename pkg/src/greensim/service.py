"""HTTP service: scenario CRUD, asynchronous runs, live data preview,
and actuator-sizing estimates.

Runs execute on a small worker pool and publish progress to the store,
so clients poll GET /runs/{id}. Stateless apart from the store: restart
with the same data directory and completed runs are still there.
"""

from __future__ import annotations

import dataclasses
import os
import traceback
from concurrent.futures import ThreadPoolExecutor
from contextlib import asynccontextmanager
from datetime import datetime, timedelta, timezone
from importlib import resources
from pathlib import Path

from fastapi import Body, FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from greensim.empc import NempcConfig
from greensim.external import (
    CoverageError,
    fetch_carbon_intensity,
    fetch_weather,
    series_for_scenario,
)
from greensim.params import ValidationError
from greensim.scenario import (
    NO_CONTROL,
    ScenarioConfig,
    default_parameters,
    scenario_from_dict,
)
from greensim.simulate import result_document, run_scenario
from greensim.store import RunStore

ENV_DATA_DIR = "GREENSIM_DATA_DIR"
ENV_FIXTURES = "GREENSIM_FIXTURES_DIR"
ENV_UI_DIR = "GREENSIM_UI_DIR"

CONTROLLERS = ("none", "nempc")


def packaged_fixtures() -> Path:
    return Path(resources.files("greensim").joinpath("data/fixtures"))


def _fixture_pair(fixtures_dir: Path) -> tuple[Path, Path]:
    weather = sorted(fixtures_dir.glob("weather_*.csv"))
    carbon = sorted(fixtures_dir.glob("carbon_*.csv"))
    if not weather or not carbon:
        raise CoverageError(f"no fixtures under {fixtures_dir}")
    return weather[0], carbon[0]


def _validation_response(exc: ValidationError) -> JSONResponse:
    return JSONResponse(status_code=422, content={
        "detail": [{"field": exc.field, "message": str(exc)}]})


def _apply_run_flags(config: ScenarioConfig, controller: str,
                     flags: dict) -> ScenarioConfig:
    if controller == "none":
        return dataclasses.replace(config, control=NO_CONTROL)
    ctrl = config.control
    if ctrl == NO_CONTROL:
        ctrl = NempcConfig(sample_time=config.sample_time)
    if "social_cost" in flags:
        ctrl = dataclasses.replace(ctrl, include_social_cost=bool(flags["social_cost"]))
    return dataclasses.replace(config, control=ctrl)


def create_app(data_dir: Path | str | None = None,
               fixtures_dir: Path | str | None = None,
               max_workers: int = 2,
               ui_dir: Path | str | None = None) -> FastAPI:
    data_dir = Path(data_dir or os.environ.get(ENV_DATA_DIR, "greensim-data"))
    fixtures = Path(fixtures_dir or os.environ.get(ENV_FIXTURES)
                    or packaged_fixtures())
    ui_dir = Path(ui_dir or os.environ.get(ENV_UI_DIR, "frontend/dist"))
    store = RunStore(data_dir)
    pool = ThreadPoolExecutor(max_workers=max_workers,
                              thread_name_prefix="greensim-run")

    @asynccontextmanager
    async def lifespan(_app):
        yield
        pool.shutdown(wait=False, cancel_futures=True)
        store.close()

    app = FastAPI(title="greensim", version="1", lifespan=lifespan)
    # Local tool: let a UI served from any origin (dev server, file://
    # wrappers) talk to the API.
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    app.state.store = store
    app.state.fixtures = fixtures

    def _series_for(config: ScenarioConfig, flags: dict):
        horizon = (config.control.horizon_steps
                   if config.control != NO_CONTROL else 0)
        end = (config.end_time
               + timedelta(seconds=horizon * config.sample_time + 3600))
        start = config.start_time - timedelta(hours=1)
        offline = bool(flags.get("offline", True))
        wfix, cfix = _fixture_pair(fixtures)
        weather = fetch_weather(config.latitude, config.longitude, start, end,
                                fixture=wfix, offline=offline or None,
                                cache_dir=data_dir / "cache")
        carbon = fetch_carbon_intensity(flags.get("zone", "fixture"), start,
                                        end, fixture=cfix,
                                        offline=offline or None,
                                        cache_dir=data_dir / "cache")
        return series_for_scenario(config, weather, carbon)

    def _execute(run_id: str) -> None:
        run = store.get_run(run_id)
        try:
            store.set_status(run_id, "running")
            doc = store.get_scenario(run.scenario_id)
            config = _apply_run_flags(scenario_from_dict(doc),
                                      run.controller, run.flags)
            series = _series_for(config, run.flags)
            traj = run_scenario(config, series,
                                progress=lambda f: store.set_progress(run_id, f))
            store.save_result(run_id, result_document(traj, config))
            store.set_status(run_id, "done")
        except Exception as exc:  # noqa: BLE001 - surfaced via the record
            store.set_status(run_id, "failed",
                             error="".join(traceback.format_exception_only(exc)).strip())

    @app.post("/scenarios", status_code=201)
    def post_scenario(body: dict = Body(...)):
        try:
            scenario_from_dict(body)  # reject before persisting
        except ValidationError as exc:
            return _validation_response(exc)
        return {"scenario_id": store.put_scenario(body)}

    @app.get("/scenarios/{scenario_id}")
    def get_scenario(scenario_id: str):
        doc = store.get_scenario(scenario_id)
        if doc is None:
            raise HTTPException(404, f"unknown scenario {scenario_id}")
        return {"scenario_id": scenario_id, "scenario": doc}

    @app.post("/runs", status_code=201)
    def post_run(body: dict = Body(...)):
        scenario_id = body.get("scenario_id")
        controller = body.get("controller", "nempc")
        if controller not in CONTROLLERS:
            return JSONResponse(status_code=422, content={"detail": [
                {"field": "controller",
                 "message": f"controller must be one of {CONTROLLERS}"}]})
        if store.get_scenario(scenario_id) is None:
            raise HTTPException(404, f"unknown scenario {scenario_id}")
        flags = {k: v for k, v in body.items()
                 if k not in ("scenario_id", "controller")}
        run_id = store.create_run(scenario_id, controller, flags)
        pool.submit(_execute, run_id)
        return {"run_id": run_id}

    @app.get("/runs/{run_id}")
    def get_run(run_id: str):
        run = store.get_run(run_id)
        if run is None:
            raise HTTPException(404, f"unknown run {run_id}")
        return dataclasses.asdict(run)

    @app.get("/runs/{run_id}/result")
    def get_result(run_id: str):
        run = store.get_run(run_id)
        if run is None:
            raise HTTPException(404, f"unknown run {run_id}")
        if run.status != "done":
            raise HTTPException(409, f"run {run_id} is {run.status}, not done")
        return store.load_result(run_id)

    @app.get("/live")
    def get_live(latitude: float, longitude: float, start: str,
                 hours: int = 24, zone: str = "fixture"):
        try:
            t0 = datetime.fromisoformat(start.replace("Z", "+00:00"))
            if t0.tzinfo is None:
                t0 = t0.replace(tzinfo=timezone.utc)
            t1 = t0 + timedelta(hours=hours)
            wfix, cfix = _fixture_pair(fixtures)
            weather = fetch_weather(latitude, longitude, t0, t1, fixture=wfix)
            carbon = fetch_carbon_intensity(zone, t0, t1, fixture=cfix)
        except CoverageError as exc:
            raise HTTPException(400, f"external-data: {exc}")
        except Exception as exc:  # noqa: BLE001 - upstream attribution
            raise HTTPException(502, f"external-data: {exc}")
        by_time = {c.time: c.intensity for c in carbon}
        series = [{
            "time": w.time.isoformat().replace("+00:00", "Z"),
            "t_ext_k": w.T_ext, "t_app_k": w.T_app, "h_rel_pct": w.H_rel,
            "v_wind_ms": w.v_wind, "ghi_wm2": w.ghi, "dni_wm2": w.dni,
            "dhi_wm2": w.dhi,
            "carbon_g_per_kwh": by_time.get(w.time),
        } for w in weather if t0 <= w.time <= t1]
        return {"latitude": latitude, "longitude": longitude, "zone": zone,
                "series": series}

    @app.post("/estimate")
    def post_estimate(body: dict = Body(...)):
        try:
            config = scenario_from_dict(body)
            pset = default_parameters()
            geometry = config.build_geometry()
            specs = config.build_actuators(geometry, pset)
        except ValidationError as exc:
            return _validation_response(exc)
        units = {"heater": "W", "fan": "m3/s", "humidifier": "l/h",
                 "co2gen": "kg/h"}
        return {
            "volume_m3": geometry.volume,
            "footprint_m2": geometry.footprint,
            "cultivated_area_m2": geometry.cultivated_area,
            "actuators": {kind: {
                "a_max": spec.a_max,
                "unit": units[kind],
                "p_unit": spec.p_unit,
                "eta": spec.eta,
                "electrical_peak_w": spec.p_unit / spec.eta * spec.a_max,
            } for kind, spec in specs.items()},
        }

    if ui_dir.is_dir():
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def main() -> None:
    import uvicorn

    uvicorn.run(create_app(), host="127.0.0.1", port=8000)


if __name__ == "__main__":
    main()
