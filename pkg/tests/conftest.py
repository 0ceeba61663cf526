"""Shared fixtures: default parameters, a Bratislava gable-roof model, the
packaged weather/carbon fixtures, and step series built from them.

Everything heavy (model build, series interpolation, kernel warm-up) is
session-scoped so the cost is paid once.
"""
import dataclasses
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import pytest

from greensim.climate import ExternalConditions, pack_model, reduce_external
from greensim.external import (
    build_step_series,
    load_carbon_fixture,
    load_weather_fixture,
)
from greensim.physics import co2_ext_density, saturation_moisture
from greensim.scenario import NO_CONTROL, ScenarioConfig, default_parameters
from greensim.service import packaged_fixtures

UTC = timezone.utc
LAT, LON = 48.15, 17.11
DAY_START = datetime(2025, 10, 11, 0, 0, tzinfo=UTC)
SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"


@pytest.fixture(scope="session")
def pset():
    return default_parameters()


@pytest.fixture(scope="session")
def base_config():
    """24 h no-control scenario over the committed fixture window."""
    return ScenarioConfig(
        latitude=LAT,
        longitude=LON,
        start_time=DAY_START,
        duration=86400.0,
        sample_time=120.0,
        control=NO_CONTROL,
    )


@pytest.fixture(scope="session")
def model(base_config, pset):
    return base_config.build_model(pset)


@pytest.fixture(scope="session")
def packed(model):
    return pack_model(model)


@pytest.fixture(scope="session")
def fixture_weather():
    return load_weather_fixture(sorted(packaged_fixtures().glob("weather_*.csv"))[0])


@pytest.fixture(scope="session")
def fixture_carbon():
    return load_carbon_fixture(sorted(packaged_fixtures().glob("carbon_*.csv"))[0])


@pytest.fixture(scope="session")
def day_series(model, fixture_weather, fixture_carbon):
    """720 sampling steps (24 h at 120 s) plus 30 horizon steps of lookahead."""
    return build_step_series(
        fixture_weather, fixture_carbon, DAY_START, 120.0, 720,
        model.geometry, LAT, LON, albedo=0.2, horizon_steps=30,
    )


@pytest.fixture(scope="session")
def two_day_series(model, fixture_weather, fixture_carbon):
    """1440 sampling steps (48 h) plus 30 horizon steps."""
    return build_step_series(
        fixture_weather, fixture_carbon, DAY_START, 120.0, 1440,
        model.geometry, LAT, LON, albedo=0.2, horizon_steps=30,
    )


# ---------------------------------------------------------------------------
# analytic helpers


@pytest.fixture(scope="session")
def equilibrium(pset):
    """A hand-constructed fixed point of the climate network.

    Sky offset and deep-soil temperature are pinned to the ambient value, all
    compartments sit at the same temperature, moisture and CO2 match the
    outside air, there is no sun, no wind, no crop and no actuation -- every
    flow in the network is then identically zero.
    """
    t0 = 283.15
    climate = dataclasses.replace(pset.climate, sky_offset=0.0, t_deep=t0)
    pset_eq = dataclasses.replace(pset, climate=climate)
    cfg = ScenarioConfig(latitude=LAT, longitude=LON, control=NO_CONTROL)
    model_eq = cfg.build_model(pset_eq)
    cn = model_eq.constants
    c_w = 0.6 * saturation_moisture(t0 - 273.15, cn.rho_air)
    c_c = co2_ext_density(t0, cn.M_c, cn.P_atm, cn.R_gas)
    x = np.array([t0] * 7 + [c_w, c_c, 0.0, 0.0])
    cond = ExternalConditions(
        T_ext=t0, T_app=t0, v_wind=0.0, H_rel=60.0,
        I_dir=np.zeros(8), I_diff=np.zeros(8),
    )
    return model_eq, x, cond


@pytest.fixture(scope="session")
def state_sampler():
    """Factory for batches of physically plausible random states."""

    def sample(n, seed):
        rng = np.random.default_rng(seed)
        states = np.empty((n, 11))
        states[:, :7] = rng.uniform(270.0, 315.0, (n, 7))
        states[:, 7] = rng.uniform(0.0, 0.02, n)
        states[:, 8] = rng.uniform(1e-4, 2e-3, n)
        states[:, 9] = rng.uniform(0.0, 80.0, n)
        states[:, 10] = rng.uniform(0.0, 25.0, n)
        return states

    return sample


@pytest.fixture(scope="session")
def warm_kernels(model, packed, day_series):
    """Touch every jitted kernel once so no timed test pays the load cost."""
    from greensim import _kernels as K

    x = np.array([283.0] * 7 + [0.005, 8e-4, 1.0, 0.4])
    u = np.full(4, 10.0)
    ex = reduce_external(day_series.conditions[0], model)
    K.rhs(x, u, ex, *packed.args)
    K.integrate_fixed(x, u, ex, 120.0, 12, *packed.args)
    ex_seq = np.array([ex, ex])
    ico2 = np.array(day_series.intensities[:2], dtype=float)
    u_seq = np.array([u, u])
    tail = (packed.pp, packed.caps, packed.pw, *packed.args[2:])
    K.shooting_objective(x, u_seq, ex_seq, ico2, 2, 12, *tail)
    K.shooting_gradient(x, u_seq, ex_seq, ico2, 2, 12, *tail)
    return True
