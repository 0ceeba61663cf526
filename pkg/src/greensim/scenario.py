"""Scenario configuration: the four customization layers (structure,
location/orientation, actuators, control strategy) plus economics and
timing, loadable from a YAML document with strict schema checking.

Material properties, climate coefficients and crop constants live in the
versioned defaults file; a scenario references them implicitly and only
customizes the layers above.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import yaml

from greensim import params
from greensim.actuators import ActuatorSpec, size_actuators
from greensim.climate import ClimateModel, ClimateParams
from greensim.crop import CropParams
from greensim.empc import NempcConfig
from greensim.params import (
    ACTUATOR_ORDER,
    EconomicParams,
    PhysicalConstants,
    SizingRules,
    ValidationError,
)
from greensim.solar import GreenhouseGeometry, gable_geometry

NO_CONTROL = "no-control"


@dataclass(frozen=True)
class SimulationSettings:
    """Plant/control-model integrator knobs and the default initial state."""

    substeps: int = 12
    abs_tol: float = 1e-6
    rel_tol: float = 1e-6
    seedling_sdw: float = 0.75    # g/m2
    seedling_nsdw: float = 0.25   # g/m2
    initial_rh: float = 60.0      # % of saturation at the initial temperature

    def __post_init__(self):
        if self.substeps < 1:
            raise ValidationError("substeps", "must be >= 1")
        for f in ("abs_tol", "rel_tol"):
            if getattr(self, f) <= 0:
                raise ValidationError(f, "must be strictly positive")
        if not 0.0 <= self.initial_rh <= 100.0:
            raise ValidationError("initial_rh", "must lie in [0, 100]")
        for f in ("seedling_sdw", "seedling_nsdw"):
            if getattr(self, f) < 0:
                raise ValidationError(f, "must be nonnegative")


@dataclass(frozen=True)
class ParameterSet:
    """Everything default_parameters() resolves from the defaults file."""

    constants: PhysicalConstants
    compartments: dict
    view_factors: dict[str, float]
    climate: ClimateParams
    crop: CropParams
    sizing: SizingRules
    actuator_power: dict[str, dict[str, float]]
    economics: EconomicParams
    control: dict
    simulation: SimulationSettings
    scenario_defaults: dict
    geometry_defaults: dict


def default_parameters() -> ParameterSet:
    """The full documented default parameter set, from the versioned data file."""
    raw = params.raw_defaults()
    cl_raw = dict(raw["climate"])
    vf = cl_raw.pop("view_factors")
    split = cl_raw.pop("interior_split")
    climate_params = ClimateParams(split_medium=split["medium"],
                                   split_tray=split["tray"], **cl_raw)
    return ParameterSet(
        constants=params.physical_constants(),
        compartments=raw["compartments"],
        view_factors=vf,
        climate=climate_params,
        crop=CropParams(**raw["crop"]),
        sizing=params.sizing_rules(),
        actuator_power=raw["actuators"],
        economics=EconomicParams(**raw["economics"]),
        control=dict(raw["control"]),
        simulation=SimulationSettings(**raw["simulation"]),
        scenario_defaults=dict(raw["scenario"]),
        geometry_defaults=dict(raw["geometry"]),
    )


@dataclass(frozen=True)
class ScenarioConfig:
    """A validated scenario: where, when, what structure, which controller."""

    latitude: float
    longitude: float
    orientation: float = 0.0          # deg, ridge azimuth offset
    start_time: datetime = datetime(2025, 10, 11, tzinfo=timezone.utc)
    duration: float = 86400.0         # s
    sample_time: float = 120.0        # s
    geometry: dict = field(default_factory=dict)       # gable_geometry kwargs
    albedo: float = 0.2
    actuators: dict = field(default_factory=dict)      # per-kind overrides
    economics: EconomicParams = field(default_factory=EconomicParams)
    control: NempcConfig | str = NO_CONTROL
    simulation: SimulationSettings = field(default_factory=SimulationSettings)

    def __post_init__(self):
        if not -90.0 <= self.latitude <= 90.0:
            raise ValidationError("latitude", "must lie in [-90, 90] degrees")
        if not -180.0 <= self.longitude <= 180.0:
            raise ValidationError("longitude", "must lie in [-180, 180] degrees")
        if self.sample_time <= 0:
            raise ValidationError("sample_time", "must be strictly positive")
        if self.duration < 0:
            raise ValidationError("duration", "must be nonnegative")
        n = self.duration / self.sample_time
        if abs(n - round(n)) > 1e-9:
            raise ValidationError("duration",
                                  "must be an integer multiple of sample_time")
        if self.start_time.tzinfo is None:
            raise ValidationError("start_time", "must carry a UTC offset")
        if not 0.0 <= self.albedo <= 1.0:
            raise ValidationError("albedo", "must lie in [0, 1]")
        if isinstance(self.control, str) and self.control != NO_CONTROL:
            raise ValidationError("control", f"must be {NO_CONTROL!r} or a config map")

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.sample_time))

    @property
    def end_time(self) -> datetime:
        from datetime import timedelta
        return self.start_time + timedelta(seconds=self.duration)

    def build_geometry(self) -> GreenhouseGeometry:
        defaults = default_parameters().geometry_defaults
        kwargs = {**defaults, **self.geometry}
        kwargs.pop("albedo", None)
        return gable_geometry(orientation=self.orientation, **kwargs)

    def build_actuators(self, geometry: GreenhouseGeometry | None = None,
                        pset: ParameterSet | None = None) -> dict[str, ActuatorSpec]:
        """Sized specs; scenario entries may pin a_max/p_unit/eta per actuator."""
        pset = pset or default_parameters()
        geometry = geometry or self.build_geometry()
        power = {k: dict(v) for k, v in pset.actuator_power.items()}
        for kind, over in self.actuators.items():
            if kind not in ACTUATOR_ORDER:
                raise ValidationError("actuators", f"unknown actuator {kind!r}")
            for key in over:
                if key not in ("a_max", "p_unit", "eta"):
                    raise ValidationError(f"actuators.{kind}", f"unknown key {key!r}")
            power[kind].update({k: v for k, v in over.items() if k != "a_max"})
        sized = size_actuators(geometry, pset.constants, pset.sizing, power)
        out = {}
        for kind, spec in sized.items():
            a_max = self.actuators.get(kind, {}).get("a_max")
            if a_max is not None and a_max != "auto":
                spec = ActuatorSpec(kind=kind, a_max=float(a_max),
                                    p_unit=spec.p_unit, eta=spec.eta)
            out[kind] = spec
        return out

    def build_model(self, pset: ParameterSet | None = None) -> ClimateModel:
        pset = pset or default_parameters()
        geometry = self.build_geometry()
        return ClimateModel.build(
            geometry=geometry, constants=pset.constants,
            raw_compartments=pset.compartments, view_factors=pset.view_factors,
            climate=pset.climate, crop=pset.crop,
            actuators=self.build_actuators(geometry, pset))

    # --- serialization --------------------------------------------------

    def to_dict(self) -> dict:
        doc: dict = {
            "location": {"latitude": self.latitude, "longitude": self.longitude},
            "orientation": self.orientation,
            "start_time": self.start_time.astimezone(timezone.utc)
                              .isoformat().replace("+00:00", "Z"),
            "duration": self.duration,
            "sample_time": self.sample_time,
            "albedo": self.albedo,
            "economics": {
                "energy_price": self.economics.energy_price,
                "co2_price": self.economics.co2_price,
                "lettuce_price": self.economics.lettuce_price,
                "dry_weight_fraction": self.economics.dry_weight_fraction,
            },
        }
        if self.geometry:
            doc["geometry"] = dict(self.geometry)
        if self.actuators:
            doc["actuators"] = {k: dict(v) for k, v in self.actuators.items()}
        if self.control == NO_CONTROL:
            doc["control"] = NO_CONTROL
        else:
            c = self.control
            doc["control"] = {
                "horizon_steps": c.horizon_steps, "control_steps": c.control_steps,
                "sample_time": c.sample_time,
                "u_min": list(c.u_min), "u_max": list(c.u_max),
                "temp_min": c.temp_min, "temp_max": c.temp_max,
                "co2_ppm_max": c.co2_ppm_max,
                "include_social_cost": c.include_social_cost,
                "penalty_weight": c.penalty_weight,
                "max_iterations": c.max_iterations,
                "gradient_tol": c.gradient_tol, "step_tol": c.step_tol,
                "gradient_method": c.gradient_method, "fd_step": c.fd_step,
                "solver_power": c.solver_power,
            }
        sim = self.simulation
        doc["simulation"] = {
            "substeps": sim.substeps, "abs_tol": sim.abs_tol, "rel_tol": sim.rel_tol,
            "seedling_sdw": sim.seedling_sdw, "seedling_nsdw": sim.seedling_nsdw,
            "initial_rh": sim.initial_rh,
        }
        return doc

    def save(self, path) -> None:
        Path(path).write_text(yaml.safe_dump(self.to_dict(), sort_keys=False))


_TOP_KEYS = {"location", "orientation", "start_time", "duration", "sample_time",
             "albedo", "geometry", "actuators", "economics", "control",
             "simulation"}
_GEOMETRY_KEYS = {"length", "width", "wall_height", "ridge_height",
                  "cultivated_fraction", "transmissivity"}


def _parse_time(value) -> datetime:
    if isinstance(value, datetime):
        dt = value
    else:
        try:
            dt = datetime.fromisoformat(str(value).replace("Z", "+00:00"))
        except ValueError as exc:
            raise ValidationError("start_time", f"not an ISO 8601 timestamp: {exc}")
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def scenario_from_dict(doc: dict) -> ScenarioConfig:
    """Build a validated ScenarioConfig from a parsed scenario document."""
    if not isinstance(doc, dict):
        raise ValidationError("scenario", "document root must be a mapping")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ValidationError(sorted(unknown)[0],
                              f"unknown scenario key {sorted(unknown)[0]!r}")
    defaults = default_parameters()
    sdef = defaults.scenario_defaults

    loc = doc.get("location", {})
    if not isinstance(loc, dict) or not {"latitude", "longitude"} <= set(loc):
        raise ValidationError("location", "needs latitude and longitude")
    extra = set(loc) - {"latitude", "longitude"}
    if extra:
        raise ValidationError("location", f"unknown key {sorted(extra)[0]!r}")

    geometry = doc.get("geometry", {})
    if not isinstance(geometry, dict):
        raise ValidationError("geometry", "must be a mapping")
    bad = set(geometry) - _GEOMETRY_KEYS
    if bad:
        raise ValidationError("geometry", f"unknown key {sorted(bad)[0]!r}")

    econ_doc = {**{
        "energy_price": defaults.economics.energy_price,
        "co2_price": defaults.economics.co2_price,
        "lettuce_price": defaults.economics.lettuce_price,
        "dry_weight_fraction": defaults.economics.dry_weight_fraction,
    }, **doc.get("economics", {})}
    known_econ = {"energy_price", "co2_price", "lettuce_price", "dry_weight_fraction"}
    bad = set(econ_doc) - known_econ
    if bad:
        raise ValidationError("economics", f"unknown key {sorted(bad)[0]!r}")

    control_doc = doc.get("control", NO_CONTROL)
    sample_time = float(doc.get("sample_time", sdef["sample_time"]))
    if control_doc == NO_CONTROL:
        control: NempcConfig | str = NO_CONTROL
    elif isinstance(control_doc, dict):
        cdef = dict(defaults.control)
        bad = set(control_doc) - set(cdef) - {"include_social_cost"}
        if bad:
            raise ValidationError("control", f"unknown key {sorted(bad)[0]!r}")
        merged = {**cdef, **control_doc}
        control = NempcConfig(
            horizon_steps=int(merged["horizon_steps"]),
            control_steps=int(merged["control_steps"]),
            sample_time=float(merged.get("sample_time", sample_time)),
            u_min=tuple(merged["u_min"]), u_max=tuple(merged["u_max"]),
            temp_min=float(merged["temp_min"]), temp_max=float(merged["temp_max"]),
            co2_ppm_max=float(merged["co2_ppm_max"]),
            include_social_cost=bool(merged.get("include_social_cost", True)),
            penalty_weight=float(merged["penalty_weight"]),
            max_iterations=int(merged["max_iterations"]),
            gradient_tol=float(merged["gradient_tol"]),
            step_tol=float(merged["step_tol"]),
            gradient_method=str(merged["gradient_method"]),
            fd_step=float(merged["fd_step"]),
            solver_power=float(merged["solver_power"]))
    else:
        raise ValidationError("control", f"must be {NO_CONTROL!r} or a config map")

    sim_doc = doc.get("simulation", {})
    sim_fields = {"substeps", "abs_tol", "rel_tol", "seedling_sdw",
                  "seedling_nsdw", "initial_rh"}
    bad = set(sim_doc) - sim_fields
    if bad:
        raise ValidationError("simulation", f"unknown key {sorted(bad)[0]!r}")
    sim_defaults = defaults.simulation
    sim = SimulationSettings(**{
        f: sim_doc.get(f, getattr(sim_defaults, f)) for f in sim_fields})

    return ScenarioConfig(
        latitude=float(loc["latitude"]), longitude=float(loc["longitude"]),
        orientation=float(doc.get("orientation", sdef["orientation"])),
        start_time=_parse_time(doc.get("start_time", sdef["start_time"])),
        duration=float(doc.get("duration", sdef["duration"])),
        sample_time=sample_time,
        geometry=dict(geometry),
        albedo=float(doc.get("albedo", defaults.geometry_defaults["albedo"])),
        actuators={k: dict(v) for k, v in doc.get("actuators", {}).items()},
        economics=EconomicParams(**econ_doc),
        control=control,
        simulation=sim,
    )


def load_scenario(path) -> ScenarioConfig:
    """Parse and validate a scenario file; errors name the offending field."""
    text = Path(path).read_text()
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ValidationError("scenario", f"malformed scenario file: {exc}")
    return scenario_from_dict(doc)
