"""Actuator model: percent commands to physical actuation, power, cost,
emissions; sizing from geometry; the per-actuator cost ledger.

Actuation units per kind: heater W, fan m³/s, humidifier l/h, CO₂ generator
kg/h. Commands act within the sampling interval (no lag dynamics).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

from greensim.params import (
    ACTUATOR_ORDER,
    ControlInput,
    EconomicParams,
    PhysicalConstants,
    SizingRules,
    ValidationError,
)
from greensim.physics import saturation_moisture
from greensim.solar import GreenhouseGeometry

WS_PER_KWH = 1000.0 * 3600.0

# Table-layout row labels for the ledger export.
LEDGER_LABELS = {
    "heater": "Heater",
    "fan": "Fan",
    "humidifier": "Humidifier",
    "co2gen": "CO2 Gen.",
    "solver": "Solver",
}


@dataclass(frozen=True)
class ActuatorSpec:
    kind: str
    a_max: float   # W | m3/s | l/h | kg/h
    p_unit: float  # W per actuation unit
    eta: float     # efficiency

    def __post_init__(self):
        if self.kind not in ACTUATOR_ORDER:
            raise ValidationError("kind", f"unknown actuator {self.kind!r}")
        if self.a_max <= 0:
            raise ValidationError(f"{self.kind}.a_max", "must be strictly positive")
        if self.p_unit < 0:
            raise ValidationError(f"{self.kind}.p_unit", "must be nonnegative")
        if not 0.0 < self.eta <= 1.0:
            raise ValidationError(f"{self.kind}.eta", "must lie in (0, 1]")


def _check_percent(u: float) -> None:
    if not 0.0 <= u <= 100.0:
        raise ValidationError("u", "command must lie in [0, 100] percent")


def actuation_level(u: float, spec: ActuatorSpec) -> float:
    """a = u/100 · a_max, in the actuator's own units."""
    _check_percent(u)
    return u / 100.0 * spec.a_max


def power(u: float, spec: ActuatorSpec) -> float:
    """Electrical draw P = p_unit/η · a(u), W."""
    return spec.p_unit / spec.eta * actuation_level(u, spec)


def energy_cost(u: float, dt: float, e_cost: float, spec: ActuatorSpec) -> float:
    """Energy cost over dt seconds at e_cost EUR/kWh."""
    if dt <= 0:
        raise ValidationError("dt", "must be strictly positive")
    return e_cost * dt / WS_PER_KWH * power(u, spec)


def co2_emissions(u: float, dt: float, i_co2: float, spec: ActuatorSpec) -> float:
    """Grid CO₂ attributable to the draw, gCO₂eq, at intensity i_co2 g/kWh."""
    if dt <= 0:
        raise ValidationError("dt", "must be strictly positive")
    if i_co2 < 0:
        raise ValidationError("i_co2", "must be nonnegative")
    return i_co2 * dt / WS_PER_KWH * power(u, spec)


def social_cost(u: float, dt: float, i_co2: float, c_co2_cost: float,
                spec: ActuatorSpec) -> float:
    """Social cost of the emitted CO₂, EUR."""
    return c_co2_cost * co2_emissions(u, dt, i_co2, spec)


def size_actuators(
    geometry: GreenhouseGeometry,
    constants: PhysicalConstants,
    rules: SizingRules,
    power_params: dict[str, dict[str, float]],
) -> dict[str, ActuatorSpec]:
    """Resolve a_max for all four actuators from the greenhouse volume.

    Heater covers a t_lift temperature rise of q_air_ach fresh-air changes;
    fan moves acph air changes; humidifier covers the 80%→40% RH absolute
    humidity difference at humid_t_ref per hour; the CO₂ generator covers a
    co2_rate density change of the full volume per hour.
    """
    vol = geometry.volume
    q_heater = constants.rho_air * constants.c_air * vol * rules.t_lift * rules.q_air_ach / 3600.0
    r_fan = vol * rules.acph / 3600.0
    phi = 0.4 * saturation_moisture(rules.humid_t_ref, constants.rho_air)  # kg/m3
    v_humid = vol * phi / constants.rho_water * 1000.0  # l/h
    g_co2 = rules.co2_rate * vol  # kg/h

    sized = {"heater": q_heater, "fan": r_fan, "humidifier": v_humid, "co2gen": g_co2}
    return {
        kind: ActuatorSpec(
            kind=kind,
            a_max=sized[kind],
            p_unit=power_params[kind]["p_unit"],
            eta=power_params[kind]["eta"],
        )
        for kind in ACTUATOR_ORDER
    }


@dataclass
class _Row:
    energy_eur: float = 0.0
    co2_g: float = 0.0
    co2_eur: float = 0.0


@dataclass
class CostLedger:
    """Cumulative per-actuator costs plus a solver-energy row.

    All stored values are nonnegative cumulative magnitudes; the table
    export applies the cost sign convention (costs negative).
    """

    specs: dict[str, ActuatorSpec]
    rows: dict[str, _Row] = field(default_factory=dict)

    def __post_init__(self):
        for kind in (*ACTUATOR_ORDER, "solver"):
            self.rows.setdefault(kind, _Row())

    def step(self, u: ControlInput, dt: float, prices: EconomicParams,
             i_co2: float) -> None:
        for kind in ACTUATOR_ORDER:
            spec = self.specs[kind]
            cmd = getattr(u, kind)
            row = self.rows[kind]
            row.energy_eur += energy_cost(cmd, dt, prices.energy_price, spec)
            grams = co2_emissions(cmd, dt, i_co2, spec)
            row.co2_g += grams
            row.co2_eur += prices.co2_price * grams

    def add_solver(self, cpu_seconds: float, solver_power: float,
                   prices: EconomicParams, i_co2: float) -> None:
        kwh = solver_power * cpu_seconds / WS_PER_KWH
        row = self.rows["solver"]
        row.energy_eur += prices.energy_price * kwh
        grams = i_co2 * kwh
        row.co2_g += grams
        row.co2_eur += prices.co2_price * grams

    @property
    def total_energy_eur(self) -> float:
        return sum(r.energy_eur for r in self.rows.values())

    @property
    def total_co2_g(self) -> float:
        return sum(r.co2_g for r in self.rows.values())

    @property
    def total_co2_eur(self) -> float:
        return sum(r.co2_eur for r in self.rows.values())

    def total(self, revenue_eur: float) -> float:
        """Bottom line: revenue minus every cost row."""
        return revenue_eur - self.total_energy_eur - self.total_co2_eur

    def table_rows(self, revenue_eur: float) -> list[tuple[str, float]]:
        """Signed summary rows; costs negative, total = sum of all rows."""
        out = [("Lettuce profit", revenue_eur)]
        for kind in (*ACTUATOR_ORDER, "solver"):
            out.append((f"Energy ({LEDGER_LABELS[kind]})", -self.rows[kind].energy_eur))
        for kind in (*ACTUATOR_ORDER, "solver"):
            out.append((f"CO2 ({LEDGER_LABELS[kind]})", -self.rows[kind].co2_eur))
        out.append(("Total", revenue_eur - self.total_energy_eur - self.total_co2_eur))
        return out

    def to_csv(self, revenue_eur: float) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["Parameter", "EUR"])
        for label, value in self.table_rows(revenue_eur):
            w.writerow([label, f"{value:.6f}"])
        return buf.getvalue()

    def detail_csv(self) -> str:
        """Per-row energy EUR, CO₂ grams and CO₂ EUR (unsigned cumulative)."""
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["row", "energy_eur", "co2_g", "co2_eur"])
        for kind in (*ACTUATOR_ORDER, "solver"):
            r = self.rows[kind]
            w.writerow([kind, f"{r.energy_eur:.9f}", f"{r.co2_g:.6f}", f"{r.co2_eur:.9f}"])
        return buf.getvalue()


def ledger_step(ledger: CostLedger, u: ControlInput, dt: float,
                prices: EconomicParams, i_co2: float) -> CostLedger:
    """Accumulate one sampling interval into the ledger (returns it)."""
    ledger.step(u, dt, prices, i_co2)
    return ledger
