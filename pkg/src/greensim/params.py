"""Typed parameter registry: physical constants, material properties, prices.

Every symbol used by an implemented equation resolves to exactly one field
of a type in this module or a module-local type elsewhere; the SYMBOLS
manifest at the bottom records the mapping and is walked by a test.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, fields

import yaml


class ValidationError(ValueError):
    """A named field violated one of its invariants."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


@dataclass(frozen=True)
class PhysicalConstants:
    """Physical constants and bulk air/water properties (SI)."""

    sigma: float = 5.670e-8      # W m-2 K-4
    R_gas: float = 8.314         # J mol-1 K-1
    M_c: float = 0.044           # kg mol-1
    P_atm: float = 101325.0      # Pa
    rho_air: float = 1.2         # kg m-3
    c_air: float = 1005.0        # J kg-1 K-1
    lambda_air: float = 0.025    # W m-1 K-1
    rho_water: float = 1000.0    # kg m-3
    nu_air: float = 1.5e-5       # m2 s-1
    gravity: float = 9.81        # m s-2

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) <= 0:
                raise ValidationError(f.name, "must be strictly positive")
        if abs(self.sigma - 5.670e-8) > 0.01 * 5.670e-8:
            raise ValidationError("sigma", "more than 1% from 5.670e-8")


COMPARTMENTS = ("cover", "internal-air", "vegetation", "medium", "tray", "floor", "soil")

ACTUATOR_ORDER = ("heater", "fan", "humidifier", "co2gen")


@dataclass(frozen=True)
class ControlInput:
    """Four actuator commands in percent of their sized maximum."""

    heater: float = 0.0
    fan: float = 0.0
    humidifier: float = 0.0
    co2gen: float = 0.0

    def __post_init__(self):
        for f in ACTUATOR_ORDER:
            v = getattr(self, f)
            if not 0.0 <= v <= 100.0:
                raise ValidationError(f, "command must lie in [0, 100] percent")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.heater, self.fan, self.humidifier, self.co2gen)

    @classmethod
    def from_sequence(cls, seq) -> "ControlInput":
        h, f, m, c = (float(v) for v in seq)
        return cls(heater=h, fan=f, humidifier=m, co2gen=c)


ZERO_CONTROL = ControlInput()


@dataclass(frozen=True)
class CompartmentProps:
    """Thermal and optical properties of one greenhouse compartment."""

    name: str
    heat_capacity: float   # J K-1 per m2 of area
    area: float            # m2
    char_length: float     # m, convective length scale d_c
    layer_thickness: float  # m, conducting layer d_l
    conductivity: float    # W m-1 K-1, lambda_c
    emissivity: float
    reflectivity: float

    def __post_init__(self):
        if self.name not in COMPARTMENTS:
            raise ValidationError("name", f"unknown compartment {self.name!r}")
        for f in ("heat_capacity", "area", "char_length", "layer_thickness"):
            if getattr(self, f) <= 0:
                raise ValidationError(f"{self.name}.{f}", "must be strictly positive")
        if not 0.0 <= self.emissivity <= 1.0:
            raise ValidationError(f"{self.name}.emissivity", "must lie in [0, 1]")
        if not 0.0 <= self.reflectivity <= 1.0:
            raise ValidationError(f"{self.name}.reflectivity", "must lie in [0, 1]")
        if self.emissivity + self.reflectivity > 1.0 + 1e-12:
            raise ValidationError(
                f"{self.name}.emissivity", "emissivity + reflectivity exceeds 1"
            )


@dataclass(frozen=True)
class EconomicParams:
    """Prices entering the economic objective and the cost ledger."""

    energy_price: float = 0.2          # EUR per kWh
    co2_price: float = 8.0e-5          # EUR per gCO2eq (social cost)
    lettuce_price: float = 0.02        # EUR per g fresh weight
    dry_weight_fraction: float = 0.05  # g dry per g fresh

    def __post_init__(self):
        for f in ("energy_price", "co2_price", "lettuce_price"):
            if getattr(self, f) < 0:
                raise ValidationError(f, "must be nonnegative")
        if not 0.0 < self.dry_weight_fraction < 1.0:
            raise ValidationError("dry_weight_fraction", "must lie in (0, 1)")


@dataclass(frozen=True)
class SizingRules:
    """Inputs to the actuator sizing formulas."""

    t_lift: float = 20.0        # K, heater design temperature lift
    q_air_ach: float = 2.0      # h-1, fresh-air exchange rate for heater sizing
    acph: float = 20.0          # h-1, fan air changes per hour
    humid_t_ref: float = 20.0   # C, reference temp of the 80%-40% RH difference
    co2_rate: float = 2.0e-3    # kg m-3 h-1, CO2 density change rate

    def __post_init__(self):
        for f in ("q_air_ach", "acph", "co2_rate"):
            if getattr(self, f) <= 0:
                raise ValidationError(f, "must be strictly positive")


def raw_defaults() -> dict:
    """Parsed contents of the versioned defaults data file."""
    ref = importlib.resources.files("greensim.data").joinpath("defaults.yaml")
    with ref.open("r") as fh:
        return yaml.safe_load(fh)


def physical_constants(raw: dict | None = None) -> PhysicalConstants:
    raw = raw if raw is not None else raw_defaults()
    return PhysicalConstants(**raw["physical"])


def economic_params(raw: dict | None = None) -> EconomicParams:
    raw = raw if raw is not None else raw_defaults()
    e = raw["economics"]
    return EconomicParams(
        energy_price=e["energy_price"],
        co2_price=e["co2_price"],
        lettuce_price=e["lettuce_price"],
        dry_weight_fraction=e["dry_weight_fraction"],
    )


def sizing_rules(raw: dict | None = None) -> SizingRules:
    raw = raw if raw is not None else raw_defaults()
    return SizingRules(**raw["sizing"])


# Symbol manifest: every symbol appearing in an implemented equation, mapped
# to the one field that owns it. Checked for resolution by an automated test.
SYMBOLS: dict[str, tuple[str, str, str]] = {
    # heat exchange
    "sigma": ("greensim.params", "PhysicalConstants", "sigma"),
    "lambda_air": ("greensim.params", "PhysicalConstants", "lambda_air"),
    "A_c_compartment": ("greensim.params", "CompartmentProps", "area"),
    "d_c": ("greensim.params", "CompartmentProps", "char_length"),
    "d_l": ("greensim.params", "CompartmentProps", "layer_thickness"),
    "lambda_c": ("greensim.params", "CompartmentProps", "conductivity"),
    "epsilon": ("greensim.params", "CompartmentProps", "emissivity"),
    "rho_reflect": ("greensim.params", "CompartmentProps", "reflectivity"),
    "F_12": ("greensim.climate", "ExchangeLink", "view_factor_12"),
    "F_21": ("greensim.climate", "ExchangeLink", "view_factor_21"),
    "nu_air": ("greensim.params", "PhysicalConstants", "nu_air"),
    "gravity": ("greensim.params", "PhysicalConstants", "gravity"),
    # moisture and CO2
    "rho_air": ("greensim.params", "PhysicalConstants", "rho_air"),
    "M_c": ("greensim.params", "PhysicalConstants", "M_c"),
    "P_atm": ("greensim.params", "PhysicalConstants", "P_atm"),
    "R_gas": ("greensim.params", "PhysicalConstants", "R_gas"),
    # actuation and economics
    "a_max": ("greensim.actuators", "ActuatorSpec", "a_max"),
    "p_unit": ("greensim.actuators", "ActuatorSpec", "p_unit"),
    "eta": ("greensim.actuators", "ActuatorSpec", "eta"),
    "E_cost": ("greensim.params", "EconomicParams", "energy_price"),
    "C_co2_cost": ("greensim.params", "EconomicParams", "co2_price"),
    "P_L": ("greensim.params", "EconomicParams", "lettuce_price"),
    "rho_dw": ("greensim.params", "EconomicParams", "dry_weight_fraction"),
    "c_air": ("greensim.params", "PhysicalConstants", "c_air"),
    "rho_water": ("greensim.params", "PhysicalConstants", "rho_water"),
    "T_sp_lift": ("greensim.params", "SizingRules", "t_lift"),
    "Q_air": ("greensim.params", "SizingRules", "q_air_ach"),
    "ACPH": ("greensim.params", "SizingRules", "acph"),
    "c_dot_co2": ("greensim.params", "SizingRules", "co2_rate"),
    "Omega": ("greensim.solar", "GreenhouseGeometry", "volume"),
    "A_cultivated": ("greensim.solar", "GreenhouseGeometry", "cultivated_area"),
    # crop growth
    "c_ch2o_co2": ("greensim.crop", "CropParams", "c_ch2o_co2"),
    "Y_ch2o_co2": ("greensim.crop", "CropParams", "yield_factor"),
    "r_gr_max": ("greensim.crop", "CropParams", "r_gr_max"),
    "gamma_nsdw": ("greensim.crop", "CropParams", "gamma"),
    "Q10_gr": ("greensim.crop", "CropParams", "q10_gr"),
    "T_ref_gr": ("greensim.crop", "CropParams", "t_ref_gr"),
    "c_resp_shoot": ("greensim.crop", "CropParams", "resp_shoot"),
    "c_resp_root": ("greensim.crop", "CropParams", "resp_root"),
    "tau_root": ("greensim.crop", "CropParams", "tau_root"),
    "Q10_resp": ("greensim.crop", "CropParams", "q10_resp"),
    "T_ref_resp": ("greensim.crop", "CropParams", "t_ref_resp"),
    "k_ext": ("greensim.crop", "CropParams", "k_ext"),
    "lar": ("greensim.crop", "CropParams", "lar"),
    "eps_light": ("greensim.crop", "CropParams", "eps_light"),
    "g_bnd": ("greensim.crop", "CropParams", "g_bnd"),
    "g_stm": ("greensim.crop", "CropParams", "g_stm"),
    "Gamma": ("greensim.crop", "CropParams", "gamma_star_ppm"),
    # control
    "N_horizon": ("greensim.empc", "NempcConfig", "horizon_steps"),
    "u_min": ("greensim.empc", "NempcConfig", "u_min"),
    "u_max": ("greensim.empc", "NempcConfig", "u_max"),
    "Delta_t": ("greensim.empc", "NempcConfig", "sample_time"),
}
