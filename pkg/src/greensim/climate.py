"""Greenhouse climate ODE right-hand side.

Eleven states: seven compartment temperatures (cover, internal air,
vegetation, growing medium, tray, floor, soil), vapor density, CO₂ density,
and the two crop dry-weight pools. Heat moves along an explicit list of
exchange links (convective / radiative / conductive); moisture and CO₂ are
well-mixed volume balances. Enthalpy of evaporation and condensation is not
modeled — temperature dynamics see only the link flows plus solar and
heater gains.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from greensim import physics
from greensim.actuators import ActuatorSpec
from greensim.crop import CropParams, canopy_closure, crop_rhs
from greensim.params import (
    COMPARTMENTS,
    CompartmentProps,
    ControlInput,
    PhysicalConstants,
    ValidationError,
)
from greensim.solar import GreenhouseGeometry

# Re-exported scalar formula surface (these are the climate model's own ops).
nusselt = physics.nusselt
saturation_moisture = physics.saturation_moisture
co2_ext_density = physics.co2_ext_density
co2_ppm = physics.co2_ppm

STATE_ORDER = ("T_c", "T_i", "T_v", "T_m", "T_p", "T_f", "T_s", "C_w", "C_c",
               "x_sdw", "x_nsdw")
N_STATES = 11

T_MIN_PLAUSIBLE = 173.0
T_MAX_PLAUSIBLE = 373.0

# Node names beyond the 7 compartments; these appear only as link endpoints.
BOUNDARY_NODES = ("external", "sky", "deep-soil")

_NODE_INDEX = {name: i for i, name in enumerate(COMPARTMENTS)}
_NODE_INDEX.update({name: len(COMPARTMENTS) + i for i, name in enumerate(BOUNDARY_NODES)})


class PlausibilityError(RuntimeError):
    """A temperature left the physically plausible band during evaluation."""


@dataclass(frozen=True)
class ClimateState:
    T_c: float
    T_i: float
    T_v: float
    T_m: float
    T_p: float
    T_f: float
    T_s: float
    C_w: float
    C_c: float
    x_sdw: float
    x_nsdw: float

    def __post_init__(self):
        for name in STATE_ORDER[:7]:
            t = getattr(self, name)
            if not T_MIN_PLAUSIBLE <= t <= T_MAX_PLAUSIBLE:
                raise ValidationError(name, "temperature outside [173, 373] K")
        for name in ("C_w", "C_c", "x_sdw", "x_nsdw"):
            if getattr(self, name) < 0:
                raise ValidationError(name, "must be nonnegative")

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in STATE_ORDER])

    @classmethod
    def from_array(cls, arr) -> "ClimateState":
        if len(arr) != N_STATES:
            raise ValidationError("state", f"need {N_STATES} components")
        return cls(**{n: float(v) for n, v in zip(STATE_ORDER, arr)})


@dataclass(frozen=True)
class ExternalConditions:
    """Exogenous vector: 4 scalars plus the two 8-plane POA vectors."""

    T_ext: float   # K
    T_app: float   # K, apparent temperature; carried but unused in the RHS
    v_wind: float  # m/s
    H_rel: float   # %
    I_dir: np.ndarray   # W/m2, 8 planes
    I_diff: np.ndarray  # W/m2, 8 planes

    def __post_init__(self):
        if not 0.0 <= self.H_rel <= 100.0:
            raise ValidationError("H_rel", "must lie in [0, 100] percent")
        if self.v_wind < 0:
            raise ValidationError("v_wind", "must be nonnegative")
        for name in ("I_dir", "I_diff"):
            vec = np.asarray(getattr(self, name), dtype=float)
            if vec.shape != (8,):
                raise ValidationError(name, "must have exactly 8 components")
            if np.any(vec < 0):
                raise ValidationError(name, "irradiance must be nonnegative")
            object.__setattr__(self, name, vec)

    def as_vector(self) -> np.ndarray:
        return np.concatenate(([self.T_ext, self.T_app, self.v_wind, self.H_rel],
                               self.I_dir, self.I_diff))

    @classmethod
    def from_vector(cls, vec) -> "ExternalConditions":
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (20,):
            raise ValidationError("conditions", "need 20 components")
        return cls(T_ext=float(vec[0]), T_app=float(vec[1]), v_wind=float(vec[2]),
                   H_rel=float(vec[3]), I_dir=vec[4:12].copy(), I_diff=vec[12:20].copy())


@dataclass(frozen=True)
class ExchangeLink:
    """One pairwise exchange. Radiative links carry resolved optics."""

    node_from: str
    node_to: str
    kind: str                 # convective | radiative | conductive
    area: float               # m2 (A or A1)
    char_length: float = 0.0  # m, convective d_c
    layer_thickness: float = 0.0
    conductivity: float = 0.0
    view_factor_12: float = 0.0
    view_factor_21: float = 0.0
    eps1: float = 0.0
    eps2: float = 0.0
    rho1: float = 0.0
    rho2: float = 0.0
    forced_velocity: str = "none"  # none | wind | fan

    def __post_init__(self):
        for node in (self.node_from, self.node_to):
            if node not in _NODE_INDEX:
                raise ValidationError("node", f"unknown compartment {node!r}")
        if self.kind not in ("convective", "radiative", "conductive"):
            raise ValidationError("kind", f"unknown exchange kind {self.kind!r}")
        if self.area <= 0:
            raise ValidationError("area", "must be strictly positive")
        for f in ("view_factor_12", "view_factor_21"):
            if not 0.0 <= getattr(self, f) <= 1.0:
                raise ValidationError(f, "must lie in [0, 1]")


@dataclass(frozen=True)
class ClimateParams:
    """Parameters of the climate model that are not material properties."""

    sky_offset: float = -10.0            # K added to T_ext for the sky node
    t_deep: float = 283.15               # K, deep-soil boundary
    condensation_rate: float = 0.01      # 1/s
    transpiration_conductance: float = 4.0e-3  # m/s
    leakage_ach: float = 0.2             # 1/h
    fan_cross_section: float = -1.0      # m2; -1 resolves to volume**(2/3)
    cover_absorptivity: float = 0.10
    par_fraction: float = 0.475
    split_medium: float = 0.2
    split_tray: float = 0.8

    def __post_init__(self):
        for f in ("condensation_rate", "transpiration_conductance", "leakage_ach"):
            if getattr(self, f) < 0:
                raise ValidationError(f, "must be nonnegative")
        if not 0.0 <= self.cover_absorptivity <= 1.0:
            raise ValidationError("cover_absorptivity", "must lie in [0, 1]")
        if not 0.0 <= self.par_fraction <= 1.0:
            raise ValidationError("par_fraction", "must lie in [0, 1]")
        if abs(self.split_medium + self.split_tray - 1.0) > 1e-9:
            raise ValidationError("split_medium", "crop-zone splits must sum to 1")


def q_conv(link: ExchangeLink, t1: float, t2: float,
           constants: PhysicalConstants, velocity: float = 0.0) -> float:
    """Convective flow from node_from into node_to along the link, W."""
    if link.kind != "convective":
        raise ValidationError("kind", "q_conv needs a convective link")
    gr = physics.grashof(t1 - t2, link.char_length, 0.5 * (t1 + t2),
                         constants.nu_air, constants.gravity)
    re = physics.reynolds(velocity, link.char_length, constants.nu_air)
    nu = physics.nusselt(gr, re)
    return physics.conv_flow(link.area, nu, constants.lambda_air,
                             link.char_length, t1, t2)


def q_rad(link: ExchangeLink, t1: float, t2: float,
          constants: PhysicalConstants) -> float:
    """Radiative flow from node_from into node_to along the link, W."""
    if link.kind != "radiative":
        raise ValidationError("kind", "q_rad needs a radiative link")
    return physics.rad_flow(link.eps1, link.eps2, link.rho1, link.rho2,
                            link.view_factor_12, link.view_factor_21,
                            constants.sigma, link.area, t1, t2)


def q_cond(link: ExchangeLink, t1: float, t2: float) -> float:
    """Conductive flow from node_from into node_to along the link, W."""
    if link.kind != "conductive":
        raise ValidationError("kind", "q_cond needs a conductive link")
    return physics.cond_flow(link.area, link.conductivity,
                             link.layer_thickness, t1, t2)


def resolve_compartments(
    raw: dict[str, dict[str, float]],
    geometry: GreenhouseGeometry,
    constants: PhysicalConstants,
) -> dict[str, CompartmentProps]:
    """Attach areas from geometry and resolve the internal-air sentinels."""
    areas = {
        "cover": geometry.envelope_area,
        "internal-air": geometry.footprint,
        "vegetation": geometry.cultivated_area,
        "medium": geometry.cultivated_area,
        "tray": geometry.cultivated_area,
        "floor": geometry.footprint,
        "soil": geometry.footprint,
    }
    out = {}
    for name in COMPARTMENTS:
        props = dict(raw[name])
        if name == "internal-air":
            mean_height = geometry.volume / geometry.footprint
            if props.get("heat_capacity", -1.0) < 0:
                props["heat_capacity"] = (constants.rho_air * constants.c_air
                                          * mean_height)
            if props.get("char_length", -1.0) < 0:
                props["char_length"] = mean_height
        out[name] = CompartmentProps(name=name, area=areas[name], **props)
    return out


# (from, to, kind, forced) rows of the default exchange topology.
DEFAULT_TOPOLOGY = (
    ("cover", "external", "convective", "wind"),
    ("cover", "internal-air", "convective", "fan"),
    ("internal-air", "vegetation", "convective", "fan"),
    ("internal-air", "medium", "convective", "fan"),
    ("internal-air", "tray", "convective", "fan"),
    ("internal-air", "floor", "convective", "fan"),
    ("cover", "sky", "radiative", "none"),
    ("vegetation", "cover", "radiative", "none"),
    ("medium", "cover", "radiative", "none"),
    ("tray", "cover", "radiative", "none"),
    ("floor", "cover", "radiative", "none"),
    ("vegetation", "tray", "radiative", "none"),
    ("vegetation", "floor", "radiative", "none"),
    ("tray", "floor", "radiative", "none"),
    ("tray", "medium", "conductive", "none"),
    ("floor", "soil", "conductive", "none"),
    ("soil", "deep-soil", "conductive", "none"),
)


def build_links(
    compartments: dict[str, CompartmentProps],
    view_factors: dict[str, float],
) -> list[ExchangeLink]:
    """Default topology resolved against material properties and view factors.

    Convective links use the area and characteristic length of the solid
    (non-air) side. Radiative F21 follows from reciprocity A1·F12 = A2·F21,
    clipped to [0, 1]. Conductive links conduct through the deeper layer.
    """
    links: list[ExchangeLink] = []
    for frm, to, kind, forced in DEFAULT_TOPOLOGY:
        if kind == "convective":
            solid = frm if frm != "internal-air" else to
            props = compartments[solid]
            links.append(ExchangeLink(
                node_from=frm, node_to=to, kind=kind, area=props.area,
                char_length=props.char_length, forced_velocity=forced,
            ))
        elif kind == "radiative":
            p1 = compartments[frm]
            if to == "sky":
                f12 = view_factors["cover-sky"]
                area2 = None
                eps2, rho2 = 1.0, 0.0  # sky is a black boundary
            else:
                p2 = compartments[to]
                f12 = view_factors[f"{frm}-{to}"]
                area2 = p2.area
                eps2, rho2 = p2.emissivity, p2.reflectivity
            f21 = 0.0 if area2 is None else min(1.0, p1.area * f12 / area2)
            links.append(ExchangeLink(
                node_from=frm, node_to=to, kind=kind, area=p1.area,
                view_factor_12=f12, view_factor_21=f21,
                eps1=p1.emissivity, eps2=eps2,
                rho1=p1.reflectivity, rho2=rho2,
            ))
        else:  # conductive: deeper side provides the conducting layer
            deep = to if to != "deep-soil" else "soil"
            props = compartments[deep]
            links.append(ExchangeLink(
                node_from=frm, node_to=to, kind=kind,
                area=compartments[frm].area,
                layer_thickness=props.layer_thickness,
                conductivity=props.conductivity,
            ))
    seen = set()
    for ln in links:
        key = (ln.node_from, ln.node_to, ln.kind)
        if key in seen:
            raise ValidationError("links", f"duplicate link {key}")
        seen.add(key)
    return links


@dataclass(frozen=True)
class ClimateModel:
    """Immutable assembly of everything climate_rhs needs."""

    constants: PhysicalConstants
    compartments: dict[str, CompartmentProps]
    links: tuple[ExchangeLink, ...]
    climate: ClimateParams
    crop: CropParams
    geometry: GreenhouseGeometry
    actuators: dict[str, ActuatorSpec]

    @classmethod
    def build(cls, geometry: GreenhouseGeometry, constants: PhysicalConstants,
              raw_compartments: dict, view_factors: dict[str, float],
              climate: ClimateParams, crop: CropParams,
              actuators: dict[str, ActuatorSpec]) -> "ClimateModel":
        comps = resolve_compartments(raw_compartments, geometry, constants)
        links = tuple(build_links(comps, view_factors))
        if climate.fan_cross_section <= 0:
            climate = replace(climate, fan_cross_section=geometry.volume ** (2.0 / 3.0))
        return cls(constants=constants, compartments=comps, links=links,
                   climate=climate, crop=crop, geometry=geometry,
                   actuators=actuators)

    # --- helpers -------------------------------------------------------

    def capacities(self) -> np.ndarray:
        """Total heat capacity per compartment, J/K, in COMPARTMENTS order."""
        return np.array([
            self.compartments[name].heat_capacity * self.compartments[name].area
            for name in COMPARTMENTS
        ])

    def solar_gains(self, x_sdw: float, p: ExternalConditions) -> tuple[np.ndarray, float]:
        """Absorbed solar power per compartment (W) and PAR (W/m²)."""
        areas = np.array([pl.area for pl in self.geometry.surfaces])
        taus = np.array([pl.transmissivity for pl in self.geometry.surfaces])
        flux = p.I_dir + p.I_diff
        q_inc = float(np.dot(areas, flux))
        q_trans = float(np.dot(areas * taus, flux))

        c = self.climate
        comp = self.compartments
        r_c = self.geometry.cultivated_area / self.geometry.footprint
        closure = canopy_closure(x_sdw, self.crop)
        gains = np.zeros(len(COMPARTMENTS))
        gains[0] = c.cover_absorptivity * q_inc
        gains[2] = r_c * closure * (1.0 - comp["vegetation"].reflectivity) * q_trans
        open_part = r_c * (1.0 - closure) * q_trans
        gains[3] = open_part * c.split_medium * (1.0 - comp["medium"].reflectivity)
        gains[4] = open_part * c.split_tray * (1.0 - comp["tray"].reflectivity)
        gains[5] = (1.0 - r_c) * (1.0 - comp["floor"].reflectivity) * q_trans
        par = c.par_fraction * q_trans / self.geometry.footprint
        return gains, par

    def boundary_temperature(self, node: str, p: ExternalConditions) -> float:
        if node == "external":
            return p.T_ext
        if node == "sky":
            return p.T_ext + self.climate.sky_offset
        if node == "deep-soil":
            return self.climate.t_deep
        raise ValidationError("node", f"not a boundary node: {node!r}")

    def link_flow(self, link: ExchangeLink, temps: dict[str, float],
                  p: ExternalConditions, u: ControlInput) -> float:
        """Heat flow along one link, W, positive from node_from to node_to."""
        t1 = (temps[link.node_from] if link.node_from in temps
              else self.boundary_temperature(link.node_from, p))
        t2 = (temps[link.node_to] if link.node_to in temps
              else self.boundary_temperature(link.node_to, p))
        if link.kind == "convective":
            if link.forced_velocity == "wind":
                vel = p.v_wind
            elif link.forced_velocity == "fan":
                flow = u.fan / 100.0 * self.actuators["fan"].a_max
                vel = flow / self.climate.fan_cross_section
            else:
                vel = 0.0
            return q_conv(link, t1, t2, self.constants, vel)
        if link.kind == "radiative":
            return q_rad(link, t1, t2, self.constants)
        return q_cond(link, t1, t2)

    # --- the RHS -------------------------------------------------------

    def rhs(self, x: np.ndarray, u: ControlInput, p: ExternalConditions) -> np.ndarray:
        """d/dt of the 11-state vector. Raises PlausibilityError when any
        temperature is outside the plausible band."""
        x = np.asarray(x, dtype=float)
        temps_arr = x[:7]
        if np.any(temps_arr < T_MIN_PLAUSIBLE) or np.any(temps_arr > T_MAX_PLAUSIBLE):
            raise PlausibilityError("temperature outside [173, 373] K")
        c_w, c_c, x_sdw, x_nsdw = x[7], x[8], x[9], x[10]

        temps = dict(zip(COMPARTMENTS, temps_arr))
        heat = dict.fromkeys(COMPARTMENTS, 0.0)
        for link in self.links:
            q = self.link_flow(link, temps, p, u)
            if link.node_from in heat:
                heat[link.node_from] -= q
            if link.node_to in heat:
                heat[link.node_to] += q

        gains, par = self.solar_gains(x_sdw, p)
        heater_w = u.heater / 100.0 * self.actuators["heater"].a_max

        cl = self.climate
        geom = self.geometry
        vent_flow = (u.fan / 100.0 * self.actuators["fan"].a_max
                     + cl.leakage_ach / 3600.0 * geom.volume)  # m3/s
        rho_c_air = self.constants.rho_air * self.constants.c_air
        vent_heat = rho_c_air * vent_flow * (p.T_ext - temps["internal-air"])

        caps = self.capacities()
        dT = np.zeros(7)
        for i, name in enumerate(COMPARTMENTS):
            total = heat[name] + gains[i]
            if name == "internal-air":
                total += heater_w + vent_heat
            dT[i] = total / caps[i]

        # moisture balance
        t_i_c = temps["internal-air"] - 273.15
        t_v_c = temps["vegetation"] - 273.15
        c_w_ext = p.H_rel / 100.0 * physics.saturation_moisture(
            p.T_ext - 273.15, self.constants.rho_air)
        humid_flow = (u.humidifier / 100.0 * self.actuators["humidifier"].a_max
                      / 3600.0)  # l/h of water = kg/h -> kg/s
        leaf_area = (self.crop.lar * (1.0 - self.crop.tau_root) * x_sdw
                     * geom.cultivated_area)
        vpd = physics.saturation_moisture(t_v_c, self.constants.rho_air) - c_w
        transp = cl.transpiration_conductance * max(0.0, vpd) * leaf_area  # kg/s
        sat_i = physics.saturation_moisture(t_i_c, self.constants.rho_air)
        condensation = cl.condensation_rate * max(0.0, c_w - sat_i)  # kg/m3/s
        d_cw = ((humid_flow + transp) / geom.volume
                + vent_flow / geom.volume * (c_w_ext - c_w)
                - condensation)

        # CO2 balance
        co2_flow = (u.co2gen / 100.0 * self.actuators["co2gen"].a_max
                    / 3600.0)  # kg/h -> kg/s
        c_ext = physics.co2_ext_density(p.T_ext, self.constants.M_c,
                                        self.constants.P_atm, self.constants.R_gas)
        d_sdw, d_nsdw, co2_sink = crop_rhs(
            x_sdw, x_nsdw, temps["internal-air"], c_c, par, self.crop,
            area_per_volume=geom.cultivated_area / geom.volume)
        d_cc = (co2_flow / geom.volume
                + vent_flow / geom.volume * (c_ext - c_c)
                - co2_sink)

        out = np.empty(N_STATES)
        out[:7] = dT
        out[7] = d_cw
        out[8] = d_cc
        out[9] = d_sdw
        out[10] = d_nsdw
        return out


def climate_rhs(x, u: ControlInput, p: ExternalConditions,
                model: ClimateModel) -> np.ndarray:
    """Module-level RHS delegate (accepts ClimateState or raw array)."""
    if isinstance(x, ClimateState):
        x = x.as_array()
    return model.rhs(x, u, p)


# --- compiled-kernel bridge ---------------------------------------------

_KIND_CODE = {"convective": 0, "radiative": 1, "conductive": 2}
_VSRC_CODE = {"none": 0, "wind": 1, "fan": 2}


@dataclass(frozen=True)
class PackedModel:
    """Flat-array mirror of a ClimateModel for the compiled kernels.

    `args` unpacks in the positional order every kernel expects after the
    state/control/exogenous arguments.
    """

    pp: np.ndarray
    caps: np.ndarray
    pw: np.ndarray          # electrical W per control percent, actuator order
    lk_kind: np.ndarray
    lk_i1: np.ndarray
    lk_i2: np.ndarray
    lk_vsrc: np.ndarray
    lk_c1: np.ndarray
    lk_c2: np.ndarray
    lk_c3: np.ndarray

    @property
    def args(self):
        return (self.pp, self.caps, self.lk_kind, self.lk_i1, self.lk_i2,
                self.lk_vsrc, self.lk_c1, self.lk_c2, self.lk_c3)


def pack_model(model: ClimateModel, dt: float = 120.0,
               energy_price: float = 0.2, co2_price: float = 0.0,
               revenue_coefficient: float = 0.0, penalty_weight: float = 10.0,
               t_min: float = 273.15, t_max: float = 313.15,
               co2_ppm_max: float = 1600.0) -> PackedModel:
    """Flatten a ClimateModel (plus objective prices/bounds) to kernel arrays.

    The packed RHS must agree with ClimateModel.rhs to roundoff; the
    compensation-point unit conversion assumes the standard physical
    constants, as the scalar crop formulas do.
    """
    from greensim import _kernels as k

    cn = model.constants
    cl = model.climate
    cr = model.crop
    geom = model.geometry
    act = model.actuators

    pp = np.zeros(k.N_PP)
    pp[k.P_RHO_C_AIR] = cn.rho_air * cn.c_air
    pp[k.P_VOLUME] = geom.volume
    pp[k.P_LEAK] = cl.leakage_ach / 3600.0 * geom.volume
    pp[k.P_FAN_MAX] = act["fan"].a_max
    pp[k.P_HEATER_MAX] = act["heater"].a_max
    pp[k.P_HUMID_MAX] = act["humidifier"].a_max / 3600.0
    pp[k.P_CO2_MAX] = act["co2gen"].a_max / 3600.0
    pp[k.P_CROSS_SECTION] = cl.fan_cross_section
    pp[k.P_SKY_OFFSET] = cl.sky_offset
    pp[k.P_T_DEEP] = cl.t_deep
    pp[k.P_COND_RATE] = cl.condensation_rate
    pp[k.P_TRANSP_COEF] = (cl.transpiration_conductance * cr.lar
                           * (1.0 - cr.tau_root) * geom.cultivated_area)
    pp[k.P_PAR_COEF] = cl.par_fraction / geom.footprint
    pp[k.P_COVER_ABS] = cl.cover_absorptivity
    r_c = geom.cultivated_area / geom.footprint
    comp = model.compartments
    pp[k.P_GAIN_VEG] = r_c * (1.0 - comp["vegetation"].reflectivity)
    pp[k.P_GAIN_MED] = r_c * cl.split_medium * (1.0 - comp["medium"].reflectivity)
    pp[k.P_GAIN_TRAY] = r_c * cl.split_tray * (1.0 - comp["tray"].reflectivity)
    pp[k.P_GAIN_FLOOR] = (1.0 - r_c) * (1.0 - comp["floor"].reflectivity)
    pp[k.P_RHO_AIR] = cn.rho_air
    pp[k.P_NU_AIR] = cn.nu_air
    pp[k.P_GRAVITY] = cn.gravity
    pp[k.P_M_C] = cn.M_c
    pp[k.P_P_ATM] = cn.P_atm
    pp[k.P_R_GAS] = cn.R_gas
    pp[k.P_A_PER_V] = geom.cultivated_area / geom.volume
    pp[k.P_C_CH2O] = cr.c_ch2o_co2
    pp[k.P_YIELD] = cr.yield_factor
    pp[k.P_R_GR_MAX] = cr.r_gr_max
    pp[k.P_GAMMA] = cr.gamma
    pp[k.P_Q10_GR] = cr.q10_gr
    pp[k.P_T_REF_GR] = cr.t_ref_gr
    pp[k.P_RESP_COEF] = cr.resp_shoot * (1.0 - cr.tau_root) + cr.resp_root * cr.tau_root
    pp[k.P_Q10_RESP] = cr.q10_resp
    pp[k.P_T_REF_RESP] = cr.t_ref_resp
    pp[k.P_K_LAR] = cr.k_ext * cr.lar * (1.0 - cr.tau_root)
    pp[k.P_EPS_LIGHT] = cr.eps_light
    pp[k.P_G_BND] = cr.g_bnd
    pp[k.P_G_STM] = cr.g_stm
    pp[k.P_CAR_1] = cr.car_1
    pp[k.P_CAR_2] = cr.car_2
    pp[k.P_CAR_3] = cr.car_3
    pp[k.P_GAMMA_STAR] = cr.gamma_star_ppm
    pp[k.P_NSDW_RAMP] = cr.nsdw_ramp
    pp[k.P_E_PRICE] = energy_price
    pp[k.P_CO2_PRICE] = co2_price
    pp[k.P_REV_COEF] = revenue_coefficient
    pp[k.P_DT] = dt
    pp[k.P_PENALTY_W] = penalty_weight
    pp[k.P_T_MIN] = t_min
    pp[k.P_T_MAX] = t_max
    pp[k.P_PPM_MAX] = co2_ppm_max
    pp[k.P_LAMBDA_AIR] = cn.lambda_air

    caps = model.capacities()
    from greensim.params import ACTUATOR_ORDER
    pw = np.array([act[a].p_unit / act[a].eta * act[a].a_max / 100.0
                   for a in ACTUATOR_ORDER])

    n = len(model.links)
    lk_kind = np.zeros(n, dtype=np.int64)
    lk_i1 = np.zeros(n, dtype=np.int64)
    lk_i2 = np.zeros(n, dtype=np.int64)
    lk_vsrc = np.zeros(n, dtype=np.int64)
    lk_c1 = np.zeros(n)
    lk_c2 = np.zeros(n)
    lk_c3 = np.zeros(n)
    for i, ln in enumerate(model.links):
        lk_kind[i] = _KIND_CODE[ln.kind]
        lk_i1[i] = _NODE_INDEX[ln.node_from]
        lk_i2[i] = _NODE_INDEX[ln.node_to]
        lk_vsrc[i] = _VSRC_CODE[ln.forced_velocity]
        if ln.kind == "convective":
            lk_c1[i] = ln.area * cn.lambda_air / ln.char_length
            lk_c2[i] = cn.gravity * ln.char_length ** 3 / (cn.nu_air ** 2 * 1.0e5)
            lk_c3[i] = ln.char_length / (cn.nu_air * 2.0e4)
        elif ln.kind == "radiative":
            denom = 1.0 - ln.rho1 * ln.rho2 * ln.view_factor_12 * ln.view_factor_21
            lk_c1[i] = (ln.eps1 * ln.eps2 / denom * cn.sigma * ln.area
                        * ln.view_factor_12)
        else:
            lk_c1[i] = ln.area * ln.conductivity / ln.layer_thickness
    return PackedModel(pp=pp, caps=caps, pw=pw, lk_kind=lk_kind, lk_i1=lk_i1,
                       lk_i2=lk_i2, lk_vsrc=lk_vsrc, lk_c1=lk_c1, lk_c2=lk_c2,
                       lk_c3=lk_c3)


def reduce_external(p: ExternalConditions, model: ClimateModel) -> np.ndarray:
    """Collapse an exogenous sample to the 6-vector the kernels consume:
    [T_ext, v_wind, q_inc, q_trans, C_w_ext, C_ext]."""
    areas = np.array([pl.area for pl in model.geometry.surfaces])
    taus = np.array([pl.transmissivity for pl in model.geometry.surfaces])
    flux = p.I_dir + p.I_diff
    cn = model.constants
    return np.array([
        p.T_ext,
        p.v_wind,
        float(np.dot(areas, flux)),
        float(np.dot(areas * taus, flux)),
        p.H_rel / 100.0 * physics.saturation_moisture(p.T_ext - 273.15, cn.rho_air),
        physics.co2_ext_density(p.T_ext, cn.M_c, cn.P_atm, cn.R_gas),
    ])
