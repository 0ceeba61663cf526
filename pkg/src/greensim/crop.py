"""Lettuce growth dynamics: structural / non-structural dry weight pools.

Two-state model: photosynthesis fills the carbohydrate reservoir (NSDW),
growth converts reservoir into structure (SDW) with a fixed yield loss,
maintenance respiration drains the reservoir. All rates per m² cultivated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from greensim.params import ValidationError
from greensim.physics import ppm_to_density


@dataclass(frozen=True)
class CropParams:
    c_ch2o_co2: float = 0.6818    # g CH2O per g CO2 assimilated
    yield_factor: float = 0.8     # CH2O-to-structure conversion yield
    r_gr_max: float = 5.0e-6      # s-1
    gamma: float = 1.0            # reservoir saturation shape
    q10_gr: float = 1.6
    t_ref_gr: float = 293.15      # K
    resp_shoot: float = 3.47e-7   # s-1
    resp_root: float = 1.16e-7    # s-1
    tau_root: float = 0.15
    q10_resp: float = 2.0
    t_ref_resp: float = 298.15    # K
    k_ext: float = 0.9
    lar: float = 7.5e-2           # m2 g-1
    eps_light: float = 1.7e-5     # g CO2 J-1
    g_bnd: float = 7.0e-3         # m s-1
    g_stm: float = 5.0e-3         # m s-1
    car_1: float = -1.32e-5       # g_car = car_1*T^2 + car_2*T + car_3, T in C
    car_2: float = 5.94e-4
    car_3: float = -2.64e-3
    gamma_star_ppm: float = 40.0  # CO2 compensation point
    nsdw_ramp: float = 1.0e-2     # g m-2, smooth cutoff band for the reservoir

    def __post_init__(self):
        for f in ("c_ch2o_co2", "r_gr_max", "gamma", "resp_shoot", "resp_root",
                  "k_ext", "lar", "eps_light", "g_bnd", "g_stm", "nsdw_ramp"):
            if getattr(self, f) < 0:
                raise ValidationError(f, "must be nonnegative")
        if not 0.0 <= self.tau_root <= 1.0:
            raise ValidationError("tau_root", "must lie in [0, 1]")
        for f in ("q10_gr", "q10_resp"):
            if getattr(self, f) <= 0:
                raise ValidationError(f, "must be strictly positive")
        if not 0.0 < self.yield_factor <= 1.0:
            raise ValidationError("yield_factor", "must lie in (0, 1]")


def specific_growth_rate(t_i: float, x_sdw: float, x_nsdw: float, p: CropParams) -> float:
    """Reservoir-saturating, Q10 temperature-scaled specific growth rate (s⁻¹)."""
    if x_nsdw <= 0.0:
        return 0.0
    sat = x_nsdw / (p.gamma * x_sdw + x_nsdw)
    return p.r_gr_max * sat * p.q10_gr ** ((t_i - p.t_ref_gr) / 10.0)


def maintenance_respiration(t_i: float, x_sdw: float, p: CropParams) -> float:
    """Shoot- and root-apportioned maintenance loss (g CH₂O m⁻² s⁻¹)."""
    coeff = p.resp_shoot * (1.0 - p.tau_root) + p.resp_root * p.tau_root
    return coeff * x_sdw * p.q10_resp ** ((t_i - p.t_ref_resp) / 10.0)


def canopy_closure(x_sdw: float, p: CropParams) -> float:
    """Fraction of cultivated ground shaded by the canopy, in [0, 1)."""
    if x_sdw <= 0.0:
        return 0.0
    return 1.0 - math.exp(-p.k_ext * p.lar * (1.0 - p.tau_root) * x_sdw)


def gross_photosynthesis(c_c: float, t_i: float, par: float, x_sdw: float,
                         p: CropParams) -> float:
    """Canopy CO₂ assimilation (g CO₂ m⁻² s⁻¹), light/CO₂ co-limited.

    The maximum rate combines the light-limited rate eps_light·PAR with the
    conductance-limited rate g_total·(C_c − Γ); boundary-layer, stomatal and
    carboxylation conductances act in series. Γ is the compensation point.
    """
    if par <= 0.0 or x_sdw <= 0.0:
        return 0.0
    t_c = t_i - 273.15
    g_car = p.car_1 * t_c * t_c + p.car_2 * t_c + p.car_3
    if g_car <= 0.0:
        return 0.0
    g_total = 1.0 / (1.0 / p.g_bnd + 1.0 / p.g_stm + 1.0 / g_car)
    # work in g/m3 so the conductance term lands in g m-2 s-1
    delta_c = c_c * 1e3 - ppm_to_density(p.gamma_star_ppm, t_i) * 1e3
    if delta_c <= 0.0:
        return 0.0
    light = p.eps_light * par
    co2 = g_total * delta_c
    f_max = light * co2 / (light + co2)
    return f_max * canopy_closure(x_sdw, p)


def _smoothstep(t: float) -> float:
    t = min(1.0, max(0.0, t))
    return t * t * (3.0 - 2.0 * t)


def crop_rhs(x_sdw: float, x_nsdw: float, t_i: float, c_c: float, par: float,
             p: CropParams, area_per_volume: float = 0.0) -> tuple[float, float, float]:
    """Growth ODE right-hand side.

    Returns (dx_sdw/dt, dx_nsdw/dt, co2_sink) where co2_sink is the CO₂
    drawn from greenhouse air in kg m⁻³ s⁻¹ given the cultivated-area to
    air-volume ratio (0 when the caller handles scaling itself, in which
    case the third component is 0 too).

    The reservoir drain terms fade smoothly to zero over the last
    `nsdw_ramp` grams so integration never drives x_nsdw negative.
    """
    if x_sdw <= 0.0 and x_nsdw <= 0.0:
        return 0.0, 0.0, 0.0
    r_gr = specific_growth_rate(t_i, x_sdw, x_nsdw, p)
    f_phot = gross_photosynthesis(c_c, t_i, par, x_sdw, p)
    f_resp = maintenance_respiration(t_i, x_sdw, p)

    drain = _smoothstep(x_nsdw / p.nsdw_ramp) if p.nsdw_ramp > 0 else 1.0
    growth = drain * r_gr * x_sdw
    f_resp = drain * f_resp

    y = p.yield_factor
    d_sdw = growth
    d_nsdw = p.c_ch2o_co2 * f_phot - growth - f_resp - (1.0 - y) / y * growth
    co2_sink = f_phot * area_per_volume * 1e-3  # g/m2/s * (m2/m3) -> kg/m3/s
    return d_sdw, d_nsdw, co2_sink
