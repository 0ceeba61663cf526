"""Scalar heat/mass-transfer closed forms shared across modules.

These are the formula-level building blocks; the climate module wraps them
over its exchange-link graph and re-exports them as its public surface.
"""

from __future__ import annotations

import math


def nusselt(gr: float, re: float) -> float:
    """Larger of the free- and forced-convection Nusselt numbers.

    Nu_free = 0.5·(Gr/1e5)^0.25 + 0.13·(Gr/1e5)^0.33
    Nu_forced = 0.6·(Re/20000)^0.5 + 0.032·(Re/20000)^0.8
    """
    g = gr / 1.0e5
    r = re / 2.0e4
    nu_free = 0.5 * g**0.25 + 0.13 * g**0.33
    nu_forced = 0.6 * r**0.5 + 0.032 * r**0.8
    return max(nu_free, nu_forced)


def grashof(delta_t: float, char_length: float, t_mean: float,
            nu_air: float = 1.5e-5, gravity: float = 9.81) -> float:
    """Grashof number with ideal-gas expansion coefficient 1/T_mean."""
    return gravity * abs(delta_t) * char_length**3 / (t_mean * nu_air * nu_air)


def reynolds(velocity: float, char_length: float, nu_air: float = 1.5e-5) -> float:
    return velocity * char_length / nu_air


def conv_flow(area: float, nu: float, lambda_air: float, d_c: float,
              t1: float, t2: float) -> float:
    """Convective heat flow A·Nu·λ_air·(T1 − T2)/d_c, W."""
    return area * nu * lambda_air * (t1 - t2) / d_c


def rad_flow(eps1: float, eps2: float, rho1: float, rho2: float,
             f12: float, f21: float, sigma: float, area1: float,
             t1: float, t2: float) -> float:
    """Radiative exchange ε₁ε₂/(1 − ρ₁ρ₂F₁₂F₂₁)·σ·A₁·F₁₂·(T1⁴ − T2⁴), W."""
    denom = 1.0 - rho1 * rho2 * f12 * f21
    return eps1 * eps2 / denom * sigma * area1 * f12 * (t1**4 - t2**4)


def cond_flow(area: float, lambda_c: float, d_l: float, t1: float, t2: float) -> float:
    """Conductive heat flow A·λ_c/d_l·(T1 − T2), W."""
    return area * lambda_c / d_l * (t1 - t2)


def saturation_moisture(t_celsius: float, rho_air: float = 1.2) -> float:
    """Saturation vapor density ρ_air·exp(11.56 − 4030/(T + 235)), kg/m³."""
    if t_celsius <= -235.0:
        raise ValueError("temperature at or below the -235 C formula pole")
    return rho_air * math.exp(11.56 - 4030.0 / (t_celsius + 235.0))


def co2_ext_density(t_ext: float, m_c: float = 0.044, p_atm: float = 101325.0,
                    r_gas: float = 8.314) -> float:
    """Ambient 400 ppm CO₂ as a density at T_ext (K): 4e-4·M_c·P/(R·T)."""
    return 4.0e-4 * m_c * p_atm / (r_gas * t_ext)


def co2_ppm(c_c: float, t_i: float, m_c: float = 0.044, p_atm: float = 101325.0,
            r_gas: float = 8.314) -> float:
    """CO₂ density (kg/m³) at T_i (K) expressed in ppm."""
    return c_c * r_gas * t_i / (m_c * p_atm) * 1.0e6


def ppm_to_density(ppm: float, t_kelvin: float, m_c: float = 0.044,
                   p_atm: float = 101325.0, r_gas: float = 8.314) -> float:
    """Inverse of co2_ppm."""
    return ppm * 1.0e-6 * m_c * p_atm / (r_gas * t_kelvin)
