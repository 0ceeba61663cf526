"""Compiled inner loops: packed-array climate RHS, RK4 rollout, shooting
objective, and its reverse-mode (discrete adjoint) gradient.

Everything here operates on plain float64/int64 arrays packed by
ClimateModel.pack(); the Python-level climate module remains the readable
reference implementation, and consistency tests pin the two together.
The adjoint VJP is hand-written against the RHS below — any change to one
must be mirrored in the other (the finite-difference oracle test enforces
this).
"""

from __future__ import annotations

import numpy as np
from numba import njit

# ---- parameter-pack indices (pp vector) --------------------------------
P_RHO_C_AIR = 0    # rho_air * c_air
P_VOLUME = 1
P_LEAK = 2         # leakage volume flow, m3/s
P_FAN_MAX = 3      # m3/s at 100%
P_HEATER_MAX = 4   # W at 100%
P_HUMID_MAX = 5    # kg/s water at 100%
P_CO2_MAX = 6      # kg/s CO2 at 100%
P_CROSS_SECTION = 7
P_SKY_OFFSET = 8
P_T_DEEP = 9
P_COND_RATE = 10
P_TRANSP_COEF = 11  # kg/s per (g/m2 sdw * kg/m3 deficit)
P_PAR_COEF = 12     # PAR W/m2 per W transmitted
P_COVER_ABS = 13
P_GAIN_VEG = 14
P_GAIN_MED = 15
P_GAIN_TRAY = 16
P_GAIN_FLOOR = 17
P_RHO_AIR = 18
P_NU_AIR = 19
P_GRAVITY = 20
P_M_C = 21
P_P_ATM = 22
P_R_GAS = 23
P_A_PER_V = 24      # cultivated area / volume
P_C_CH2O = 25
P_YIELD = 26
P_R_GR_MAX = 27
P_GAMMA = 28
P_Q10_GR = 29
P_T_REF_GR = 30
P_RESP_COEF = 31
P_Q10_RESP = 32
P_T_REF_RESP = 33
P_K_LAR = 34        # k_ext * lar * (1 - tau_root)
P_EPS_LIGHT = 35
P_G_BND = 36
P_G_STM = 37
P_CAR_1 = 38
P_CAR_2 = 39
P_CAR_3 = 40
P_GAMMA_STAR = 41   # ppm
P_NSDW_RAMP = 42
P_E_PRICE = 43      # EUR/kWh
P_CO2_PRICE = 44    # EUR/g in the objective (0 when excluded)
P_REV_COEF = 45     # EUR per g/m2 biomass change
P_DT = 46
P_PENALTY_W = 47
P_T_MIN = 48
P_T_MAX = 49
P_PPM_MAX = 50
P_LAMBDA_AIR = 51
N_PP = 52

# link kinds
LK_CONV = 0
LK_RAD = 1
LK_COND = 2
# forced-velocity sources
V_NONE = 0
V_WIND = 1
V_FAN = 2
# boundary node ids (after the 7 compartments)
NODE_EXT = 7
NODE_SKY = 8
NODE_DEEP = 9

T_LO = 173.0
T_HI = 373.0

BIG = 1.0e30


@njit(cache=True)
def _sat_moisture(t_k, rho_air):
    # rho_air * exp(11.56 - 4030/(T_C + 235)); T_C = t_k - 273.15
    return rho_air * np.exp(11.56 - 4030.0 / (t_k - 38.15))


@njit(cache=True)
def _d_sat_moisture(t_k, rho_air):
    s = _sat_moisture(t_k, rho_air)
    d = t_k - 38.15
    return s * 4030.0 / (d * d)


@njit(cache=True)
def _node_temp(i, x, t_ext, sky_offset, t_deep):
    if i < 7:
        return x[i]
    if i == NODE_EXT:
        return t_ext
    if i == NODE_SKY:
        return t_ext + sky_offset
    return t_deep


@njit(cache=True)
def rhs(x, u, ex, pp, caps, lk_kind, lk_i1, lk_i2, lk_vsrc, lk_c1, lk_c2, lk_c3):
    """Packed RHS. ex = [T_ext, v_wind, q_inc, q_trans, c_w_ext, c_ext].

    u in percent. Link coefficient meaning by kind:
      conv: c1 = A*lambda_air/d_c, c2 = g*d^3/(1e5*nu^2), c3 = d/(2e4*nu)
      rad:  c1 = eps1*eps2/(1-rho1*rho2*F12*F21)*sigma*A1*F12
      cond: c1 = A*lambda_c/d_l
    """
    t_ext = ex[0]
    v_wind = ex[1]
    q_inc = ex[2]
    q_trans = ex[3]
    c_w_ext = ex[4]
    c_ext = ex[5]

    c_w = x[7]
    c_c = x[8]
    x_s = x[9]
    x_n = x[10]

    dx = np.zeros(11)

    # ventilation flow (fan + leakage)
    vent = pp[P_LEAK] + u[1] / 100.0 * pp[P_FAN_MAX]
    v_fan = (u[1] / 100.0 * pp[P_FAN_MAX]) / pp[P_CROSS_SECTION]

    # pairwise heat flows
    for l in range(lk_kind.shape[0]):
        i1 = lk_i1[l]
        i2 = lk_i2[l]
        t1 = _node_temp(i1, x, t_ext, pp[P_SKY_OFFSET], pp[P_T_DEEP])
        t2 = _node_temp(i2, x, t_ext, pp[P_SKY_OFFSET], pp[P_T_DEEP])
        kind = lk_kind[l]
        if kind == LK_CONV:
            delta = t1 - t2
            t_mean = 0.5 * (t1 + t2)
            g = lk_c2[l] * np.abs(delta) / t_mean
            nu_free = 0.5 * g**0.25 + 0.13 * g**0.33
            vel = 0.0
            if lk_vsrc[l] == V_WIND:
                vel = v_wind
            elif lk_vsrc[l] == V_FAN:
                vel = v_fan
            r = lk_c3[l] * vel
            nu_forced = 0.6 * r**0.5 + 0.032 * r**0.8
            nu = nu_free if nu_free >= nu_forced else nu_forced
            q = lk_c1[l] * nu * delta
        elif kind == LK_RAD:
            t1s = t1 * t1
            t2s = t2 * t2
            q = lk_c1[l] * (t1s * t1s - t2s * t2s)
        else:
            q = lk_c1[l] * (t1 - t2)
        if i1 < 7:
            dx[i1] -= q / caps[i1]
        if i2 < 7:
            dx[i2] += q / caps[i2]

    # solar gains
    closure = 1.0 - np.exp(-pp[P_K_LAR] * x_s) if x_s > 0.0 else 0.0
    dx[0] += pp[P_COVER_ABS] * q_inc / caps[0]
    dx[2] += pp[P_GAIN_VEG] * closure * q_trans / caps[2]
    dx[3] += pp[P_GAIN_MED] * (1.0 - closure) * q_trans / caps[3]
    dx[4] += pp[P_GAIN_TRAY] * (1.0 - closure) * q_trans / caps[4]
    dx[5] += pp[P_GAIN_FLOOR] * q_trans / caps[5]

    # heater and ventilation sensible heat into internal air
    t_i = x[1]
    heater = u[0] / 100.0 * pp[P_HEATER_MAX]
    vent_heat = pp[P_RHO_C_AIR] * vent * (t_ext - t_i)
    dx[1] += (heater + vent_heat) / caps[1]

    # moisture
    t_v = x[2]
    sat_v = _sat_moisture(t_v, pp[P_RHO_AIR])
    vpd = sat_v - c_w
    transp = pp[P_TRANSP_COEF] * x_s * vpd if vpd > 0.0 else 0.0
    humid = u[2] / 100.0 * pp[P_HUMID_MAX]
    sat_i = _sat_moisture(t_i, pp[P_RHO_AIR])
    over = c_w - sat_i
    cond = pp[P_COND_RATE] * over if over > 0.0 else 0.0
    dx[7] = (humid + transp) / pp[P_VOLUME] + vent / pp[P_VOLUME] * (c_w_ext - c_w) - cond

    # crop
    par = pp[P_PAR_COEF] * q_trans
    r_gr = 0.0
    if x_n > 0.0:
        r_gr = (pp[P_R_GR_MAX] * x_n / (pp[P_GAMMA] * x_s + x_n)
                * pp[P_Q10_GR] ** ((t_i - pp[P_T_REF_GR]) / 10.0))
    f_resp = pp[P_RESP_COEF] * x_s * pp[P_Q10_RESP] ** ((t_i - pp[P_T_REF_RESP]) / 10.0)
    f_phot = 0.0
    if par > 0.0 and x_s > 0.0:
        t_c = t_i - 273.15
        g_car = pp[P_CAR_1] * t_c * t_c + pp[P_CAR_2] * t_c + pp[P_CAR_3]
        if g_car > 0.0:
            g_tot = 1.0 / (1.0 / pp[P_G_BND] + 1.0 / pp[P_G_STM] + 1.0 / g_car)
            gamma_gm3 = (pp[P_GAMMA_STAR] * 1e-6 * pp[P_M_C] * pp[P_P_ATM]
                         / (pp[P_R_GAS] * t_i)) * 1e3
            delta_c = c_c * 1e3 - gamma_gm3
            if delta_c > 0.0:
                light = pp[P_EPS_LIGHT] * par
                co2t = g_tot * delta_c
                f_phot = light * co2t / (light + co2t) * closure

    drain = 1.0
    if pp[P_NSDW_RAMP] > 0.0:
        tt = x_n / pp[P_NSDW_RAMP]
        if tt < 0.0:
            tt = 0.0
        elif tt > 1.0:
            tt = 1.0
        drain = tt * tt * (3.0 - 2.0 * tt)
    growth = drain * r_gr * x_s
    f_resp_eff = drain * f_resp
    y = pp[P_YIELD]
    dx[9] = growth
    dx[10] = pp[P_C_CH2O] * f_phot - growth - f_resp_eff - (1.0 - y) / y * growth

    # CO2
    co2_src = u[3] / 100.0 * pp[P_CO2_MAX]
    sink = f_phot * pp[P_A_PER_V] * 1e-3
    dx[8] = co2_src / pp[P_VOLUME] + vent / pp[P_VOLUME] * (c_ext - c_c) - sink

    return dx


@njit(cache=True)
def rhs_vjp(x, u, ex, lam, pp, caps, lk_kind, lk_i1, lk_i2, lk_vsrc, lk_c1, lk_c2, lk_c3):
    """Vector-Jacobian products lamᵀ·∂rhs/∂x and lamᵀ·∂rhs/∂u.

    Mirrors `rhs` term by term; every branch below must match the primal.
    """
    t_ext = ex[0]
    v_wind = ex[1]
    q_trans = ex[3]
    c_w_ext = ex[4]
    c_ext = ex[5]

    c_w = x[7]
    c_c = x[8]
    x_s = x[9]
    x_n = x[10]

    xb = np.zeros(11)
    ub = np.zeros(4)

    vent = pp[P_LEAK] + u[1] / 100.0 * pp[P_FAN_MAX]
    dvent_du1 = pp[P_FAN_MAX] / 100.0
    v_fan = (u[1] / 100.0 * pp[P_FAN_MAX]) / pp[P_CROSS_SECTION]
    dvfan_du1 = dvent_du1 / pp[P_CROSS_SECTION]

    # --- links
    for l in range(lk_kind.shape[0]):
        i1 = lk_i1[l]
        i2 = lk_i2[l]
        t1 = _node_temp(i1, x, t_ext, pp[P_SKY_OFFSET], pp[P_T_DEEP])
        t2 = _node_temp(i2, x, t_ext, pp[P_SKY_OFFSET], pp[P_T_DEEP])
        # weight of this link's flow in the objective-adjoint
        w = 0.0
        if i1 < 7:
            w -= lam[i1] / caps[i1]
        if i2 < 7:
            w += lam[i2] / caps[i2]
        if w == 0.0:
            continue
        kind = lk_kind[l]
        if kind == LK_CONV:
            delta = t1 - t2
            t_mean = 0.5 * (t1 + t2)
            g = lk_c2[l] * np.abs(delta) / t_mean
            nu_free = 0.5 * g**0.25 + 0.13 * g**0.33
            vel = 0.0
            if lk_vsrc[l] == V_WIND:
                vel = v_wind
            elif lk_vsrc[l] == V_FAN:
                vel = v_fan
            r = lk_c3[l] * vel
            nu_forced = 0.6 * r**0.5 + 0.032 * r**0.8
            if nu_free >= nu_forced:
                # q = c1 * Nu_free(delta, t_mean) * delta
                # delta * dNu/d(delta) = 0.25*0.5*G^0.25 + 0.33*0.13*G^0.33
                s = 0.125 * g**0.25 + 0.0429 * g**0.33
                nu = nu_free
                # d(q)/dt1 = c1*(nu + s) + c1*delta*dNu/dTm*0.5
                # dNu/dTm = -s_over_delta… expressed via s: delta*dNu/dTm = -s*delta/t_mean… careful:
                # dNu/dTm = (dNu/dG)(-G/Tm); delta*(dNu/dG)*(G/|delta|) = s  =>
                # delta*dNu/dTm = -(s*|delta|/delta)*(delta/Tm) = -s*delta/Tm * sign… it reduces to:
                tmterm = 0.0
                if np.abs(delta) > 0.0:
                    tmterm = -0.5 * s * delta / t_mean
                dq_dt1 = lk_c1[l] * (nu + s + tmterm)
                dq_dt2 = lk_c1[l] * (-(nu + s) + tmterm)
                if i1 < 7:
                    xb[i1] += w * dq_dt1
                if i2 < 7:
                    xb[i2] += w * dq_dt2
            else:
                nu = nu_forced
                dq_dt1 = lk_c1[l] * nu
                if i1 < 7:
                    xb[i1] += w * dq_dt1
                if i2 < 7:
                    xb[i2] -= w * dq_dt1
                if lk_vsrc[l] == V_FAN and r > 0.0:
                    dnu_dr = 0.3 * r**(-0.5) + 0.0256 * r**(-0.2)
                    dq_du1 = lk_c1[l] * delta * dnu_dr * lk_c3[l] * dvfan_du1
                    ub[1] += w * dq_du1
        elif kind == LK_RAD:
            if i1 < 7:
                xb[i1] += w * lk_c1[l] * 4.0 * t1 * t1 * t1
            if i2 < 7:
                xb[i2] -= w * lk_c1[l] * 4.0 * t2 * t2 * t2
        else:
            if i1 < 7:
                xb[i1] += w * lk_c1[l]
            if i2 < 7:
                xb[i2] -= w * lk_c1[l]

    # --- solar gains (x_sdw via closure)
    closure = 1.0 - np.exp(-pp[P_K_LAR] * x_s) if x_s > 0.0 else 0.0
    dclos = pp[P_K_LAR] * np.exp(-pp[P_K_LAR] * x_s) if x_s > 0.0 else 0.0
    g_sdw = (lam[2] * pp[P_GAIN_VEG] / caps[2]
             - lam[3] * pp[P_GAIN_MED] / caps[3]
             - lam[4] * pp[P_GAIN_TRAY] / caps[4]) * q_trans * dclos
    xb[9] += g_sdw

    # --- heater + ventilation heat
    t_i = x[1]
    w1 = lam[1] / caps[1]
    xb[1] += w1 * (-pp[P_RHO_C_AIR] * vent)
    ub[0] += w1 * pp[P_HEATER_MAX] / 100.0
    ub[1] += w1 * pp[P_RHO_C_AIR] * dvent_du1 * (t_ext - t_i)

    # --- moisture
    t_v = x[2]
    sat_v = _sat_moisture(t_v, pp[P_RHO_AIR])
    vpd = sat_v - c_w
    lw = lam[7]
    vol = pp[P_VOLUME]
    if vpd > 0.0:
        dtransp_dtv = pp[P_TRANSP_COEF] * x_s * _d_sat_moisture(t_v, pp[P_RHO_AIR])
        dtransp_dcw = -pp[P_TRANSP_COEF] * x_s
        dtransp_dxs = pp[P_TRANSP_COEF] * vpd
        xb[2] += lw * dtransp_dtv / vol
        xb[7] += lw * dtransp_dcw / vol
        xb[9] += lw * dtransp_dxs / vol
    ub[2] += lw * pp[P_HUMID_MAX] / 100.0 / vol
    xb[7] += lw * (-vent / vol)
    ub[1] += lw * dvent_du1 * (c_w_ext - c_w) / vol
    sat_i = _sat_moisture(t_i, pp[P_RHO_AIR])
    if c_w - sat_i > 0.0:
        xb[7] += lw * (-pp[P_COND_RATE])
        xb[1] += lw * pp[P_COND_RATE] * _d_sat_moisture(t_i, pp[P_RHO_AIR])

    # --- crop (and its CO2 sink)
    par = pp[P_PAR_COEF] * q_trans
    r_gr = 0.0
    dr_dti = 0.0
    dr_dxs = 0.0
    dr_dxn = 0.0
    if x_n > 0.0:
        denom = pp[P_GAMMA] * x_s + x_n
        q10f = pp[P_Q10_GR] ** ((t_i - pp[P_T_REF_GR]) / 10.0)
        r_gr = pp[P_R_GR_MAX] * x_n / denom * q10f
        dr_dti = r_gr * np.log(pp[P_Q10_GR]) / 10.0
        dr_dxs = -pp[P_R_GR_MAX] * x_n * pp[P_GAMMA] / (denom * denom) * q10f
        dr_dxn = pp[P_R_GR_MAX] * pp[P_GAMMA] * x_s / (denom * denom) * q10f
    q10r = pp[P_Q10_RESP] ** ((t_i - pp[P_T_REF_RESP]) / 10.0)
    f_resp = pp[P_RESP_COEF] * x_s * q10r
    dresp_dti = f_resp * np.log(pp[P_Q10_RESP]) / 10.0
    dresp_dxs = pp[P_RESP_COEF] * q10r

    f_phot = 0.0
    dphot_dti = 0.0
    dphot_dcc = 0.0
    dphot_dxs = 0.0
    if par > 0.0 and x_s > 0.0:
        t_c = t_i - 273.15
        g_car = pp[P_CAR_1] * t_c * t_c + pp[P_CAR_2] * t_c + pp[P_CAR_3]
        if g_car > 0.0:
            inv = 1.0 / pp[P_G_BND] + 1.0 / pp[P_G_STM] + 1.0 / g_car
            g_tot = 1.0 / inv
            dgcar_dti = 2.0 * pp[P_CAR_1] * t_c + pp[P_CAR_2]
            dgtot_dti = g_tot * g_tot / (g_car * g_car) * dgcar_dti
            gamma_gm3 = (pp[P_GAMMA_STAR] * 1e-6 * pp[P_M_C] * pp[P_P_ATM]
                         / (pp[P_R_GAS] * t_i)) * 1e3
            dgamma_dti = -gamma_gm3 / t_i
            delta_c = c_c * 1e3 - gamma_gm3
            if delta_c > 0.0:
                light = pp[P_EPS_LIGHT] * par
                co2t = g_tot * delta_c
                fmax = light * co2t / (light + co2t)
                # d fmax / d co2t = (light/(light+co2t))^2
                dfmax_dco2t = (light / (light + co2t)) ** 2
                f_phot = fmax * closure
                dco2t_dti = dgtot_dti * delta_c + g_tot * (-dgamma_dti)
                dco2t_dcc = g_tot * 1e3
                dphot_dti = dfmax_dco2t * dco2t_dti * closure
                dphot_dcc = dfmax_dco2t * dco2t_dcc * closure
                dphot_dxs = fmax * dclos

    drain = 1.0
    ddrain_dxn = 0.0
    if pp[P_NSDW_RAMP] > 0.0:
        tt = x_n / pp[P_NSDW_RAMP]
        if tt <= 0.0:
            drain = 0.0
        elif tt >= 1.0:
            drain = 1.0
        else:
            drain = tt * tt * (3.0 - 2.0 * tt)
            ddrain_dxn = (6.0 * tt - 6.0 * tt * tt) / pp[P_NSDW_RAMP]

    y = pp[P_YIELD]
    gscale = 1.0 + (1.0 - y) / y
    # dx9 = drain*r_gr*x_s ; dx10 = c*f_phot - gscale*drain*r_gr*x_s - drain*f_resp
    w9 = lam[9]
    w10 = lam[10]
    c_ch2o = pp[P_C_CH2O]
    # growth = drain*r_gr*x_s
    dgrowth_dti = drain * dr_dti * x_s
    dgrowth_dxs = drain * (dr_dxs * x_s + r_gr)
    dgrowth_dxn = drain * dr_dxn * x_s + ddrain_dxn * r_gr * x_s
    xb[1] += w9 * dgrowth_dti + w10 * (c_ch2o * dphot_dti - gscale * dgrowth_dti
                                       - drain * dresp_dti)
    xb[8] += w10 * c_ch2o * dphot_dcc
    xb[9] += (w9 * dgrowth_dxs
              + w10 * (c_ch2o * dphot_dxs - gscale * dgrowth_dxs - drain * dresp_dxs))
    xb[10] += (w9 * dgrowth_dxn
               + w10 * (-gscale * dgrowth_dxn - ddrain_dxn * f_resp))

    # --- CO2 balance
    w8 = lam[8]
    ub[3] += w8 * pp[P_CO2_MAX] / 100.0 / vol
    xb[8] += w8 * (-vent / vol)
    ub[1] += w8 * dvent_du1 * (c_ext - c_c) / vol
    spv = pp[P_A_PER_V] * 1e-3
    xb[1] -= w8 * spv * dphot_dti
    xb[8] -= w8 * spv * dphot_dcc
    xb[9] -= w8 * spv * dphot_dxs

    return xb, ub


@njit(cache=True)
def rk4_substep(x, u, ex, h, pp, caps, lk_kind, lk_i1, lk_i2, lk_vsrc, lk_c1, lk_c2, lk_c3):
    k1 = rhs(x, u, ex, pp, caps, lk_kind, lk_i1, lk_i2, lk_vsrc, lk_c1, lk_c2, lk_c3)
    k2 = rhs(x + 0.5 * h * k1, u, ex, pp, caps, lk_kind, lk_i1, lk_i2, lk_vsrc, lk_c1, lk_c2, lk_c3)
    k3 = rhs(x + 0.5 * h * k2, u, ex, pp, caps, lk_kind, lk_i1, lk_i2, lk_vsrc, lk_c1, lk_c2, lk_c3)
    k4 = rhs(x + h * k3, u, ex, pp, caps, lk_kind, lk_i1, lk_i2, lk_vsrc, lk_c1, lk_c2, lk_c3)
    return x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@njit(cache=True)
def integrate_fixed(x, u, ex, dt, m_sub, pp, caps, lk_kind, lk_i1, lk_i2, lk_vsrc,
                    lk_c1, lk_c2, lk_c3):
    """M-substep classical RK4 over one sampling interval. Returns (x', ok)."""
    h = dt / m_sub
    ok = True
    for _ in range(m_sub):
        x = rk4_substep(x, u, ex, h, pp, caps, lk_kind, lk_i1, lk_i2, lk_vsrc,
                        lk_c1, lk_c2, lk_c3)
        for j in range(7):
            if not (T_LO <= x[j] <= T_HI):
                ok = False
        if not ok:
            break
    return x, ok


@njit(cache=True)
def _penalty(x, pp):
    """Quadratic soft state-bound penalty; temps in K, CO2 in 100 ppm units."""
    w = pp[P_PENALTY_W]
    pen = 0.0
    for j in range(7):
        lo = pp[P_T_MIN] - x[j]
        if lo > 0.0:
            pen += lo * lo
        hi = x[j] - pp[P_T_MAX]
        if hi > 0.0:
            pen += hi * hi
    ppm = x[8] * pp[P_R_GAS] * x[1] / (pp[P_M_C] * pp[P_P_ATM]) * 1e6
    over = (ppm - pp[P_PPM_MAX]) / 100.0
    if over > 0.0:
        pen += over * over
    return w * pen


@njit(cache=True)
def _penalty_grad(x, pp, xb, scale):
    """Accumulate scale * d(penalty)/dx into xb."""
    w = pp[P_PENALTY_W]
    for j in range(7):
        lo = pp[P_T_MIN] - x[j]
        if lo > 0.0:
            xb[j] += scale * w * (-2.0 * lo)
        hi = x[j] - pp[P_T_MAX]
        if hi > 0.0:
            xb[j] += scale * w * 2.0 * hi
    conv = pp[P_R_GAS] * 1e6 / (pp[P_M_C] * pp[P_P_ATM])
    ppm = x[8] * conv * x[1]
    over = (ppm - pp[P_PPM_MAX]) / 100.0
    if over > 0.0:
        xb[8] += scale * w * 2.0 * over / 100.0 * conv * x[1]
        xb[1] += scale * w * 2.0 * over / 100.0 * conv * x[8]


@njit(cache=True)
def _stage_cost_u(u, i_co2, pp, pw):
    """Actuation cost of one step: energy plus (optional) social CO2, EUR."""
    kwh_per_pct = pp[P_DT] / 3.6e6
    cost = 0.0
    for i in range(4):
        kwh = pw[i] * u[i] * kwh_per_pct
        cost += pp[P_E_PRICE] * kwh + pp[P_CO2_PRICE] * i_co2 * kwh
    return cost


@njit(cache=True)
def shooting_objective(x0, u_seq, ex_seq, i_co2_seq, n_horizon, m_sub, pp, caps, pw,
                       lk_kind, lk_i1, lk_i2, lk_vsrc, lk_c1, lk_c2, lk_c3):
    """Objective of the direct-shooting OCP. Returns (J, X, max_violation).

    u_seq is (n_ctrl, 4) in percent; move min(t, n_ctrl-1) applies at step t.
    On plausibility abort returns (BIG, X-so-far, inf-ish violation).
    """
    n_ctrl = u_seq.shape[0]
    X = np.zeros((n_horizon + 1, 11))
    X[0] = x0
    obj = 0.0
    max_viol = 0.0
    rev0_s = x0[9]
    rev0_n = x0[10]
    x = x0.copy()
    for t in range(n_horizon):
        ci = t if t < n_ctrl else n_ctrl - 1
        u = u_seq[ci]
        # stage cost with pre-step state
        rev = pp[P_REV_COEF] * ((x[9] - rev0_s) + (x[10] - rev0_n))
        obj += -rev + _stage_cost_u(u, i_co2_seq[t], pp, pw)
        x, ok = integrate_fixed(x, u, ex_seq[t], pp[P_DT], m_sub, pp, caps,
                                lk_kind, lk_i1, lk_i2, lk_vsrc, lk_c1, lk_c2, lk_c3)
        if not ok:
            return BIG, X, BIG
        X[t + 1] = x
        pen = _penalty(x, pp)
        obj += pen
        if pen > max_viol:
            max_viol = pen
    return obj, X, max_viol


@njit(cache=True)
def shooting_gradient(x0, u_seq, ex_seq, i_co2_seq, n_horizon, m_sub, pp, caps, pw,
                      lk_kind, lk_i1, lk_i2, lk_vsrc, lk_c1, lk_c2, lk_c3):
    """Objective and its gradient w.r.t. u_seq by discrete adjoint.

    Returns (J, grad (n_ctrl,4), ok). Forward pass stores every RK4 stage
    base point; backward pass runs the hand-written VJP in reverse.
    """
    n_ctrl = u_seq.shape[0]
    h = pp[P_DT] / m_sub
    # stage base points: a1..a4 per substep per step
    stages = np.zeros((n_horizon, m_sub, 4, 11))
    X = np.zeros((n_horizon + 1, 11))
    X[0] = x0
    obj = 0.0
    rev0_s = x0[9]
    rev0_n = x0[10]
    x = x0.copy()
    for t in range(n_horizon):
        ci = t if t < n_ctrl else n_ctrl - 1
        u = u_seq[ci]
        rev = pp[P_REV_COEF] * ((x[9] - rev0_s) + (x[10] - rev0_n))
        obj += -rev + _stage_cost_u(u, i_co2_seq[t], pp, pw)
        for s in range(m_sub):
            a1 = x
            k1 = rhs(a1, u, ex_seq[t], pp, caps, lk_kind, lk_i1, lk_i2, lk_vsrc, lk_c1, lk_c2, lk_c3)
            a2 = x + 0.5 * h * k1
            k2 = rhs(a2, u, ex_seq[t], pp, caps, lk_kind, lk_i1, lk_i2, lk_vsrc, lk_c1, lk_c2, lk_c3)
            a3 = x + 0.5 * h * k2
            k3 = rhs(a3, u, ex_seq[t], pp, caps, lk_kind, lk_i1, lk_i2, lk_vsrc, lk_c1, lk_c2, lk_c3)
            a4 = x + h * k3
            k4 = rhs(a4, u, ex_seq[t], pp, caps, lk_kind, lk_i1, lk_i2, lk_vsrc, lk_c1, lk_c2, lk_c3)
            stages[t, s, 0] = a1
            stages[t, s, 1] = a2
            stages[t, s, 2] = a3
            stages[t, s, 3] = a4
            x = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            bad = False
            for j in range(7):
                if not (T_LO <= x[j] <= T_HI):
                    bad = True
            if bad:
                return BIG, np.zeros((n_ctrl, 4)), False
        X[t + 1] = x
        obj += _penalty(x, pp)

    # backward sweep
    grad = np.zeros((n_ctrl, 4))
    lam = np.zeros(11)
    _penalty_grad(X[n_horizon], pp, lam, 1.0)
    for t in range(n_horizon - 1, -1, -1):
        ci = t if t < n_ctrl else n_ctrl - 1
        u = u_seq[ci]
        ub_t = np.zeros(4)
        # backprop through the m_sub RK4 substeps of step t
        for s in range(m_sub - 1, -1, -1):
            a1 = stages[t, s, 0]
            a2 = stages[t, s, 1]
            a3 = stages[t, s, 2]
            a4 = stages[t, s, 3]
            xbar = lam.copy()
            k1b = (h / 6.0) * lam
            k2b = (h / 3.0) * lam
            k3b = (h / 3.0) * lam
            k4b = (h / 6.0) * lam
            v4x, v4u = rhs_vjp(a4, u, ex_seq[t], k4b, pp, caps, lk_kind, lk_i1,
                               lk_i2, lk_vsrc, lk_c1, lk_c2, lk_c3)
            xbar += v4x
            k3b += h * v4x
            for i in range(4):
                ub_t[i] += v4u[i]
            v3x, v3u = rhs_vjp(a3, u, ex_seq[t], k3b, pp, caps, lk_kind, lk_i1,
                               lk_i2, lk_vsrc, lk_c1, lk_c2, lk_c3)
            xbar += v3x
            k2b += 0.5 * h * v3x
            for i in range(4):
                ub_t[i] += v3u[i]
            v2x, v2u = rhs_vjp(a2, u, ex_seq[t], k2b, pp, caps, lk_kind, lk_i1,
                               lk_i2, lk_vsrc, lk_c1, lk_c2, lk_c3)
            xbar += v2x
            k1b += 0.5 * h * v2x
            for i in range(4):
                ub_t[i] += v2u[i]
            v1x, v1u = rhs_vjp(a1, u, ex_seq[t], k1b, pp, caps, lk_kind, lk_i1,
                               lk_i2, lk_vsrc, lk_c1, lk_c2, lk_c3)
            xbar += v1x
            for i in range(4):
                ub_t[i] += v1u[i]
            lam = xbar
        # stage-cost terms at step t
        kwh_per_pct = pp[P_DT] / 3.6e6
        for i in range(4):
            ub_t[i] += (pp[P_E_PRICE] + pp[P_CO2_PRICE] * i_co2_seq[t]) * pw[i] * kwh_per_pct
        for i in range(4):
            grad[ci, i] += ub_t[i]
        # revenue term of l_t (pre-step state), skipped at t=0 (x0 fixed)
        if t > 0:
            lam[9] += -pp[P_REV_COEF]
            lam[10] += -pp[P_REV_COEF]
            _penalty_grad(X[t], pp, lam, 1.0)
    return obj, grad, True
