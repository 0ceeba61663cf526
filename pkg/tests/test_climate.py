"""Climate network assembly and the 11-state right-hand side.

The equilibrium fixture is the backbone here: with all compartments at the
ambient temperature, matched humidity/CO2 and no forcing, every flow in the
network must vanish identically, so single-actuator perturbations isolate
exactly one term of the balance.
"""
import numpy as np
import pytest

from greensim.climate import (
    BOUNDARY_NODES,
    COMPARTMENTS,
    DEFAULT_TOPOLOGY,
    N_STATES,
    STATE_ORDER,
    ClimateState,
    ExchangeLink,
    ExternalConditions,
    PlausibilityError,
    q_cond,
    q_conv,
    q_rad,
    reduce_external,
)
from greensim.params import ControlInput, ValidationError, physical_constants
from greensim.physics import co2_ext_density, saturation_moisture

ZERO8 = np.zeros(8)


def conditions(t_ext=278.15, v_wind=2.0, h_rel=70.0, i_dir=None, i_diff=None):
    return ExternalConditions(
        T_ext=t_ext, T_app=t_ext, v_wind=v_wind, H_rel=h_rel,
        I_dir=ZERO8 if i_dir is None else i_dir,
        I_diff=ZERO8 if i_diff is None else i_diff,
    )


# ---------------------------------------------------------------------------
# containers


class TestClimateState:
    def test_array_roundtrip(self):
        arr = np.array([283.0, 290.0, 288.0, 287.0, 286.0, 285.0, 284.0,
                        0.008, 7.5e-4, 12.0, 3.0])
        st = ClimateState.from_array(arr)
        assert np.array_equal(st.as_array(), arr)
        assert st.T_i == 290.0 and st.x_nsdw == 3.0

    def test_state_order_matches_fields(self):
        assert STATE_ORDER == ("T_c", "T_i", "T_v", "T_m", "T_p", "T_f", "T_s",
                               "C_w", "C_c", "x_sdw", "x_nsdw")
        assert N_STATES == 11

    def test_temperature_band(self):
        with pytest.raises(ValidationError, match="T_v"):
            ClimateState(283.0, 283.0, 400.0, 283.0, 283.0, 283.0, 283.0,
                         0.0, 0.0, 0.0, 0.0)

    def test_nonnegative_densities(self):
        with pytest.raises(ValidationError, match="C_w"):
            ClimateState(283.0, 283.0, 283.0, 283.0, 283.0, 283.0, 283.0,
                         -1e-6, 0.0, 0.0, 0.0)

    def test_wrong_length(self):
        with pytest.raises(ValidationError):
            ClimateState.from_array(np.zeros(10))


class TestExternalConditions:
    def test_vector_roundtrip(self):
        p = conditions(i_dir=np.arange(8.0), i_diff=np.arange(8.0) * 2)
        vec = p.as_vector()
        assert vec.shape == (20,)
        q = ExternalConditions.from_vector(vec)
        assert np.array_equal(q.as_vector(), vec)

    def test_humidity_range(self):
        with pytest.raises(ValidationError, match="H_rel"):
            conditions(h_rel=150.0)

    def test_wind_nonnegative(self):
        with pytest.raises(ValidationError, match="v_wind"):
            conditions(v_wind=-0.1)

    def test_irradiance_shape(self):
        with pytest.raises(ValidationError, match="I_dir"):
            conditions(i_dir=np.zeros(7))

    def test_irradiance_nonnegative(self):
        bad = np.zeros(8)
        bad[3] = -5.0
        with pytest.raises(ValidationError, match="I_diff"):
            conditions(i_diff=bad)


# ---------------------------------------------------------------------------
# flow wrappers reject mismatched link kinds


def test_flow_wrappers_check_kind():
    cn = physical_constants()
    conv = ExchangeLink(node_from="cover", node_to="external", kind="convective",
                        area=1.0, char_length=1.0)
    cond = ExchangeLink(node_from="soil", node_to="deep-soil", kind="conductive",
                        area=1.0, layer_thickness=0.5, conductivity=0.8)
    with pytest.raises(ValidationError):
        q_rad(conv, 300.0, 290.0, cn)
    with pytest.raises(ValidationError):
        q_conv(cond, 300.0, 290.0, cn, 0.0)
    with pytest.raises(ValidationError):
        q_cond(conv, 300.0, 290.0)


# ---------------------------------------------------------------------------
# network assembly


class TestTopology:
    def test_all_nodes_known(self, model):
        valid = set(COMPARTMENTS) | set(BOUNDARY_NODES)
        for link in model.links:
            assert link.node_from in valid and link.node_to in valid

    def test_no_duplicate_links(self, model):
        seen = set()
        for link in model.links:
            key = (frozenset((link.node_from, link.node_to)), link.kind)
            assert key not in seen, f"duplicate exchange {key}"
            seen.add(key)

    def test_every_compartment_connected(self, model):
        touched = set()
        for link in model.links:
            touched.add(link.node_from)
            touched.add(link.node_to)
        assert set(COMPARTMENTS) <= touched

    def test_default_topology_matches_build(self, model):
        assert len(model.links) == len(DEFAULT_TOPOLOGY)

    def test_radiative_links_carry_optics(self, model):
        for link in model.links:
            if link.kind == "radiative":
                assert link.view_factor_12 > 0.0
                assert link.eps1 > 0.0 and link.eps2 > 0.0

    def test_soil_anchored_to_deep_boundary(self, model):
        kinds = {(l.node_from, l.node_to, l.kind) for l in model.links}
        assert ("soil", "deep-soil", "conductive") in kinds or \
               ("deep-soil", "soil", "conductive") in kinds


class TestCapacities:
    def test_positive_and_ordered(self, model):
        caps = model.capacities()
        assert caps.shape == (7,)
        assert np.all(caps > 0.0)

    def test_air_capacity_from_volume(self, model):
        # rho * c_air * volume for the default 800 m3 house
        caps = model.capacities()
        want = 1.2 * 1005.0 * 800.0
        assert caps[COMPARTMENTS.index("internal-air")] == pytest.approx(want, rel=1e-9)


class TestSolarGains:
    def test_dark_is_dark(self, model):
        gains, par = model.solar_gains(10.0, conditions())
        assert not gains.any()
        assert par == 0.0

    def test_incident_and_transmitted_split(self, model):
        i_dir = np.full(8, 100.0)
        p = conditions(i_dir=i_dir)
        areas = np.array([pl.area for pl in model.geometry.surfaces])
        taus = np.array([pl.transmissivity for pl in model.geometry.surfaces])
        q_inc = float(areas @ i_dir)
        q_trans = float((areas * taus) @ i_dir)

        gains, par = model.solar_gains(0.0, p)
        c = model.climate
        assert gains[0] == pytest.approx(c.cover_absorptivity * q_inc, rel=1e-12)
        # bare ground: no canopy interception
        assert gains[2] == 0.0
        r_c = model.geometry.cultivated_area / model.geometry.footprint
        comp = model.compartments
        assert gains[3] == pytest.approx(
            r_c * q_trans * c.split_medium * (1 - comp["medium"].reflectivity))
        assert gains[4] == pytest.approx(
            r_c * q_trans * c.split_tray * (1 - comp["tray"].reflectivity))
        assert gains[5] == pytest.approx(
            (1 - r_c) * (1 - comp["floor"].reflectivity) * q_trans)
        assert par == pytest.approx(
            c.par_fraction * q_trans / model.geometry.footprint, rel=1e-12)

    def test_canopy_intercepts_with_biomass(self, model):
        p = conditions(i_dir=np.full(8, 100.0))
        bare, _ = model.solar_gains(0.0, p)
        grown, _ = model.solar_gains(50.0, p)
        assert grown[2] > bare[2]
        assert grown[3] < bare[3]


class TestBoundaries:
    def test_external(self, model):
        assert model.boundary_temperature("external", conditions(t_ext=280.0)) == 280.0

    def test_sky_offset(self, model):
        got = model.boundary_temperature("sky", conditions(t_ext=280.0))
        assert got == pytest.approx(280.0 + model.climate.sky_offset)

    def test_deep_soil(self, model):
        assert model.boundary_temperature("deep-soil", conditions()) == \
            model.climate.t_deep

    def test_interior_rejected(self, model):
        with pytest.raises(ValidationError, match="node"):
            model.boundary_temperature("cover", conditions())


# ---------------------------------------------------------------------------
# right-hand side


class TestEquilibrium:
    def test_rhs_vanishes(self, equilibrium):
        model_eq, x, cond = equilibrium
        r = model_eq.rhs(x, ControlInput(), cond)
        assert np.max(np.abs(r)) < 1e-10

    def test_heater_warms_only_the_air(self, equilibrium):
        model_eq, x, cond = equilibrium
        r = model_eq.rhs(x, ControlInput(heater=100.0), cond)
        i_air = COMPARTMENTS.index("internal-air")
        heater_w = model_eq.actuators["heater"].a_max
        want = heater_w / model_eq.capacities()[i_air]
        assert r[i_air] == pytest.approx(want, rel=1e-9)
        mask = np.ones(N_STATES, dtype=bool)
        mask[i_air] = False
        assert np.max(np.abs(r[mask])) < 1e-12

    def test_fan_moves_nothing_when_matched(self, equilibrium):
        # matched temperature, humidity and CO2: ventilation has no gradient
        model_eq, x, cond = equilibrium
        r = model_eq.rhs(x, ControlInput(fan=100.0), cond)
        assert np.max(np.abs(r)) < 1e-10

    def test_humidifier_fills_moisture_only(self, equilibrium):
        model_eq, x, cond = equilibrium
        r = model_eq.rhs(x, ControlInput(humidifier=100.0), cond)
        want = model_eq.actuators["humidifier"].a_max / 3600.0 / model_eq.geometry.volume
        assert r[7] == pytest.approx(want, rel=1e-9)
        assert np.max(np.abs(np.delete(r, 7))) < 1e-12

    def test_co2gen_fills_co2_only(self, equilibrium):
        model_eq, x, cond = equilibrium
        r = model_eq.rhs(x, ControlInput(co2gen=100.0), cond)
        want = model_eq.actuators["co2gen"].a_max / 3600.0 / model_eq.geometry.volume
        assert r[8] == pytest.approx(want, rel=1e-9)
        assert np.max(np.abs(np.delete(r, 8))) < 1e-12


class TestRhs:
    def test_plausibility_band(self, model):
        x = np.array([380.0] + [283.0] * 6 + [0.005, 7e-4, 1.0, 0.5])
        with pytest.raises(PlausibilityError):
            model.rhs(x, ControlInput(), conditions())

    def test_cold_night_cools_the_house(self, model):
        x = np.array([290.0] * 7 + [0.005, 7e-4, 1.0, 0.5])
        r = model.rhs(x, ControlInput(), conditions(t_ext=270.0, v_wind=4.0))
        # the cover faces ambient, sky and wind: it must lose heat
        assert r[0] < 0.0

    def test_energy_bookkeeping_sample(self, model, day_series, state_sampler):
        """Capacity-weighted temperature derivatives must equal the
        independently summed boundary and source flows (interior exchange
        cancels pairwise)."""
        states = state_sampler(50, seed=42)
        rng = np.random.default_rng(43)
        for x in states:
            p = day_series.conditions[int(rng.integers(0, len(day_series)))]
            u = ControlInput.from_sequence(rng.uniform(0.0, 100.0, 4))
            r = model.rhs(x, u, p)
            lhs = float(model.capacities() @ r[:7])

            temps = dict(zip(COMPARTMENTS, x[:7]))
            flux = 0.0
            for link in model.links:
                q = model.link_flow(link, temps, p, u)
                flux += q * ((link.node_to in temps) - (link.node_from in temps))
            gains, _ = model.solar_gains(x[9], p)
            heater_w = u.heater / 100.0 * model.actuators["heater"].a_max
            vent_flow = (u.fan / 100.0 * model.actuators["fan"].a_max
                         + model.climate.leakage_ach / 3600.0 * model.geometry.volume)
            vent_heat = (model.constants.rho_air * model.constants.c_air
                         * vent_flow * (p.T_ext - temps["internal-air"]))
            rhs_sum = flux + float(gains.sum()) + heater_w + vent_heat
            scale = max(abs(lhs), abs(rhs_sum), 1e-9)
            assert abs(lhs - rhs_sum) / scale < 1e-8


def test_reduce_external_packs_the_kernel_vector(model):
    i_dir = np.full(8, 120.0)
    i_diff = np.full(8, 40.0)
    p = conditions(t_ext=281.0, v_wind=3.0, h_rel=55.0, i_dir=i_dir, i_diff=i_diff)
    ex = reduce_external(p, model)
    assert ex.shape == (6,)
    areas = np.array([pl.area for pl in model.geometry.surfaces])
    taus = np.array([pl.transmissivity for pl in model.geometry.surfaces])
    flux = i_dir + i_diff
    assert ex[0] == 281.0
    assert ex[1] == 3.0
    assert ex[2] == pytest.approx(float(areas @ flux), rel=1e-12)
    assert ex[3] == pytest.approx(float((areas * taus) @ flux), rel=1e-12)
    assert ex[4] == pytest.approx(0.55 * saturation_moisture(281.0 - 273.15),
                                  rel=1e-12)
    assert ex[5] == pytest.approx(co2_ext_density(281.0), rel=1e-12)
