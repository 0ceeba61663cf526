/** Wire types for the simulation service (see docs/api.md). */

export type ActuatorKind = "heater" | "fan" | "humidifier" | "co2gen";

export const ACTUATOR_KINDS: ActuatorKind[] = [
  "heater", "fan", "humidifier", "co2gen",
];

export type GeometryDoc = {
  length?: number;
  width?: number;
  wall_height?: number;
  ridge_height?: number;
  cultivated_fraction?: number;
  transmissivity?: number;
};

export type ControlDoc = {
  horizon_steps?: number;
  control_steps?: number;
  sample_time?: number;
  max_iterations?: number;
  include_social_cost?: boolean;
};

export type ScenarioDoc = {
  location: { latitude: number; longitude: number };
  orientation?: number;
  start_time?: string;
  duration?: number;
  sample_time?: number;
  albedo?: number;
  geometry?: GeometryDoc;
  actuators?: Partial<Record<ActuatorKind, { a_max: number }>>;
  control?: "no-control" | ControlDoc;
};

export type RunStatus = "queued" | "running" | "done" | "failed";

export type RunRow = {
  run_id: string;
  scenario_id: string;
  status: RunStatus;
  progress: number;
  controller: string;
  flags: Record<string, unknown>;
  error: string | null;
};

export type LedgerRow = { label: string; eur: number };

export type ResultDoc = {
  schema: string;
  start_time: string;
  sample_time: number;
  n_steps: number;
  controller: string;
  summary: {
    rows: LedgerRow[];
    revenue_eur: number;
    total_eur: number;
    energy_eur: number;
    co2_g: number;
    co2_eur: number;
    final_sdw: number;
    final_nsdw: number;
    degraded_solves: number;
  };
  series: {
    time_s: number[];
    states: Record<string, number[]>;
    co2_ppm: number[];
    inputs: Record<string, number[]>;
    carbon_intensity: number[];
    cumulative_profit_eur: number[];
    external: {
      T_ext: number[];
      v_wind: number[];
      H_rel: number[];
      poa_total: number[];
    };
  };
  ledger_detail_csv: string;
};

export type LivePoint = {
  time: string;
  t_ext_k: number;
  t_app_k: number;
  h_rel_pct: number;
  v_wind_ms: number;
  ghi_wm2: number;
  dni_wm2: number;
  dhi_wm2: number;
  carbon_g_per_kwh: number | null;
};

export type LiveResponse = {
  latitude: number;
  longitude: number;
  zone: string;
  series: LivePoint[];
};

export type EstimateActuator = {
  a_max: number;
  unit: string;
  p_unit: number;
  eta: number;
  electrical_peak_w: number;
};

export type Estimate = {
  volume_m3: number;
  footprint_m2: number;
  cultivated_area_m2: number;
  actuators: Record<ActuatorKind, EstimateActuator>;
};
