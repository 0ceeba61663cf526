import type { ActuatorKind, ScenarioDoc } from "./types.js";
import { ACTUATOR_KINDS } from "./types.js";

/**
 * The scenario under construction, one section per customization layer.
 * Client-side validation mirrors the rules the service enforces, so a
 * draft that clears all four layers is expected to POST cleanly.
 */
export type Draft = {
  structure: {
    length: number;
    width: number;
    wall_height: number;
    ridge_height: number;
    cultivated_fraction: number;
    transmissivity: number;
  };
  location: {
    latitude: number;
    longitude: number;
    orientation: number;
    albedo: number;
    start_time: string;   // ISO 8601, UTC
    duration: number;     // s
  };
  actuators: Record<ActuatorKind, { a_max: number | "auto" }>;
  control: {
    controller: "none" | "nempc";
    horizon_steps: number;
    control_steps: number;
    max_iterations: number;
    sample_time: number;  // s, shared by simulation and controller
    include_social_cost: boolean;
  };
};

export type LayerId = keyof Draft;

export const LAYERS: { id: LayerId; title: string }[] = [
  { id: "structure", title: "Structure" },
  { id: "location", title: "Location & time" },
  { id: "actuators", title: "Actuators" },
  { id: "control", title: "Control strategy" },
];

export type FieldErrors = Record<string, string>;

/** Mid-October Bratislava demo window covered by the service fixtures. */
export function defaultDraft(): Draft {
  return {
    structure: {
      length: 20,
      width: 10,
      wall_height: 3,
      ridge_height: 5,
      cultivated_fraction: 0.9,
      transmissivity: 0.85,
    },
    location: {
      latitude: 48.15,
      longitude: 17.11,
      orientation: 0,
      albedo: 0.2,
      start_time: "2025-10-11T06:00:00Z",
      duration: 21600,
    },
    actuators: {
      heater: { a_max: "auto" },
      fan: { a_max: "auto" },
      humidifier: { a_max: "auto" },
      co2gen: { a_max: "auto" },
    },
    control: {
      controller: "nempc",
      horizon_steps: 30,
      control_steps: 30,
      max_iterations: 40,
      sample_time: 120,
      include_social_cost: true,
    },
  };
}

function bad(value: number): boolean {
  return !Number.isFinite(value);
}

export function validateLayer(layer: LayerId, draft: Draft): FieldErrors {
  const e: FieldErrors = {};

  if (layer === "structure") {
    const g = draft.structure;
    for (const f of ["length", "width", "wall_height"] as const) {
      if (bad(g[f]) || g[f] <= 0) e[f] = "Must be a positive length (m).";
    }
    if (bad(g.ridge_height) || g.ridge_height <= g.wall_height) {
      e.ridge_height = "Ridge must be higher than the walls.";
    }
    if (bad(g.cultivated_fraction)
        || g.cultivated_fraction <= 0 || g.cultivated_fraction > 1) {
      e.cultivated_fraction = "Must lie in (0, 1].";
    }
    if (bad(g.transmissivity)
        || g.transmissivity <= 0 || g.transmissivity > 1) {
      e.transmissivity = "Must lie in (0, 1].";
    }
    return e;
  }

  if (layer === "location") {
    const l = draft.location;
    if (bad(l.latitude) || l.latitude < -90 || l.latitude > 90) {
      e.latitude = "Latitude must lie in [-90, 90] degrees.";
    }
    if (bad(l.longitude) || l.longitude < -180 || l.longitude > 180) {
      e.longitude = "Longitude must lie in [-180, 180] degrees.";
    }
    if (bad(l.orientation)) e.orientation = "Must be a number of degrees.";
    if (bad(l.albedo) || l.albedo < 0 || l.albedo > 1) {
      e.albedo = "Ground albedo must lie in [0, 1].";
    }
    if (Number.isNaN(Date.parse(l.start_time))) {
      e.start_time = "Not an ISO 8601 timestamp.";
    }
    if (bad(l.duration) || l.duration <= 0) {
      e.duration = "Duration must be positive (seconds).";
    } else {
      const n = l.duration / draft.control.sample_time;
      if (Math.abs(n - Math.round(n)) > 1e-9) {
        e.duration = "Must be an integer multiple of the sample time.";
      }
    }
    return e;
  }

  if (layer === "actuators") {
    for (const kind of ACTUATOR_KINDS) {
      const a = draft.actuators[kind].a_max;
      if (a !== "auto" && (bad(a) || a <= 0)) {
        e[kind] = "Capacity must be positive, or auto.";
      }
    }
    return e;
  }

  // control
  const c = draft.control;
  if (bad(c.sample_time) || c.sample_time <= 0) {
    e.sample_time = "Sample time must be positive (seconds).";
  }
  if (c.controller === "nempc") {
    if (!Number.isInteger(c.horizon_steps) || c.horizon_steps < 1) {
      e.horizon_steps = "Must be an integer >= 1.";
    }
    if (!Number.isInteger(c.control_steps) || c.control_steps < 1
        || c.control_steps > c.horizon_steps) {
      e.control_steps = "Must lie in [1, horizon steps].";
    }
    if (!Number.isInteger(c.max_iterations) || c.max_iterations < 1) {
      e.max_iterations = "Must be an integer >= 1.";
    }
  }
  return e;
}

export function hasErrors(errors: FieldErrors): boolean {
  return Object.values(errors).some(Boolean);
}

/** First layer with a validation problem, or null when all four pass. */
export function firstInvalidLayer(draft: Draft): LayerId | null {
  for (const { id } of LAYERS) {
    if (hasErrors(validateLayer(id, draft))) return id;
  }
  return null;
}

export function toScenarioDoc(draft: Draft): ScenarioDoc {
  const doc: ScenarioDoc = {
    location: {
      latitude: draft.location.latitude,
      longitude: draft.location.longitude,
    },
    orientation: draft.location.orientation,
    albedo: draft.location.albedo,
    start_time: draft.location.start_time,
    duration: draft.location.duration,
    sample_time: draft.control.sample_time,
    geometry: { ...draft.structure },
  };
  const overrides: ScenarioDoc["actuators"] = {};
  for (const kind of ACTUATOR_KINDS) {
    const a = draft.actuators[kind].a_max;
    if (a !== "auto") overrides[kind] = { a_max: a };
  }
  if (Object.keys(overrides).length > 0) doc.actuators = overrides;
  if (draft.control.controller === "none") {
    doc.control = "no-control";
  } else {
    doc.control = {
      horizon_steps: draft.control.horizon_steps,
      control_steps: draft.control.control_steps,
      max_iterations: draft.control.max_iterations,
      // Keep the controller stepping in lockstep with the simulation.
      sample_time: draft.control.sample_time,
      include_social_cost: draft.control.include_social_cost,
    };
  }
  return doc;
}

/** Which wizard layer owns a service-side validation field. */
export function layerForField(field: string): LayerId {
  const byField: Record<string, LayerId> = {
    length: "structure", width: "structure", wall_height: "structure",
    ridge_height: "structure", cultivated_fraction: "structure",
    transmissivity: "structure", geometry: "structure",
    latitude: "location", longitude: "location", location: "location",
    orientation: "location", albedo: "location", start_time: "location",
    duration: "location",
    actuators: "actuators",
    heater: "actuators", fan: "actuators", humidifier: "actuators",
    co2gen: "actuators",
  };
  return byField[field] ?? "control";
}
