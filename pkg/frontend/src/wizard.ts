import { Api } from "./api.js";
import { lineChart } from "./charts.js";
import { clear, el } from "./dom.js";
import {
  Draft, LAYERS, LayerId, firstInvalidLayer, hasErrors, toScenarioDoc,
  validateLayer,
} from "./draft.js";
import { clock, num, watts } from "./fmt.js";
import type { AppState, Store } from "./state.js";
import type { Estimate } from "./types.js";
import { ACTUATOR_KINDS } from "./types.js";

type FieldSpec = {
  field: string;
  label: string;
  hint?: string;
  input?: "text" | "select" | "checkbox";
  options?: { value: string; label: string }[];
  read(d: Draft): string | boolean;
  write(d: Draft, raw: string, checked: boolean): void;
};

function parseNum(raw: string): number {
  return raw.trim() === "" ? NaN : Number(raw);
}

const STRUCTURE_FIELDS: FieldSpec[] = [
  { field: "length", label: "Length (m)",
    read: (d) => String(d.structure.length),
    write: (d, raw) => { d.structure.length = parseNum(raw); } },
  { field: "width", label: "Width (m)",
    read: (d) => String(d.structure.width),
    write: (d, raw) => { d.structure.width = parseNum(raw); } },
  { field: "wall_height", label: "Wall height (m)",
    read: (d) => String(d.structure.wall_height),
    write: (d, raw) => { d.structure.wall_height = parseNum(raw); } },
  { field: "ridge_height", label: "Ridge height (m)",
    hint: "Top of the gable roof; must exceed the wall height.",
    read: (d) => String(d.structure.ridge_height),
    write: (d, raw) => { d.structure.ridge_height = parseNum(raw); } },
  { field: "cultivated_fraction", label: "Cultivated fraction",
    hint: "Share of the footprint planted with lettuce, in (0, 1].",
    read: (d) => String(d.structure.cultivated_fraction),
    write: (d, raw) => { d.structure.cultivated_fraction = parseNum(raw); } },
  { field: "transmissivity", label: "Cover transmissivity",
    hint: "Fraction of sunlight the cover lets through, in (0, 1].",
    read: (d) => String(d.structure.transmissivity),
    write: (d, raw) => { d.structure.transmissivity = parseNum(raw); } },
];

const LOCATION_FIELDS: FieldSpec[] = [
  { field: "latitude", label: "Latitude (deg)",
    read: (d) => String(d.location.latitude),
    write: (d, raw) => { d.location.latitude = parseNum(raw); } },
  { field: "longitude", label: "Longitude (deg)",
    read: (d) => String(d.location.longitude),
    write: (d, raw) => { d.location.longitude = parseNum(raw); } },
  { field: "orientation", label: "Ridge orientation (deg from north)",
    read: (d) => String(d.location.orientation),
    write: (d, raw) => { d.location.orientation = parseNum(raw); } },
  { field: "albedo", label: "Ground albedo",
    hint: "Reflectivity of the surrounding ground, in [0, 1].",
    read: (d) => String(d.location.albedo),
    write: (d, raw) => { d.location.albedo = parseNum(raw); } },
  { field: "start_time", label: "Start time (UTC, ISO 8601)", input: "text",
    read: (d) => d.location.start_time,
    write: (d, raw) => { d.location.start_time = raw.trim(); } },
  { field: "duration", label: "Duration (s)",
    hint: "Must be an integer multiple of the sample time.",
    read: (d) => String(d.location.duration),
    write: (d, raw) => { d.location.duration = parseNum(raw); } },
];

const ACTUATOR_LABELS: Record<string, string> = {
  heater: "Heater capacity (W)",
  fan: "Ventilation capacity (m3/s)",
  humidifier: "Humidifier capacity (l/h)",
  co2gen: "CO2 generator capacity (kg/h)",
};

const ACTUATOR_FIELDS: FieldSpec[] = ACTUATOR_KINDS.map((kind) => ({
  field: kind,
  label: ACTUATOR_LABELS[kind],
  hint: "A positive capacity, or \"auto\" to let the service size it.",
  input: "text",
  read: (d) => String(d.actuators[kind].a_max),
  write: (d, raw) => {
    const t = raw.trim();
    d.actuators[kind].a_max = t === "auto" ? "auto" : parseNum(t);
  },
}));

const CONTROL_FIELDS: FieldSpec[] = [
  { field: "controller", label: "Controller", input: "select",
    options: [
      { value: "nempc", label: "Economic MPC" },
      { value: "none", label: "No control (free-running climate)" },
    ],
    read: (d) => d.control.controller,
    write: (d, raw) => { d.control.controller = raw as "none" | "nempc"; } },
  { field: "sample_time", label: "Sample time (s)",
    read: (d) => String(d.control.sample_time),
    write: (d, raw) => { d.control.sample_time = parseNum(raw); } },
  { field: "horizon_steps", label: "Prediction horizon (steps)",
    read: (d) => String(d.control.horizon_steps),
    write: (d, raw) => { d.control.horizon_steps = parseNum(raw); } },
  { field: "control_steps", label: "Free control moves (steps)",
    hint: "Moves beyond this hold the last value; at most the horizon.",
    read: (d) => String(d.control.control_steps),
    write: (d, raw) => { d.control.control_steps = parseNum(raw); } },
  { field: "max_iterations", label: "Solver iterations per step",
    read: (d) => String(d.control.max_iterations),
    write: (d, raw) => { d.control.max_iterations = parseNum(raw); } },
  { field: "include_social_cost", label: "Price emitted CO2 into the objective",
    input: "checkbox",
    read: (d) => d.control.include_social_cost,
    write: (d, _raw, checked) => { d.control.include_social_cost = checked; } },
];

const FIELDS: Record<LayerId, FieldSpec[]> = {
  structure: STRUCTURE_FIELDS,
  location: LOCATION_FIELDS,
  actuators: ACTUATOR_FIELDS,
  control: CONTROL_FIELDS,
};

function nempcOnly(field: string): boolean {
  return ["horizon_steps", "control_steps", "max_iterations",
          "include_social_cost"].includes(field);
}

export type WizardActions = {
  launch(kind: "single" | "pair"): void;
};

/** The four-layer scenario builder. Renders into `root`, drives `store`. */
export function renderWizard(
  root: HTMLElement, store: Store<AppState>, api: Api, actions: WizardActions,
): void {
  const nav = el("nav", { class: "wizard-nav" });
  const content = el("section", { class: "wizard-content" });
  const aside = el("aside", { class: "wizard-aside" });
  root.append(el("div", { class: "wizard" }, nav, content, aside));

  let estimateSeq = 0;
  let estimateKey = "";
  let estimateCache: Estimate | null = null;
  let liveSeq = 0;
  let liveKey = "";
  let liveCache: HTMLElement | null = null;

  function onFieldChange(spec: FieldSpec, ev: Event): void {
    const s = store.get();
    const draft = structuredClone(s.draft);
    const target = ev.target as HTMLInputElement;
    spec.write(draft, target.value, target.checked);
    const errors = validateLayer(s.layer, draft);
    // A service-reported problem on another layer stays until revisited.
    for (const [field, message] of Object.entries(s.errors)) {
      if (!(field in errors) && !FIELDS[s.layer].some((f) => f.field === field)) {
        errors[field] = message;
      }
    }
    store.patch({ draft, errors });
  }

  function fieldRow(spec: FieldSpec, draft: Draft,
                    errors: Record<string, string>): HTMLElement {
    const id = `field-${spec.field}`;
    let input: HTMLElement;
    if (spec.input === "select") {
      input = el("select", { id, "data-field": spec.field },
        ...(spec.options ?? []).map((o) => {
          const opt = el("option", { value: o.value }, o.label);
          if (o.value === spec.read(draft)) opt.setAttribute("selected", "");
          return opt;
        }));
    } else if (spec.input === "checkbox") {
      input = el("input", { id, type: "checkbox", "data-field": spec.field });
      (input as HTMLInputElement).checked = spec.read(draft) === true;
    } else {
      input = el("input", {
        id, type: "text", "data-field": spec.field,
        value: String(spec.read(draft)),
      });
    }
    input.addEventListener("change", (ev) => onFieldChange(spec, ev));
    const message = errors[spec.field];
    return el("div", { class: message ? "field invalid" : "field" },
      el("label", { for: id }, spec.label),
      input,
      message
        ? el("div", { class: "field-error", "data-field": spec.field }, message)
        : (spec.hint ? el("div", { class: "hint" }, spec.hint) : null),
    );
  }

  function renderNav(state: AppState): void {
    clear(nav);
    const firstInvalid = firstInvalidLayer(state.draft);
    const allowedUpTo = firstInvalid === null
      ? LAYERS.length - 1
      : LAYERS.findIndex((l) => l.id === firstInvalid);
    LAYERS.forEach((layer, idx) => {
      const btn = el("button", { type: "button", "data-layer": layer.id },
        `${idx + 1}. ${layer.title}`);
      if (layer.id === state.layer) btn.classList.add("active");
      if (idx > allowedUpTo) (btn as HTMLButtonElement).disabled = true;
      btn.addEventListener("click", () => {
        if (idx <= allowedUpTo) store.patch({ layer: layer.id, errors: {} });
      });
      nav.append(btn);
    });
  }

  function renderEstimatePanel(draft: Draft): void {
    const doc = toScenarioDoc(draft);
    const key = JSON.stringify([doc.geometry, doc.actuators ?? {}, doc.location]);
    if (key === estimateKey && estimateCache) {
      clear(aside);
      aside.append(estimatePanel(estimateCache));
      return;
    }
    const seq = ++estimateSeq;
    clear(aside);
    aside.append(el("p", { class: "muted" }, "Asking the service for sizing…"));
    api.estimate(doc).then(
      (est) => {
        if (seq !== estimateSeq) return;
        estimateKey = key;
        estimateCache = est;
        clear(aside);
        aside.append(estimatePanel(est));
      },
      (err: Error) => {
        if (seq !== estimateSeq) return;
        estimateKey = "";
        clear(aside);
        aside.append(el("p", { class: "error" }, `Sizing unavailable: ${err.message}`));
      },
    );
  }

  function estimatePanel(est: Estimate): HTMLElement {
    const rows = ACTUATOR_KINDS.map((kind) => {
      const a = est.actuators[kind];
      return el("tr", { "data-kind": kind },
        el("td", {}, kind),
        el("td", { class: "amount", "data-amax": JSON.stringify(a.a_max) },
          `${num(a.a_max, 2)} ${a.unit}`),
        el("td", { class: "amount" }, watts(a.electrical_peak_w)),
      );
    });
    return el("div", {
      class: "sizing-panel",
      "data-volume": JSON.stringify(est.volume_m3),
    },
      el("h3", {}, "Service sizing"),
      el("dl", {},
        el("dt", {}, "Volume"), el("dd", {}, `${num(est.volume_m3, 1)} m3`),
        el("dt", {}, "Footprint"), el("dd", {}, `${num(est.footprint_m2, 1)} m2`),
        el("dt", {}, "Cultivated area"),
        el("dd", {}, `${num(est.cultivated_area_m2, 1)} m2`),
      ),
      el("table", { class: "sizing" },
        el("thead", {}, el("tr", {},
          el("th", {}, "Actuator"),
          el("th", { class: "amount" }, "Capacity"),
          el("th", { class: "amount" }, "Peak draw"),
        )),
        el("tbody", {}, ...rows),
      ),
      el("p", { class: "muted" },
        "Capacities marked auto come from these service estimates."),
    );
  }

  function renderLivePanel(draft: Draft): void {
    const l = draft.location;
    const hours = Math.min(48, Math.max(1, Math.ceil(l.duration / 3600)));
    const key = JSON.stringify([l.latitude, l.longitude, l.start_time, hours]);
    if (key === liveKey && liveCache) {
      clear(aside);
      aside.append(liveCache);
      return;
    }
    const seq = ++liveSeq;
    clear(aside);
    aside.append(el("p", { class: "muted" }, "Fetching the forecast…"));
    api.live(l.latitude, l.longitude, l.start_time, hours).then(
      (live) => {
        if (seq !== liveSeq) return;
        const times = live.series.map((p) => clock(p.time));
        const panel = el("div", { class: "live-panel" },
          el("h3", {}, `Forecast preview — zone ${live.zone}`),
          lineChart("Outside temperature", [
            { label: "air (K)", values: live.series.map((p) => p.t_ext_k) },
            { label: "apparent sky (K)",
              values: live.series.map((p) => p.t_app_k) },
          ], { xLabels: times }),
          lineChart("Irradiance (W/m2)", [
            { label: "global", values: live.series.map((p) => p.ghi_wm2) },
            { label: "direct", values: live.series.map((p) => p.dni_wm2) },
            { label: "diffuse", values: live.series.map((p) => p.dhi_wm2) },
          ], { xLabels: times }),
          lineChart("Grid carbon intensity (g/kWh)", [
            { label: "intensity",
              values: live.series.map((p) => p.carbon_g_per_kwh) },
          ], { xLabels: times }),
        );
        liveKey = key;
        liveCache = panel;
        clear(aside);
        aside.append(panel);
      },
      (err: Error) => {
        if (seq !== liveSeq) return;
        liveKey = "";
        clear(aside);
        aside.append(el("p", { class: "error" },
          `Forecast unavailable: ${err.message}`));
      },
    );
  }

  function renderContent(state: AppState): void {
    const { draft, layer } = state;
    clear(content);
    const idx = LAYERS.findIndex((l) => l.id === layer);
    content.append(el("h2", {}, LAYERS[idx].title));

    // Messages that belong to this layer but have no input of their own
    // (e.g. the service rejecting a whole section).
    const fieldNames = new Set(FIELDS[layer].map((f) => f.field));
    const orphans = Object.entries(state.errors)
      .filter(([field]) => !fieldNames.has(field));
    if (orphans.length > 0) {
      content.append(el("div", { class: "form-errors" },
        ...orphans.map(([field, message]) =>
          el("div", { class: "field-error", "data-field": field },
            `${field}: ${message}`)),
      ));
    }

    for (const spec of FIELDS[layer]) {
      if (layer === "control" && nempcOnly(spec.field)
          && draft.control.controller !== "nempc") {
        continue;
      }
      content.append(fieldRow(spec, draft, state.errors));
    }

    const blocked = hasErrors(validateLayer(layer, draft));
    const buttons = el("div", { class: "wizard-buttons" });
    if (idx > 0) {
      const back = el("button", { type: "button", class: "secondary" }, "Back");
      back.addEventListener("click", () => {
        store.patch({ layer: LAYERS[idx - 1].id, errors: {} });
      });
      buttons.append(back);
    }
    if (idx < LAYERS.length - 1) {
      const next = el("button", { type: "button" }, "Next");
      (next as HTMLButtonElement).disabled = blocked;
      next.addEventListener("click", () => {
        const errors = validateLayer(layer, store.get().draft);
        if (hasErrors(errors)) {
          store.patch({ errors });
        } else {
          store.patch({ layer: LAYERS[idx + 1].id, errors: {} });
        }
      });
      buttons.append(next);
    } else {
      const launch = el("button", { type: "button", "data-action": "launch" },
        "Launch run");
      const pair = el("button", {
        type: "button", class: "secondary", "data-action": "launch-pair",
      }, "Compare CO2 pricing on/off");
      const ready = firstInvalidLayer(draft) === null
        && state.phase.kind !== "launching" && state.phase.kind !== "polling";
      (launch as HTMLButtonElement).disabled = !ready;
      (pair as HTMLButtonElement).disabled = !ready
        || draft.control.controller !== "nempc";
      launch.addEventListener("click", () => actions.launch("single"));
      pair.addEventListener("click", () => actions.launch("pair"));
      buttons.append(launch, pair);
    }
    content.append(buttons);
  }

  function renderAside(state: AppState): void {
    if (state.layer === "location") {
      renderLivePanel(state.draft);
    } else if (state.layer === "structure" || state.layer === "actuators") {
      renderEstimatePanel(state.draft);
    } else {
      clear(aside);
      aside.append(el("div", { class: "review-panel" },
        el("h3", {}, "Scenario to submit"),
        el("pre", {}, JSON.stringify(toScenarioDoc(state.draft), null, 2)),
      ));
    }
  }

  let rendered: { layer: LayerId; draft: Draft; errors: unknown;
                  phaseKind: string } | null = null;
  store.subscribe((state) => {
    if (rendered
        && rendered.layer === state.layer
        && rendered.draft === state.draft
        && rendered.errors === state.errors
        && rendered.phaseKind === state.phase.kind) {
      return;
    }
    rendered = { layer: state.layer, draft: state.draft,
                 errors: state.errors, phaseKind: state.phase.kind };
    renderNav(state);
    renderContent(state);
    renderAside(state);
  });
}
