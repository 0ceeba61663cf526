import { barChart, ledgerTable, lineChart } from "./charts.js";
import { clear, el } from "./dom.js";
import { eur, grams, num } from "./fmt.js";
import type { AppState, Comparison, RunPhase, Store } from "./state.js";
import type { ResultDoc } from "./types.js";

const CONTROLLER_LABELS: Record<string, string> = {
  "no-control": "No control",
  "nempc-co2": "Economic MPC — CO2 priced",
  "nempc-eur": "Economic MPC — money only",
};

export function controllerLabel(wire: string): string {
  return CONTROLLER_LABELS[wire] ?? wire;
}

function hoursLabel(seconds: number): string {
  return `${(seconds / 3600).toFixed(1)} h`;
}

function card(label: string, text: string, metric: string,
              raw: number): HTMLElement {
  return el("div", { class: "card", "data-metric": metric,
                     "data-value": JSON.stringify(raw) },
    el("span", { class: "card-label" }, label),
    el("strong", {}, text),
  );
}

function summaryCards(result: ResultDoc): HTMLElement {
  const s = result.summary;
  const cards = el("div", { class: "cards" },
    card("Net result", eur(s.total_eur), "total-eur", s.total_eur),
    card("Crop revenue", eur(s.revenue_eur), "revenue-eur", s.revenue_eur),
    card("Energy cost", eur(s.energy_eur), "energy-eur", s.energy_eur),
    card("CO2 cost", eur(s.co2_eur), "co2-eur", s.co2_eur),
    card("CO2 emitted", grams(s.co2_g), "co2-g", s.co2_g),
    card("Final structural mass", `${num(s.final_sdw, 2)} g/m2`,
         "final-sdw", s.final_sdw),
  );
  if (s.degraded_solves > 0) {
    cards.append(card("Degraded solves", String(s.degraded_solves),
                      "degraded-solves", s.degraded_solves));
  }
  return cards;
}

/** Full chart set for a finished run; every series is service data as-is. */
export function resultView(result: ResultDoc): HTMLElement {
  const s = result.series;
  const atStates = s.time_s.map(hoursLabel);
  const atSteps = s.time_s.slice(1).map(hoursLabel);
  const states = s.states;

  const temps = lineChart("Temperatures (K)", [
    { label: "indoor air", values: states.T_i },
    { label: "cover", values: states.T_c },
    { label: "crop", values: states.T_v },
    { label: "growing medium", values: states.T_m },
    { label: "tray", values: states.T_p },
    { label: "floor", values: states.T_f },
    { label: "soil", values: states.T_s },
    { label: "outdoor air", values: s.external.T_ext },
  ], { xLabels: atStates });

  const co2 = lineChart("Indoor CO2 (ppm)", [
    { label: "concentration", values: s.co2_ppm },
  ], { xLabels: atStates });

  const moisture = lineChart("Air moisture (kg/m3)", [
    { label: "indoor absolute humidity", values: states.C_w },
  ], { xLabels: atStates });

  const crop = lineChart("Lettuce dry weight (g/m2)", [
    { label: "structural", values: states.x_sdw },
    { label: "non-structural", values: states.x_nsdw },
  ], { xLabels: atStates });

  const actuation = lineChart("Actuation (% of capacity)", [
    { label: "heater", values: s.inputs.u_heater },
    { label: "fan", values: s.inputs.u_fan },
    { label: "humidifier", values: s.inputs.u_humidifier },
    { label: "CO2 generator", values: s.inputs.u_co2gen },
  ], { xLabels: atSteps });

  const profit = lineChart("Cumulative profit (EUR)", [
    { label: "profit", values: s.cumulative_profit_eur },
  ], { xLabels: atSteps });

  const rows = result.summary.rows;
  const ledger = barChart("Ledger (EUR)",
    rows.map((r) => r.label), rows.map((r) => r.eur));

  return el("div", { class: "result-view", "data-controller": result.controller },
    el("h3", {}, controllerLabel(result.controller)),
    el("p", { class: "muted" },
      `${result.n_steps} steps of ${num(result.sample_time, 0)} s `
      + `from ${result.start_time}`),
    summaryCards(result),
    el("div", { class: "chart-grid" },
      temps, co2, moisture, crop, actuation, profit),
    ledger,
    ledgerTable(rows),
  );
}

export function failureView(message: string): HTMLElement {
  return el("div", { class: "run-failed" },
    el("h3", {}, "Run failed"),
    el("p", { class: "muted" }, "The service reported:"),
    el("pre", { class: "diagnostic" }, message),
  );
}

function progressView(phase: Extract<RunPhase, { kind: "polling" }>): HTMLElement {
  const progress = phase.run?.progress ?? 0;
  const status = phase.run?.status ?? "queued";
  const pct = Math.round(progress * 100);
  const fill = el("div", { class: "progress-fill" });
  fill.style.width = `${pct}%`;
  return el("div", { class: "run-progress", "data-progress": String(progress) },
    el("h3", {}, "Run in progress"),
    el("p", { class: "muted" },
      "Run ", el("code", { class: "run-id" }, phase.runId), ` — ${status}, ${pct}%`),
    el("div", { class: "progress" }, fill),
  );
}

/** Side-by-side totals for the CO2-pricing toggle pair. */
export function compareView(compare: Comparison): HTMLElement {
  const col = (tag: "on" | "off",
               entry: { runId: string; result: ResultDoc }) => {
    const s = entry.result.summary;
    return el("div", {
      class: "compare-col", "data-toggle": tag,
      "data-co2-g": JSON.stringify(s.co2_g),
      "data-total-eur": JSON.stringify(s.total_eur),
    },
      el("h4", {}, controllerLabel(entry.result.controller)),
      el("p", { class: "muted" },
        "Run ", el("code", { class: "run-id" }, entry.runId)),
      card("Net result", eur(s.total_eur), "total-eur", s.total_eur),
      card("CO2 emitted", grams(s.co2_g), "co2-g", s.co2_g),
      card("Energy cost", eur(s.energy_eur), "energy-eur", s.energy_eur),
    );
  };
  const onCol = col("on", compare.on);
  const offCol = col("off", compare.off);
  if (compare.on.result.summary.co2_g <= compare.off.result.summary.co2_g) {
    onCol.append(el("p", { class: "badge" }, "↓ lower emissions"));
  } else {
    offCol.append(el("p", { class: "badge" }, "↓ lower emissions"));
  }
  const overlay = lineChart("Cumulative profit (EUR)", [
    { label: "CO2 priced",
      values: compare.on.result.series.cumulative_profit_eur },
    { label: "money only",
      values: compare.off.result.series.cumulative_profit_eur },
  ], {
    xLabels: compare.on.result.series.time_s.slice(1).map(hoursLabel),
  });
  return el("div", { class: "compare-view" },
    el("h3", {}, "CO2 pricing on vs off"),
    el("div", { class: "compare-cols" }, onCol, offCol),
    overlay,
  );
}

/** Renders whatever the current run phase calls for below the wizard. */
export function renderRunPanel(root: HTMLElement, store: Store<AppState>): void {
  const host = el("section", { class: "run-panel" });
  root.append(host);
  let lastPhase: RunPhase | null = null;
  let lastCompare: Comparison | null = null;
  store.subscribe((state) => {
    if (state.phase === lastPhase && state.compare === lastCompare) return;
    lastPhase = state.phase;
    lastCompare = state.compare;
    clear(host);
    switch (state.phase.kind) {
      case "idle":
        break;
      case "launching":
        host.append(el("p", { class: "muted" }, "Submitting the scenario…"));
        break;
      case "polling":
        host.append(progressView(state.phase));
        break;
      case "failed":
        host.append(failureView(state.phase.message));
        break;
      case "done":
        host.append(resultView(state.phase.result));
        break;
    }
    if (state.compare) host.append(compareView(state.compare));
  });
}
