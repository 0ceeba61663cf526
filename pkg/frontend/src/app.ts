import { Api, ApiError } from "./api.js";
import { el } from "./dom.js";
import { defaultDraft, layerForField, toScenarioDoc } from "./draft.js";
import { pollRun } from "./poll.js";
import { renderRunPanel } from "./run-view.js";
import type { AppState } from "./state.js";
import { Store } from "./state.js";
import { renderWizard } from "./wizard.js";

const API_KEY = "greensim.api-base";
const RUN_KEY = "greensim.active-run";

type ActiveRecord =
  | { kind: "single"; runId: string }
  | { kind: "pair"; onId: string; offId: string };

export type BootOptions = {
  api?: Api;
  pollIntervalMs?: number;
  storage?: Storage;
};

/**
 * Wire the whole page together. Returns the store so tests can observe
 * state transitions.
 */
export function boot(root: HTMLElement, opts: BootOptions = {}): Store<AppState> {
  const storage = opts.storage ?? window.localStorage;
  const fromQuery = new URLSearchParams(window.location.search).get("api");
  if (fromQuery !== null) storage.setItem(API_KEY, fromQuery);
  const base = storage.getItem(API_KEY) ?? "";
  const api = opts.api ?? new Api(base);
  const intervalMs = opts.pollIntervalMs ?? 1000;

  const store = new Store<AppState>({
    draft: defaultDraft(),
    layer: "structure",
    errors: {},
    phase: { kind: "idle" },
    compare: null,
  });

  root.append(
    el("header", { class: "app-header" },
      el("h1", {}, "Greenhouse control studio"),
      el("p", { class: "muted" },
        "Configure a greenhouse, launch simulated runs, and read the "
        + "economics straight from the simulation service"
        + (base ? ` at ${base}` : "") + "."),
    ),
  );
  const wizardHost = el("div", {});
  const runHost = el("div", {});
  root.append(wizardHost, runHost);

  function remember(record: ActiveRecord | null): void {
    if (record === null) storage.removeItem(RUN_KEY);
    else storage.setItem(RUN_KEY, JSON.stringify(record));
  }

  function fail(err: unknown, runId: string | null): void {
    const message = err instanceof Error ? err.message : String(err);
    store.patch({ phase: { kind: "failed", runId, message } });
  }

  async function track(runId: string): Promise<void> {
    store.patch({ phase: { kind: "polling", runId, run: null } });
    await pollRun(api, runId, {
      intervalMs,
      onUpdate: (run) => {
        store.patch({ phase: { kind: "polling", runId, run } });
      },
    });
    const result = await api.getResult(runId);
    store.patch({ phase: { kind: "done", runId, result } });
  }

  async function launchSingle(): Promise<void> {
    const draft = store.get().draft;
    const scenarioId = await api.postScenario(toScenarioDoc(draft));
    const runId = await api.createRun(scenarioId, {
      controller: draft.control.controller,
    });
    remember({ kind: "single", runId });
    await track(runId);
  }

  async function launchPair(): Promise<void> {
    const draft = store.get().draft;
    const scenarioId = await api.postScenario(toScenarioDoc(draft));
    const onId = await api.createRun(scenarioId,
      { controller: "nempc", socialCost: true });
    const offId = await api.createRun(scenarioId,
      { controller: "nempc", socialCost: false });
    remember({ kind: "pair", onId, offId });
    await trackPair(onId, offId);
  }

  async function trackPair(onId: string, offId: string): Promise<void> {
    store.patch({ phase: { kind: "polling", runId: onId, run: null } });
    await pollRun(api, onId, {
      intervalMs,
      onUpdate: (run) => {
        store.patch({ phase: { kind: "polling", runId: onId, run } });
      },
    });
    await pollRun(api, offId, { intervalMs });
    const onResult = await api.getResult(onId);
    const offResult = await api.getResult(offId);
    store.patch({
      phase: { kind: "done", runId: onId, result: onResult },
      compare: {
        on: { runId: onId, result: onResult },
        off: { runId: offId, result: offResult },
      },
    });
  }

  function launch(kind: "single" | "pair"): void {
    store.patch({ phase: { kind: "launching" }, compare: null, errors: {} });
    const task = kind === "single" ? launchSingle() : launchPair();
    task.catch((err) => {
      if (err instanceof ApiError && Object.keys(err.fieldErrors).length > 0) {
        // The service rejected a field: jump to the layer that owns it.
        const first = Object.keys(err.fieldErrors)[0];
        store.patch({
          phase: { kind: "idle" },
          errors: err.fieldErrors,
          layer: layerForField(first),
        });
        return;
      }
      fail(err, null);
    });
  }

  renderWizard(wizardHost, store, api, { launch });
  renderRunPanel(runHost, store);

  // A refresh mid-run picks the poll back up from the stored run id.
  const raw = storage.getItem(RUN_KEY);
  if (raw !== null) {
    let record: ActiveRecord | null = null;
    try {
      record = JSON.parse(raw) as ActiveRecord;
    } catch {
      storage.removeItem(RUN_KEY);
    }
    if (record?.kind === "single") {
      track(record.runId).catch((err) => fail(err, record.runId));
    } else if (record?.kind === "pair") {
      trackPair(record.onId, record.offId)
        .catch((err) => fail(err, record.onId));
    }
  }

  return store;
}
