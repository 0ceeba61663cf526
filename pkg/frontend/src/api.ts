import type {
  Estimate,
  LiveResponse,
  ResultDoc,
  RunRow,
  ScenarioDoc,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/**
 * Service error with the validation detail mapped per field, so forms can
 * render the message next to the offending input.
 */
export class ApiError extends Error {
  status: number;
  fieldErrors: Record<string, string>;

  constructor(status: number, message: string,
              fieldErrors: Record<string, string> = {}) {
    super(message);
    this.status = status;
    this.fieldErrors = fieldErrors;
  }
}

async function raise(resp: Response): Promise<never> {
  let detail: unknown;
  try {
    detail = (await resp.json()).detail;
  } catch {
    detail = resp.statusText;
  }
  if (Array.isArray(detail)) {
    const fields: Record<string, string> = {};
    for (const item of detail) {
      if (item && typeof item.field === "string") {
        fields[item.field] = String(item.message ?? "invalid");
      }
    }
    const first = detail[0];
    throw new ApiError(resp.status,
      first ? `${first.field}: ${first.message}` : "validation failed", fields);
  }
  throw new ApiError(resp.status, String(detail ?? `HTTP ${resp.status}`));
}

export type RunOptions = {
  controller?: "none" | "nempc";
  socialCost?: boolean;
};

export class Api {
  constructor(
    private baseUrl: string = "",
    private fetchLike: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    const resp = await this.fetchLike(this.baseUrl + path, init);
    if (!resp.ok) await raise(resp);
    return resp.json();
  }

  private post(path: string, body: unknown): Promise<unknown> {
    return this.request(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  async postScenario(doc: ScenarioDoc): Promise<string> {
    const body = await this.post("/scenarios", doc) as { scenario_id: string };
    return body.scenario_id;
  }

  async createRun(scenarioId: string, opts: RunOptions = {}): Promise<string> {
    const payload: Record<string, unknown> = { scenario_id: scenarioId };
    if (opts.controller !== undefined) payload.controller = opts.controller;
    if (opts.socialCost !== undefined) payload.social_cost = opts.socialCost;
    const body = await this.post("/runs", payload) as { run_id: string };
    return body.run_id;
  }

  getRun(runId: string): Promise<RunRow> {
    return this.request(`/runs/${runId}`) as Promise<RunRow>;
  }

  getResult(runId: string): Promise<ResultDoc> {
    return this.request(`/runs/${runId}/result`) as Promise<ResultDoc>;
  }

  live(latitude: number, longitude: number, startIso: string,
       hours: number): Promise<LiveResponse> {
    const q = new URLSearchParams({
      latitude: String(latitude),
      longitude: String(longitude),
      start: startIso,
      hours: String(hours),
    });
    return this.request(`/live?${q}`) as Promise<LiveResponse>;
  }

  estimate(doc: ScenarioDoc): Promise<Estimate> {
    return this.post("/estimate", doc) as Promise<Estimate>;
  }
}
