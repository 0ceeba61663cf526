import type { Api } from "./api.js";
import type { RunRow } from "./types.js";

const sleep = (ms: number) => new Promise<void>((r) => setTimeout(r, ms));

export type PollOptions = {
  intervalMs?: number;
  onUpdate?: (run: RunRow) => void;
  signal?: AbortSignal;
};

/**
 * Poll a run until it leaves the queue. Resolves with the final row when
 * the run is done; rejects with the service's diagnostic, verbatim, when
 * it failed. An abort rejects with "aborted".
 */
export async function pollRun(
  api: Api,
  runId: string,
  { intervalMs = 1000, onUpdate, signal }: PollOptions = {},
): Promise<RunRow> {
  for (;;) {
    if (signal?.aborted) throw new Error("aborted");
    const run = await api.getRun(runId);
    onUpdate?.(run);
    if (run.status === "done") return run;
    if (run.status === "failed") {
      throw new Error(run.error ?? "run failed without a diagnostic");
    }
    await sleep(intervalMs);
  }
}
