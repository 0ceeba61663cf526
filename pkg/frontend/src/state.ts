import type { Draft, LayerId } from "./draft.js";
import type { ResultDoc, RunRow } from "./types.js";

/** Minimal observable value: set() replaces, subscribers re-render. */
export class Store<T> {
  private listeners: ((value: T) => void)[] = [];

  constructor(private value: T) {}

  get(): T {
    return this.value;
  }

  set(next: T): void {
    this.value = next;
    for (const fn of this.listeners) fn(next);
  }

  /** patch() shallow-merges into the current value. */
  patch(partial: Partial<T>): void {
    this.set({ ...this.value, ...partial });
  }

  subscribe(fn: (value: T) => void): () => void {
    this.listeners.push(fn);
    fn(this.value);
    return () => {
      this.listeners = this.listeners.filter((f) => f !== fn);
    };
  }
}

export type RunPhase =
  | { kind: "idle" }
  | { kind: "launching" }
  | { kind: "polling"; runId: string; run: RunRow | null }
  | { kind: "done"; runId: string; result: ResultDoc }
  | { kind: "failed"; runId: string | null; message: string };

/** A finished paired-toggle comparison: social CO2 cost on vs off. */
export type Comparison = {
  on: { runId: string; result: ResultDoc };
  off: { runId: string; result: ResultDoc };
};

export type AppState = {
  draft: Draft;
  layer: LayerId;
  /** Client-side messages for the active layer, keyed by field. */
  errors: Record<string, string>;
  phase: RunPhase;
  compare: Comparison | null;
};
