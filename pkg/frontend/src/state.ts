/** Single view-state object plus last-write-wins request tracking: each
 * fetch channel carries a sequence number, and stale responses are dropped
 * instead of clobbering newer ones. */

import type { CaseSummary, Explanation, SimilarRow, Task } from "./api.js";

export interface ViewState {
  query: string;
  selectedCase: string | null;
  comparison: [string, string] | null;
  results: CaseSummary[];
  similar: SimilarRow[];
  explanation: Explanation | null;
  task: Task;
  error: string | null;
}

export type Channel = "search" | "similar" | "explain" | "subgraph";

export class Store {
  state: ViewState = {
    query: "",
    selectedCase: null,
    comparison: null,
    results: [],
    similar: [],
    explanation: null,
    task: "similar_to",
    error: null,
  };

  private sequences = new Map<Channel, number>();
  private listeners: Array<(state: ViewState) => void> = [];

  subscribe(listener: (state: ViewState) => void): void {
    this.listeners.push(listener);
  }

  update(partial: Partial<ViewState>): void {
    Object.assign(this.state, partial);
    for (const listener of this.listeners) listener(this.state);
  }

  /** Claim the next sequence number for a channel. */
  begin(channel: Channel): number {
    const next = (this.sequences.get(channel) ?? 0) + 1;
    this.sequences.set(channel, next);
    return next;
  }

  /** True when `seq` is still the channel's newest request. */
  isCurrent(channel: Channel, seq: number): boolean {
    return this.sequences.get(channel) === seq;
  }
}
