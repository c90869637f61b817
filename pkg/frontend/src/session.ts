/** Session-local history of predictions and the tally over final labels.
 *
 * Entries are append-only and never leave the browser; the only network
 * traffic is the predict call that produced each entry.
 */

import { FINAL_LABELS, type PredictResponse } from "./types.js";

export interface SessionEntry {
  filename: string;
  thumbnail: string | null;
  response: PredictResponse;
  at: Date;
}

export class SessionStore {
  private readonly items: SessionEntry[] = [];

  get entries(): readonly SessionEntry[] {
    return this.items;
  }

  get length(): number {
    return this.items.length;
  }

  add(entry: SessionEntry): void {
    this.items.push(entry);
  }

  /** Counts per final label. Seeds the four known labels with zero and still
   * counts anything unexpected, so the total always equals the history length. */
  tally(): Record<string, number> {
    const counts: Record<string, number> = {};
    for (const label of FINAL_LABELS) {
      counts[label] = 0;
    }
    for (const entry of this.items) {
      const label = entry.response.final_label;
      counts[label] = (counts[label] ?? 0) + 1;
    }
    return counts;
  }
}

export function tallyTotal(tally: Record<string, number>): number {
  return Object.values(tally).reduce((sum, count) => sum + count, 0);
}
