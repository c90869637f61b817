import { describe, expect, it } from "vitest";

import { SessionStore, tallyTotal, type SessionEntry } from "../src/session.js";
import { FINAL_LABELS, type PredictResponse } from "../src/types.js";
import {
  covidHighResponse,
  covidLowResponse,
  healthyResponse,
  pneumoniaResponse,
} from "./helpers.js";

function entry(response: PredictResponse, filename = "scan.png"): SessionEntry {
  return { filename, thumbnail: null, response, at: new Date() };
}

describe("SessionStore", () => {
  it("starts empty with an all-zero four-label tally", () => {
    const store = new SessionStore();
    expect(store.length).toBe(0);
    expect(store.tally()).toEqual({
      Healthy: 0,
      Pneumonia: 0,
      "COVID-Low": 0,
      "COVID-High": 0,
    });
    expect(tallyTotal(store.tally())).toBe(0);
  });

  it("counts per final label", () => {
    const store = new SessionStore();
    store.add(entry(healthyResponse()));
    store.add(entry(healthyResponse()));
    store.add(entry(healthyResponse()));
    store.add(entry(pneumoniaResponse()));
    expect(store.tally()).toEqual({
      Healthy: 3,
      Pneumonia: 1,
      "COVID-Low": 0,
      "COVID-High": 0,
    });
  });

  it("tally total equals history length at every point", () => {
    const store = new SessionStore();
    const makers = [healthyResponse, pneumoniaResponse, covidLowResponse, covidHighResponse];
    for (let i = 0; i < 20; i += 1) {
      const make = makers[i % makers.length];
      if (!make) throw new Error("unreachable");
      store.add(entry(make(), `scan-${i}.png`));
      expect(tallyTotal(store.tally())).toBe(store.length);
    }
  });

  it("still conserves the total when a label is unexpected", () => {
    const store = new SessionStore();
    const odd = { ...healthyResponse(), final_label: "Indeterminate" };
    store.add(entry(odd));
    store.add(entry(healthyResponse()));
    const tally = store.tally();
    expect(tally["Indeterminate"]).toBe(1);
    expect(tallyTotal(tally)).toBe(2);
    for (const label of FINAL_LABELS) {
      expect(tally[label]).toBeDefined();
    }
  });

  it("is append-only: existing entries keep identity and order", () => {
    const store = new SessionStore();
    const first = entry(healthyResponse(), "first.png");
    store.add(first);
    const snapshot = store.entries[0];
    store.add(entry(pneumoniaResponse(), "second.png"));
    expect(store.entries).toHaveLength(2);
    expect(store.entries[0]).toBe(snapshot);
    expect(store.entries[0]?.filename).toBe("first.png");
    expect(store.entries[1]?.filename).toBe("second.png");
  });
});
