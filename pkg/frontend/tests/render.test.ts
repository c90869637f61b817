import { describe, expect, it } from "vitest";

import { renderErrorBanner, renderResultCard, renderTallyTable } from "../src/render.js";
import type { SessionEntry } from "../src/session.js";
import type { PredictResponse } from "../src/types.js";
import { covidHighResponse, healthyResponse, pneumoniaResponse } from "./helpers.js";

function entry(response: PredictResponse, thumbnail: string | null = null): SessionEntry {
  return { filename: "scan.png", thumbnail, response, at: new Date("2026-08-19T10:00:00Z") };
}

describe("renderResultCard", () => {
  it("renders one list item per present phase", () => {
    expect(renderResultCard(document, entry(healthyResponse())).querySelectorAll(".step")).toHaveLength(1);
    expect(renderResultCard(document, entry(pneumoniaResponse())).querySelectorAll(".step")).toHaveLength(2);
    expect(renderResultCard(document, entry(covidHighResponse())).querySelectorAll(".step")).toHaveLength(3);
  });

  it("stamps phase numbers and verdict labels on the steps", () => {
    const card = renderResultCard(document, entry(covidHighResponse()));
    const steps = Array.from(card.querySelectorAll<HTMLElement>(".step"));
    expect(steps.map((s) => s.dataset["phase"])).toEqual(["1", "2", "3"]);
    expect(steps.map((s) => s.querySelector(".step-label")?.textContent)).toEqual([
      "Unhealthy",
      "COVID",
      "COVID-High",
    ]);
  });

  it("shows filename and final label badge", () => {
    const card = renderResultCard(document, entry(pneumoniaResponse()));
    expect(card.querySelector(".result-filename")?.textContent).toBe("scan.png");
    expect(card.querySelector(".final-badge")?.textContent).toBe("Pneumonia");
    expect(card.dataset["finalLabel"]).toBe("Pneumonia");
  });

  it("includes a thumbnail only when one exists", () => {
    const withThumb = renderResultCard(document, entry(healthyResponse(), "data:image/png;base64,AA=="));
    expect(withThumb.querySelector("img.result-thumb")).not.toBeNull();
    const without = renderResultCard(document, entry(healthyResponse(), null));
    expect(without.querySelector("img.result-thumb")).toBeNull();
  });
});

describe("renderErrorBanner", () => {
  it("is an alert carrying the error code and message", () => {
    const banner = renderErrorBanner(document, "decode_failed", "cannot decode image bytes");
    expect(banner.getAttribute("role")).toBe("alert");
    expect(banner.dataset["code"]).toBe("decode_failed");
    expect(banner.querySelector(".error-message")?.textContent).toContain("decode");
  });

  it("dismiss button removes it from the page", () => {
    const banner = renderErrorBanner(document, "payload_too_large", "too big");
    document.body.appendChild(banner);
    banner.querySelector<HTMLButtonElement>(".error-dismiss")?.click();
    expect(document.body.querySelector(".error-banner")).toBeNull();
    banner.remove();
  });
});

describe("renderTallyTable", () => {
  it("always lists the four labels plus a grand total", () => {
    const table = renderTallyTable(document, {
      Healthy: 2,
      Pneumonia: 0,
      "COVID-Low": 1,
      "COVID-High": 0,
    });
    const rows = Array.from(table.querySelectorAll<HTMLElement>(".tally-row"));
    expect(rows.map((r) => r.dataset["label"])).toEqual([
      "Healthy",
      "Pneumonia",
      "COVID-Low",
      "COVID-High",
    ]);
    expect(table.querySelector(".tally-total-count")?.textContent).toBe("3");
  });

  it("appends unexpected labels after the known four", () => {
    const table = renderTallyTable(document, {
      Healthy: 1,
      Pneumonia: 0,
      "COVID-Low": 0,
      "COVID-High": 0,
      Indeterminate: 2,
    });
    const labels = Array.from(table.querySelectorAll<HTMLElement>(".tally-row")).map(
      (r) => r.dataset["label"],
    );
    expect(labels).toEqual(["Healthy", "Pneumonia", "COVID-Low", "COVID-High", "Indeterminate"]);
    expect(table.querySelector(".tally-total-count")?.textContent).toBe("3");
  });
});
