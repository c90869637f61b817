/** DOM builders for result cards, error banners, and the tally table.
 *
 * Pure construction: every function returns a detached element for the
 * caller to place. No computation happens here beyond display formatting.
 */

import type { SessionEntry } from "./session.js";
import { stepsFor } from "./steps.js";
import { FINAL_LABELS } from "./types.js";

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function labelSlug(label: string): string {
  return label.toLowerCase().replace(/[^a-z0-9]+/g, "-");
}

export function renderResultCard(doc: Document, entry: SessionEntry): HTMLElement {
  const card = el(doc, "article", "result-card");
  card.dataset.finalLabel = entry.response.final_label;

  const header = el(doc, "header", "result-header");
  header.appendChild(el(doc, "span", "result-filename", entry.filename));
  const badge = el(doc, "span", `final-badge final-${labelSlug(entry.response.final_label)}`);
  badge.textContent = entry.response.final_label;
  header.appendChild(badge);
  card.appendChild(header);

  if (entry.thumbnail) {
    const img = el(doc, "img", "result-thumb");
    img.src = entry.thumbnail;
    img.alt = `thumbnail of ${entry.filename}`;
    card.appendChild(img);
  }

  const list = el(doc, "ol", "steps");
  for (const step of stepsFor(entry.response)) {
    const item = el(doc, "li", "step");
    item.dataset.phase = String(step.phase);
    item.appendChild(el(doc, "span", "step-title", step.title));
    item.appendChild(el(doc, "span", "step-label", step.verdict.label));
    item.appendChild(el(doc, "span", "step-score", step.verdict.score.toFixed(4)));
    list.appendChild(item);
  }
  card.appendChild(list);

  const meta = el(
    doc,
    "footer",
    "result-meta",
    `${entry.response.timing_ms.toFixed(1)} ms · model ${entry.response.model_digest.slice(0, 12)} · ${entry.at.toLocaleTimeString()}`,
  );
  card.appendChild(meta);
  return card;
}

export function renderErrorBanner(doc: Document, code: string, message: string): HTMLElement {
  const banner = el(doc, "div", "error-banner");
  banner.setAttribute("role", "alert");
  banner.dataset.code = code;
  banner.appendChild(el(doc, "strong", "error-code", code));
  banner.appendChild(el(doc, "span", "error-message", message));
  const dismiss = el(doc, "button", "error-dismiss", "dismiss");
  dismiss.type = "button";
  dismiss.addEventListener("click", () => banner.remove());
  banner.appendChild(dismiss);
  return banner;
}

export function renderTallyTable(doc: Document, tally: Record<string, number>): HTMLElement {
  const table = el(doc, "table", "tally");
  const head = el(doc, "thead");
  const headRow = el(doc, "tr");
  headRow.appendChild(el(doc, "th", undefined, "Final label"));
  headRow.appendChild(el(doc, "th", undefined, "Count"));
  head.appendChild(headRow);
  table.appendChild(head);

  const body = el(doc, "tbody");
  const known = new Set<string>(FINAL_LABELS);
  const order = [...FINAL_LABELS, ...Object.keys(tally).filter((label) => !known.has(label))];
  let total = 0;
  for (const label of order) {
    const count = tally[label] ?? 0;
    total += count;
    const row = el(doc, "tr", "tally-row");
    row.dataset.label = label;
    row.appendChild(el(doc, "td", "tally-label", label));
    row.appendChild(el(doc, "td", "tally-count", String(count)));
    body.appendChild(row);
  }
  table.appendChild(body);

  const foot = el(doc, "tfoot");
  const footRow = el(doc, "tr", "tally-total");
  footRow.appendChild(el(doc, "td", undefined, "Total"));
  footRow.appendChild(el(doc, "td", "tally-total-count", String(total)));
  foot.appendChild(footRow);
  table.appendChild(foot);
  return table;
}
