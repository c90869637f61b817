/** Page wiring: file selection → queued upload → result card + tally.
 *
 * `initApp` takes the document and collaborators so tests can drive the
 * real flow against a mocked API; the bottom of the file boots it in a
 * browser when the expected skeleton is present.
 */

import { ApiClient, ApiError } from "./api.js";
import { UploadQueue } from "./queue.js";
import { renderErrorBanner, renderResultCard, renderTallyTable } from "./render.js";
import { SessionStore } from "./session.js";
import { fileToThumbnail } from "./thumbs.js";

export interface AppOptions {
  api?: ApiClient;
  thumbnail?: (file: File) => Promise<string | null>;
}

export interface App {
  store: SessionStore;
  queue: UploadQueue;
  /** Runs one file through the full flow; resolves when the UI is updated. */
  submit(file: File): Promise<void>;
}

export function initApp(doc: Document, options: AppOptions = {}): App {
  const api = options.api ?? new ApiClient();
  const thumbnail = options.thumbnail ?? fileToThumbnail;
  const store = new SessionStore();
  const queue = new UploadQueue();

  const input = doc.getElementById("file-input") as HTMLInputElement | null;
  const history = required(doc, "history");
  const tallyHost = required(doc, "tally-host");
  const banners = required(doc, "banners");
  const statusPill = doc.getElementById("service-status");

  refreshTally();

  void api
    .health()
    .then((health) => {
      if (statusPill) {
        statusPill.textContent = `service ok · model ${health.model_digest.slice(0, 12)}`;
        statusPill.className = "status status-ok";
      }
    })
    .catch((error: unknown) => {
      if (statusPill) {
        const code = error instanceof ApiError ? error.code : "unreachable";
        statusPill.textContent = `service unavailable (${code})`;
        statusPill.className = "status status-down";
      }
    });

  async function submit(file: File): Promise<void> {
    await queue.enqueue(async () => {
      let thumb: string | null = null;
      try {
        thumb = await thumbnail(file);
      } catch {
        thumb = null;
      }
      try {
        const response = await api.predict(file);
        const entry = { filename: file.name, thumbnail: thumb, response, at: new Date() };
        store.add(entry);
        history.prepend(renderResultCard(doc, entry));
        refreshTally();
      } catch (error: unknown) {
        const code = error instanceof ApiError ? error.code : "network_error";
        const message = error instanceof Error ? error.message : String(error);
        banners.appendChild(renderErrorBanner(doc, code, message));
      }
    });
  }

  function refreshTally(): void {
    tallyHost.replaceChildren(renderTallyTable(doc, store.tally()));
  }

  if (input) {
    input.addEventListener("change", () => {
      const files = input.files ? Array.from(input.files) : [];
      input.value = "";
      for (const file of files) {
        void submit(file);
      }
    });
  }

  return { store, queue, submit };
}

function required(doc: Document, id: string): HTMLElement {
  const node = doc.getElementById(id);
  if (!node) {
    throw new Error(`missing #${id} in page skeleton`);
  }
  return node;
}

if (typeof document !== "undefined" && document.getElementById("history")) {
  initApp(document);
}
