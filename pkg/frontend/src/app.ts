// Browser entry point: wires the segment workbench to the DOM. Everything
// testable lives in the framework-free modules; this file is glue only.

import { SegmentWorkbench } from "./workbench.js";
import { WorkbenchClient } from "./client.js";
import type { ContextSegment } from "./types.js";

interface Settings {
  baseUrl: string;
  projectId: string;
  token: string;
  segment: number;
}

function readSettings(): Settings {
  const params = new URLSearchParams(window.location.search);
  return {
    baseUrl: params.get("api") ?? "",
    projectId: params.get("project") ?? "demo",
    token: params.get("token") ?? "",
    segment: Number(params.get("segment") ?? "0"),
  };
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

// Context segments render as plain read-only blocks, never as inputs.
function renderContext(target: HTMLElement, segments: ContextSegment[]): void {
  target.replaceChildren(
    ...segments.map((seg) => {
      const div = document.createElement("div");
      div.className = "context-segment";
      div.textContent = seg.text;
      return div;
    }),
  );
}

async function start(): Promise<void> {
  const settings = readSettings();
  const client = new WorkbenchClient(settings.baseUrl, settings.token);
  const bundle = await client.bundle(settings.projectId, settings.segment);

  const storageKey = `pelab-pending-${settings.projectId}-${bundle.segment_id}`;
  const workbench = new SegmentWorkbench(client, settings.projectId, bundle, {
    storage: {
      save: (events) => window.localStorage.setItem(storageKey, JSON.stringify(events)),
      load: () => JSON.parse(window.localStorage.getItem(storageKey) ?? "[]"),
    },
  });

  const editor = el<HTMLTextAreaElement>("editor");
  const status = el<HTMLElement>("status");
  const pane = el<HTMLElement>("panes");

  el<HTMLElement>("source").textContent = bundle.source_text;
  el<HTMLElement>("mt").textContent = bundle.initial_text || "(translate from scratch)";
  el<HTMLElement>("condition").textContent =
    bundle.condition.kind === "post_edit"
      ? `post-editing ${bundle.condition.model_id}`
      : "translation from scratch";
  renderContext(el("context-before"), bundle.preceding);
  renderContext(el("context-after"), bundle.following);

  editor.value = bundle.current_text;
  editor.disabled = true;
  status.textContent = "reading phase: review the text, then start editing";

  el<HTMLButtonElement>("start").addEventListener("click", () => {
    workbench.startEditing();
    editor.disabled = false;
    editor.focus();
    status.textContent = "editing (time is being recorded)";
  });

  editor.addEventListener("input", () => workbench.input(editor.value));
  window.setInterval(() => {
    workbench.input(editor.value);
    void workbench.queue.drain();
  }, 1000);

  el<HTMLButtonElement>("save").addEventListener("click", () => {
    void workbench.save().then(() => {
      status.textContent = "draft saved";
    });
  });

  el<HTMLButtonElement>("finalize").addEventListener("click", () => {
    void workbench.finalize().then(({ active_ms }) => {
      editor.disabled = true;
      status.textContent = `finalized; active time ${(active_ms / 60000).toFixed(2)} min`;
    });
  });

  el<HTMLButtonElement>("layout").addEventListener("click", () => {
    pane.classList.toggle("vertical", workbench.state.toggleLayout() === "vertical");
  });
}

void start().catch((err) => {
  document.body.textContent = `failed to load segment: ${err}`;
});
