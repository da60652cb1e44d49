/** Editor bootstrap: wires the toolbar, canvases and findings panel to the
 * board service. Every edit round-trips through the service; its response
 * is the next state (no local mutations, no optimism). */

import { ApiClient, ApiError } from "./api.js";
import { meshToBuffers } from "./buffers.js";
import { drawBoard, fitTransform } from "./render2d.js";
import type { BoardTransform } from "./render2d.js";
import {
  applyDrc,
  applyGrid,
  applyMutation,
  badgeCount,
  bendRequest,
  canCommitBend,
  canCommitTrace,
  clickBoardPoint,
  clickGridPoint,
  initialState,
  nearestGridPoint,
  netCount,
  setBanner,
  setLayer,
  setOffline,
  setTool,
  socketRequest,
  traceRequest,
  viaRequest,
} from "./state.js";
import type { EditorState, Tool } from "./state.js";
import { Viewer3d } from "./viewer3d.js";
import type { DesignDoc, ElementKind, Layer } from "./types.js";

const apiBase = new URLSearchParams(window.location.search).get("api") ?? "";
const api = new ApiClient(apiBase);

let state: EditorState = initialState();
let transform: BoardTransform | null = null;
let mutationQueue: Promise<unknown> = Promise.resolve();
let viewer: Viewer3d | null = null;

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) {
    throw new Error(`missing element #${id}`);
  }
  return el as T;
};

const boardCanvas = $<HTMLCanvasElement>("board");
const boardCtx = boardCanvas.getContext("2d")!;

function setState(next: EditorState): void {
  state = next;
  render();
}

function render(): void {
  if (state.design) {
    transform = fitTransform(state.design.outline, boardCanvas.width,
                             boardCanvas.height);
    drawBoard(boardCtx, state, transform);
  }
  for (const tool of ["select", "trace", "via", "socket", "bend"] as Tool[]) {
    $(`tool-${tool}`).classList.toggle("active", state.tool === tool);
  }
  $(`layer-top`).classList.toggle("active", state.layer === "top");
  $(`layer-bottom`).classList.toggle("active", state.layer === "bottom");
  ($ ("commit-trace") as HTMLButtonElement).disabled = !canCommitTrace(state);
  ($ ("commit-bend") as HTMLButtonElement).disabled = !canCommitBend(state);

  $("badge-count").textContent = String(badgeCount(state));
  const nets = netCount(state);
  $("net-count").textContent = nets === null ? "-" : String(nets);
  $("offline-banner").style.display = state.offline ? "block" : "none";
  const banner = $("warn-banner");
  banner.style.display = state.banner ? "block" : "none";
  banner.textContent = state.banner ?? "";

  renderFindings();
  renderElements();
}

function renderFindings(): void {
  const list = $("findings");
  list.innerHTML = "";
  if (!state.drc) {
    return;
  }
  $("drc-status").textContent = state.drc.passed ? "rules: pass" : "rules: FAIL";
  $("drc-status").className = state.drc.passed ? "pass" : "fail";
  for (const finding of state.drc.findings) {
    const li = document.createElement("li");
    li.className = `finding ${finding.severity}`;
    li.textContent = `${finding.severity.toUpperCase()} ${finding.rule} ` +
      `[${finding.elements.join(", ")}] ${finding.message}`;
    list.appendChild(li);
  }
}

function renderElements(): void {
  const list = $("elements");
  list.innerHTML = "";
  if (!state.design) {
    return;
  }
  const groups: [ElementKind, { id: string }[]][] = [
    ["traces", state.design.traces],
    ["vias", state.design.vias],
    ["sockets", state.design.sockets],
    ["bends", state.design.bends],
  ];
  for (const [kind, elements] of groups) {
    for (const element of elements) {
      const li = document.createElement("li");
      const label = document.createElement("span");
      label.textContent = `${kind.slice(0, -1)} ${element.id}`;
      const del = document.createElement("button");
      del.textContent = "×";
      del.title = `delete ${element.id}`;
      del.addEventListener("click", () => {
        void mutate(() => api.deleteElement(kind, element.id));
      });
      li.append(label, del);
      list.appendChild(li);
    }
  }
}

/** Serialize mutations: each waits for the previous response. */
function mutate(op: () => Promise<{ design: DesignDoc; drc: EditorState["drc"] }>):
    Promise<void> {
  const run = async (): Promise<void> => {
    try {
      const response = await op();
      setState(applyMutation(state, response as never));
      void refreshPreview();
    } catch (err) {
      if (err instanceof ApiError) {
        setState(setBanner(state, err.messages.join("; ") || `error ${err.status}`));
        window.setTimeout(() => setState(setBanner(state, null)), 6000);
      } else {
        setState(setOffline(state, true));
      }
    }
  };
  mutationQueue = mutationQueue.then(run);
  return mutationQueue as Promise<void>;
}

async function refreshAll(): Promise<void> {
  try {
    const [design, grid, drc] = await Promise.all([
      api.getDesign(), api.getGrid(), api.getDrc(),
    ]);
    let next = applyGrid(state, grid);
    next = { ...next, design, pending: [], pendingBend: [] };
    next = applyDrc(next, drc);
    setState(setOffline(next, false));
    void refreshPreview();
  } catch {
    setState(setOffline(state, true));
  }
}

async function refreshPreview(): Promise<void> {
  if (!viewer) {
    return;
  }
  try {
    const mesh = await api.getMesh(state.folded);
    viewer.load([
      { buffers: meshToBuffers(mesh.substrate), color: [0.55, 0.58, 0.62] },
      { buffers: meshToBuffers(mesh.conductor), color: [0.82, 0.5, 0.2] },
    ]);
    $("tri-count").textContent =
      `${mesh.substrate.triangle_count + mesh.conductor.triangle_count} triangles`;
    setState(setBanner(state, mesh.warnings.length ? mesh.warnings.join("; ") : null));
  } catch (err) {
    if (err instanceof ApiError) {
      setState(setBanner(state, err.messages.join("; ")));
    }
  }
}

function onCanvasClick(event: MouseEvent): void {
  if (!state.grid || !transform) {
    return;
  }
  const rect = boardCanvas.getBoundingClientRect();
  const [bx, by] = transform.toBoard(event.clientX - rect.left,
                                     event.clientY - rect.top);
  if (state.tool === "bend") {
    setState(clickBoardPoint(state, [bx, by]));
    return;
  }
  const index = nearestGridPoint(state.grid, bx, by,
                                 Math.max(1.2, state.grid.pitch * 0.6));
  if (!index) {
    return;
  }
  const next = clickGridPoint(state, index);
  setState(next);
  if (state.tool === "via") {
    void mutate(() => api.addElement("vias", viaRequest(state, index)));
  } else if (state.tool === "socket") {
    void mutate(() => api.addElement("sockets", socketRequest(state, index)));
  }
}

function bindControls(): void {
  for (const tool of ["select", "trace", "via", "socket", "bend"] as Tool[]) {
    $(`tool-${tool}`).addEventListener("click", () => setState(setTool(state, tool)));
  }
  for (const layer of ["top", "bottom"] as Layer[]) {
    $(`layer-${layer}`).addEventListener("click", () => setState(setLayer(state, layer)));
  }

  const bindSlider = (id: string, apply: (v: number) => void): void => {
    const input = $<HTMLInputElement>(id);
    const label = $(`${id}-value`);
    const update = (): void => {
      apply(Number(input.value));
      label.textContent = input.value;
      render();
    };
    input.addEventListener("input", update);
    update();
  };
  bindSlider("trace-width", (v) => { state = { ...state, traceWidth: v }; });
  bindSlider("trace-height", (v) => { state = { ...state, traceHeight: v }; });
  bindSlider("socket-radius", (v) => { state = { ...state, socketRadius: v }; });
  bindSlider("socket-depth", (v) => { state = { ...state, socketDepth: v }; });
  bindSlider("bend-angle", (v) => { state = { ...state, bendAngle: v }; });
  bindSlider("bend-radius", (v) => { state = { ...state, bendRadius: v }; });

  $("commit-trace").addEventListener("click", () => {
    if (canCommitTrace(state)) {
      void mutate(() => api.addElement("traces", traceRequest(state)));
    }
  });
  $("commit-bend").addEventListener("click", () => {
    if (canCommitBend(state)) {
      void mutate(() => api.addElement("bends", bendRequest(state)));
    }
  });
  $("save").addEventListener("click", () => {
    void api.save().then(
      (r) => setState(setBanner(state, `saved ${r.saved}`)),
      (err) => setState(setBanner(state,
        err instanceof ApiError ? err.messages.join("; ") : "save failed")),
    );
  });
  $("folded-toggle").addEventListener("change", (event) => {
    state = { ...state, folded: (event.target as HTMLInputElement).checked };
    void refreshPreview();
  });
  $("retry").addEventListener("click", () => void refreshAll());
  boardCanvas.addEventListener("click", onCanvasClick);
}

function boot(): void {
  try {
    viewer = new Viewer3d($<HTMLCanvasElement>("preview"));
  } catch {
    $("tri-count").textContent = "WebGL unavailable";
  }
  bindControls();
  void refreshAll();
}

boot();
