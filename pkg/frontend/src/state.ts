/** Editor state and its pure update functions.
 *
 * The service is the single source of truth: state only ever holds the
 * latest service responses plus local UI affordances (active tool, slider
 * values, pending clicks). Nothing here edits the design locally.
 */

import type {
  BendDoc,
  DesignDoc,
  DrcDoc,
  FindingDoc,
  GridDoc,
  GridIndex,
  Layer,
  MutationResponse,
  Point,
  SocketDoc,
  TraceDoc,
  ViaDoc,
} from "./types.js";

export type Tool = "select" | "trace" | "via" | "socket" | "bend";

export interface EditorState {
  design: DesignDoc | null;
  grid: GridDoc | null;
  drc: DrcDoc | null;
  tool: Tool;
  layer: Layer;
  pending: GridIndex[];
  pendingBend: Point[];
  traceWidth: number;
  traceHeight: number;
  viaRadius: number;
  socketRadius: number;
  socketDepth: number;
  bendAngle: number;
  bendRadius: number;
  folded: boolean;
  offline: boolean;
  banner: string | null;
  selection: string | null;
}

export function initialState(): EditorState {
  return {
    design: null,
    grid: null,
    drc: null,
    tool: "select",
    layer: "top",
    pending: [],
    pendingBend: [],
    traceWidth: 1.0,
    traceHeight: 0.3,
    viaRadius: 0.6,
    socketRadius: 1.0,
    socketDepth: 2.0,
    bendAngle: 90,
    bendRadius: 3.0,
    folded: false,
    offline: false,
    banner: null,
    selection: null,
  };
}

export function applyDesign(state: EditorState, design: DesignDoc): EditorState {
  return { ...state, design, pending: [], pendingBend: [], offline: false };
}

export function applyGrid(state: EditorState, grid: GridDoc): EditorState {
  return { ...state, grid };
}

export function applyDrc(state: EditorState, drc: DrcDoc): EditorState {
  return { ...state, drc, offline: false };
}

export function applyMutation(state: EditorState, response: MutationResponse): EditorState {
  return applyDrc(applyDesign(state, response.design), response.drc);
}

export function setTool(state: EditorState, tool: Tool): EditorState {
  return { ...state, tool, pending: [], pendingBend: [], selection: null };
}

export function setLayer(state: EditorState, layer: Layer): EditorState {
  return { ...state, layer, pending: [] };
}

export function setOffline(state: EditorState, offline: boolean): EditorState {
  return { ...state, offline };
}

export function setBanner(state: EditorState, banner: string | null): EditorState {
  return { ...state, banner };
}

/** Register a click on a grid point for the active tool. Trace clicks
 * accumulate; via/socket clicks replace the single pending point. */
export function clickGridPoint(state: EditorState, index: GridIndex): EditorState {
  if (state.tool === "trace") {
    const last = state.pending[state.pending.length - 1];
    if (last && last[0] === index[0] && last[1] === index[1]) {
      return state;
    }
    return { ...state, pending: [...state.pending, index] };
  }
  if (state.tool === "via" || state.tool === "socket") {
    return { ...state, pending: [index] };
  }
  return state;
}

/** Register a click at a board position (mm) for the bend tool. */
export function clickBoardPoint(state: EditorState, point: Point): EditorState {
  if (state.tool !== "bend") {
    return state;
  }
  if (state.pendingBend.length >= 2) {
    return { ...state, pendingBend: [point] };
  }
  return { ...state, pendingBend: [...state.pendingBend, point] };
}

export function canCommitTrace(state: EditorState): boolean {
  return state.tool === "trace" && state.pending.length >= 2;
}

export function canCommitBend(state: EditorState): boolean {
  return state.tool === "bend" && state.pendingBend.length === 2;
}

// ---------------------------------------------------------------------------
// request builders
// ---------------------------------------------------------------------------

function freeId(design: DesignDoc | null, prefix: string): string {
  const used = new Set<string>();
  if (design) {
    for (const group of [design.traces, design.vias, design.sockets,
                         design.bends, design.flex_zones]) {
      for (const e of group as { id: string }[]) {
        used.add(e.id);
      }
    }
  }
  for (let n = 1; ; n += 1) {
    const candidate = `${prefix}${n}`;
    if (!used.has(candidate)) {
      return candidate;
    }
  }
}

export function traceRequest(state: EditorState): TraceDoc {
  return {
    id: freeId(state.design, "t"),
    layer: state.layer,
    width: state.traceWidth,
    height: state.traceHeight,
    path: state.pending,
  };
}

export function viaRequest(state: EditorState, at: GridIndex): ViaDoc {
  return { id: freeId(state.design, "v"), at, radius: state.viaRadius };
}

export function socketRequest(state: EditorState, at: GridIndex): SocketDoc {
  return {
    id: freeId(state.design, "s"),
    layer: state.layer,
    at,
    radius: state.socketRadius,
    depth: state.socketDepth,
  };
}

export function bendRequest(state: EditorState): BendDoc {
  const [start, end] = state.pendingBend;
  if (!start || !end) {
    throw new Error("bend needs two axis points");
  }
  const sequence = (state.design?.bends.length ?? 0) + 1;
  return {
    id: freeId(state.design, "b"),
    start,
    end,
    angle_deg: state.bendAngle,
    radius: state.bendRadius,
    sequence,
  };
}

// ---------------------------------------------------------------------------
// selectors
// ---------------------------------------------------------------------------

export function badgeCount(state: EditorState): number {
  return state.drc?.findings.length ?? 0;
}

export function netCount(state: EditorState): number | null {
  return state.drc?.summary.net_count ?? null;
}

export function findingsFor(state: EditorState, elementId: string): FindingDoc[] {
  if (!state.drc) {
    return [];
  }
  return state.drc.findings.filter((f) => f.elements.includes(elementId));
}

export function worstSeverityFor(state: EditorState, elementId: string):
    "error" | "warning" | "info" | null {
  const rank = { info: 0, warning: 1, error: 2 } as const;
  let worst: keyof typeof rank | null = null;
  for (const f of findingsFor(state, elementId)) {
    if (worst === null || rank[f.severity] > rank[worst]) {
      worst = f.severity;
    }
  }
  return worst;
}

/** Grid point nearest to a board position, or null beyond maxDistance. */
export function nearestGridPoint(
  grid: GridDoc,
  x: number,
  y: number,
  maxDistance: number,
): GridIndex | null {
  let best: GridIndex | null = null;
  let bestDist = maxDistance;
  for (const p of grid.points) {
    const d = Math.hypot(p.x - x, p.y - y);
    if (d <= bestDist) {
      bestDist = d;
      best = [p.u, p.v];
    }
  }
  return best;
}

export function gridPosition(grid: GridDoc, index: GridIndex): Point | null {
  for (const p of grid.points) {
    if (p.u === index[0] && p.v === index[1]) {
      return [p.x, p.y];
    }
  }
  return null;
}
