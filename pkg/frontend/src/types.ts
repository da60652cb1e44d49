/** Wire types for the board service documents (mirrors the .tcb model). */

export type Layer = "top" | "bottom";
export type GridIndex = [number, number];
export type Point = [number, number];

export interface TraceDoc {
  id: string;
  layer: Layer;
  width: number;
  height: number;
  path: GridIndex[];
}

export interface ViaDoc {
  id: string;
  at: GridIndex;
  radius: number;
}

export interface SocketDoc {
  id: string;
  layer: Layer;
  at: GridIndex;
  radius: number;
  depth: number;
}

export interface BendDoc {
  id: string;
  start: Point;
  end: Point;
  angle_deg: number;
  radius: number;
  sequence: number;
}

export interface FlexZoneDoc {
  id: string;
  center: Point;
  radius: number;
  expected_deflection_deg: number;
  direction_deg: number | null;
}

export interface DesignDoc {
  name: string;
  outline: Point[];
  pitch: number;
  margin: number;
  stackup: [number, number, number, number];
  traces: TraceDoc[];
  vias: ViaDoc[];
  sockets: SocketDoc[];
  bends: BendDoc[];
  flex_zones: FlexZoneDoc[];
}

export interface GridPointDoc {
  u: number;
  v: number;
  x: number;
  y: number;
}

export interface GridDoc {
  pitch: number;
  margin: number;
  points: GridPointDoc[];
}

export type Severity = "error" | "warning" | "info";

export interface FindingDoc {
  rule: string;
  severity: Severity;
  elements: string[];
  message: string;
  evidence: Record<string, number>;
  grid_index: GridIndex | null;
}

export interface DrcDoc {
  passed: boolean;
  summary: { errors: number; warnings: number; infos: number; net_count?: number };
  findings: FindingDoc[];
}

export interface MeshDoc {
  vertices: number[];
  triangles: number[];
  triangle_count: number;
  warnings: string[];
}

export interface MeshResponse {
  folded: boolean;
  substrate: MeshDoc;
  conductor: MeshDoc;
  warnings: string[];
}

export interface MutationResponse {
  design: DesignDoc;
  drc: DrcDoc;
  created?: string;
  deleted?: string;
}

export type ElementKind = "traces" | "vias" | "sockets" | "bends";
