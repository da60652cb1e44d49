/** 2D canvas rendering of the flat board: outline, grid, conductors on the
 * active layer, bend axes, flex zones, pending clicks and rule badges. */

import type { EditorState } from "./state.js";
import { gridPosition, worstSeverityFor } from "./state.js";
import type { Point } from "./types.js";

export interface BoardTransform {
  scale: number;
  offsetX: number;
  offsetY: number;
  /** board mm -> canvas px */
  toCanvas(p: Point): [number, number];
  /** canvas px -> board mm */
  toBoard(x: number, y: number): Point;
}

export function fitTransform(
  outline: Point[],
  width: number,
  height: number,
  padding = 24,
): BoardTransform {
  let minX = Infinity, minY = Infinity, maxX = -Infinity, maxY = -Infinity;
  for (const [x, y] of outline) {
    minX = Math.min(minX, x);
    minY = Math.min(minY, y);
    maxX = Math.max(maxX, x);
    maxY = Math.max(maxY, y);
  }
  const spanX = Math.max(1e-6, maxX - minX);
  const spanY = Math.max(1e-6, maxY - minY);
  const scale = Math.min((width - 2 * padding) / spanX,
                         (height - 2 * padding) / spanY);
  const offsetX = padding + (width - 2 * padding - spanX * scale) / 2 - minX * scale;
  // canvas y grows downward; keep board +y up
  const offsetY = height - padding -
    (height - 2 * padding - spanY * scale) / 2 + minY * scale;
  return {
    scale,
    offsetX,
    offsetY,
    toCanvas([x, y]: Point): [number, number] {
      return [x * scale + offsetX, offsetY - y * scale];
    },
    toBoard(x: number, y: number): Point {
      return [(x - offsetX) / scale, (offsetY - y) / scale];
    },
  };
}

const SEVERITY_COLOR = { error: "#ff5050", warning: "#f2b84b", info: "#6fb7ff" };

export function drawBoard(
  ctx: CanvasRenderingContext2D,
  state: EditorState,
  tf: BoardTransform,
): void {
  const { design, grid } = state;
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
  if (!design || !grid) {
    return;
  }

  // substrate
  ctx.beginPath();
  design.outline.forEach((p, i) => {
    const [x, y] = tf.toCanvas(p);
    if (i === 0) {
      ctx.moveTo(x, y);
    } else {
      ctx.lineTo(x, y);
    }
  });
  ctx.closePath();
  ctx.fillStyle = "#28313c";
  ctx.fill();
  ctx.strokeStyle = "#5b6b7c";
  ctx.lineWidth = 1.5;
  ctx.stroke();

  // grid points
  ctx.fillStyle = "#4a5a6a";
  for (const p of grid.points) {
    const [x, y] = tf.toCanvas([p.x, p.y]);
    ctx.fillRect(x - 1, y - 1, 2, 2);
  }

  // traces: inactive layer faded underneath
  const layers: ("bottom" | "top")[] = state.layer === "top"
    ? ["bottom", "top"] : ["top", "bottom"];
  for (const layer of layers) {
    const active = layer === state.layer;
    for (const trace of design.traces.filter((t) => t.layer === layer)) {
      ctx.beginPath();
      for (let i = 0; i < trace.path.length; i += 1) {
        const pos = gridPosition(grid, trace.path[i]!);
        if (!pos) {
          continue;
        }
        const [x, y] = tf.toCanvas(pos);
        if (i === 0) {
          ctx.moveTo(x, y);
        } else {
          ctx.lineTo(x, y);
        }
      }
      ctx.lineCap = "butt";
      ctx.lineJoin = "miter";
      ctx.lineWidth = Math.max(2, trace.width * tf.scale);
      ctx.strokeStyle = active
        ? (layer === "top" ? "#d8853f" : "#3fa0d8")
        : "rgba(120,130,140,0.35)";
      ctx.stroke();
    }
  }

  // vias on both layers
  for (const via of design.vias) {
    const pos = gridPosition(grid, via.at);
    if (!pos) {
      continue;
    }
    const [x, y] = tf.toCanvas(pos);
    ctx.beginPath();
    ctx.arc(x, y, Math.max(3, via.radius * tf.scale), 0, Math.PI * 2);
    ctx.fillStyle = "#d9c36a";
    ctx.fill();
    ctx.beginPath();
    ctx.arc(x, y, Math.max(1.5, 0.3 * tf.scale), 0, Math.PI * 2);
    ctx.fillStyle = "#1c232b";
    ctx.fill();
  }

  // sockets on their layer (faded on the other)
  for (const socket of design.sockets) {
    const pos = gridPosition(grid, socket.at);
    if (!pos) {
      continue;
    }
    const [x, y] = tf.toCanvas(pos);
    ctx.beginPath();
    ctx.arc(x, y, Math.max(4, socket.radius * tf.scale), 0, Math.PI * 2);
    ctx.strokeStyle = socket.layer === state.layer ? "#9ad98a" : "rgba(120,140,120,0.4)";
    ctx.lineWidth = 2;
    ctx.stroke();
  }

  // bend axes
  for (const bend of design.bends) {
    const [x0, y0] = tf.toCanvas(bend.start);
    const [x1, y1] = tf.toCanvas(bend.end);
    ctx.beginPath();
    ctx.setLineDash([8, 5]);
    ctx.moveTo(x0, y0);
    ctx.lineTo(x1, y1);
    ctx.strokeStyle = "#c77fd8";
    ctx.lineWidth = 1.5;
    ctx.stroke();
    ctx.setLineDash([]);
    ctx.fillStyle = "#c77fd8";
    ctx.font = "11px sans-serif";
    ctx.fillText(`${bend.id} ${bend.angle_deg}°`,
                 (x0 + x1) / 2 + 4, (y0 + y1) / 2 - 4);
  }

  // flex zones
  for (const zone of design.flex_zones) {
    const [x, y] = tf.toCanvas(zone.center);
    ctx.beginPath();
    ctx.arc(x, y, zone.radius * tf.scale, 0, Math.PI * 2);
    ctx.strokeStyle = "rgba(240,170,80,0.7)";
    ctx.setLineDash([4, 4]);
    ctx.stroke();
    ctx.setLineDash([]);
  }

  // pending selections
  ctx.fillStyle = "#7ef0c0";
  for (const index of state.pending) {
    const pos = gridPosition(grid, index);
    if (!pos) {
      continue;
    }
    const [x, y] = tf.toCanvas(pos);
    ctx.beginPath();
    ctx.arc(x, y, 5, 0, Math.PI * 2);
    ctx.fill();
  }
  for (const p of state.pendingBend) {
    const [x, y] = tf.toCanvas(p);
    ctx.strokeStyle = "#c77fd8";
    ctx.strokeRect(x - 5, y - 5, 10, 10);
  }

  drawBadges(ctx, state, tf);
}

/** One colored badge per element carrying a rule finding. */
function drawBadges(
  ctx: CanvasRenderingContext2D,
  state: EditorState,
  tf: BoardTransform,
): void {
  const { design, grid } = state;
  if (!design || !grid || !state.drc) {
    return;
  }
  const anchor = (elementId: string): Point | null => {
    const trace = design.traces.find((t) => t.id === elementId);
    if (trace) {
      return gridPosition(grid, trace.path[0]!);
    }
    const via = design.vias.find((v) => v.id === elementId);
    if (via) {
      return gridPosition(grid, via.at);
    }
    const socket = design.sockets.find((s) => s.id === elementId);
    if (socket) {
      return gridPosition(grid, socket.at);
    }
    const bend = design.bends.find((b) => b.id === elementId);
    if (bend) {
      return [(bend.start[0] + bend.end[0]) / 2, (bend.start[1] + bend.end[1]) / 2];
    }
    const zone = design.flex_zones.find((z) => z.id === elementId);
    return zone ? zone.center : null;
  };
  const seen = new Set<string>();
  for (const finding of state.drc.findings) {
    for (const element of finding.elements) {
      if (seen.has(element)) {
        continue;
      }
      seen.add(element);
      const severity = worstSeverityFor(state, element);
      const pos = anchor(element);
      if (!pos || !severity) {
        continue;
      }
      const [x, y] = tf.toCanvas(pos);
      ctx.beginPath();
      ctx.arc(x + 8, y - 8, 5, 0, Math.PI * 2);
      ctx.fillStyle = SEVERITY_COLOR[severity];
      ctx.fill();
      ctx.strokeStyle = "#10151a";
      ctx.lineWidth = 1;
      ctx.stroke();
    }
  }
}
