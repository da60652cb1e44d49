/** Expand an indexed mesh document into flat GL buffers with per-face
 * normals. Pure math, shared by the 3D viewer and its tests. */

import type { MeshDoc } from "./types.js";

export interface MeshBuffers {
  positions: Float32Array;
  normals: Float32Array;
  triangleCount: number;
  /** axis-aligned bounds as [minx,miny,minz, maxx,maxy,maxz] */
  bounds: [number, number, number, number, number, number];
}

export function meshToBuffers(mesh: MeshDoc): MeshBuffers {
  const tri = mesh.triangles;
  const vert = mesh.vertices;
  const count = Math.floor(tri.length / 3);
  const positions = new Float32Array(count * 9);
  const normals = new Float32Array(count * 9);
  const bounds: [number, number, number, number, number, number] = [
    Infinity, Infinity, Infinity, -Infinity, -Infinity, -Infinity,
  ];

  const corner = (t: number, k: number): [number, number, number] => {
    const vi = tri[3 * t + k]! * 3;
    return [vert[vi]!, vert[vi + 1]!, vert[vi + 2]!];
  };

  for (let t = 0; t < count; t += 1) {
    const a = corner(t, 0);
    const b = corner(t, 1);
    const c = corner(t, 2);
    const ux = b[0] - a[0], uy = b[1] - a[1], uz = b[2] - a[2];
    const vx = c[0] - a[0], vy = c[1] - a[1], vz = c[2] - a[2];
    let nx = uy * vz - uz * vy;
    let ny = uz * vx - ux * vz;
    let nz = ux * vy - uy * vx;
    const len = Math.hypot(nx, ny, nz) || 1;
    nx /= len; ny /= len; nz /= len;
    const corners = [a, b, c];
    for (let k = 0; k < 3; k += 1) {
      const p = corners[k]!;
      const o = t * 9 + k * 3;
      positions[o] = p[0];
      positions[o + 1] = p[1];
      positions[o + 2] = p[2];
      normals[o] = nx;
      normals[o + 1] = ny;
      normals[o + 2] = nz;
      bounds[0] = Math.min(bounds[0], p[0]);
      bounds[1] = Math.min(bounds[1], p[1]);
      bounds[2] = Math.min(bounds[2], p[2]);
      bounds[3] = Math.max(bounds[3], p[0]);
      bounds[4] = Math.max(bounds[4], p[1]);
      bounds[5] = Math.max(bounds[5], p[2]);
    }
  }
  if (count === 0) {
    bounds.fill(0);
  }
  return { positions, normals, triangleCount: count, bounds };
}
