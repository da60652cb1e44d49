/** Minimal WebGL viewer: orbit (drag), zoom (wheel), lambert shading.
 * Renders the substrate and conductor buffer sets in distinct colors. */

import type { MeshBuffers } from "./buffers.js";

const VERT = `
attribute vec3 position;
attribute vec3 normal;
uniform mat4 viewProj;
varying vec3 vNormal;
void main() {
  vNormal = normal;
  gl_Position = viewProj * vec4(position, 1.0);
}
`;

const FRAG = `
precision mediump float;
uniform vec3 color;
varying vec3 vNormal;
void main() {
  vec3 light = normalize(vec3(0.5, 0.6, 1.0));
  float lit = 0.35 + 0.65 * abs(dot(normalize(vNormal), light));
  gl_FragColor = vec4(color * lit, 1.0);
}
`;

interface Batch {
  vao: { position: WebGLBuffer; normal: WebGLBuffer };
  count: number;
  color: [number, number, number];
}

export class Viewer3d {
  private gl: WebGLRenderingContext;
  private program: WebGLProgram;
  private batches: Batch[] = [];
  private theta = -0.9;
  private phi = 0.9;
  private distance = 3.0;
  private center: [number, number, number] = [0, 0, 0];
  private radius = 1.0;
  triangleCount = 0;

  constructor(private canvas: HTMLCanvasElement) {
    const gl = canvas.getContext("webgl");
    if (!gl) {
      throw new Error("WebGL unavailable");
    }
    this.gl = gl;
    this.program = this.buildProgram();
    gl.enable(gl.DEPTH_TEST);
    this.bindInput();
  }

  private buildProgram(): WebGLProgram {
    const gl = this.gl;
    const compile = (type: number, src: string): WebGLShader => {
      const shader = gl.createShader(type)!;
      gl.shaderSource(shader, src);
      gl.compileShader(shader);
      if (!gl.getShaderParameter(shader, gl.COMPILE_STATUS)) {
        throw new Error(gl.getShaderInfoLog(shader) ?? "shader error");
      }
      return shader;
    };
    const program = gl.createProgram()!;
    gl.attachShader(program, compile(gl.VERTEX_SHADER, VERT));
    gl.attachShader(program, compile(gl.FRAGMENT_SHADER, FRAG));
    gl.linkProgram(program);
    if (!gl.getProgramParameter(program, gl.LINK_STATUS)) {
      throw new Error(gl.getProgramInfoLog(program) ?? "link error");
    }
    return program;
  }

  private bindInput(): void {
    let dragging = false;
    let last: [number, number] = [0, 0];
    this.canvas.addEventListener("mousedown", (e) => {
      dragging = true;
      last = [e.clientX, e.clientY];
    });
    window.addEventListener("mouseup", () => {
      dragging = false;
    });
    window.addEventListener("mousemove", (e) => {
      if (!dragging) {
        return;
      }
      this.theta += (e.clientX - last[0]) * 0.01;
      this.phi = Math.min(1.5, Math.max(-1.5, this.phi + (e.clientY - last[1]) * 0.01));
      last = [e.clientX, e.clientY];
      this.draw();
    });
    this.canvas.addEventListener("wheel", (e) => {
      e.preventDefault();
      this.distance *= Math.exp(e.deltaY * 0.001);
      this.distance = Math.min(8, Math.max(1.2, this.distance));
      this.draw();
    }, { passive: false });
  }

  load(parts: { buffers: MeshBuffers; color: [number, number, number] }[]): void {
    const gl = this.gl;
    for (const batch of this.batches) {
      gl.deleteBuffer(batch.vao.position);
      gl.deleteBuffer(batch.vao.normal);
    }
    this.batches = [];
    this.triangleCount = 0;
    const bounds = [Infinity, Infinity, Infinity, -Infinity, -Infinity, -Infinity];
    for (const { buffers, color } of parts) {
      if (!buffers.triangleCount) {
        continue;
      }
      const position = gl.createBuffer()!;
      gl.bindBuffer(gl.ARRAY_BUFFER, position);
      gl.bufferData(gl.ARRAY_BUFFER, buffers.positions, gl.STATIC_DRAW);
      const normal = gl.createBuffer()!;
      gl.bindBuffer(gl.ARRAY_BUFFER, normal);
      gl.bufferData(gl.ARRAY_BUFFER, buffers.normals, gl.STATIC_DRAW);
      this.batches.push({ vao: { position, normal },
                          count: buffers.triangleCount * 3, color });
      this.triangleCount += buffers.triangleCount;
      for (let i = 0; i < 3; i += 1) {
        bounds[i] = Math.min(bounds[i]!, buffers.bounds[i]!);
        bounds[i + 3] = Math.max(bounds[i + 3]!, buffers.bounds[i + 3]!);
      }
    }
    if (this.batches.length) {
      this.center = [
        (bounds[0]! + bounds[3]!) / 2,
        (bounds[1]! + bounds[4]!) / 2,
        (bounds[2]! + bounds[5]!) / 2,
      ];
      this.radius = Math.max(
        1e-3,
        Math.hypot(bounds[3]! - bounds[0]!, bounds[4]! - bounds[1]!,
                   bounds[5]! - bounds[2]!) / 2,
      );
    }
    this.draw();
  }

  draw(): void {
    const gl = this.gl;
    const w = this.canvas.clientWidth || this.canvas.width;
    const h = this.canvas.clientHeight || this.canvas.height;
    this.canvas.width = w;
    this.canvas.height = h;
    gl.viewport(0, 0, w, h);
    gl.clearColor(0.12, 0.13, 0.16, 1);
    gl.clear(gl.COLOR_BUFFER_BIT | gl.DEPTH_BUFFER_BIT);
    if (!this.batches.length) {
      return;
    }
    gl.useProgram(this.program);
    const viewProj = this.viewProjection(w / Math.max(1, h));
    gl.uniformMatrix4fv(gl.getUniformLocation(this.program, "viewProj"), false, viewProj);
    const posLoc = gl.getAttribLocation(this.program, "position");
    const normLoc = gl.getAttribLocation(this.program, "normal");
    for (const batch of this.batches) {
      gl.uniform3fv(gl.getUniformLocation(this.program, "color"), batch.color);
      gl.bindBuffer(gl.ARRAY_BUFFER, batch.vao.position);
      gl.enableVertexAttribArray(posLoc);
      gl.vertexAttribPointer(posLoc, 3, gl.FLOAT, false, 0, 0);
      gl.bindBuffer(gl.ARRAY_BUFFER, batch.vao.normal);
      gl.enableVertexAttribArray(normLoc);
      gl.vertexAttribPointer(normLoc, 3, gl.FLOAT, false, 0, 0);
      gl.drawArrays(gl.TRIANGLES, 0, batch.count);
    }
  }

  private viewProjection(aspect: number): Float32Array {
    const eyeDist = this.distance * this.radius;
    const cp = Math.cos(this.phi), sp = Math.sin(this.phi);
    const ct = Math.cos(this.theta), st = Math.sin(this.theta);
    const eye = [
      this.center[0] + eyeDist * cp * ct,
      this.center[1] + eyeDist * cp * st,
      this.center[2] + eyeDist * sp,
    ];
    const view = lookAt(eye as V3, this.center, [0, 0, 1]);
    const proj = perspective(0.9, aspect, this.radius * 0.01, eyeDist + this.radius * 4);
    return multiply(proj, view);
  }
}

type V3 = [number, number, number] | number[];

function lookAt(eye: V3, target: V3, up: V3): Float32Array {
  const sub = (a: V3, b: V3) => [a[0]! - b[0]!, a[1]! - b[1]!, a[2]! - b[2]!];
  const norm = (a: number[]) => {
    const l = Math.hypot(a[0]!, a[1]!, a[2]!) || 1;
    return [a[0]! / l, a[1]! / l, a[2]! / l];
  };
  const cross = (a: number[], b: number[]) => [
    a[1]! * b[2]! - a[2]! * b[1]!,
    a[2]! * b[0]! - a[0]! * b[2]!,
    a[0]! * b[1]! - a[1]! * b[0]!,
  ];
  const dot = (a: number[], b: V3) => a[0]! * b[0]! + a[1]! * b[1]! + a[2]! * b[2]!;
  const f = norm(sub(target, eye));
  const s = norm(cross(f, up as number[]));
  const u = cross(s, f);
  return new Float32Array([
    s[0]!, u[0]!, -f[0]!, 0,
    s[1]!, u[1]!, -f[1]!, 0,
    s[2]!, u[2]!, -f[2]!, 0,
    -dot(s, eye), -dot(u, eye), dot(f, eye), 1,
  ]);
}

function perspective(fovY: number, aspect: number, near: number, far: number): Float32Array {
  const f = 1 / Math.tan(fovY / 2);
  const nf = 1 / (near - far);
  return new Float32Array([
    f / aspect, 0, 0, 0,
    0, f, 0, 0,
    0, 0, (far + near) * nf, -1,
    0, 0, 2 * far * near * nf, 0,
  ]);
}

function multiply(a: Float32Array, b: Float32Array): Float32Array {
  const out = new Float32Array(16);
  for (let col = 0; col < 4; col += 1) {
    for (let row = 0; row < 4; row += 1) {
      let sum = 0;
      for (let k = 0; k < 4; k += 1) {
        sum += a[k * 4 + row]! * b[col * 4 + k]!;
      }
      out[col * 4 + row] = sum;
    }
  }
  return out;
}
