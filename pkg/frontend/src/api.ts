/** Typed client for the board service. Every mutation resolves with the
 * post-mutation design and rule report, so one round-trip is enough to
 * refresh the whole editor. */

import type {
  DesignDoc,
  DrcDoc,
  ElementKind,
  GridDoc,
  MeshResponse,
  MutationResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly messages: string[],
  ) {
    super(messages.join("; ") || `service error ${status}`);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.base + path, init);
    const body = await response.json().catch(() => null);
    if (!response.ok) {
      const messages = Array.isArray(body?.errors)
        ? body.errors.map((e: { message?: string }) => e.message ?? String(e))
        : [];
      throw new ApiError(response.status, messages);
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  getDesign(): Promise<DesignDoc> {
    return this.request("/design");
  }

  getGrid(): Promise<GridDoc> {
    return this.request("/grid");
  }

  getDrc(): Promise<DrcDoc> {
    return this.request("/drc");
  }

  getMesh(folded: boolean): Promise<MeshResponse> {
    return this.request(`/mesh?folded=${folded}`);
  }

  putDesign(doc: DesignDoc): Promise<MutationResponse> {
    return this.request("/design", {
      method: "PUT",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(doc),
    });
  }

  addElement(kind: ElementKind, doc: unknown): Promise<MutationResponse> {
    return this.post(`/${kind}`, doc);
  }

  deleteElement(kind: ElementKind, id: string): Promise<MutationResponse> {
    return this.request(`/${kind}/${encodeURIComponent(id)}`, { method: "DELETE" });
  }

  save(): Promise<{ saved: string; bytes: number }> {
    return this.post("/save", {});
  }
}
