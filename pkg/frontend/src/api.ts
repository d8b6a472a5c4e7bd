// Thin typed client over the warehouse HTTP API. The fetch implementation is
// injectable so tests can replay recorded exchanges.

import type {
  CellRef,
  CubeQuery,
  DimensionsResponse,
  ResultGrid,
  ScenePlayback,
  SeverityMapResponse,
} from "./types.js";

export interface FetchResponseLike {
  ok: boolean;
  status: number;
  text(): Promise<string>;
}

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<FetchResponseLike>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`API ${status}: ${detail}`);
  }
}

async function parseError(res: FetchResponseLike): Promise<ApiError> {
  const text = await res.text();
  try {
    const body = JSON.parse(text) as { detail?: string; error?: string };
    return new ApiError(res.status, body.detail ?? body.error ?? text);
  } catch {
    return new ApiError(res.status, text);
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (...args) =>
      (globalThis.fetch as unknown as FetchLike)(...args),
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const res = await this.fetchImpl(this.baseUrl + path);
    if (!res.ok) throw await parseError(res);
    return JSON.parse(await res.text()) as T;
  }

  private async postJson<T>(path: string, body: unknown): Promise<{ parsed: T; raw: string }> {
    const res = await this.fetchImpl(this.baseUrl + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!res.ok) throw await parseError(res);
    const raw = await res.text();
    return { parsed: JSON.parse(raw) as T, raw };
  }

  dimensions(): Promise<DimensionsResponse> {
    return this.getJson("/dimensions");
  }

  /** Returns both the parsed grid and the exact response bytes; the UI keeps
   * and displays the server's grid verbatim. */
  query(q: CubeQuery): Promise<{ parsed: ResultGrid; raw: string }> {
    return this.postJson<ResultGrid>("/cube/query", q);
  }

  async drillThrough(cell: CellRef): Promise<string[]> {
    const { parsed } = await this.postJson<{ scene_codes: string[]; count: number }>(
      "/cube/drill-through",
      cell,
    );
    return parsed.scene_codes;
  }

  scene(code: string): Promise<ScenePlayback> {
    return this.getJson(`/scenes/${encodeURIComponent(code)}`);
  }

  severityMap(level: string): Promise<SeverityMapResponse> {
    return this.getJson(`/severity-map?level=${encodeURIComponent(level)}`);
  }
}
