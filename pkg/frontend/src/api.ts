// Thin typed client for the stylization service.

import type {
  SceneUploadResponse,
  StyleListEntry,
  StylizeBody,
  StylizeResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function parseError(resp: Response): Promise<ApiError> {
  let detail = resp.statusText;
  try {
    const body = (await resp.json()) as { detail?: unknown };
    if (typeof body.detail === "string") detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  return new ApiError(resp.status, detail);
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async uploadScene(
    images: { name: string; blob: Blob }[],
    cameras?: Blob,
  ): Promise<SceneUploadResponse> {
    const form = new FormData();
    for (const img of images) form.append("images", img.blob, img.name);
    if (cameras) form.append("cameras", cameras, "cameras.json");
    const resp = await this.fetchFn(this.url("/scenes"), { method: "POST", body: form });
    if (!resp.ok) throw await parseError(resp);
    return (await resp.json()) as SceneUploadResponse;
  }

  async listStyles(): Promise<StyleListEntry[]> {
    const resp = await this.fetchFn(this.url("/styles"));
    if (!resp.ok) throw await parseError(resp);
    const body = (await resp.json()) as { styles: StyleListEntry[] };
    return body.styles;
  }

  async stylize(sceneId: string, body: StylizeBody): Promise<StylizeResponse> {
    const resp = await this.fetchFn(this.url(`/scenes/${sceneId}/stylize`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!resp.ok) throw await parseError(resp);
    return (await resp.json()) as StylizeResponse;
  }

  styleImageUrl(styleId: string): string {
    return this.url(`/styles/${styleId}.png`);
  }
}
