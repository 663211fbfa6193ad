import { describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

describe("ApiClient", () => {
  it("stylize posts JSON to the scene endpoint", async () => {
    const fetchFn = vi.fn(async (url: string, init?: RequestInit) => {
      expect(url).toBe("http://api/scenes/s1/stylize");
      expect(init?.method).toBe("POST");
      expect(JSON.parse(init?.body as string)).toEqual({ style_text: "x" });
      return jsonResponse({ render_urls: ["/renders/a.png"], timings: { stylize_s: 0.1, render_s: 0.2, total_s: 0.3 } });
    });
    const api = new ApiClient("http://api", fetchFn);
    const resp = await api.stylize("s1", { style_text: "x" });
    expect(resp.render_urls).toEqual(["/renders/a.png"]);
    expect(fetchFn).toHaveBeenCalledOnce();
  });

  it("surfaces server error detail verbatim", async () => {
    const fetchFn = vi.fn(async () => jsonResponse({ detail: "unknown scene 'zz'" }, 404));
    const api = new ApiClient("", fetchFn);
    const err = await api.stylize("zz", { style_text: "x" }).catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(404);
    expect(err.message).toContain("unknown scene 'zz'");
  });

  it("handles non-JSON error bodies", async () => {
    const fetchFn = vi.fn(async () => new Response("boom", { status: 500, statusText: "Internal" }));
    const api = new ApiClient("", fetchFn);
    const err = await api.listStyles().catch((e) => e);
    expect(err.status).toBe(500);
  });

  it("uploads images as multipart form data", async () => {
    const fetchFn = vi.fn(async (_url: string, init?: RequestInit) => {
      const form = init?.body as FormData;
      expect(form.getAll("images").length).toBe(2);
      expect(form.get("cameras")).not.toBeNull();
      return jsonResponse({ scene_id: "deadbeef", n_views: 2 });
    });
    const api = new ApiClient("", fetchFn);
    const resp = await api.uploadScene(
      [
        { name: "a.png", blob: new Blob([new Uint8Array([1])]) },
        { name: "b.png", blob: new Blob([new Uint8Array([2])]) },
      ],
      new Blob(["[]"]),
    );
    expect(resp.scene_id).toBe("deadbeef");
  });
});
