// Wire types for the stylization service plus client-side request validation
// that mirrors the server's rules, so the UI never issues a request the
// server would reject.

export type StyleSelection =
  | { kind: "text"; text: string }
  | { kind: "image"; styleId: string };

export interface StyleSelectorBody {
  style_text?: string;
  style_image_id?: string;
}

export interface StylizeBody extends StyleSelectorBody {
  second?: StyleSelectorBody;
  alpha?: number;
  view_indices?: number[];
}

export interface StylizeResponse {
  render_urls: string[];
  timings: { stylize_s: number; render_s: number; total_s: number };
}

export interface SceneUploadResponse {
  scene_id: string;
  n_views: number;
}

export interface StyleListEntry {
  style_id: string;
  caption: string;
  image_path: string;
}

export function selectorBody(sel: StyleSelection): StyleSelectorBody {
  return sel.kind === "text" ? { style_text: sel.text } : { style_image_id: sel.styleId };
}

export interface StylizeIntent {
  sceneId: string | null;
  nViews: number;
  styleA: StyleSelection | null;
  styleB: StyleSelection | null;
  alpha: number;
  viewIndices: number[] | null;
}

/** Returns a human-readable reason the request is not sendable, or null. */
export function validateIntent(intent: StylizeIntent): string | null {
  if (intent.sceneId === null) return "upload a scene first";
  if (intent.styleA === null) return "pick style A (prompt or gallery image)";
  if (intent.styleA.kind === "text" && intent.styleA.text.trim() === "") {
    return "style A prompt is empty";
  }
  if (intent.styleB !== null) {
    if (intent.styleB.kind === "text" && intent.styleB.text.trim() === "") {
      return "style B prompt is empty";
    }
    if (!(intent.alpha >= 0 && intent.alpha <= 1)) {
      return "alpha must be in [0, 1]";
    }
  }
  if (intent.viewIndices !== null) {
    for (const v of intent.viewIndices) {
      if (!Number.isInteger(v) || v < 0 || v >= intent.nViews) {
        return `view index ${v} outside [0, ${intent.nViews - 1}]`;
      }
    }
  }
  return null;
}

/** Builds the request body; call only after validateIntent returned null. */
export function buildStylizeBody(intent: StylizeIntent): StylizeBody {
  if (intent.styleA === null) throw new Error("style A not set");
  const body: StylizeBody = { ...selectorBody(intent.styleA) };
  if (intent.styleB !== null) {
    body.second = selectorBody(intent.styleB);
    body.alpha = intent.alpha;
  }
  if (intent.viewIndices !== null) body.view_indices = intent.viewIndices;
  return body;
}
