// Wire types for the stylization service plus client-side request validation
// that mirrors the server's rules, so the UI never issues a request the
// server would reject.
export function selectorBody(sel) {
    return sel.kind === "text" ? { style_text: sel.text } : { style_image_id: sel.styleId };
}
/** Returns a human-readable reason the request is not sendable, or null. */
export function validateIntent(intent) {
    if (intent.sceneId === null)
        return "upload a scene first";
    if (intent.styleA === null)
        return "pick style A (prompt or gallery image)";
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
export function buildStylizeBody(intent) {
    if (intent.styleA === null)
        throw new Error("style A not set");
    const body = { ...selectorBody(intent.styleA) };
    if (intent.styleB !== null) {
        body.second = selectorBody(intent.styleB);
        body.alpha = intent.alpha;
    }
    if (intent.viewIndices !== null)
        body.view_indices = intent.viewIndices;
    return body;
}
