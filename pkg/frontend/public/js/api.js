// Thin typed client for the stylization service.
export class ApiError extends Error {
    status;
    detail;
    constructor(status, detail) {
        super(`HTTP ${status}: ${detail}`);
        this.status = status;
        this.detail = detail;
    }
}
async function parseError(resp) {
    let detail = resp.statusText;
    try {
        const body = (await resp.json());
        if (typeof body.detail === "string")
            detail = body.detail;
    }
    catch {
        // non-JSON error body; keep the status text
    }
    return new ApiError(resp.status, detail);
}
export class ApiClient {
    baseUrl;
    fetchFn;
    constructor(baseUrl = "", fetchFn = (...args) => fetch(...args)) {
        this.baseUrl = baseUrl;
        this.fetchFn = fetchFn;
    }
    url(path) {
        return `${this.baseUrl}${path}`;
    }
    async uploadScene(images, cameras) {
        const form = new FormData();
        for (const img of images)
            form.append("images", img.blob, img.name);
        if (cameras)
            form.append("cameras", cameras, "cameras.json");
        const resp = await this.fetchFn(this.url("/scenes"), { method: "POST", body: form });
        if (!resp.ok)
            throw await parseError(resp);
        return (await resp.json());
    }
    async listStyles() {
        const resp = await this.fetchFn(this.url("/styles"));
        if (!resp.ok)
            throw await parseError(resp);
        const body = (await resp.json());
        return body.styles;
    }
    async stylize(sceneId, body) {
        const resp = await this.fetchFn(this.url(`/scenes/${sceneId}/stylize`), {
            method: "POST",
            headers: { "content-type": "application/json" },
            body: JSON.stringify(body),
        });
        if (!resp.ok)
            throw await parseError(resp);
        return (await resp.json());
    }
    styleImageUrl(styleId) {
        return this.url(`/styles/${styleId}.png`);
    }
}
