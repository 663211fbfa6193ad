// Viewer state machine. Every user edit updates the state, validates it and
// schedules a debounced stylize request. Responses carry the token of the
// request that produced them; anything but the newest issued token is
// discarded, so the displayed render set always matches the latest state.
// Each successful request/response lands in the session history and can be
// reverted to (the server is deterministic, so reverts reproduce renders).
import { debounce } from "./debounce.js";
import { buildStylizeBody, validateIntent, } from "./types.js";
export const DEBOUNCE_MS = 300;
export class ViewerStore {
    api;
    now;
    state = {
        sceneId: null,
        nViews: 0,
        styleA: null,
        styleB: null,
        alpha: 0,
        viewIndices: null,
        renders: null,
        history: [],
        busy: false,
        error: null,
        validation: "upload a scene first",
    };
    listeners = [];
    issuedToken = 0;
    schedule;
    constructor(api, now = Date.now, debounceMs = DEBOUNCE_MS) {
        this.api = api;
        this.now = now;
        this.schedule = debounce(() => void this.fireStylize(), debounceMs);
    }
    getState() {
        return this.state;
    }
    subscribe(listener) {
        this.listeners.push(listener);
        return () => {
            this.listeners = this.listeners.filter((l) => l !== listener);
        };
    }
    setState(patch) {
        this.state = { ...this.state, ...patch };
        for (const listener of this.listeners)
            listener(this.state);
    }
    // --- scene upload -------------------------------------------------------
    async uploadScene(images, cameras) {
        this.setState({ busy: true, error: null });
        try {
            const resp = await this.api.uploadScene(images, cameras);
            this.setState({
                sceneId: resp.scene_id,
                nViews: resp.n_views,
                viewIndices: null,
                busy: false,
            });
            this.revalidate();
        }
        catch (err) {
            this.setState({ busy: false, error: describe(err) });
        }
    }
    // --- style console edits (each one schedules a debounced request) --------
    setStyleA(sel) {
        this.setState({ styleA: sel });
        this.onEdit();
    }
    setStyleB(sel) {
        this.setState({ styleB: sel });
        this.onEdit();
    }
    setAlpha(alpha) {
        this.setState({ alpha });
        this.onEdit();
    }
    setViewIndices(views) {
        this.setState({ viewIndices: views });
        this.onEdit();
    }
    intent() {
        return {
            sceneId: this.state.sceneId,
            nViews: this.state.nViews,
            styleA: this.state.styleA,
            styleB: this.state.styleB,
            alpha: this.state.alpha,
            viewIndices: this.state.viewIndices,
        };
    }
    revalidate() {
        this.setState({ validation: validateIntent(this.intent()) });
    }
    onEdit() {
        this.revalidate();
        if (this.state.validation === null) {
            this.schedule();
        }
        else {
            this.schedule.cancel();
        }
    }
    /** Fire any pending debounced request immediately (UI "apply now"). */
    flush() {
        this.schedule.flush();
    }
    pendingRequest() {
        return this.schedule.pending();
    }
    async fireStylize() {
        const validation = validateIntent(this.intent());
        if (validation !== null || this.state.sceneId === null) {
            this.setState({ validation });
            return;
        }
        const sceneId = this.state.sceneId;
        const body = buildStylizeBody(this.intent());
        const token = ++this.issuedToken;
        this.setState({ busy: true, error: null });
        try {
            const resp = await this.api.stylize(sceneId, body);
            if (token !== this.issuedToken)
                return; // stale: a newer request exists
            this.setState({
                renders: { urls: resp.render_urls, timings: resp.timings, token },
                history: [
                    ...this.state.history,
                    { sceneId, body, urls: resp.render_urls, at: this.now() },
                ],
                busy: false,
            });
        }
        catch (err) {
            if (token !== this.issuedToken)
                return;
            this.setState({ busy: false, error: describe(err) });
        }
    }
    /** Re-apply a prior request; server determinism reproduces its renders. */
    revertTo(index) {
        const entry = this.state.history[index];
        if (!entry)
            throw new Error(`no history entry ${index}`);
        const body = entry.body;
        const styleA = body.style_text !== undefined
            ? { kind: "text", text: body.style_text }
            : body.style_image_id !== undefined
                ? { kind: "image", styleId: body.style_image_id }
                : null;
        const styleB = body.second
            ? body.second.style_text !== undefined
                ? { kind: "text", text: body.second.style_text }
                : body.second.style_image_id !== undefined
                    ? { kind: "image", styleId: body.second.style_image_id }
                    : null
            : null;
        this.setState({
            styleA,
            styleB,
            alpha: body.alpha ?? 0,
            viewIndices: body.view_indices ?? null,
        });
        this.revalidate();
        this.schedule.cancel();
        void this.fireStylize();
    }
}
function describe(err) {
    if (err instanceof Error)
        return err.message;
    return String(err);
}
