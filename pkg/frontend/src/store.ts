// Viewer state machine. Every user edit updates the state, validates it and
// schedules a debounced stylize request. Responses carry the token of the
// request that produced them; anything but the newest issued token is
// discarded, so the displayed render set always matches the latest state.
// Each successful request/response lands in the session history and can be
// reverted to (the server is deterministic, so reverts reproduce renders).

import type { ApiClient } from "./api.js";
import { debounce, type Debounced } from "./debounce.js";
import {
  buildStylizeBody,
  validateIntent,
  type StyleSelection,
  type StylizeBody,
  type StylizeResponse,
} from "./types.js";

export interface RenderSet {
  urls: string[];
  timings: StylizeResponse["timings"];
  token: number;
}

export interface HistoryEntry {
  sceneId: string;
  body: StylizeBody;
  urls: string[];
  at: number;
}

export interface ViewerState {
  sceneId: string | null;
  nViews: number;
  styleA: StyleSelection | null;
  styleB: StyleSelection | null;
  alpha: number;
  viewIndices: number[] | null;
  renders: RenderSet | null;
  history: HistoryEntry[];
  busy: boolean;
  error: string | null;
  validation: string | null;
}

export const DEBOUNCE_MS = 300;

type Listener = (state: ViewerState) => void;

export class ViewerStore {
  private state: ViewerState = {
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
  private listeners: Listener[] = [];
  private issuedToken = 0;
  private readonly schedule: Debounced<[]>;

  constructor(
    private readonly api: ApiClient,
    private readonly now: () => number = Date.now,
    debounceMs: number = DEBOUNCE_MS,
  ) {
    this.schedule = debounce(() => void this.fireStylize(), debounceMs);
  }

  getState(): ViewerState {
    return this.state;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private setState(patch: Partial<ViewerState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) listener(this.state);
  }

  // --- scene upload -------------------------------------------------------

  async uploadScene(images: { name: string; blob: Blob }[], cameras?: Blob): Promise<void> {
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
    } catch (err) {
      this.setState({ busy: false, error: describe(err) });
    }
  }

  // --- style console edits (each one schedules a debounced request) --------

  setStyleA(sel: StyleSelection | null): void {
    this.setState({ styleA: sel });
    this.onEdit();
  }

  setStyleB(sel: StyleSelection | null): void {
    this.setState({ styleB: sel });
    this.onEdit();
  }

  setAlpha(alpha: number): void {
    this.setState({ alpha });
    this.onEdit();
  }

  setViewIndices(views: number[] | null): void {
    this.setState({ viewIndices: views });
    this.onEdit();
  }

  private intent() {
    return {
      sceneId: this.state.sceneId,
      nViews: this.state.nViews,
      styleA: this.state.styleA,
      styleB: this.state.styleB,
      alpha: this.state.alpha,
      viewIndices: this.state.viewIndices,
    };
  }

  private revalidate(): void {
    this.setState({ validation: validateIntent(this.intent()) });
  }

  private onEdit(): void {
    this.revalidate();
    if (this.state.validation === null) {
      this.schedule();
    } else {
      this.schedule.cancel();
    }
  }

  /** Fire any pending debounced request immediately (UI "apply now"). */
  flush(): void {
    this.schedule.flush();
  }

  pendingRequest(): boolean {
    return this.schedule.pending();
  }

  private async fireStylize(): Promise<void> {
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
      if (token !== this.issuedToken) return; // stale: a newer request exists
      this.setState({
        renders: { urls: resp.render_urls, timings: resp.timings, token },
        history: [
          ...this.state.history,
          { sceneId, body, urls: resp.render_urls, at: this.now() },
        ],
        busy: false,
      });
    } catch (err) {
      if (token !== this.issuedToken) return;
      this.setState({ busy: false, error: describe(err) });
    }
  }

  /** Re-apply a prior request; server determinism reproduces its renders. */
  revertTo(index: number): void {
    const entry = this.state.history[index];
    if (!entry) throw new Error(`no history entry ${index}`);
    const body = entry.body;
    const styleA: StyleSelection | null = body.style_text !== undefined
      ? { kind: "text", text: body.style_text }
      : body.style_image_id !== undefined
        ? { kind: "image", styleId: body.style_image_id }
        : null;
    const styleB: StyleSelection | null = body.second
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

function describe(err: unknown): string {
  if (err instanceof Error) return err.message;
  return String(err);
}
