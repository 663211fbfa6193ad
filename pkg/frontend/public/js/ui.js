// DOM wiring: renders ViewerState into the page and forwards events to the
// store. All decisions live in the store; this layer is intentionally dumb.
function el(id) {
    const node = document.getElementById(id);
    if (!node)
        throw new Error(`missing #${id}`);
    return node;
}
export function mountViewer(store, api) {
    const uploadInput = el("upload-images");
    const camerasInput = el("upload-cameras");
    const uploadButton = el("upload-button");
    const sceneLabel = el("scene-id");
    const thumbs = el("thumbs");
    const promptA = el("prompt-a");
    const promptB = el("prompt-b");
    const clearB = el("clear-b");
    const alphaSlider = el("alpha");
    const alphaLabel = el("alpha-value");
    const galleryA = el("gallery-a");
    const galleryB = el("gallery-b");
    const grid = el("render-grid");
    const timingsLabel = el("timings");
    const banner = el("error-banner");
    const validationLabel = el("validation");
    const historyList = el("history");
    uploadButton.addEventListener("click", () => {
        const files = Array.from(uploadInput.files ?? []);
        if (files.length === 0)
            return;
        thumbs.replaceChildren(...files.map((f) => {
            const img = document.createElement("img");
            img.src = URL.createObjectURL(f);
            img.className = "thumb";
            return img;
        }));
        const cameras = camerasInput.files?.[0] ?? undefined;
        void store.uploadScene(files.map((f) => ({ name: f.name, blob: f })), cameras);
    });
    promptA.addEventListener("input", () => {
        store.setStyleA(promptA.value.trim() === "" ? null : { kind: "text", text: promptA.value });
    });
    promptB.addEventListener("input", () => {
        store.setStyleB(promptB.value.trim() === "" ? null : { kind: "text", text: promptB.value });
    });
    clearB.addEventListener("click", () => {
        promptB.value = "";
        store.setStyleB(null);
    });
    alphaSlider.addEventListener("input", () => {
        store.setAlpha(Number(alphaSlider.value));
    });
    const styleTile = (entry, pick) => {
        const tile = document.createElement("button");
        tile.className = "style-tile";
        tile.title = entry.caption;
        const img = document.createElement("img");
        img.src = api.styleImageUrl(entry.style_id);
        img.alt = entry.caption;
        tile.append(img, document.createTextNode(entry.style_id));
        tile.addEventListener("click", () => pick({ kind: "image", styleId: entry.style_id }));
        return tile;
    };
    void api
        .listStyles()
        .then((styles) => {
        galleryA.replaceChildren(...styles.map((s) => styleTile(s, (sel) => {
            promptA.value = "";
            store.setStyleA(sel);
        })));
        galleryB.replaceChildren(...styles.map((s) => styleTile(s, (sel) => {
            promptB.value = "";
            store.setStyleB(sel);
        })));
    })
        .catch((err) => {
        banner.textContent = `style library unavailable: ${String(err)}`;
        banner.hidden = false;
    });
    store.subscribe((state) => {
        sceneLabel.textContent = state.sceneId ?? "none";
        alphaLabel.textContent = state.alpha.toFixed(2);
        banner.hidden = state.error === null;
        banner.textContent = state.error ?? "";
        validationLabel.textContent = state.validation ?? (state.busy ? "working..." : "ready");
        if (state.renders) {
            grid.replaceChildren(...state.renders.urls.map((u) => {
                const img = document.createElement("img");
                img.src = api.url(u);
                img.className = "render";
                return img;
            }));
            timingsLabel.textContent =
                `stylize ${(state.renders.timings.stylize_s * 1e3).toFixed(1)} ms, ` +
                    `render ${(state.renders.timings.render_s * 1e3).toFixed(1)} ms`;
        }
        historyList.replaceChildren(...state.history.map((entry, i) => {
            const item = document.createElement("li");
            const label = entry.body.style_text ?? entry.body.style_image_id ?? "?";
            const second = entry.body.second
                ? ` + ${entry.body.second.style_text ?? entry.body.second.style_image_id} @ ${entry.body.alpha}`
                : "";
            const btn = document.createElement("button");
            btn.textContent = `#${i} ${label}${second}`;
            btn.addEventListener("click", () => store.revertTo(i));
            item.append(btn);
            return item;
        }));
    });
}
