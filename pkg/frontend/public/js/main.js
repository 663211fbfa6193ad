import { ApiClient } from "./api.js";
import { ViewerStore } from "./store.js";
import { mountViewer } from "./ui.js";
// Same-origin by default; point elsewhere with ?api=http://host:port
const params = new URLSearchParams(window.location.search);
const api = new ApiClient(params.get("api") ?? "");
const store = new ViewerStore(api);
mountViewer(store, api);
