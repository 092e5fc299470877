import { ApiClient } from "./api.js";
import { App } from "./app.js";

/**
 * The service address is configurable without a rebuild: an `?api=` query
 * parameter wins, then a `FLOWLENS_API` global set by the embedding page,
 * then the default local address.
 */
function apiBase(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("api");
  if (fromQuery !== null && fromQuery !== "") {
    return fromQuery;
  }
  const fromGlobal = (window as unknown as { FLOWLENS_API?: string }).FLOWLENS_API;
  if (typeof fromGlobal === "string" && fromGlobal !== "") {
    return fromGlobal;
  }
  return "http://127.0.0.1:8000";
}

const root = document.getElementById("app");
if (root === null) {
  throw new Error("missing #app container");
}
const app = new App(root, new ApiClient(apiBase()));
void app.init();
