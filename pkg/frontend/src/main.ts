import { HttpApiClient } from "./api.js";
import { SessionController } from "./controller.js";
import { App } from "./dom.js";

// Entry point: ?api=... selects the service base URL, default same host
// on port 8000; ?mode=... picks the interaction flavor.

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("api") ?? `http://${window.location.hostname}:8000`;
const mode = params.get("mode") ?? "buttons9";

const root = document.getElementById("app")!;
const picker = document.getElementById("mode-picker")!;

for (const m of ["known2", "buttons9", "touch", "sketch"]) {
  const link = document.createElement("a");
  link.href = `?api=${encodeURIComponent(baseUrl)}&mode=${m}`;
  link.textContent = m;
  link.className = m === mode ? "mode current" : "mode";
  picker.append(link);
}

const api = new HttpApiClient(baseUrl);
const controller = new SessionController(api, () => app.render());
const app = new App(root, controller);

controller
  .create(mode)
  .then(() => app.render())
  .catch((err) => {
    root.replaceChildren();
    const banner = document.createElement("div");
    banner.className = "banner error";
    banner.textContent = `cannot reach service at ${baseUrl}: ${err}`;
    root.append(banner);
  });
