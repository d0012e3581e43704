/** Panel entry point: wires the client, views, and telemetry stream. */

import { GatewayClient } from "./api.js";
import { SceneView } from "./scene-view.js";
import { SessionView } from "./session-view.js";
import { TelemetryStream } from "./sse.js";

function getElement<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function boot(): void {
  const client = new GatewayClient("");
  const statusText = getElement<HTMLElement>("status-text");
  const connChip = getElement<HTMLElement>("conn-chip");

  const notify = (message: string, isError = false): void => {
    statusText.textContent = message;
    statusText.className = isError ? "error" : "";
  };

  const setupRoot = getElement<HTMLElement>("setup-root");
  const sessionRoot = getElement<HTMLElement>("session-root");
  const sceneView = new SceneView(setupRoot, client, notify);
  const sessionView = new SessionView(sessionRoot, client, notify);

  const tabSetup = getElement<HTMLButtonElement>("tab-setup");
  const tabSession = getElement<HTMLButtonElement>("tab-session");
  const activate = (which: "setup" | "session"): void => {
    setupRoot.classList.toggle("hidden", which !== "setup");
    sessionRoot.classList.toggle("hidden", which !== "session");
    tabSetup.classList.toggle("active", which === "setup");
    tabSession.classList.toggle("active", which === "session");
  };
  tabSetup.addEventListener("click", () => activate("setup"));
  tabSession.addEventListener("click", () => activate("session"));
  activate("setup");

  const stream = new TelemetryStream("/events", {
    onFrame: (frame) => sessionView.onFrame(frame),
    onStatus: (status) => {
      connChip.textContent = status;
      connChip.className = `chip conn-${status}`;
    },
  });
  stream.start();

  sceneView.refresh().catch((err) => notify(String(err), true));
}

window.addEventListener("load", boot);
