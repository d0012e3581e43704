/** Typed HTTP client for the gateway's JSON endpoints. */

import type {
  NameStatus,
  PresetDoc,
  SceneSnapshot,
  SessionPlanDoc,
  SessionSnapshot,
  SessionSummary,
  SetSnapshot,
} from "./types.js";

/** Non-2xx response, carrying the gateway's detail message. */
export class GatewayError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "GatewayError";
  }
}

/** The surface the views depend on; tests substitute fakes. */
export interface Gateway {
  getScene(): Promise<SceneSnapshot>;
  validateName(name: string): Promise<NameStatus>;
  loadScene(name: string): Promise<{ scene: string }>;
  listPresets(): Promise<PresetDoc[]>;
  toggleFeature(entity: string, type: string, enabled: boolean): Promise<void>;
  applyPreset(entity: string, preset: PresetDoc): Promise<{ warnings: string[] }>;
  extractPreset(entity: string, type: string, name: string): Promise<PresetDoc>;
  getSession(): Promise<SessionSnapshot>;
  startSession(
    plan: SessionPlanDoc,
    speed?: number,
    autoFms?: number | null,
  ): Promise<{ started: boolean; plan: string; scene: string }>;
  stopSession(): Promise<{ stopped: boolean; summary: SessionSummary | null }>;
  submitRating(rating: number): Promise<void>;
  getSet(): Promise<SetSnapshot>;
  advanceSet(payload: Record<string, unknown>): Promise<{
    current: string | null;
    done: boolean;
    scene?: string;
  }>;
}

export class GatewayClient implements Gateway {
  constructor(private base = "") {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const resp = await fetch(this.base + path, init);
    if (!resp.ok) {
      let detail = resp.statusText || `status ${resp.status}`;
      try {
        const doc = (await resp.json()) as { detail?: unknown };
        if (typeof doc.detail === "string") detail = doc.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new GatewayError(resp.status, detail);
    }
    return (await resp.json()) as T;
  }

  getScene(): Promise<SceneSnapshot> {
    return this.request("GET", "/scene");
  }

  async validateName(name: string): Promise<NameStatus> {
    const doc = await this.request<{ status: NameStatus }>(
      "GET",
      `/scene/validate-name?name=${encodeURIComponent(name)}`,
    );
    return doc.status;
  }

  loadScene(name: string): Promise<{ scene: string }> {
    return this.request("POST", "/scene", { name });
  }

  async listPresets(): Promise<PresetDoc[]> {
    const doc = await this.request<{ presets: PresetDoc[] }>("GET", "/presets");
    return doc.presets;
  }

  async toggleFeature(entity: string, type: string, enabled: boolean): Promise<void> {
    await this.request("POST", "/presets/toggle", { entity, type, enabled });
  }

  applyPreset(entity: string, preset: PresetDoc): Promise<{ warnings: string[] }> {
    return this.request("POST", "/presets/apply", { entity, preset });
  }

  extractPreset(entity: string, type: string, name: string): Promise<PresetDoc> {
    return this.request("POST", "/presets/extract", { entity, type, name });
  }

  getSession(): Promise<SessionSnapshot> {
    return this.request("GET", "/session");
  }

  startSession(
    plan: SessionPlanDoc,
    speed = 1.0,
    autoFms: number | null = null,
  ): Promise<{ started: boolean; plan: string; scene: string }> {
    const payload: Record<string, unknown> = { plan, speed };
    if (autoFms !== null) payload.auto_fms = autoFms;
    return this.request("POST", "/session/start", payload);
  }

  stopSession(): Promise<{ stopped: boolean; summary: SessionSummary | null }> {
    return this.request("POST", "/session/stop", {});
  }

  async submitRating(rating: number): Promise<void> {
    await this.request("POST", "/fms", { rating });
  }

  getSet(): Promise<SetSnapshot> {
    return this.request("GET", "/set");
  }

  advanceSet(payload: Record<string, unknown>): Promise<{
    current: string | null;
    done: boolean;
    scene?: string;
  }> {
    return this.request("POST", "/set/advance", payload);
  }
}
