import { afterEach, describe, expect, it, vi } from "vitest";

import { GatewayClient, GatewayError } from "../src/api.js";

interface Call {
  url: string;
  method: string;
  body: unknown;
}

function install(respond: (url: string) => Response): Call[] {
  const calls: Call[] = [];
  vi.stubGlobal(
    "fetch",
    vi.fn(async (url: string, init?: RequestInit) => {
      calls.push({
        url,
        method: init?.method ?? "GET",
        body: init?.body ? JSON.parse(init.body as string) : undefined,
      });
      return respond(url);
    }),
  );
  return calls;
}

function json(doc: unknown, status = 200): Response {
  return new Response(JSON.stringify(doc), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("GatewayClient request shapes", () => {
  it("gets the scene snapshot from /scene", async () => {
    const calls = install(() => json({ scene: "rural", entities: [] }));
    const snap = await new GatewayClient().getScene();
    expect(calls[0]).toMatchObject({ url: "/scene", method: "GET" });
    expect(snap.scene).toBe("rural");
  });

  it("URL-encodes names passed to the validator", async () => {
    const calls = install(() => json({ name: "a b", status: "invalid_identifier" }));
    const status = await new GatewayClient().validateName("a b&c");
    expect(status).toBe("invalid_identifier");
    expect(calls[0].url).toBe("/scene/validate-name?name=a%20b%26c");
  });

  it("posts scene loads, toggles, and preset applications", async () => {
    const calls = install(() => json({ warnings: [] }));
    const client = new GatewayClient();
    await client.loadScene("city");
    await client.toggleFeature("e001", "FovRestrictor", false);
    const preset = {
      preset_name: "p",
      target_type: "FovRestrictor",
      schema_version: 1,
      values: {},
    };
    await client.applyPreset("e001", preset);
    await client.extractPreset("e001", "FovRestrictor", "mine");
    expect(calls.map((c) => c.url)).toEqual([
      "/scene",
      "/presets/toggle",
      "/presets/apply",
      "/presets/extract",
    ]);
    expect(calls[0].body).toEqual({ name: "city" });
    expect(calls[1].body).toEqual({
      entity: "e001",
      type: "FovRestrictor",
      enabled: false,
    });
    expect(calls[2].body).toEqual({ entity: "e001", preset });
    expect(calls[3].body).toEqual({
      entity: "e001",
      type: "FovRestrictor",
      name: "mine",
    });
  });

  it("unwraps the presets listing", async () => {
    install(() => json({ presets: [{ preset_name: "a" }] }));
    const presets = await new GatewayClient().listPresets();
    expect(presets).toHaveLength(1);
    expect(presets[0].preset_name).toBe("a");
  });

  it("wraps session start payloads and omits absent auto rating", async () => {
    const calls = install(() => json({ started: true, plan: "p", scene: "s" }));
    const client = new GatewayClient();
    const plan = {
      name: "p",
      seed: 1,
      dt: 0.02,
      log_rate: 50,
      exposure_duration: 10,
      fms_interval: 5,
      fms_scale_min: 0,
      fms_scale_max: 20,
      providers: { left: [], right: [] },
      provider_values: {},
    };
    await client.startSession(plan);
    await client.startSession(plan, 0, 4);
    expect(calls[0].body).toEqual({ plan, speed: 1 });
    expect(calls[1].body).toEqual({ plan, speed: 0, auto_fms: 4 });
  });

  it("posts ratings and stop requests", async () => {
    const calls = install(() => json({ accepted: true, stopped: true, summary: null }));
    const client = new GatewayClient();
    await client.submitRating(7);
    await client.stopSession();
    expect(calls[0]).toMatchObject({ url: "/fms", body: { rating: 7 } });
    expect(calls[1]).toMatchObject({ url: "/session/stop", method: "POST" });
  });

  it("prefixes every path with the configured base URL", async () => {
    const calls = install(() => json({ loaded: false }));
    await new GatewayClient("http://h:9").getSet();
    expect(calls[0].url).toBe("http://h:9/set");
  });
});

describe("GatewayClient error mapping", () => {
  it("raises GatewayError with the gateway's detail string", async () => {
    install(() => json({ detail: "a session is already running" }, 409));
    const err = await new GatewayClient()
      .stopSession()
      .then(() => null, (e: unknown) => e);
    expect(err).toBeInstanceOf(GatewayError);
    expect((err as GatewayError).status).toBe(409);
    expect((err as GatewayError).detail).toBe("a session is already running");
  });

  it("falls back to the status text for non-JSON error bodies", async () => {
    install(() => new Response("boom", { status: 500, statusText: "Server Error" }));
    const err = await new GatewayClient()
      .getScene()
      .then(() => null, (e: unknown) => e);
    expect(err).toBeInstanceOf(GatewayError);
    expect((err as GatewayError).detail).toBe("Server Error");
  });
});
