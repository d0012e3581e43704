/** Session panel: plan form, live telemetry readouts, and rating prompts. */

import type { Gateway } from "./api.js";
import { StripChart } from "./chart.js";
import { describeError, el, type Notify } from "./dom.js";
import type { SessionPlanDoc, TelemetryFrame } from "./types.js";

const PROVIDER_KINDS = [
  "",
  "ContinuousMove",
  "ContinuousTurn",
  "SnapTurn",
  "Teleport",
  "PathFollow",
];

const FMS_MIN = 0;
const FMS_MAX = 20;

function numberValue(input: HTMLInputElement, fallback: number): number {
  const v = parseFloat(input.value);
  return Number.isFinite(v) ? v : fallback;
}

export class SessionView {
  private nameInput!: HTMLInputElement;
  private seedInput!: HTMLInputElement;
  private exposureInput!: HTMLInputElement;
  private fmsIntervalInput!: HTMLInputElement;
  private leftSelect!: HTMLSelectElement;
  private rightSelect!: HTMLSelectElement;
  private followSpeedInput!: HTMLInputElement;
  private coinInput!: HTMLInputElement;
  private speedInput!: HTMLInputElement;
  private autoCheck!: HTMLInputElement;
  private autoValue!: HTMLInputElement;

  private phaseText!: HTMLElement;
  private clockText!: HTMLElement;
  private coinsText!: HTMLElement;
  private promptChip!: HTMLElement;
  private eventsList!: HTMLUListElement;
  private summaryPre!: HTMLPreElement;
  private modal!: HTMLElement;
  private modalSlider!: HTMLInputElement;
  private modalValue!: HTMLElement;

  private fovChart!: StripChart;
  private opacityChart!: StripChart;
  private summaryShown = false;

  constructor(
    private root: HTMLElement,
    private client: Gateway,
    private notify: Notify,
  ) {
    this.build();
  }

  // -- construction -----------------------------------------------------------

  private build(): void {
    this.root.textContent = "";
    this.root.appendChild(this.buildForm());
    this.root.appendChild(this.buildStatus());
    this.root.appendChild(this.buildModal());
  }

  private labeled(text: string, control: HTMLElement): HTMLElement {
    const wrap = el("label", "field");
    wrap.appendChild(el("span", "label", text));
    wrap.appendChild(control);
    return wrap;
  }

  private textInput(id: string, value: string, size = 8): HTMLInputElement {
    const input = el("input");
    input.id = id;
    input.type = "text";
    input.value = value;
    input.size = size;
    return input;
  }

  private providerSelect(id: string, value: string): HTMLSelectElement {
    const select = el("select");
    select.id = id;
    for (const kind of PROVIDER_KINDS) {
      const opt = el("option", "", kind === "" ? "(none)" : kind);
      opt.value = kind;
      select.appendChild(opt);
    }
    select.value = value;
    return select;
  }

  private buildForm(): HTMLElement {
    const card = el("div", "card");
    card.appendChild(el("div", "card-title", "Session plan"));

    this.nameInput = this.textInput("plan-name", "panel");
    this.seedInput = this.textInput("plan-seed", "0", 4);
    this.exposureInput = this.textInput("plan-exposure", "60", 6);
    this.fmsIntervalInput = this.textInput("plan-fms-interval", "15", 6);
    this.leftSelect = this.providerSelect("plan-left", "ContinuousMove");
    this.rightSelect = this.providerSelect("plan-right", "SnapTurn");
    this.followSpeedInput = this.textInput("plan-follow-speed", "3", 4);
    this.coinInput = this.textInput("plan-coins", "", 4);
    this.speedInput = this.textInput("plan-speed", "1", 4);
    this.autoCheck = el("input");
    this.autoCheck.id = "plan-auto";
    this.autoCheck.type = "checkbox";
    this.autoValue = this.textInput("plan-auto-value", "3", 3);

    const grid = el("div", "form-grid");
    grid.appendChild(this.labeled("name", this.nameInput));
    grid.appendChild(this.labeled("seed", this.seedInput));
    grid.appendChild(this.labeled("exposure s", this.exposureInput));
    grid.appendChild(this.labeled("prompt every s", this.fmsIntervalInput));
    grid.appendChild(this.labeled("left hand", this.leftSelect));
    grid.appendChild(this.labeled("right hand", this.rightSelect));
    grid.appendChild(this.labeled("path speed m/s", this.followSpeedInput));
    grid.appendChild(this.labeled("coins", this.coinInput));
    grid.appendChild(this.labeled("pace x", this.speedInput));
    grid.appendChild(this.labeled("scripted rating", this.autoCheck));
    grid.appendChild(this.labeled("rating value", this.autoValue));
    card.appendChild(grid);

    const row = el("div", "row");
    const start = el("button", "primary", "Start session");
    start.id = "session-start";
    start.addEventListener("click", () => void this.start());
    const stop = el("button", "", "Stop session");
    stop.id = "session-stop";
    stop.addEventListener("click", () => void this.stop());
    row.appendChild(start);
    row.appendChild(stop);
    card.appendChild(row);
    return card;
  }

  private buildStatus(): HTMLElement {
    const card = el("div", "card");
    card.appendChild(el("div", "card-title", "Live session"));

    const grid = el("div", "status-grid");
    this.phaseText = el("span", "status-value", "Idle");
    this.phaseText.id = "phase-text";
    this.clockText = el("span", "status-value", "0.0 s");
    this.clockText.id = "clock-text";
    this.coinsText = el("span", "status-value", "0");
    this.coinsText.id = "coins-text";
    this.promptChip = el("span", "chip hidden", "rating requested");
    this.promptChip.id = "prompt-chip";
    grid.appendChild(this.labeled("phase", this.phaseText));
    grid.appendChild(this.labeled("clock", this.clockText));
    grid.appendChild(this.labeled("coins", this.coinsText));
    grid.appendChild(this.promptChip);
    card.appendChild(grid);

    const charts = el("div", "charts");
    const fovCanvas = el("canvas", "chart");
    fovCanvas.width = 340;
    fovCanvas.height = 90;
    const opacityCanvas = el("canvas", "chart");
    opacityCanvas.width = 340;
    opacityCanvas.height = 90;
    charts.appendChild(fovCanvas);
    charts.appendChild(opacityCanvas);
    card.appendChild(charts);
    this.fovChart = new StripChart(fovCanvas, { label: "field of view", unit: "deg" });
    this.opacityChart = new StripChart(opacityCanvas, {
      label: "fade opacity",
      min: 0,
      max: 1,
    });

    this.eventsList = el("ul", "events");
    this.eventsList.id = "event-list";
    card.appendChild(this.eventsList);

    this.summaryPre = el("pre", "summary hidden");
    this.summaryPre.id = "summary-pre";
    card.appendChild(this.summaryPre);
    return card;
  }

  private buildModal(): HTMLElement {
    this.modal = el("div", "modal-overlay hidden");
    this.modal.id = "fms-modal";
    const card = el("div", "card modal-card");
    card.appendChild(el("div", "card-title", "How do you feel right now?"));
    card.appendChild(
      el("p", "modal-help", `${FMS_MIN} = no discomfort, ${FMS_MAX} = severe`),
    );

    this.modalSlider = el("input");
    this.modalSlider.id = "fms-slider";
    this.modalSlider.type = "range";
    this.modalSlider.min = String(FMS_MIN);
    this.modalSlider.max = String(FMS_MAX);
    this.modalSlider.value = "0";
    this.modalValue = el("span", "modal-value", "0");
    this.modalSlider.addEventListener("input", () => {
      this.modalValue.textContent = this.modalSlider.value;
    });

    const row = el("div", "row");
    row.appendChild(this.modalSlider);
    row.appendChild(this.modalValue);
    card.appendChild(row);

    const submit = el("button", "primary", "Submit rating");
    submit.id = "fms-submit";
    submit.addEventListener("click", () => void this.submitRating());
    card.appendChild(submit);
    this.modal.appendChild(card);
    return this.modal;
  }

  // -- behavior ---------------------------------------------------------------

  onFrame(frame: TelemetryFrame): void {
    this.phaseText.textContent = frame.phase;
    this.clockText.textContent = `${frame.t.toFixed(1)} s`;
    this.coinsText.textContent = String(frame.coins_collected);
    this.promptChip.classList.toggle("hidden", !frame.pending_fms);

    if (frame.phase !== "Idle") {
      this.fovChart.push(frame.t, frame.fov);
      this.opacityChart.push(frame.t, frame.opacity);
    }
    for (const event of frame.recent_events) {
      const item = el("li", "", `${event.t.toFixed(2)} s  ${event.kind}`);
      this.eventsList.insertBefore(item, this.eventsList.firstChild);
    }
    while (this.eventsList.children.length > 12) {
      this.eventsList.removeChild(this.eventsList.lastChild as Node);
    }

    const autoRated = this.autoCheck.checked;
    if (frame.pending_fms && !autoRated && this.modal.classList.contains("hidden")) {
      this.modal.classList.remove("hidden");
    }
    if (!frame.pending_fms && !this.modal.classList.contains("hidden")) {
      this.modal.classList.add("hidden");
    }
    if (frame.complete && !this.summaryShown) {
      this.summaryShown = true;
      void this.showSummary();
    }
  }

  private planFromForm(): SessionPlanDoc {
    const left = this.leftSelect.value;
    const right = this.rightSelect.value;
    const providerValues: Record<string, Record<string, unknown>> = {};
    if (left === "PathFollow" || right === "PathFollow") {
      providerValues.PathFollow = {
        follow_speed: numberValue(this.followSpeedInput, 3.0),
      };
    }
    const plan: SessionPlanDoc = {
      name: this.nameInput.value || "panel",
      seed: Math.trunc(numberValue(this.seedInput, 0)),
      dt: 0.02,
      log_rate: 50.0,
      exposure_duration: numberValue(this.exposureInput, 60),
      fms_interval: numberValue(this.fmsIntervalInput, 15),
      fms_scale_min: FMS_MIN,
      fms_scale_max: FMS_MAX,
      providers: { left: left ? [left] : [], right: right ? [right] : [] },
      provider_values: providerValues,
    };
    if (this.coinInput.value.trim()) {
      plan.coin_count = Math.trunc(numberValue(this.coinInput, 0));
    }
    return plan;
  }

  private async start(): Promise<void> {
    const speed = numberValue(this.speedInput, 1.0);
    const autoFms = this.autoCheck.checked
      ? Math.trunc(numberValue(this.autoValue, 0))
      : null;
    try {
      const res = await this.client.startSession(this.planFromForm(), speed, autoFms);
      this.summaryShown = false;
      this.summaryPre.classList.add("hidden");
      this.summaryPre.textContent = "";
      this.eventsList.textContent = "";
      this.fovChart.reset();
      this.opacityChart.reset();
      this.notify(`started ${res.plan} in ${res.scene}`);
    } catch (err) {
      this.notify(describeError(err), true);
    }
  }

  private async stop(): Promise<void> {
    try {
      const res = await this.client.stopSession();
      this.notify("session stopped");
      if (res.summary) this.renderSummary(res.summary);
    } catch (err) {
      this.notify(describeError(err), true);
    }
  }

  private async submitRating(): Promise<void> {
    const rating = Math.trunc(parseFloat(this.modalSlider.value));
    try {
      await this.client.submitRating(rating);
      this.notify(`rating ${rating} recorded`);
    } catch (err) {
      // Typically 409: the prompt expired before the participant answered.
      this.notify(describeError(err), true);
    }
    this.modal.classList.add("hidden");
  }

  private async showSummary(): Promise<void> {
    try {
      const snap = await this.client.getSession();
      if (snap.summary) this.renderSummary(snap.summary);
    } catch (err) {
      this.notify(describeError(err), true);
    }
  }

  private renderSummary(summary: Record<string, unknown>): void {
    this.summaryPre.textContent = JSON.stringify(summary, null, 2);
    this.summaryPre.classList.remove("hidden");
  }
}
