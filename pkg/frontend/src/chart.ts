/** Minimal strip chart for live scalar traces, drawn on a raw canvas. */

export interface StripChartOptions {
  label: string;
  /** Points kept in the window. */
  capacity?: number;
  /** Fixed y bounds; autoscaled from the window when omitted. */
  min?: number;
  max?: number;
  unit?: string;
}

const DEFAULT_CAPACITY = 600;

export class StripChart {
  private ts: number[] = [];
  private vs: number[] = [];

  constructor(
    private canvas: HTMLCanvasElement,
    private opts: StripChartOptions,
  ) {}

  size(): number {
    return this.vs.length;
  }

  latest(): number | null {
    return this.vs.length ? this.vs[this.vs.length - 1] : null;
  }

  push(t: number, v: number): void {
    this.ts.push(t);
    this.vs.push(v);
    const cap = this.opts.capacity ?? DEFAULT_CAPACITY;
    if (this.vs.length > cap) {
      this.ts.splice(0, this.ts.length - cap);
      this.vs.splice(0, this.vs.length - cap);
    }
    this.render();
  }

  reset(): void {
    this.ts = [];
    this.vs = [];
    this.render();
  }

  /** Y range used for drawing: fixed bounds win, else padded data range. */
  bounds(): [number, number] {
    let lo = this.opts.min ?? Infinity;
    let hi = this.opts.max ?? -Infinity;
    if (this.opts.min === undefined || this.opts.max === undefined) {
      for (const v of this.vs) {
        if (this.opts.min === undefined && v < lo) lo = v;
        if (this.opts.max === undefined && v > hi) hi = v;
      }
    }
    if (!isFinite(lo)) lo = 0;
    if (!isFinite(hi)) hi = 1;
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
    const pad = 0.05 * (hi - lo);
    return [
      this.opts.min !== undefined ? this.opts.min : lo - pad,
      this.opts.max !== undefined ? this.opts.max : hi + pad,
    ];
  }

  render(): void {
    // Headless test DOMs have no 2d context; data handling still works.
    const ctx = this.canvas.getContext ? this.canvas.getContext("2d") : null;
    if (!ctx) return;
    const w = this.canvas.width;
    const h = this.canvas.height;
    ctx.clearRect(0, 0, w, h);
    ctx.fillStyle = "#10151c";
    ctx.fillRect(0, 0, w, h);

    const [lo, hi] = this.bounds();
    const n = this.vs.length;
    if (n >= 2) {
      const t0 = this.ts[0];
      const t1 = this.ts[n - 1];
      const span = t1 - t0 > 1e-12 ? t1 - t0 : 1;
      ctx.strokeStyle = "#4da3ff";
      ctx.lineWidth = 1.5;
      ctx.beginPath();
      for (let i = 0; i < n; i++) {
        const x = ((this.ts[i] - t0) / span) * (w - 8) + 4;
        const y = h - 4 - ((this.vs[i] - lo) / (hi - lo)) * (h - 8);
        if (i === 0) ctx.moveTo(x, y);
        else ctx.lineTo(x, y);
      }
      ctx.stroke();
    }

    ctx.fillStyle = "#9fb2c8";
    ctx.font = "11px sans-serif";
    const last = this.latest();
    const unit = this.opts.unit ? ` ${this.opts.unit}` : "";
    const value = last === null ? "" : ` ${last.toFixed(2)}${unit}`;
    ctx.fillText(`${this.opts.label}${value}`, 6, 13);
  }
}
