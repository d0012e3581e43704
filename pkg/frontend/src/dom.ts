/** Small DOM helpers shared by the panel views. */

import { GatewayError } from "./api.js";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className = "",
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

export function describeError(err: unknown): string {
  if (err instanceof GatewayError) return err.detail;
  if (err instanceof Error) return err.message;
  return String(err);
}

/** User-facing status line callback: (message, isError). */
export type Notify = (message: string, isError?: boolean) => void;
