/** JSON shapes exchanged with the experiment gateway. */

export interface FieldInfo {
  name: string;
  semantic: string;
  unit: string;
  choices: string[];
  default: unknown;
}

export interface AttachmentInfo {
  type: string;
  category: string;
  enabled: boolean;
  values: Record<string, unknown>;
  schema_version: number;
  fields: FieldInfo[];
}

export interface EntityInfo {
  id: string;
  name: string;
  attachments: AttachmentInfo[];
  available_extensions: string[];
}

export interface SceneSnapshot {
  scene: string;
  theme: string;
  categories: string[];
  types: Record<string, string[]>;
  entities: EntityInfo[];
  builtin_scenes: string[];
}

export interface PresetDoc {
  preset_name: string;
  target_type: string;
  schema_version: number;
  values: Record<string, unknown>;
}

/** Verdict from GET /scene/validate-name. */
export type NameStatus = "ok" | "invalid_identifier" | "duplicate";

export interface EventRecord {
  t: number;
  kind: string;
  payload: Record<string, unknown>;
}

export interface TelemetryFrame {
  seq: number;
  t: number;
  phase: string;
  phase_index: number;
  pending_fms: boolean;
  complete: boolean;
  position: number[];
  heading: number[];
  fov: number;
  opacity: number;
  coins_collected: number;
  recent_events: EventRecord[];
}

export type SessionSummary = Record<string, unknown>;

export interface SessionSnapshot {
  running: boolean;
  complete: boolean;
  summary: SessionSummary | null;
  clock?: number;
  phase?: string;
  phase_index?: number;
  pending_fms?: boolean;
  coins_collected?: number;
  fms_responses?: number;
  events?: number;
}

export interface SetSnapshot {
  loaded: boolean;
  current?: string | null;
  nodes?: { id: string; scene: string }[];
}

/** Plan document accepted by POST /session/start (shorthand phase form). */
export interface SessionPlanDoc {
  name: string;
  scene?: string;
  seed: number;
  dt: number;
  log_rate: number;
  baseline_duration?: number;
  exposure_duration: number;
  rest_duration?: number;
  fms_interval: number;
  fms_scale_min: number;
  fms_scale_max: number;
  coin_count?: number;
  providers: { left: string[]; right: string[] };
  provider_values: Record<string, Record<string, unknown>>;
}
