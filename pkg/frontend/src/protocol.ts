/**
 * Wire types for the shelfguide session service (proto_version 1).
 *
 * The stream carries vector scene descriptors, cues and sonification
 * parameters; the client renders them verbatim and never computes
 * guidance values of its own.
 */

export const PROTO_VERSION = 1;

export interface SonificationParams {
  pan: number; // -1 fully left .. +1 fully right
  pitch_hz: number;
  beep_period_ms: number;
}

export interface Cue {
  stage: "torso_relative" | "hand_relative";
  zone: [string, string];
  phrase: string;
  sonification: SonificationParams | null;
}

export interface Advice {
  mode: "fine" | "coarse" | "confirmed";
  hops: [number, number] | null;
  phrase: string;
}

export interface SceneProduct {
  cell: [number, number];
  barcode: string;
  label: string;
  bbox: [number, number, number, number] | null;
  out_of_view: boolean;
}

export interface Scene {
  frame_size: [number, number];
  grid: [number, number];
  products: SceneProduct[];
  hand: [number, number] | null;
  target: { barcode: string; cell: [number, number] | null; label: string } | null;
}

export interface ListEntry {
  label: string;
  barcode: string;
  done: boolean;
}

export interface StreamMessage {
  proto_version: number;
  seq: number;
  frame_idx: number;
  phase: string;
  scene: Scene;
  cue: Cue | null;
  sonification: SonificationParams | null;
  advice: Advice | null;
  shopping_list: ListEntry[];
  completed_item: string | null;
  touched_cell: [number, number] | null;
}

export interface SessionState {
  phase: string;
  frame_idx: number;
  shopping_list: ListEntry[];
  cue: Cue | null;
  advice: Advice | null;
}

export interface CreateSessionResponse {
  id: string;
  proto_version: number;
  state: SessionState;
}
