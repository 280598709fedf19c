/**
 * Pure view-state reducer: folds stream messages into everything the UI
 * renders. All values originate in the messages; the only client-side
 * logic is presentation (phrase dedup and the retrieval announcement
 * template), applied identically here and in the golden-file recorder.
 */

import type { ListEntry, Scene, SonificationParams, StreamMessage } from "./protocol.js";

export interface ViewState {
  phase: string;
  frameIdx: number;
  seq: number;
  scene: Scene | null;
  zoneText: string;
  audio: SonificationParams | null;
  list: ListEntry[];
  /** Phrases spoken so far, oldest first. */
  spoken: string[];
  lastPhrase: string | null;
}

export function initialViewState(): ViewState {
  return {
    phase: "listing",
    frameIdx: 0,
    seq: -1,
    scene: null,
    zoneText: "",
    audio: null,
    list: [],
    spoken: [],
    lastPhrase: null,
  };
}

/** Phrase selection for one message; null means nothing new to say. */
export function phraseOf(message: StreamMessage, lastPhrase: string | null): string | null {
  if (message.advice) {
    return message.advice.phrase;
  }
  if (message.completed_item) {
    return `Retrieved ${message.completed_item}`;
  }
  if (message.cue && message.cue.phrase !== lastPhrase) {
    return message.cue.phrase;
  }
  return null;
}

export function applyMessage(state: ViewState, message: StreamMessage): ViewState {
  const phrase = phraseOf(message, state.lastPhrase);
  return {
    phase: message.phase,
    frameIdx: message.frame_idx,
    seq: message.seq,
    scene: message.scene,
    zoneText: message.cue ? `${message.cue.zone[0]}, ${message.cue.zone[1]}` : state.zoneText,
    audio: message.sonification,
    list: message.shopping_list,
    spoken: phrase !== null ? [...state.spoken, phrase] : state.spoken,
    lastPhrase: phrase !== null ? phrase : state.lastPhrase,
  };
}

export function replay(messages: StreamMessage[]): ViewState {
  let state = initialViewState();
  for (const message of messages) {
    state = applyMessage(state, message);
  }
  return state;
}
