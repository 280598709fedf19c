/**
 * App wiring: create a session, subscribe to its stream, render every
 * message, steer the virtual hand with the pointer, beep and speak.
 *
 * The engine clock is client-driven: while "running", tick events go
 * out at 30 Hz and each tick comes back as one stream message.
 */

import { SessionApi } from "./api.js";
import { Beeper } from "./audio.js";
import { channelSettings } from "./audioMath.js";
import { drawScene, canvasToFrame } from "./render.js";
import { Speaker } from "./speech.js";
import { SessionStream } from "./stream.js";
import { applyMessage, initialViewState, phraseOf, type ViewState } from "./viewState.js";
import type { StreamMessage } from "./protocol.js";

const TICK_HZ = 30;
const HAND_SEND_HZ = 30;

const DEFAULT_LIST = [
  { brand: "Spindrift", name: "Lime Sparkling Water" },
  { brand: "Oreo", name: "Chocolate Sandwich Cookies" },
  { brand: "Heinz", name: "Tomato Ketchup" },
];

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing #${id}`);
  }
  return node as T;
}

async function start(): Promise<void> {
  const params = new URLSearchParams(location.search);
  const serviceUrl = params.get("service") ?? "http://127.0.0.1:8787";
  const api = new SessionApi(serviceUrl);

  const canvas = el<HTMLCanvasElement>("shelf");
  const phaseBadge = el<HTMLSpanElement>("phase");
  const zoneText = el<HTMLSpanElement>("zone");
  const phraseText = el<HTMLDivElement>("phrase");
  const listPanel = el<HTMLUListElement>("list");
  const staleBanner = el<HTMLDivElement>("stale");
  const meter = el<HTMLDivElement>("meter");
  const audioButton = el<HTMLButtonElement>("audio-toggle");
  const runButton = el<HTMLButtonElement>("run-toggle");

  const beeper = new Beeper();
  const speaker = new Speaker();
  let view: ViewState = initialViewState();
  let running = false;
  let handInside = false;
  let lastHandSend = 0;

  const created = await api.createSession(DEFAULT_LIST);
  const sessionId = created.id;
  el<HTMLSpanElement>("session-id").textContent = sessionId;

  function render(): void {
    phaseBadge.textContent = view.phase;
    phaseBadge.dataset.phase = view.phase;
    zoneText.textContent = view.zoneText;
    phraseText.textContent = view.lastPhrase ?? "";
    drawScene(canvas, view.scene);
    listPanel.replaceChildren(
      ...view.list.map((item) => {
        const li = document.createElement("li");
        li.textContent = `${item.done ? "✓" : "•"} ${item.label}`;
        li.className = item.done ? "done" : "";
        return li;
      }),
    );
    const gains = channelSettings(view.audio);
    meter.textContent = view.audio
      ? `pan L${gains.leftGain.toFixed(2)} / R${gains.rightGain.toFixed(2)}  ` +
        `${gains.freqHz.toFixed(0)} Hz  ${gains.periodMs.toFixed(0)} ms`
      : "silent";
  }

  const stream = new SessionStream(api.streamUrl(sessionId), {
    onMessage(message: StreamMessage) {
      const phrase = phraseOf(message, view.lastPhrase);
      view = applyMessage(view, message);
      if (phrase) {
        speaker.speak(phrase);
      }
      beeper.update(view.audio);
      staleBanner.hidden = true;
      render();
    },
    onStale() {
      staleBanner.hidden = false;
    },
    onFresh() {
      staleBanner.hidden = true;
    },
    async onReconnect() {
      const snapshot = await api.getSession(sessionId);
      phaseBadge.textContent = snapshot.state.phase;
    },
  });
  stream.connect();

  setInterval(() => {
    if (running) {
      api.tick(sessionId).catch(() => undefined);
    }
  }, 1000 / TICK_HZ);

  canvas.addEventListener("pointermove", (event) => {
    const now = performance.now();
    if (now - lastHandSend < 1000 / HAND_SEND_HZ) {
      return;
    }
    lastHandSend = now;
    const position = canvasToFrame(canvas, view.scene, event.clientX, event.clientY);
    handInside = position !== null;
    api.moveHand(sessionId, position).catch(() => undefined);
  });
  canvas.addEventListener("pointerleave", () => {
    if (handInside) {
      handInside = false;
      api.moveHand(sessionId, null).catch(() => undefined);
    }
  });

  audioButton.addEventListener("click", () => {
    const ok = beeper.start();
    audioButton.textContent = ok ? "audio on" : "audio unavailable (meter only)";
    audioButton.disabled = true;
  });
  runButton.addEventListener("click", () => {
    running = !running;
    runButton.textContent = running ? "pause" : "run";
  });

  render();
}

start().catch((error) => {
  const banner = document.getElementById("stale");
  if (banner) {
    banner.hidden = false;
    banner.textContent = `failed to start: ${String(error)}`;
  }
});
