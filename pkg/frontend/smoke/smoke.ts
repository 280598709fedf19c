/**
 * End-to-end smoke test against a live session service: completes a full
 * search -> navigate -> touch-wrong -> correct -> touch-right -> next-item
 * loop over the real HTTP + WebSocket protocol.
 *
 * Start the service first (`shelfguide serve`), then `npm run smoke`.
 * Override the target with SHELF_SERVICE_URL.
 */

import WebSocket from "ws";

import { SessionApi } from "../src/api.js";
import { applyMessage, initialViewState, type ViewState } from "../src/viewState.js";
import type { Scene, StreamMessage } from "../src/protocol.js";

const SERVICE_URL = process.env.SHELF_SERVICE_URL ?? "http://127.0.0.1:8787";

function centerOf(scene: Scene, barcode: string): [number, number] {
  const product = scene.products.find((p) => p.barcode === barcode && p.bbox);
  if (!product || !product.bbox) {
    throw new Error(`${barcode} not visible`);
  }
  const [x, y, w, h] = product.bbox;
  return [x + w / 2, y + h / 2];
}

function rightNeighbor(scene: Scene, cell: [number, number]) {
  const neighbor = scene.products.find(
    (p) => p.cell[0] === cell[0] && p.cell[1] === cell[1] + 1,
  );
  if (!neighbor) {
    throw new Error("no right neighbor for the wrong-touch detour");
  }
  return neighbor;
}

async function main(): Promise<void> {
  const api = new SessionApi(SERVICE_URL);
  const created = await api.createSession([
    { brand: "Spindrift", name: "Lime Sparkling Water" },
    { brand: "Oreo", name: "Chocolate Sandwich Cookies" },
  ]);
  const sid = created.id;
  console.log(`session ${sid} created (${created.state.phase})`);

  const socket = new WebSocket(api.streamUrl(sid));
  const inbox: StreamMessage[] = [];
  let view: ViewState = initialViewState();
  socket.on("message", (data) => {
    const message = JSON.parse(String(data)) as StreamMessage;
    inbox.push(message);
    view = applyMessage(view, message);
  });
  await new Promise<void>((resolve, reject) => {
    socket.once("open", () => resolve());
    socket.once("error", reject);
  });

  const tickUntil = async (
    predicate: () => boolean,
    limit: number,
    label: string,
  ): Promise<void> => {
    for (let i = 0; i < limit; i += 1) {
      await api.tick(sid);
      await new Promise((resolve) => setTimeout(resolve, 5));
      if (predicate()) {
        return;
      }
    }
    throw new Error(`timed out waiting for ${label}`);
  };

  await tickUntil(() => view.phase === "navigating", 20, "navigation lock");
  console.log("navigating; torso cue:", view.lastPhrase);

  const scene = view.scene!;
  const target = scene.target!;
  const wrong = rightNeighbor(scene, target.cell!);
  await api.moveHand(sid, centerOf(scene, wrong.barcode));
  await tickUntil(
    () => inbox.some((m) => m.advice !== null),
    120,
    "correction advice",
  );
  const advice = inbox.find((m) => m.advice !== null)!.advice!;
  console.log("correction:", advice.phrase);
  if (advice.mode !== "fine") {
    throw new Error(`expected fine advice, got ${advice.mode}`);
  }

  await api.moveHand(sid, centerOf(view.scene!, target.barcode));
  await tickUntil(
    () => inbox.some((m) => m.completed_item !== null),
    120,
    "first retrieval",
  );
  console.log("retrieved:", inbox.find((m) => m.completed_item)!.completed_item);
  if (view.phase !== "searching" && view.phase !== "navigating") {
    throw new Error(`expected next-item search, got ${view.phase}`);
  }

  await api.moveHand(sid, null);
  await tickUntil(() => view.phase === "navigating", 20, "second lock");
  const second = view.scene!.target!;
  await api.moveHand(sid, centerOf(view.scene!, second.barcode));
  await tickUntil(() => view.phase === "done", 120, "session completion");

  if (!view.list.every((item) => item.done)) {
    throw new Error("shopping list not fully ticked");
  }
  console.log("spoken sequence:", view.spoken);
  console.log("SMOKE OK: full retrieval loop completed");
  socket.close();
}

main().catch((error) => {
  console.error("SMOKE FAILED:", error);
  process.exit(1);
});
