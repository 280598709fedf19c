/**
 * Golden-file replay: the recorded engine stream must reproduce, through
 * the client reducer and pan law, exactly the phrase sequence and
 * channel-gain signs frozen at recording time. This is the "no locally
 * invented state" contract: every rendered value traces to the stream.
 */

import assert from "node:assert/strict";
import { readFileSync } from "node:fs";
import { test } from "node:test";

import { channelSettings } from "../src/audioMath.js";
import type { StreamMessage } from "../src/protocol.js";
import { applyMessage, initialViewState } from "../src/viewState.js";

interface GoldenFixture {
  fps: number;
  expected: { phrases: string[]; min_pan_checks: number };
  messages: StreamMessage[];
}

const fixture: GoldenFixture = JSON.parse(
  readFileSync(new URL("../../tests/fixtures/golden_stream.json", import.meta.url), "utf-8"),
);

test("fixture covers the full retrieval loop", () => {
  const phases = new Set(fixture.messages.map((m) => m.phase));
  for (const phase of ["searching", "navigating", "correcting", "done"]) {
    assert.ok(phases.has(phase), `missing phase ${phase}`);
  }
  assert.ok(fixture.messages.some((m) => m.advice !== null));
  assert.ok(fixture.messages.some((m) => m.completed_item !== null));
});

test("replay produces the recorded phrase sequence", () => {
  let state = initialViewState();
  for (const msg of fixture.messages) {
    state = applyMessage(state, msg);
  }
  assert.deepEqual(state.spoken, fixture.expected.phrases);
  assert.equal(state.phase, "done");
  assert.ok(state.list.every((item) => item.done));
});

test("channel gain signs match engine pan signs for |pan| >= 0.1", () => {
  let checks = 0;
  for (const msg of fixture.messages) {
    if (!msg.sonification || Math.abs(msg.sonification.pan) < 0.1) {
      continue;
    }
    const gains = channelSettings(msg.sonification);
    const gainSign = Math.sign(gains.rightGain - gains.leftGain);
    assert.equal(gainSign, Math.sign(msg.sonification.pan), `seq ${msg.seq}`);
    checks += 1;
  }
  assert.ok(checks >= fixture.expected.min_pan_checks, `only ${checks} checks`);
});

test("stream frame indices are strictly increasing", () => {
  const frames = fixture.messages.map((m) => m.frame_idx);
  for (let i = 1; i < frames.length; i += 1) {
    assert.ok(frames[i]! > frames[i - 1]!, `frame ${frames[i]} after ${frames[i - 1]}`);
  }
});

test("rendered state always reflects the latest message", () => {
  let state = initialViewState();
  for (const msg of fixture.messages) {
    state = applyMessage(state, msg);
    assert.equal(state.frameIdx, msg.frame_idx);
    assert.equal(state.phase, msg.phase);
    assert.deepEqual(state.audio, msg.sonification);
    assert.deepEqual(state.scene, msg.scene);
    assert.deepEqual(state.list, msg.shopping_list);
  }
});
