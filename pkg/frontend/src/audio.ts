/**
 * WebAudio beeper: one oscillator split into left/right gain nodes,
 * gated on a beep-period timer. Falls back to a no-op (the app shows
 * the visual pan/pitch meter regardless) when audio is unavailable.
 */

import { channelSettings, SILENCE, type ChannelSettings } from "./audioMath.js";
import type { SonificationParams } from "./protocol.js";

export class Beeper {
  private ctx: AudioContext | null = null;
  private osc: OscillatorNode | null = null;
  private left: GainNode | null = null;
  private right: GainNode | null = null;
  private gate: GainNode | null = null;
  private timer: ReturnType<typeof setInterval> | null = null;
  private settings: ChannelSettings = SILENCE;
  private gateOpen = false;

  /** Must be called from a user gesture to unlock the audio context. */
  start(): boolean {
    if (this.ctx) {
      return true;
    }
    const Ctor = (globalThis as { AudioContext?: typeof AudioContext }).AudioContext;
    if (!Ctor) {
      return false;
    }
    this.ctx = new Ctor();
    this.osc = this.ctx.createOscillator();
    this.gate = this.ctx.createGain();
    this.left = this.ctx.createGain();
    this.right = this.ctx.createGain();
    const merger = this.ctx.createChannelMerger(2);
    this.osc.connect(this.gate);
    this.gate.connect(this.left);
    this.gate.connect(this.right);
    this.left.connect(merger, 0, 0);
    this.right.connect(merger, 0, 1);
    merger.connect(this.ctx.destination);
    this.gate.gain.value = 0;
    this.osc.start();
    return true;
  }

  get running(): boolean {
    return this.ctx !== null;
  }

  update(params: SonificationParams | null): ChannelSettings {
    this.settings = channelSettings(params);
    if (!this.ctx || !this.osc || !this.left || !this.right || !this.gate) {
      return this.settings;
    }
    if (this.settings === SILENCE || this.settings.periodMs <= 0) {
      this.stopBeeping();
      return this.settings;
    }
    this.osc.frequency.setTargetAtTime(this.settings.freqHz, this.ctx.currentTime, 0.02);
    this.left.gain.setTargetAtTime(this.settings.leftGain * 0.4, this.ctx.currentTime, 0.02);
    this.right.gain.setTargetAtTime(this.settings.rightGain * 0.4, this.ctx.currentTime, 0.02);
    this.restartGateTimer();
    return this.settings;
  }

  private restartGateTimer(): void {
    if (this.timer) {
      clearInterval(this.timer);
    }
    const halfPeriod = Math.max(this.settings.periodMs * this.settings.dutyCycle, 20);
    this.timer = setInterval(() => {
      if (!this.ctx || !this.gate) {
        return;
      }
      this.gateOpen = !this.gateOpen;
      this.gate.gain.setTargetAtTime(this.gateOpen ? 1 : 0, this.ctx.currentTime, 0.005);
    }, halfPeriod);
  }

  private stopBeeping(): void {
    if (this.timer) {
      clearInterval(this.timer);
      this.timer = null;
    }
    if (this.ctx && this.gate) {
      this.gate.gain.setTargetAtTime(0, this.ctx.currentTime, 0.005);
    }
    this.gateOpen = false;
  }
}
