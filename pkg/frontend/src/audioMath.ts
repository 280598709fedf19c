/**
 * Pure sonification math: engine parameters to channel gains and beep
 * timing. Kept free of WebAudio so tests can assert on the numbers.
 */

import type { SonificationParams } from "./protocol.js";

export interface ChannelSettings {
  leftGain: number;
  rightGain: number;
  freqHz: number;
  periodMs: number;
  /** Fraction of each period the tone is audible. */
  dutyCycle: number;
}

export const SILENCE: ChannelSettings = {
  leftGain: 0,
  rightGain: 0,
  freqHz: 0,
  periodMs: 0,
  dutyCycle: 0,
};

/**
 * Equal-power pan law: pan -1 puts everything in the left channel,
 * +1 in the right, 0 splits evenly. Gain signs therefore always match
 * the engine's pan sign.
 */
export function channelSettings(params: SonificationParams | null): ChannelSettings {
  if (params === null) {
    return SILENCE;
  }
  const pan = Math.max(-1, Math.min(1, params.pan));
  const angle = ((pan + 1) / 2) * (Math.PI / 2);
  return {
    leftGain: Math.cos(angle),
    rightGain: Math.sin(angle),
    freqHz: params.pitch_hz,
    periodMs: params.beep_period_ms,
    dutyCycle: 0.5,
  };
}
