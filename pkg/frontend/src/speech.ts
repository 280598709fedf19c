/** Spoken phrases via the platform speech synthesis, when available. */

export class Speaker {
  private available: boolean;

  constructor() {
    this.available = typeof globalThis.speechSynthesis !== "undefined";
  }

  speak(phrase: string): void {
    if (!this.available) {
      return;
    }
    const utterance = new SpeechSynthesisUtterance(phrase);
    utterance.rate = 1.1;
    globalThis.speechSynthesis.speak(utterance);
  }
}
