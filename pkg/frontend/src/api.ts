/** REST client for the session service. */

import type { CreateSessionResponse, SessionState } from "./protocol.js";

export interface ShoppingQuery {
  brand: string;
  name: string;
  quantity?: string;
}

export class SessionApi {
  constructor(readonly baseUrl: string) {}

  async createSession(shoppingList: ShoppingQuery[]): Promise<CreateSessionResponse> {
    const resp = await fetch(`${this.baseUrl}/sessions`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ shopping_list: shoppingList }),
    });
    if (!resp.ok) {
      throw new Error(`create session failed: ${resp.status}`);
    }
    return (await resp.json()) as CreateSessionResponse;
  }

  async getSession(id: string): Promise<{ state: SessionState }> {
    const resp = await fetch(`${this.baseUrl}/sessions/${id}`);
    if (!resp.ok) {
      throw new Error(`session ${id} fetch failed: ${resp.status}`);
    }
    return (await resp.json()) as { state: SessionState };
  }

  async postEvent(id: string, event: Record<string, unknown>): Promise<void> {
    const resp = await fetch(`${this.baseUrl}/sessions/${id}/events`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(event),
    });
    if (!resp.ok) {
      throw new Error(`event ${String(event.type)} failed: ${resp.status}`);
    }
  }

  tick(id: string, count = 1): Promise<void> {
    return this.postEvent(id, { type: "tick", count });
  }

  moveHand(id: string, position: [number, number] | null): Promise<void> {
    return this.postEvent(id, { type: "hand_move", position });
  }

  streamUrl(id: string): string {
    return `${this.baseUrl.replace(/^http/, "ws")}/sessions/${id}/stream`;
  }
}
