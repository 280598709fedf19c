/**
 * Session stream subscription: WebSocket with reconnect backoff and
 * staleness tracking. The WebSocket constructor is injectable so the
 * logic is testable off-browser.
 */

import type { StreamMessage } from "./protocol.js";

export interface StreamCallbacks {
  onMessage(message: StreamMessage): void;
  onStale?(staleMs: number): void;
  onFresh?(): void;
  onReconnect?(): void;
}

export interface StreamOptions {
  staleAfterMs?: number;
  backoffBaseMs?: number;
  backoffMaxMs?: number;
  webSocketFactory?: (url: string) => WebSocket;
  now?: () => number;
}

const DEFAULTS = { staleAfterMs: 2000, backoffBaseMs: 500, backoffMaxMs: 8000 };

export class SessionStream {
  private socket: WebSocket | null = null;
  private attempts = 0;
  private lastMessageAt = 0;
  private staleTimer: ReturnType<typeof setInterval> | null = null;
  private closed = false;
  private stale = false;
  private readonly opts: Required<Omit<StreamOptions, "webSocketFactory" | "now">>;
  private readonly makeSocket: (url: string) => WebSocket;
  private readonly now: () => number;

  constructor(
    readonly url: string,
    readonly callbacks: StreamCallbacks,
    options: StreamOptions = {},
  ) {
    this.opts = { ...DEFAULTS, ...options };
    this.makeSocket = options.webSocketFactory ?? ((u) => new WebSocket(u));
    this.now = options.now ?? (() => Date.now());
  }

  connect(): void {
    this.closed = false;
    this.open();
    if (!this.staleTimer) {
      this.staleTimer = setInterval(() => this.checkStale(), 250);
    }
  }

  close(): void {
    this.closed = true;
    if (this.staleTimer) {
      clearInterval(this.staleTimer);
      this.staleTimer = null;
    }
    this.socket?.close();
    this.socket = null;
  }

  get staleMs(): number {
    return this.lastMessageAt === 0 ? 0 : this.now() - this.lastMessageAt;
  }

  private open(): void {
    const socket = this.makeSocket(this.url);
    this.socket = socket;
    socket.onopen = () => {
      if (this.attempts > 0) {
        this.callbacks.onReconnect?.();
      }
      this.attempts = 0;
    };
    socket.onmessage = (event: MessageEvent) => {
      this.lastMessageAt = this.now();
      if (this.stale) {
        this.stale = false;
        this.callbacks.onFresh?.();
      }
      this.callbacks.onMessage(JSON.parse(String(event.data)) as StreamMessage);
    };
    socket.onclose = () => this.scheduleReconnect();
    socket.onerror = () => socket.close();
  }

  private scheduleReconnect(): void {
    if (this.closed) {
      return;
    }
    const delay = Math.min(
      this.opts.backoffBaseMs * 2 ** this.attempts,
      this.opts.backoffMaxMs,
    );
    this.attempts += 1;
    setTimeout(() => {
      if (!this.closed) {
        this.open();
      }
    }, delay);
  }

  private checkStale(): void {
    if (this.lastMessageAt === 0 || this.stale) {
      return;
    }
    const gap = this.now() - this.lastMessageAt;
    if (gap > this.opts.staleAfterMs) {
      this.stale = true;
      this.callbacks.onStale?.(gap);
    }
  }
}
