/**
 * A browser-side peer: one WebSocket to the relay plus a local router
 * mapping addresses to handlers. Sends go to the relay only; the peer's
 * own handlers never see its outbound traffic.
 */

import {
  Address,
  StreamDecoder,
  WireMessage,
  encode,
  generateNetworkId,
  toTextObject,
} from "./wire.js";

export type MessageHandler = (msg: WireMessage) => void;

/** Minimal WebSocket surface; lets tests inject the `ws` package. */
export interface WebSocketLike {
  binaryType: string;
  send(data: Uint8Array): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: ArrayBuffer | Uint8Array }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
}

export type WebSocketFactory = (url: string) => WebSocketLike;

const defaultFactory: WebSocketFactory = (url) =>
  new WebSocket(url) as unknown as WebSocketLike;

export class BrowserPeer {
  readonly sceneId: bigint;
  private socket: WebSocketLike | null = null;
  private readonly decoder = new StreamDecoder();
  private readonly handlers = new Map<string, MessageHandler[]>();
  private readonly factory: WebSocketFactory;
  unmatchedCount = 0;
  onClose: (() => void) | null = null;

  constructor(options: { sceneId?: bigint; webSocketFactory?: WebSocketFactory } = {}) {
    this.sceneId = options.sceneId ?? generateNetworkId();
    this.factory = options.webSocketFactory ?? defaultFactory;
  }

  /** Open the relay WebSocket; resolves once the connection is up. */
  connect(url: string): Promise<void> {
    const socket = this.factory(url);
    socket.binaryType = "arraybuffer";
    this.socket = socket;
    socket.onmessage = (ev) => {
      const data = ev.data instanceof Uint8Array ? ev.data : new Uint8Array(ev.data);
      for (const msg of this.decoder.feed(data)) {
        this.dispatch(msg);
      }
    };
    socket.onclose = () => {
      this.socket = null;
      this.onClose?.();
    };
    return new Promise((resolve, reject) => {
      socket.onopen = () => resolve();
      socket.onerror = (ev) => reject(new Error(`websocket error: ${ev}`));
    });
  }

  close(): void {
    this.socket?.close();
    this.socket = null;
  }

  register(address: Address, handler: MessageHandler): () => void {
    const key = addressKey(address);
    const list = this.handlers.get(key) ?? [];
    list.push(handler);
    this.handlers.set(key, list);
    return () => {
      const current = this.handlers.get(key) ?? [];
      this.handlers.set(key, current.filter((h) => h !== handler));
    };
  }

  send(to: Address, payload: Uint8Array): void {
    if (this.socket === null) {
      throw new Error("peer is not connected");
    }
    this.socket.send(encode(to, payload));
  }

  sendJson(to: Address, value: unknown): void {
    this.send(to, toTextObject(value));
  }

  private dispatch(msg: WireMessage): void {
    const list = this.handlers.get(addressKey(msg.address));
    if (!list || list.length === 0) {
      this.unmatchedCount += 1;
      return;
    }
    for (const handler of [...list]) {
      try {
        handler(msg);
      } catch (e) {
        console.error("message handler failed", e);
      }
    }
  }
}

function addressKey(address: Address): string {
  return `${address.objectId}:${address.componentId}`;
}
