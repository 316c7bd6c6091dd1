/**
 * Live interop against the native relay and a native peer, both spawned
 * as subprocesses. Covers: joining a room created by the native peer,
 * byte round trips through server fanout, rejection handling, and ping.
 */

import { ChildProcess, spawn } from "node:child_process";
import { once } from "node:events";
import net from "node:net";
import { fileURLToPath } from "node:url";
import { afterAll, beforeAll, describe, expect, it } from "vitest";
import WebSocket from "ws";

import { BrowserPeer, WebSocketFactory } from "../src/peer.js";
import { JoinRejectedError, RoomClient } from "../src/rooms.js";
import { makeAddress, fromTextObject } from "../src/wire.js";

const PYTHON = process.env.PYTHON ?? "python3";
const ECHO_COMPONENT = 100;

const wsFactory: WebSocketFactory = (url) => new WebSocket(url) as any;

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const server = net.createServer();
    server.listen(0, "127.0.0.1", () => {
      const port = (server.address() as net.AddressInfo).port;
      server.close(() => resolve(port));
    });
    server.on("error", reject);
  });
}

async function waitForPort(port: number, timeoutMs = 10_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    try {
      await new Promise<void>((resolve, reject) => {
        const socket = net.connect(port, "127.0.0.1", () => {
          socket.end();
          resolve();
        });
        socket.on("error", reject);
      });
      return;
    } catch {
      if (Date.now() > deadline) {
        throw new Error(`port ${port} never came up`);
      }
      await new Promise((r) => setTimeout(r, 100));
    }
  }
}

function readJsonLine(proc: ChildProcess, timeoutMs = 15_000): Promise<any> {
  return new Promise((resolve, reject) => {
    let buffer = "";
    const timer = setTimeout(
      () => reject(new Error("no output from counterpart")),
      timeoutMs,
    );
    proc.stdout!.on("data", (chunk: Buffer) => {
      buffer += chunk.toString();
      const newline = buffer.indexOf("\n");
      if (newline >= 0) {
        clearTimeout(timer);
        resolve(JSON.parse(buffer.slice(0, newline)));
      }
    });
    proc.on("exit", (code) => {
      clearTimeout(timer);
      reject(new Error(`counterpart exited early with ${code}`));
    });
  });
}

describe("relay interop", () => {
  let tcpPort: number;
  let wsPort: number;
  let relay: ChildProcess;
  let counterpart: ChildProcess;
  let native: { joincode: string; sceneid: string; uuid: string };

  beforeAll(async () => {
    tcpPort = await freePort();
    wsPort = await freePort();
    relay = spawn(PYTHON, [
      "-m", "ubiq.relay",
      "--tcp-port", String(tcpPort),
      "--ws-port", String(wsPort),
    ], { stdio: ["ignore", "ignore", "pipe"] });
    await waitForPort(tcpPort);
    await waitForPort(wsPort);

    const script = fileURLToPath(new URL("./support/counterpart.py", import.meta.url));
    counterpart = spawn(PYTHON, [script, String(tcpPort)], {
      stdio: ["ignore", "pipe", "inherit"],
    });
    native = await readJsonLine(counterpart);
  }, 30_000);

  afterAll(async () => {
    counterpart?.kill();
    relay?.kill();
    await Promise.all(
      [counterpart, relay]
        .filter((p) => p !== undefined)
        .map((p) => (p.exitCode === null ? once(p, "exit") : null)),
    );
  });

  it("joins a room created by the native peer and sees it listed", async () => {
    const peer = new BrowserPeer({ webSocketFactory: wsFactory });
    const rooms = new RoomClient(peer);
    await peer.connect(`ws://127.0.0.1:${wsPort}`);
    const room = await rooms.join({ joincode: native.joincode });
    expect(room.joincode).toBe(native.joincode);
    expect(rooms.peers.has(native.uuid)).toBe(true);
    expect(rooms.peers.get(native.uuid)!.sceneId).toBe(BigInt(native.sceneid));
    rooms.leave();
    peer.close();
  });

  it("round-trips a message through fanout to the native peer and back", async () => {
    const peer = new BrowserPeer({ webSocketFactory: wsFactory });
    const rooms = new RoomClient(peer);
    await peer.connect(`ws://127.0.0.1:${wsPort}`);
    await rooms.join({ joincode: native.joincode });

    const reply = new Promise<any>((resolve) => {
      peer.register(makeAddress(peer.sceneId, ECHO_COMPONENT), (msg) =>
        resolve(fromTextObject(msg.payload)),
      );
    });
    peer.sendJson(makeAddress(native.sceneid, ECHO_COMPONENT), {
      replyTo: peer.sceneId.toString(),
      text: "hello from the browser peer",
    });
    const echoed = await reply;
    expect(echoed.echo).toBe("hello from the browser peer");
    expect(echoed.from).toBe(native.uuid);
    rooms.leave();
    peer.close();
  }, 15_000);

  it("relays binary payloads byte-identically between two browser peers", async () => {
    const a = new BrowserPeer({ webSocketFactory: wsFactory });
    const b = new BrowserPeer({ webSocketFactory: wsFactory });
    const roomsA = new RoomClient(a);
    const roomsB = new RoomClient(b);
    await a.connect(`ws://127.0.0.1:${wsPort}`);
    await b.connect(`ws://127.0.0.1:${wsPort}`);
    const room = await roomsA.join({ name: "browser-only", publish: false });
    await roomsB.join({ joincode: room.joincode });

    const payload = new Uint8Array(256).map((_, i) => (i * 31) % 256);
    const address = makeAddress(a.sceneId, 42);
    const received = new Promise<Uint8Array>((resolve) => {
      a.register(address, (msg) => resolve(msg.payload));
    });
    b.send(address, payload);
    expect([...(await received)]).toEqual([...payload]);
    a.close();
    b.close();
  }, 15_000);

  it("rejects a join with an unknown code", async () => {
    const peer = new BrowserPeer({ webSocketFactory: wsFactory });
    const rooms = new RoomClient(peer);
    await peer.connect(`ws://127.0.0.1:${wsPort}`);
    // the native peer holds one code; 1000 candidates means unused ones exist
    let missed = false;
    for (const code of ["000", "001", "002", "003"]) {
      if (code === native.joincode) continue;
      try {
        await rooms.join({ joincode: code });
      } catch (e) {
        expect(e).toBeInstanceOf(JoinRejectedError);
        missed = true;
        break;
      }
    }
    expect(missed).toBe(true);
    peer.close();
  });

  it("answers ping with pong", async () => {
    const peer = new BrowserPeer({ webSocketFactory: wsFactory });
    const rooms = new RoomClient(peer);
    await peer.connect(`ws://127.0.0.1:${wsPort}`);
    await rooms.ping(7);
    peer.close();
  });
});
