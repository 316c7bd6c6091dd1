/**
 * Client side of the rooms protocol over a BrowserPeer.
 *
 * Requests are JSON text objects addressed to the well-known room server
 * address; replies arrive at the room-client component of this peer's
 * scene id. Scene ids travel as decimal strings because they are 64-bit.
 */

import { BrowserPeer } from "./peer.js";
import { fromTextObject, makeAddress, Address, WireMessage } from "./wire.js";

export const ROOM_SERVER_ADDRESS: Address = makeAddress(1n, 1);
export const ROOM_CLIENT_COMPONENT = 2;

export interface RoomRecord {
  uuid: string;
  joincode: string;
  name: string;
  publish: boolean;
  properties: Record<string, string>;
}

export interface PeerRecord {
  uuid: string;
  sceneId: bigint;
  properties: Record<string, string>;
}

export class RoomError extends Error {}
export class JoinRejectedError extends RoomError {}

function peerFromJson(obj: any): PeerRecord {
  return {
    uuid: String(obj.uuid),
    sceneId: BigInt(obj.sceneid),
    properties: { ...(obj.properties ?? {}) },
  };
}

function roomFromJson(obj: any): RoomRecord {
  return {
    uuid: String(obj.uuid),
    joincode: String(obj.joincode),
    name: String(obj.name ?? ""),
    publish: Boolean(obj.publish),
    properties: { ...(obj.properties ?? {}) },
  };
}

export class RoomClient {
  readonly peer: BrowserPeer;
  readonly uuid: string;
  properties: Record<string, string> = {};
  room: RoomRecord | null = null;
  peers = new Map<string, PeerRecord>();

  onPeerAdded: ((peer: PeerRecord) => void)[] = [];
  onPeerRemoved: ((peer: PeerRecord) => void)[] = [];
  onRoomUpdated: ((room: RoomRecord) => void)[] = [];
  onPeerUpdated: ((peer: PeerRecord) => void)[] = [];

  private pendingJoin: { resolve: (room: RoomRecord) => void; reject: (e: Error) => void } | null = null;
  private pendingRooms: ((rooms: any[]) => void)[] = [];
  private pendingPongs = new Map<unknown, () => void>();

  constructor(peer: BrowserPeer, uuid?: string) {
    this.peer = peer;
    this.uuid = uuid ?? crypto.randomUUID();
    const receive = (msg: WireMessage) => this.receive(msg);
    peer.register(makeAddress(peer.sceneId, ROOM_CLIENT_COMPONENT), receive);
    // Pre-join replies the server cannot route land on the server address.
    peer.register(ROOM_SERVER_ADDRESS, receive);
  }

  private request(type: string, args: Record<string, unknown> = {}): void {
    this.peer.sendJson(ROOM_SERVER_ADDRESS, {
      type,
      args: { ...args, sceneid: this.peer.sceneId.toString() },
    });
  }

  private me(): Record<string, unknown> {
    return {
      uuid: this.uuid,
      sceneid: this.peer.sceneId.toString(),
      properties: this.properties,
    };
  }

  /** Join by code, by room uuid, or create a new room by name. */
  join(target: { joincode?: string; uuid?: string; name?: string; publish?: boolean }): Promise<RoomRecord> {
    const args: Record<string, unknown> = { peer: this.me() };
    if (target.joincode !== undefined) {
      args.joincode = target.joincode;
    } else if (target.uuid !== undefined) {
      args.uuid = target.uuid;
    } else if (target.name !== undefined) {
      args.name = target.name;
      args.publish = target.publish ?? false;
    } else {
      return Promise.reject(new RoomError("join needs a joincode, uuid or name"));
    }
    return new Promise((resolve, reject) => {
      this.pendingJoin = { resolve, reject };
      this.request("Join", args);
    });
  }

  leave(): void {
    if (this.room === null) {
      return;
    }
    this.request("Leave");
    this.room = null;
    this.peers.clear();
  }

  setPeerProperties(updates: Record<string, string>): void {
    if (this.room === null) {
      throw new RoomError("setPeerProperties before joining");
    }
    Object.assign(this.properties, updates);
    this.request("UpdatePeerProperties", { properties: updates });
  }

  setRoomProperties(updates: Record<string, string>): void {
    if (this.room === null) {
      throw new RoomError("setRoomProperties before joining");
    }
    this.request("UpdateRoomProperties", { properties: updates });
  }

  discover(): Promise<any[]> {
    return new Promise((resolve) => {
      this.pendingRooms.push(resolve);
      this.request("DiscoverRooms");
    });
  }

  ping(id: unknown): Promise<void> {
    return new Promise((resolve) => {
      this.pendingPongs.set(id, resolve);
      this.request("Ping", { id });
    });
  }

  private receive(msg: WireMessage): void {
    let message: any;
    try {
      message = fromTextObject(msg.payload);
    } catch {
      return; // relayed binary traffic on the shared server address
    }
    const args = message.args;
    switch (message.type) {
      case "SetRoom": {
        this.room = roomFromJson(args.room);
        this.peers.clear();
        for (const obj of args.peers) {
          const peer = peerFromJson(obj);
          if (peer.uuid !== this.uuid) {
            this.peers.set(peer.uuid, peer);
          }
        }
        this.pendingJoin?.resolve(this.room);
        this.pendingJoin = null;
        break;
      }
      case "PeerAdded": {
        const peer = peerFromJson(args.peer);
        if (peer.uuid !== this.uuid) {
          this.peers.set(peer.uuid, peer);
          this.onPeerAdded.forEach((cb) => cb(peer));
        }
        break;
      }
      case "PeerRemoved": {
        const peer = peerFromJson(args.peer);
        const removed = this.peers.get(peer.uuid);
        if (removed !== undefined) {
          this.peers.delete(peer.uuid);
          this.onPeerRemoved.forEach((cb) => cb(removed));
        }
        break;
      }
      case "RoomUpdated": {
        if (this.room !== null) {
          this.room = roomFromJson(args.room);
          this.onRoomUpdated.forEach((cb) => cb(this.room!));
        }
        break;
      }
      case "PeerUpdated": {
        const peer = peerFromJson(args.peer);
        if (peer.uuid === this.uuid) {
          this.properties = peer.properties;
        } else {
          this.peers.set(peer.uuid, peer);
          this.onPeerUpdated.forEach((cb) => cb(peer));
        }
        break;
      }
      case "Rooms": {
        this.pendingRooms.splice(0).forEach((resolve) => resolve(args));
        break;
      }
      case "Pong": {
        const resolve = this.pendingPongs.get(args?.id);
        if (resolve !== undefined) {
          this.pendingPongs.delete(args?.id);
          resolve();
        }
        break;
      }
      case "Rejected": {
        if (this.pendingJoin !== null) {
          this.pendingJoin.reject(new JoinRejectedError(String(args?.reason)));
          this.pendingJoin = null;
        }
        break;
      }
      default:
        // Requests relayed from other in-room peers arrive on the shared
        // server address too; ignore them.
        break;
    }
  }
}

/** Convenience: open the relay socket and resolve once in a room. */
export async function connectAndJoin(
  url: string,
  target: { joincode?: string; uuid?: string; name?: string; publish?: boolean },
  options: ConstructorParameters<typeof BrowserPeer>[0] = {},
): Promise<{ peer: BrowserPeer; rooms: RoomClient; room: RoomRecord }> {
  const peer = new BrowserPeer(options);
  const rooms = new RoomClient(peer);
  await peer.connect(url);
  const room = await rooms.join(target);
  return { peer, rooms, room };
}
