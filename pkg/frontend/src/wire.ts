/**
 * Binary message framing, byte-compatible with the Python peer.
 *
 * Every message carries a 14-byte little-endian prefix: a 4-byte length
 * (counting everything after the length field), an 8-byte object id and a
 * 2-byte component id. Object ids are 64-bit, so they are BigInts here;
 * JSON carries them as decimal strings to avoid Number precision loss.
 */

export const ADDRESS_SIZE = 10;
export const PREFIX_SIZE = 14;
export const MAX_MESSAGE_LENGTH = 1 << 20;

/** Object ids 1-255 are reserved for well-known system services. */
export const RESERVED_ID_MAX = 255n;

export interface Address {
  objectId: bigint;
  componentId: number;
}

export interface WireMessage {
  address: Address;
  payload: Uint8Array;
}

export class WireError extends Error {}
export class OversizeMessageError extends WireError {}
export class MalformedStreamError extends WireError {}

export function makeAddress(objectId: bigint | string | number, componentId: number): Address {
  const obj = typeof objectId === "bigint" ? objectId : BigInt(objectId);
  if (obj <= 0n || obj >= 1n << 64n) {
    throw new WireError(`invalid object id ${obj}`);
  }
  if (!Number.isInteger(componentId) || componentId <= 0 || componentId >= 1 << 16) {
    throw new WireError(`invalid component id ${componentId}`);
  }
  return { objectId: obj, componentId };
}

export function encode(address: Address, payload: Uint8Array): Uint8Array {
  const length = ADDRESS_SIZE + payload.length;
  if (length > MAX_MESSAGE_LENGTH) {
    throw new OversizeMessageError(`message length ${length} exceeds cap ${MAX_MESSAGE_LENGTH}`);
  }
  const frame = new Uint8Array(4 + length);
  const view = new DataView(frame.buffer);
  view.setUint32(0, length, true);
  view.setBigUint64(4, address.objectId, true);
  view.setUint16(12, address.componentId, true);
  frame.set(payload, PREFIX_SIZE);
  return frame;
}

/** Stateful reframer for one connection's inbound byte stream. */
export class StreamDecoder {
  private buffer = new Uint8Array(0);

  feed(data: Uint8Array): WireMessage[] {
    if (this.buffer.length === 0) {
      this.buffer = new Uint8Array(data);
    } else {
      const merged = new Uint8Array(this.buffer.length + data.length);
      merged.set(this.buffer, 0);
      merged.set(data, this.buffer.length);
      this.buffer = merged;
    }
    const messages: WireMessage[] = [];
    const view = new DataView(this.buffer.buffer, this.buffer.byteOffset, this.buffer.byteLength);
    let offset = 0;
    while (this.buffer.length - offset >= 4) {
      const length = view.getUint32(offset, true);
      if (length < ADDRESS_SIZE || length > MAX_MESSAGE_LENGTH) {
        throw new MalformedStreamError(`bad length field ${length}`);
      }
      if (this.buffer.length - offset < 4 + length) {
        break;
      }
      const objectId = view.getBigUint64(offset + 4, true);
      const componentId = view.getUint16(offset + 12, true);
      const payload = this.buffer.slice(offset + PREFIX_SIZE, offset + 4 + length);
      messages.push({ address: makeAddress(objectId, componentId), payload });
      offset += 4 + length;
    }
    this.buffer = this.buffer.slice(offset);
    return messages;
  }
}

/** Mint a random 64-bit object id above the reserved system range. */
export function generateNetworkId(): bigint {
  const bytes = new Uint8Array(8);
  crypto.getRandomValues(bytes);
  let value = 0n;
  for (const b of bytes) {
    value = (value << 8n) | BigInt(b);
  }
  if (value <= RESERVED_ID_MAX) {
    value += RESERVED_ID_MAX + 1n;
  }
  return value;
}

const textEncoder = new TextEncoder();
const textDecoder = new TextDecoder("utf-8", { fatal: true });

export function toTextObject(value: unknown): Uint8Array {
  return textEncoder.encode(JSON.stringify(value));
}

export function fromTextObject(payload: Uint8Array): any {
  try {
    return JSON.parse(textDecoder.decode(payload));
  } catch (e) {
    throw new WireError(`malformed text object: ${e}`);
  }
}
