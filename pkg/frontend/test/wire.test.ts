import { createHash } from "node:crypto";
import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import {
  MAX_MESSAGE_LENGTH,
  MalformedStreamError,
  OversizeMessageError,
  StreamDecoder,
  encode,
  fromTextObject,
  generateNetworkId,
  makeAddress,
  toTextObject,
} from "../src/wire.js";

interface Vector {
  name: string;
  object_id: string;
  component_id: number;
  payload_hex?: string;
  payload_repeat_hex?: string;
  payload_repeat_count?: number;
  frame_hex?: string;
  frame_length?: number;
  frame_sha256?: string;
}

const fixturePath = fileURLToPath(
  new URL("../../tests/fixtures/wire-vectors.json", import.meta.url),
);
const fixture = JSON.parse(readFileSync(fixturePath, "utf-8"));
const vectors: Vector[] = fixture.cases;

function fromHex(hex: string): Uint8Array {
  const out = new Uint8Array(hex.length / 2);
  for (let i = 0; i < out.length; i++) {
    out[i] = parseInt(hex.slice(2 * i, 2 * i + 2), 16);
  }
  return out;
}

function toHex(bytes: Uint8Array): string {
  return [...bytes].map((b) => b.toString(16).padStart(2, "0")).join("");
}

function vectorPayload(v: Vector): Uint8Array {
  if (v.payload_hex !== undefined) {
    return fromHex(v.payload_hex);
  }
  const unit = fromHex(v.payload_repeat_hex!);
  const out = new Uint8Array(unit.length * v.payload_repeat_count!);
  for (let i = 0; i < v.payload_repeat_count!; i++) {
    out.set(unit, i * unit.length);
  }
  return out;
}

describe("golden vectors", () => {
  it("covers at least twenty cases", () => {
    expect(vectors.length).toBeGreaterThanOrEqual(20);
    expect(fixture.prefix_size).toBe(14);
    expect(fixture.max_message_length).toBe(MAX_MESSAGE_LENGTH);
  });

  it.each(vectors.map((v) => [v.name, v] as const))(
    "encodes %s byte-identically",
    (_name, v) => {
      const frame = encode(
        makeAddress(v.object_id, v.component_id),
        vectorPayload(v),
      );
      if (v.frame_hex !== undefined) {
        expect(toHex(frame)).toBe(v.frame_hex);
      } else {
        expect(frame.length).toBe(v.frame_length);
        expect(createHash("sha256").update(frame).digest("hex")).toBe(
          v.frame_sha256,
        );
      }
    },
  );

  it.each(
    vectors
      .filter((v) => v.frame_hex !== undefined)
      .map((v) => [v.name, v] as const),
  )("decodes %s back to address and payload", (_name, v) => {
    const messages = new StreamDecoder().feed(fromHex(v.frame_hex!));
    expect(messages).toHaveLength(1);
    expect(messages[0].address.objectId).toBe(BigInt(v.object_id));
    expect(messages[0].address.componentId).toBe(v.component_id);
    expect(toHex(messages[0].payload)).toBe(v.payload_hex ?? "");
  });
});

describe("stream decoding", () => {
  it("reframes messages split at arbitrary byte boundaries", () => {
    const frames = [0, 1, 56, 200].map((n, i) =>
      encode(makeAddress(1000n + BigInt(i), i + 1), new Uint8Array(n).fill(i)),
    );
    const stream = new Uint8Array(frames.reduce((a, f) => a + f.length, 0));
    let o = 0;
    for (const f of frames) {
      stream.set(f, o);
      o += f.length;
    }
    for (const cut of [0, 1, 3, 4, 13, 14, 20, stream.length]) {
      const decoder = new StreamDecoder();
      const first = decoder.feed(stream.slice(0, cut));
      const second = decoder.feed(stream.slice(cut));
      const all = [...first, ...second];
      expect(all).toHaveLength(frames.length);
      all.forEach((m, i) => {
        expect(m.address.objectId).toBe(1000n + BigInt(i));
        expect(m.payload.length).toBe([0, 1, 56, 200][i]);
      });
    }
  });

  it("rejects an impossible length field", () => {
    const bad = new Uint8Array(4);
    new DataView(bad.buffer).setUint32(0, 3, true);
    expect(() => new StreamDecoder().feed(bad)).toThrow(MalformedStreamError);
  });

  it("rejects an oversize encode", () => {
    expect(() =>
      encode(makeAddress(300n, 1), new Uint8Array(MAX_MESSAGE_LENGTH)),
    ).toThrow(OversizeMessageError);
  });
});

describe("ids and text objects", () => {
  it("mints ids above the reserved range", () => {
    for (let i = 0; i < 1000; i++) {
      expect(generateNetworkId()).toBeGreaterThan(255n);
    }
  });

  it("round-trips json payloads", () => {
    const value = { type: "Ping", args: { id: 7, sceneid: "18446744073709551615" } };
    expect(fromTextObject(toTextObject(value))).toEqual(value);
  });
});
