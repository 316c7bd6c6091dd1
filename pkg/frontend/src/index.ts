export * from "./wire.js";
export * from "./peer.js";
export * from "./rooms.js";
