"""Bot fleet: headless user emulation for load and capacity testing.

Each bot joins the room, emits fixed-size pose payloads at a configured
rate and (optionally) runs the 1 Hz latency meter. Pose payloads embed a
monotonic send timestamp and a per-bot sequence number, so receivers can
measure relayed latency (the host monotonic clock is shared between
local processes) and detect loss from sequence gaps.
"""

import argparse
import asyncio
import json
import random
import struct
import sys
import time

from ..rooms import RoomClient
from ..scene import PeerScene
from ..services import EventLogger, LatencyMeter, StatsMonitor
from ..services.pose import POSE_SIZE
from ..transport import ConnectionSpec, connect
from ..wire import make_address

# Well-known address bot poses are broadcast to; every bot listens there.
BOT_POSE_ADDRESS = make_address(7, 1)

_POSE_HEADER = struct.Struct("<dII")  # send time, sequence, sender bot id


class BotError(Exception):
    pass


class BotConfig:
    def __init__(self, server, room="new", bots=1, pose_rate=60.0,
                 payload_bytes=POSE_SIZE, duration=30.0, transport="tcp",
                 ping_rate=1.0, bot_id_base=0, log_path=None):
        host, _, port = server.partition(":")
        if not port:
            raise ValueError("server must be host:port")
        self.host = host
        self.port = int(port)
        self.room = room
        self.bots = bots
        self.pose_rate = pose_rate
        self.payload_bytes = max(payload_bytes, _POSE_HEADER.size)
        self.duration = duration
        self.transport = transport
        self.ping_rate = ping_rate
        self.bot_id_base = bot_id_base
        self.log_path = log_path
        if bots <= 0 or pose_rate <= 0:
            raise ValueError("bot count and pose rate must be positive")


class _Bot:
    def __init__(self, bot_id, config):
        self.bot_id = bot_id
        self.config = config
        self.scene = PeerScene(random.Random())
        self.client = RoomClient(self.scene)
        self.meter = None
        self.monitor = StatsMonitor(self.scene)
        self.sent = 0
        self.latency_ms = []  # relayed pose latency samples
        self.sequences = {}  # sender bot id -> [first, last, count]
        self.scene.register(self._on_pose, BOT_POSE_ADDRESS)

    def _on_pose(self, msg):
        now = time.monotonic()
        sent_at, seq, sender = _POSE_HEADER.unpack_from(msg.payload)
        self.latency_ms.append((now - sent_at) * 1000.0)
        window = self.sequences.setdefault(sender, [seq, seq, 0])
        window[0] = min(window[0], seq)
        window[1] = max(window[1], seq)
        window[2] += 1

    def send_pose(self):
        header = _POSE_HEADER.pack(time.monotonic(), self.sent, self.bot_id)
        padding = b"\0" * (self.config.payload_bytes - _POSE_HEADER.size)
        self.scene.send(BOT_POSE_ADDRESS, header + padding)
        self.sent += 1

    @property
    def received(self):
        return sum(w[2] for w in self.sequences.values())

    @property
    def lost(self):
        return sum((w[1] - w[0] + 1) - w[2] for w in self.sequences.values())

    def summary(self):
        samples = sorted(self.latency_ms)
        return {
            "bot": self.bot_id,
            "sent": self.sent,
            "received": self.received,
            "lost": self.lost,
            "latency_ms": {
                "mean": sum(samples) / len(samples) if samples else None,
                "p50": _percentile(samples, 50),
                "p95": _percentile(samples, 95),
            },
        }


def _percentile(sorted_samples, pct):
    if not sorted_samples:
        return None
    index = min(len(sorted_samples) - 1,
                int(len(sorted_samples) * pct / 100.0))
    return sorted_samples[index]


async def _drive(bot, stop_event):
    while not stop_event.is_set():
        bot.scene.dispatch()
        if bot.meter is not None:
            bot.meter.tick()
        await asyncio.sleep(0.002)
    bot.scene.dispatch()


async def _pose_loop(bot, start_at, count, interval):
    loop = asyncio.get_running_loop()
    for i in range(count):
        target = start_at + i * interval
        delay = target - loop.time()
        if delay > 0:
            await asyncio.sleep(delay)
        bot.send_pose()


async def bot_run_async(config: BotConfig) -> dict:
    if config.duration <= 0:
        return {"bots": config.bots, "duration": 0, "per_bot": [],
                "aggregate": {"sent": 0, "received": 0, "lost": 0,
                              "p50_ms": None, "p95_ms": None,
                              "bandwidth_in_Bps": 0.0, "bandwidth_out_Bps": 0.0}}

    bots = [_Bot(config.bot_id_base + i, config) for i in range(config.bots)]
    spec = ConnectionSpec(config.transport, config.host, config.port)
    for bot in bots:
        await connect(bot.scene, spec)

    # rendezvous: create or join, then wait for membership
    joincode = None
    for bot in bots:
        bot.rejections = []
        bot.client.on_rejected.append(bot.rejections.append)
        if config.room == "new" and joincode is None:
            bot.client.join(name="bots", publish=False)
            while bot.client.room is None:
                bot.scene.dispatch()
                if bot.rejections:
                    raise BotError(f"join rejected: {bot.rejections[0]}")
                await asyncio.sleep(0.01)
            joincode = bot.client.room.joincode
        else:
            bot.client.join(joincode=joincode or config.room)

    deadline = asyncio.get_running_loop().time() + 10.0
    while not all(bot.client.room is not None for bot in bots):
        for bot in bots:
            bot.scene.dispatch()
            if bot.rejections:
                raise BotError(f"join rejected: {bot.rejections[0]}")
        if asyncio.get_running_loop().time() > deadline:
            raise BotError("bots failed to join the room in time")
        await asyncio.sleep(0.01)

    if config.ping_rate > 0:
        for bot in bots:
            bot.meter = LatencyMeter(bot.scene, bot.client,
                                     interval=1.0 / config.ping_rate)
    for bot in bots:
        bot.monitor.sample()  # discard join traffic

    stop = asyncio.Event()
    drivers = [asyncio.ensure_future(_drive(bot, stop)) for bot in bots]
    loop = asyncio.get_running_loop()
    start_at = loop.time() + 0.25
    count = int(config.pose_rate * config.duration)
    interval = 1.0 / config.pose_rate
    senders = [asyncio.ensure_future(_pose_loop(bot, start_at, count, interval))
               for bot in bots]
    await asyncio.gather(*senders)
    await asyncio.sleep(1.0)  # drain in-flight messages
    stop.set()
    await asyncio.gather(*drivers)

    elapsed = loop.time() - start_at
    stats = [bot.monitor.sample() for bot in bots]
    per_bot = [bot.summary() for bot in bots]
    all_samples = sorted(s for bot in bots for s in bot.latency_ms)
    summary = {
        "bots": config.bots,
        "duration": config.duration,
        "joincode": joincode or config.room,
        "per_bot": per_bot,
        "aggregate": {
            "sent": sum(b["sent"] for b in per_bot),
            "received": sum(b["received"] for b in per_bot),
            "lost": sum(b["lost"] for b in per_bot),
            "p50_ms": _percentile(all_samples, 50),
            "p95_ms": _percentile(all_samples, 95),
            "bandwidth_in_Bps": sum(s.bytes_in for s in stats) / elapsed,
            "bandwidth_out_Bps": sum(s.bytes_out for s in stats) / elapsed,
        },
    }
    if config.log_path:
        logger = EventLogger(f"bot-fleet-{config.bot_id_base}", path=config.log_path)
        for bot, sample in zip(bots, stats):
            logger.log("StatsSample", {
                "t": round(elapsed, 3),
                "bytes_total": sample.bytes_in + sample.bytes_out,
                "bytes_avatar": sample.bytes_in + sample.bytes_out,
                "bytes_rooms": 0,
                "bytes_log": 0,
                "overhead": sample.overhead_ratio,
            })
            if bot.meter is not None:
                for (src, dst), s in bot.meter.matrix.samples.items():
                    logger.log("LatencySample",
                               {"from": src, "to": dst, "ms": s["mean"]})
        logger.close()
    for bot in bots:
        for connection in list(bot.scene.connections):
            connection.close()
    return summary


def bot_run(config: BotConfig) -> dict:
    return asyncio.run(bot_run_async(config))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="ubiq-bot",
                                     description="bot fleet load generator")
    parser.add_argument("--server", required=True, help="host:port of the relay")
    parser.add_argument("--room", default="new", help='joincode or "new"')
    parser.add_argument("--bots", type=int, default=1)
    parser.add_argument("--pose-rate", type=float, default=60.0)
    parser.add_argument("--payload-bytes", type=int, default=POSE_SIZE)
    parser.add_argument("--duration", type=float, default=30.0)
    parser.add_argument("--transport", choices=("tcp", "websocket"), default="tcp")
    parser.add_argument("--ping-rate", type=float, default=1.0,
                        help="latency meter rate in Hz, 0 disables")
    parser.add_argument("--bot-id-base", type=int, default=0)
    parser.add_argument("--log", dest="log_path", default=None)
    parser.add_argument("--out", default=None, help="summary JSON path")
    args = parser.parse_args(argv)
    config = BotConfig(
        server=args.server, room=args.room, bots=args.bots,
        pose_rate=args.pose_rate, payload_bytes=args.payload_bytes,
        duration=args.duration, transport=args.transport,
        ping_rate=args.ping_rate, bot_id_base=args.bot_id_base,
        log_path=args.log_path)
    try:
        summary = bot_run(config)
    except BotError as e:
        print(f"bot run failed: {e}", file=sys.stderr)
        return 1
    text = json.dumps(summary, indent=2)
    if args.out:
        with open(args.out, "w") as f:
            f.write(text + "\n")
    else:
        print(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
