"""Offline processing of structured JSONL event logs.

merge: combine logs from several peers into one file ordered by
(peer, ticks). stats: extract LatencySample events into a latency-matrix
CSV and StatsSample events into a per-second bandwidth CSV.
"""

import argparse
import csv
import json
import sys


def read_events(paths):
    events = []
    for path in paths:
        with open(path, encoding="utf-8") as f:
            for line in f:
                line = line.strip()
                if line:
                    events.append(json.loads(line))
    return events


def merge(paths, out):
    events = read_events(paths)
    events.sort(key=lambda e: (e["peer"], e["ticks"]))
    for event in events:
        out.write(json.dumps(event, separators=(",", ":")) + "\n")
    return len(events)


def latency_matrix_csv(events, out):
    """Mean half-RTT per directed pair, as a peers x peers grid in ms."""
    sums = {}
    counts = {}
    peers = []
    for event in events:
        if event["event"] != "LatencySample":
            continue
        args = event["args"]
        key = (args["from"], args["to"])
        sums[key] = sums.get(key, 0.0) + args["ms"]
        counts[key] = counts.get(key, 0) + 1
        for peer in key:
            if peer not in peers:
                peers.append(peer)
    peers.sort()
    writer = csv.writer(out)
    writer.writerow(["from\\to"] + peers)
    for src in peers:
        row = [src]
        for dst in peers:
            if src == dst:
                row.append("")
            elif (src, dst) in sums:
                row.append(f"{sums[(src, dst)] / counts[(src, dst)]:.3f}")
            else:
                row.append("")
        writer.writerow(row)
    return len(sums)


def bandwidth_csv(events, out):
    """Per-second byte counters with category breakdown and overhead."""
    writer = csv.writer(out)
    writer.writerow(["t", "bytes_total", "bytes_avatar", "bytes_rooms",
                     "bytes_log", "overhead"])
    rows = 0
    samples = [e for e in events if e["event"] == "StatsSample"]
    samples.sort(key=lambda e: e["args"].get("t", 0))
    for event in samples:
        args = event["args"]
        writer.writerow([
            args.get("t", ""),
            args.get("bytes_total", 0),
            args.get("bytes_avatar", 0),
            args.get("bytes_rooms", 0),
            args.get("bytes_log", 0),
            args.get("overhead", 0),
        ])
        rows += 1
    return rows


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="ubiq-logtool",
                                     description="structured log processing")
    sub = parser.add_subparsers(dest="command", required=True)

    merge_parser = sub.add_parser("merge", help="merge logs sorted by (peer, ticks)")
    merge_parser.add_argument("files", nargs="+")
    merge_parser.add_argument("-o", "--out", default=None)

    stats_parser = sub.add_parser("stats", help="emit latency and bandwidth CSVs")
    stats_parser.add_argument("files", nargs="+")
    stats_parser.add_argument("--latency-csv", default="latency.csv")
    stats_parser.add_argument("--bandwidth-csv", default="bandwidth.csv")

    args = parser.parse_args(argv)
    if args.command == "merge":
        if args.out:
            with open(args.out, "w", encoding="utf-8") as f:
                count = merge(args.files, f)
        else:
            count = merge(args.files, sys.stdout)
        print(f"merged {count} events", file=sys.stderr)
    else:
        events = read_events(args.files)
        with open(args.latency_csv, "w", newline="", encoding="utf-8") as f:
            pairs = latency_matrix_csv(events, f)
        with open(args.bandwidth_csv, "w", newline="", encoding="utf-8") as f:
            rows = bandwidth_csv(events, f)
        print(f"latency pairs: {pairs}, bandwidth rows: {rows}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
