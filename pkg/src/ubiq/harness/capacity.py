"""Capacity sweep over increasing fleet sizes.

Aggregates bot summaries into a CSV table and flags the knee: the first
fleet size whose p50 relayed latency exceeds twice the smallest fleet's
baseline.
"""

import csv
import io


def capacity_report(results):
    """results: list of dicts {"fleet", "p50_ms", "p95_ms", "lost"} in
    increasing fleet order. Returns (csv text, knee fleet size or None)."""
    if not results:
        raise ValueError("capacity report needs at least one fleet result")
    ordered = sorted(results, key=lambda r: r["fleet"])
    knee = None
    if len(ordered) >= 2:
        baseline = ordered[0]["p50_ms"]
        for row in ordered[1:]:
            if baseline is not None and row["p50_ms"] is not None \
                    and row["p50_ms"] > 2 * baseline:
                knee = row["fleet"]
                break
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(["fleet", "p50_ms", "p95_ms", "lost", "knee"])
    for row in ordered:
        writer.writerow([
            row["fleet"], row["p50_ms"], row["p95_ms"], row.get("lost", 0),
            1 if row["fleet"] == knee else 0,
        ])
    return out.getvalue(), knee


def summary_to_result(summary):
    """Collapse a bot_run summary into one capacity sweep row."""
    aggregate = summary["aggregate"]
    return {
        "fleet": summary["bots"],
        "p50_ms": aggregate["p50_ms"],
        "p95_ms": aggregate["p95_ms"],
        "lost": aggregate["lost"],
    }


def merge_summaries(summaries):
    """Combine summaries from several bot processes driving one fleet."""
    per_bot = [b for s in summaries for b in s["per_bot"]]
    p50s = sorted(b["latency_ms"]["p50"] for b in per_bot
                  if b["latency_ms"]["p50"] is not None)
    p95s = sorted(b["latency_ms"]["p95"] for b in per_bot
                  if b["latency_ms"]["p95"] is not None)
    return {
        "bots": sum(s["bots"] for s in summaries),
        "per_bot": per_bot,
        "aggregate": {
            "sent": sum(s["aggregate"]["sent"] for s in summaries),
            "received": sum(s["aggregate"]["received"] for s in summaries),
            "lost": sum(s["aggregate"]["lost"] for s in summaries),
            "p50_ms": p50s[len(p50s) // 2] if p50s else None,
            "p95_ms": p95s[len(p95s) // 2] if p95s else None,
        },
    }
