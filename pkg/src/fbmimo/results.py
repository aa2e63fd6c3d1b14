"""Result persistence: delimited table plus a round-trip JSON summary."""

from __future__ import annotations

import json
import os
from dataclasses import asdict

from .sweep import CellStats, SweepResult

__all__ = ["CSV_HEADER", "emit_results", "load_results"]

CSV_HEADER = (
    "scheme,M,K,N,P,trials,mean_sum_rate_nats,stderr_nats,"
    "mean_feedback_bits,mean_users_signaling,fallback_frac,mean_ropt_nats"
)


def _fmt(x: float) -> str:
    # 17 significant digits: round-trip exact for doubles.
    return format(float(x), ".17g")


def emit_results(result: SweepResult, out_dir, basename: str = "sweep"):
    """Write <basename>.csv and <basename>_summary.json; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, f"{basename}.csv")
    json_path = os.path.join(out_dir, f"{basename}_summary.json")

    lines = [CSV_HEADER]
    for c in result.cells:
        lines.append(
            ",".join(
                [
                    c.scheme,
                    str(c.M),
                    str(c.K),
                    str(c.N),
                    _fmt(c.P),
                    str(c.trials),
                    _fmt(c.mean_sum_rate_nats),
                    _fmt(c.stderr_nats),
                    _fmt(c.mean_feedback_bits),
                    _fmt(c.mean_users_signaling),
                    _fmt(c.fallback_frac),
                    _fmt(c.mean_ropt_nats),
                ]
            )
        )
    with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")

    payload = {"config": result.config, "cells": [asdict(c) for c in result.cells]}
    with open(json_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    return csv_path, json_path


def load_results(json_path) -> SweepResult:
    """Reload a summary document; reproduces the SweepResult exactly."""
    with open(json_path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    cells = tuple(CellStats(**c) for c in payload["cells"])
    return SweepResult(config=payload["config"], cells=cells)
