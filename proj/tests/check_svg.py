#!/usr/bin/env python3
# Copyright 2026 The distilrobust Authors
# License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

"""Renders a synthetic metrics log and checks the SVG geometry."""

import json
import subprocess
import sys
import tempfile
import xml.etree.ElementTree as ET
from pathlib import Path

NS = {"svg": "http://www.w3.org/2000/svg"}
N = 100


def record(k):
    half = 2 * (k - 1) <= N
    return {
        "iter": k, "lr": 1e-3 * (1 - k / N), "kd_l1": 1.0, "kd_cos": 1.0,
        "kd_total": 2.0, "enh": 0.5, "combined": 7.0, "smoothed": 7.0,
        "lambda": 10.0, "action_counts": {"a1": 1, "a2": 1, "a3": 1, "a4": 1},
        "tau": 20.0 * (1 - 2 * (k - 1) / N) if half else 0.0,
        "reverb_threshold": 2 * (k - 1) / N if half else 1.0,
    }


def points(polyline):
    return [tuple(map(float, p.split(","))) for p in polyline.get("points").split()]


def main(binary):
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        metrics = tmp / "metrics.jsonl"
        metrics.write_text("".join(json.dumps(record(k)) + "\n" for k in range(1, N + 1)))
        svg = tmp / "plot.svg"
        subprocess.run([binary, "plot", "--metrics", str(metrics), "--out", str(svg)], check=True)
        root = ET.parse(svg).getroot()

        empty = tmp / "empty.jsonl"
        empty.write_text("")
        rc = subprocess.run([binary, "plot", "--metrics", str(empty), "--out", str(tmp / "x.svg")],
                            capture_output=True).returncode
        assert rc != 0, "empty log accepted"

    labels = {p.get("data-label") for p in root.iter("{%s}polyline" % NS["svg"])}
    for want in ("combined", "smoothed", "kd", "enh", "lr", "tau (dB)", "t"):
        assert want in labels, f"missing series {want}: {labels}"

    for group in root.findall("svg:g", NS):
        line = group.find("svg:polyline[@data-label='tau (dB)']", NS)
        if line is None:
            continue
        frame = group.find("svg:rect", NS)
        top = float(frame.get("y"))
        bottom = top + float(frame.get("height"))
        pts = points(line)
        assert len(pts) == N
        assert abs(pts[0][1] - top) < 1e-6, "tau(0) = 20 is not at the panel top"
        assert abs(pts[N // 2][1] - bottom) < 1e-6, "tau(N/2) = 0 is not at the panel bottom"
        assert all(abs(y - bottom) < 1e-6 for _, y in pts[N // 2:])
        ys = [y for _, y in pts]
        assert all(b >= a for a, b in zip(ys, ys[1:])), "tau is not monotone"
        print("plot_svg: ok")
        return 0
    raise AssertionError("no tau panel")


if __name__ == "__main__":
    sys.exit(main(sys.argv[1]))
