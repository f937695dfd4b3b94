#!/usr/bin/env python3
"""Writes the synthetic torso-pressure logs shipped in data/.

The turn rate of a frame is computed with the default controller gains so
that each figure-8 lobe closes after one full turn.
"""
import math
from pathlib import Path

DATA = Path(__file__).resolve().parents[1] / "data"
RATE = 20.0  # frames per second
K1, K2, V_MAX, W_MAX, S_MAX = 10.0, 12.0, 1.4, 1.5, 0.16


def command(frame):
    f = [min(max(v, 0.0), S_MAX) for v in frame]
    num = sum((f[9 - k] - f[k]) * (4.5 - k) for k in range(5))
    den = sum(f)
    peak = max(f)
    if peak <= 0.0:
        return 0.0, 0.0
    offset = num / den / 4.5
    v = min(K1 * peak * (1.0 - abs(offset)), V_MAX)
    w = max(-W_MAX, min(W_MAX, -K2 * peak * offset))
    return v, w


LEFT = [0.0, 0.02, 0.05, 0.08, 0.06, 0.03, 0.01, 0.0, 0.0, 0.0]
RIGHT = list(reversed(LEFT))


def write(name, frames):
    with open(DATA / name, "w") as fh:
        fh.write("t," + ",".join(f"s{k}" for k in range(10)) + "\n")
        for i, fr in enumerate(frames):
            fh.write(f"{i / RATE:.2f}," + ",".join(f"{v:.4f}" for v in fr) + "\n")


def main():
    _, w = command(LEFT)
    lobe = int(round(2.0 * math.pi / abs(w) * RATE))
    write("pressure_zero.csv", [[0.0] * 10] * int(10 * RATE))
    write("pressure_constant_turn.csv", [LEFT] * (2 * lobe))
    write("pressure_figure8.csv", [LEFT] * lobe + [RIGHT] * lobe)
    print(f"turn rate {w:.6f} rad/s, {lobe} frames per lobe")


if __name__ == "__main__":
    main()
