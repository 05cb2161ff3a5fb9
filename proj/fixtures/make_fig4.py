#!/usr/bin/env python3
"""Emit the fig4 pattern family: the 4x8 rectangular factor (max row weight 4)
Kronecker r copies of the optimal 3x3 square factor.

Usage: make_fig4.py R > fig4_rR.json
"""
import json
import sys

P1 = [[1, 1, 0], [1, 0, 1], [0, 1, 1]]
F4X8 = [
    [1, 0, 0, 1, 0, 1, 1, 0],
    [0, 1, 0, 1, 0, 1, 0, 1],
    [0, 0, 1, 1, 0, 0, 1, 1],
    [0, 0, 0, 0, 1, 1, 1, 1],
]

if __name__ == "__main__":
    r = int(sys.argv[1]) if len(sys.argv) > 1 else 0
    json.dump({"rect": [F4X8], "square": [P1] * r}, sys.stdout, indent=1)
    sys.stdout.write("\n")
