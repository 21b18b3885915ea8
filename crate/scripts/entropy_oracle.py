#!/usr/bin/env python3
"""Brute-force entropy / gain-ratio reference values used by the tree tests.

Everything is computed from raw row lists with plain counting, without any
code shared with the Rust implementation.

    python3 scripts/entropy_oracle.py
"""
from collections import Counter
from itertools import product
from math import log2

WEATHER = [
    ("sunny", "hot", "high", "false", "no"),
    ("sunny", "hot", "high", "true", "no"),
    ("overcast", "hot", "high", "false", "yes"),
    ("rain", "mild", "high", "false", "yes"),
    ("rain", "cool", "normal", "false", "yes"),
    ("rain", "cool", "normal", "true", "no"),
    ("overcast", "cool", "normal", "true", "yes"),
    ("sunny", "mild", "high", "false", "no"),
    ("sunny", "cool", "normal", "false", "yes"),
    ("rain", "mild", "normal", "false", "yes"),
    ("sunny", "mild", "normal", "true", "yes"),
    ("overcast", "mild", "high", "true", "yes"),
    ("overcast", "hot", "normal", "false", "yes"),
    ("rain", "mild", "high", "true", "no"),
]


def entropy(labels):
    n = len(labels)
    return -sum(c / n * log2(c / n) for c in Counter(labels).values())


def partition(rows, key):
    parts = {}
    for r in rows:
        parts.setdefault(key(r), []).append(r)
    return parts


def gain_and_ratio(rows, key, label):
    n = len(rows)
    parts = partition(rows, key)
    cond = sum(len(p) / n * entropy([label(r) for r in p]) for p in parts.values())
    gain = entropy([label(r) for r in rows]) - cond
    split = entropy([key(r) for r in rows])
    return gain, (gain / split if split > 0 else None)


def main():
    print("entropy([9,5]) =", f"{entropy(['y'] * 9 + ['n'] * 5):.10f}")
    names = ["outlook", "temperature", "humidity", "windy"]
    for i, name in enumerate(names):
        g, r = gain_and_ratio(WEATHER, lambda row: row[i], lambda row: row[-1])
        print(f"weather {name}: gain = {g:.10f} ratio = {r:.10f}")

    # balanced XOR over two binary attributes, each pattern twice
    xor = [(a, b, a ^ b) for a, b in product([0, 1], repeat=2)] * 2
    for i, name in enumerate(["a", "b"]):
        g, _ = gain_and_ratio(xor, lambda row: row[i], lambda row: row[2])
        print(f"xor {name}: gain = {g:.10f}")


if __name__ == "__main__":
    main()
