"""Shared test helpers: seeded generators for circuits and conductor laws."""

from __future__ import annotations

import random

from alphaport import Branch, Characteristic, Circuit


def random_connected_circuit(rng: random.Random, max_internal: int = 6,
                             max_extra: int = 5) -> Circuit:
    """Random connected multigraph on port (a, b) built from a spanning tree."""
    n_internal = rng.randint(0, max_internal)
    nodes = ["a", "b"] + [f"n{i}" for i in range(1, n_internal + 1)]
    rest = nodes[1:]
    rng.shuffle(rest)

    branches: list[Branch] = []
    placed = ["a"]
    for node in rest:
        attach = rng.choice(placed)
        branches.append(Branch(attach, node, rng.choice((1, 1, 1, 2, 3))))
        placed.append(node)
    for _ in range(rng.randint(0, max_extra)):
        u, v = rng.sample(nodes, 2)
        branches.append(Branch(u, v, rng.choice((1, 1, 2))))
    return Circuit(tuple(branches), ("a", "b"))


def random_characteristic(rng: random.Random, max_terms: int = 3) -> Characteristic:
    n_terms = rng.randint(1, max_terms)
    exponents = rng.sample((0.5, 1.0, 1.5, 2.0, 3.0, 4.0), n_terms)
    return Characteristic(tuple((rng.uniform(0.3, 3.0), a) for a in exponents))
