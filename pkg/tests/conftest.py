"""Shared fixtures: small named instances and random multicast-tree generation."""

from __future__ import annotations

import random

import pytest

from dnmtp.trees import RootedTree


@pytest.fixture
def chain_tree():
    # e=0 -> a=1 -> r=2, single destination at the end
    return RootedTree(0, {1: 0, 2: 1}, {2})


@pytest.fixture
def star_tree():
    # root 0 with leaf destinations 1 and 2
    return RootedTree(0, {1: 0, 2: 0}, {1, 2})


@pytest.fixture
def t1_tree():
    # e=0 -> c=1; c -> x=2 -> r1=4; c -> y=3 -> r2=5; R = {r1, r2}
    return RootedTree(0, {1: 0, 2: 1, 4: 2, 3: 1, 5: 3}, {4, 5})


@pytest.fixture
def t4_tree():
    # e=0 -> m=1 -> r2=2 with m itself a destination
    return RootedTree(0, {1: 0, 2: 1}, {1, 2})


def random_multicast_tree(
    rng: random.Random,
    max_nodes: int = 12,
    max_leaves: int = 5,
    max_dests: int = 5,
) -> RootedTree:
    """Random rooted tree whose leaves are all destinations, with a bounded
    leaf count and optional internal destinations; node labels are shuffled
    so parent ids are not systematically smaller than child ids."""
    n = rng.randint(2, max_nodes)
    parent: dict[int, int] = {}
    leaves = {0}
    for i in range(1, n):
        if len(leaves) < max_leaves and rng.random() < 0.6:
            p = rng.choice(sorted(parent) + [0])
        else:
            p = rng.choice(sorted(leaves))
        parent[i] = p
        leaves.discard(p)
        leaves.add(i)
    labels = list(range(n))
    rng.shuffle(labels)
    relabeled = {labels[c]: labels[p] for c, p in parent.items()}
    root = labels[0]
    dests = {labels[u] for u in leaves}
    internal = [labels[u] for u in range(n) if labels[u] not in dests and labels[u] != root]
    for u in sorted(internal):
        if len(dests) < max_dests and rng.random() < 0.35:
            dests.add(u)
    return RootedTree(root, relabeled, dests)


def random_diffusers(rng: random.Random, tree: RootedTree, k: int) -> frozenset[int]:
    candidates = [u for u in tree.nodes if u != tree.root]
    size = rng.randint(0, min(k, len(candidates)))
    return frozenset(rng.sample(candidates, size))
