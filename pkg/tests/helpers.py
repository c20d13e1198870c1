"""Shared test oracles and fixture builders.

The oracles here are deliberately independent of the library code paths they
check: brute-force simple-path enumeration for BFS, central finite
differences for backprop, and a scalar-loop LSTM cell.
"""

from __future__ import annotations

import random

import numpy as np

from sdprel.neural import cross_entropy

# ---------------------------------------------------------------------------
# Graph oracle


def min_simple_path_length(adjacency, src, dst):
    """Exhaustive minimum hop count over all simple paths (None if cut off)."""
    best = [None]

    def dfs(node, visited, length):
        if best[0] is not None and length >= best[0]:
            return
        if node == dst:
            best[0] = length
            return
        for nb in adjacency[node]:
            if nb not in visited:
                visited.add(nb)
                dfs(nb, visited, length + 1)
                visited.remove(nb)

    dfs(src, {src}, 0)
    return best[0]


def random_connected_graph(rng: random.Random, max_nodes: int = 10):
    """(node_count, edge list) for a random connected undirected graph."""
    n = rng.randint(3, max_nodes)
    while True:
        edges = set()
        for i in range(n):
            for j in range(i + 1, n):
                if rng.random() < 0.35:
                    edges.add((i, j))
        # spanning chain in a random order guarantees connectivity
        order = list(range(n))
        rng.shuffle(order)
        for a, b in zip(order, order[1:]):
            edges.add((min(a, b), max(a, b)))
        if edges:
            return n, sorted(edges)


# ---------------------------------------------------------------------------
# Gradient oracle


def model_loss(model, xs, label):
    cache = model.forward(xs, masks=None)
    return cross_entropy(cache["probs"][1], label)


def finite_difference_grads(model, xs, label, eps=1e-5):
    """Central differences on every parameter tensor of the model."""
    out = {}
    for name, arr in model.tensors().items():
        grad = np.zeros_like(arr)
        flat, gflat = arr.ravel(), grad.ravel()
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            loss_plus = model_loss(model, xs, label)
            flat[i] = orig - eps
            loss_minus = model_loss(model, xs, label)
            flat[i] = orig
            gflat[i] = (loss_plus - loss_minus) / (2.0 * eps)
        out[name] = grad
    return out


def max_relative_error(analytic, numeric, floor=1e-6):
    """max over tensors/entries of |a-n| / max(|a|, |n|, floor)."""
    worst = 0.0
    for name, a in analytic.items():
        n = numeric[name]
        denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
        worst = max(worst, float(np.max(np.abs(a - n) / denom)))
    return worst


def gradcheck(model, xs, label, eps=1e-5):
    analytic = model.backward(model.forward(xs, masks=None), label)
    analytic.pop("__inputs__")
    numeric = finite_difference_grads(model, xs, label, eps=eps)
    return max_relative_error(analytic, numeric)


# ---------------------------------------------------------------------------
# Synthetic corpus

POSITIVE_VERBS = ("bind", "interacts")
NEGATIVE_VERBS = ("observed", "located", "detected", "near")
FILLERS = ("protein", "complex", "domain", "receptor", "kinase", "subunit")
ADVERBS = ("directly", "strongly", "specifically", "weakly")


def synthetic_corpus(n: int, seed: int):
    """(corpus lines, dependency lines, labels) for n two-entity sentences.

    The dependency chain covers the whole sentence minus the final period,
    so the SDP is the full token chain; a pair interacts iff that chain
    contains one of POSITIVE_VERBS.
    """
    rng = random.Random(seed)
    labels = [1] * (n // 2) + [0] * (n - n // 2)
    rng.shuffle(labels)
    corpus_lines, dep_lines = [], []
    for i, label in enumerate(labels):
        sid = f"syn{i:03d}"
        name1, name2 = f"GeneA{i}", f"GeneB{i}"
        filler = rng.choice(FILLERS)
        if label:
            verb = rng.choice(POSITIVE_VERBS)
            pattern = rng.randrange(3)
            if pattern == 0:
                mid = [(verb, "VBZ"), ("to", "TO")]
            elif pattern == 1:
                mid = [(rng.choice(ADVERBS), "RB"), (verb, "VBZ"), ("to", "TO")]
            else:
                mid = [(filler, "NN"), (verb, "VBZ")]
        else:
            verb = rng.choice(NEGATIVE_VERBS)
            pattern = rng.randrange(3)
            if pattern == 0:
                mid = [("was", "VBD"), (verb, "VBN"), ("with", "IN")]
            elif pattern == 1:
                mid = [(filler, "NN"), ("and", "CC")]
            else:
                mid = [(verb, "VBN"), ("with", "IN"), (filler, "NN"), ("of", "IN")]
        tokens = [(name1, "NN")] + mid + [(name2, "NN"), (".", ".")]
        token_field = " ".join(f"{t}|{p}" for t, p in tokens)
        last = len(tokens) - 2  # index of name2
        entity_field = f"e1:0:0;e2:{last}:{last}"
        interaction_field = "e1-e2" if label else ""
        corpus_lines.append(f"{sid}\t{token_field}\t{entity_field}\t{interaction_field}")
        for j in range(last):
            dep_lines.append(f"{sid}\t{j}\t{j + 1}\targ")
    return corpus_lines, dep_lines, labels


def write_lines(path, lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
