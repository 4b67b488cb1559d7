"""Random systems for property tests: generic laws, chains, Gibbs fields, FCMI constructions."""

from __future__ import annotations

import itertools
from typing import Sequence

import numpy as np

from . import subsets as ss
from .core import ConditionalPartition
from .graphs import Graph
from .prob import DiscreteSystem, build_markov_chain, second_law_system


def _simplex(rng: np.random.Generator, k: int, zero_prob: float = 0.0) -> np.ndarray:
    p = rng.dirichlet(np.ones(k))
    if zero_prob > 0 and k > 1:
        kill = rng.random(k) < zero_prob
        if kill.all():
            kill[rng.integers(k)] = False
        p = np.where(kill, 0.0, p)
        p = p / p.sum()
    return p


def _product_system(sizes: Sequence[int], dists) -> DiscreteSystem:
    codes = np.indices(sizes).reshape(len(sizes), -1).T
    labels = [list(range(k)) for k in sizes]
    return DiscreteSystem(codes, labels, dists)


def random_sizes(rng, n: int, max_labels: int = 3, min_labels: int = 2) -> list[int]:
    return [int(k) for k in rng.integers(min_labels, max_labels + 1, size=n)]


def random_system(rng: np.random.Generator, n: int, max_labels: int = 3, r: int = 0,
                  zero_prob: float = 0.25, sizes=None) -> DiscreteSystem:
    """Full product outcome space; ``P`` has random zeros, ``Q`` is strictly positive."""
    sizes = sizes or random_sizes(rng, n, max_labels)
    m = int(np.prod(sizes))
    dists = [_simplex(rng, m, zero_prob)]
    if r == 1:
        dists.append(_simplex(rng, m))
    return _product_system(sizes, dists)


def random_stochastic(rng, rows: int, cols: int, zero_prob: float = 0.0) -> np.ndarray:
    return np.vstack([_simplex(rng, cols, zero_prob) for _ in range(rows)])


def random_chain(rng: np.random.Generator, n: int, max_states: int = 3, zero_prob: float = 0.0,
                 sizes=None) -> DiscreteSystem:
    sizes = sizes or random_sizes(rng, n, max_states)
    init = _simplex(rng, sizes[0], zero_prob)
    Ts = [random_stochastic(rng, sizes[i], sizes[i + 1], zero_prob) for i in range(n - 1)]
    return build_markov_chain(sizes, init, Ts)


def random_second_law(rng: np.random.Generator, n: int, states: int = 2):
    """Shared transitions, arbitrary ``P1`` and strictly positive ``Q1``."""
    P1 = _simplex(rng, states, 0.3)
    Q1 = _simplex(rng, states)
    T = random_stochastic(rng, states, states)
    return second_law_system([states] * n, P1, Q1, [T] * (n - 1))


def random_graph(rng: np.random.Generator, n: int, p: float = 0.4) -> Graph:
    edges = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1) if rng.random() < p]
    return Graph(n, frozenset(edges))


def random_tree(rng: np.random.Generator, n: int) -> Graph:
    edges = [(int(rng.integers(1, v)), v) for v in range(2, n + 1)]
    return Graph(n, frozenset(edges))


def gibbs_system(rng: np.random.Generator, G: Graph, sizes=None, strength: float = 1.5,
                 r: int = 0) -> DiscreteSystem:
    """Pairwise Gibbs law ``prod_{ij in E} psi_ij(x_i, x_j)`` with positive potentials."""
    sizes = sizes or [2] * G.n
    pots = {
        e: np.exp(strength * rng.standard_normal((sizes[e[0] - 1], sizes[e[1] - 1])))
        for e in G.sorted_edges()
    }
    w = np.ones(sizes)
    for (i, j), pot in pots.items():
        shape = [1] * G.n
        shape[i - 1], shape[j - 1] = pot.shape
        w = w * pot.reshape(shape)
    w = w.reshape(-1) / w.sum()
    dists = [w]
    if r == 1:
        dists.append(gibbs_system(rng, G, sizes, strength).dists[0])
    return _product_system(sizes, dists)


def independent_system(rng: np.random.Generator, n: int, max_labels: int = 3, r: int = 0) -> DiscreteSystem:
    """Product laws; with ``r = 1`` the reference ``Q`` is a product law too."""
    sizes = random_sizes(rng, n, max_labels)
    dists = []
    for _ in range(r + 1):
        joint = np.ones(1)
        for k in sizes:
            joint = np.multiply.outer(joint, _simplex(rng, k))
        dists.append(joint.reshape(-1))
    return _product_system(sizes, dists)


def random_partition(rng: np.random.Generator, n: int, q: int | None = None) -> ConditionalPartition:
    """Random ``(J, L_1..L_q)`` with ``q >= 2``; blocks may be empty."""
    if q is None:
        q = int(rng.integers(2, max(n, 2) + 1))
    assign = rng.integers(0, q + 1, size=n)  # 0 means J
    J = ss.from_indices(i + 1 for i in range(n) if assign[i] == 0)
    parts = tuple(ss.from_indices(i + 1 for i in range(n) if assign[i] == k) for k in range(1, q + 1))
    return ConditionalPartition(n, J, parts)


def fcmi_system(rng: np.random.Generator, K: ConditionalPartition, max_labels: int = 3,
                zero_prob: float = 0.2) -> DiscreteSystem:
    """``P(x_J) prod_i P(x_{L_i} | x_J)``: the blocks are independent given ``X_J``."""
    n = K.n
    sizes = random_sizes(rng, n, max_labels)
    J_idx = [i - 1 for i in ss.to_indices(K.J)]
    blocks = [[i - 1 for i in ss.to_indices(L)] for L in K.parts if L]
    pJ = _simplex(rng, int(np.prod([sizes[i] for i in J_idx])), zero_prob)
    conds = [
        [_simplex(rng, int(np.prod([sizes[i] for i in b])), zero_prob) for _ in range(len(pJ))]
        for b in blocks
    ]
    outcomes = list(itertools.product(*(range(k) for k in sizes)))
    P = np.empty(len(outcomes))
    for w, x in enumerate(outcomes):
        j = np.ravel_multi_index([x[i] for i in J_idx], [sizes[i] for i in J_idx]) if J_idx else 0
        v = pJ[j]
        for b, cb in zip(blocks, conds):
            v *= cb[j][np.ravel_multi_index([x[i] for i in b], [sizes[i] for i in b])]
        P[w] = v
    return _product_system(sizes, [P])
