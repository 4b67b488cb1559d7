"""Undirected graphs on variable indices and the graph-facing diagram tests."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable

from . import subsets as ss
from .core import (
    Backend,
    Diagram,
    PreconditionError,
    VerificationError,
    atom_value,
    build_diagram,
    conditioned_interaction,
)

GLOBAL_MAX_N = 8


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph; vertices are a subset of ``{1..n}`` (all of it by default)."""

    n: int
    edges: frozenset = field(default_factory=frozenset)
    vertices: int | None = None

    def __post_init__(self):
        ss.check_n(self.n)
        verts = ss.full(self.n) if self.vertices is None else self.vertices
        ss.check_within(verts, self.n)
        object.__setattr__(self, "vertices", verts)
        norm = set()
        for e in self.edges:
            i, j = e
            if i == j:
                raise ValueError(f"loop at vertex {i}")
            for v in (i, j):
                if not (1 <= v <= self.n) or not (verts >> (v - 1)) & 1:
                    raise ValueError(f"edge {e} leaves the vertex set")
            norm.add((min(i, j), max(i, j)))
        object.__setattr__(self, "edges", frozenset(norm))
        adj = [0] * (self.n + 1)
        for i, j in norm:
            adj[i] |= 1 << (j - 1)
            adj[j] |= 1 << (i - 1)
        object.__setattr__(self, "_adj", tuple(adj))

    @classmethod
    def path(cls, n: int) -> "Graph":
        return cls(n, frozenset((i, i + 1) for i in range(1, n)))

    @classmethod
    def complete(cls, n: int) -> "Graph":
        return cls(n, frozenset((i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)))

    @classmethod
    def star(cls, n: int, center: int = 1) -> "Graph":
        return cls(n, frozenset((center, v) for v in range(1, n + 1) if v != center))

    def neighbors(self, v: int) -> int:
        return self._adj[v]

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def relabel(self) -> tuple["Graph", list[int]]:
        """Same graph on ``1..k`` in vertex order; also returns the old labels."""
        old = list(ss.to_indices(self.vertices))
        new = {v: k + 1 for k, v in enumerate(old)}
        return Graph(len(old), frozenset((new[i], new[j]) for i, j in self.edges)), old


def _reach(G: Graph, start: int, allowed: int) -> int:
    """Vertices reachable from ``start`` moving only inside ``allowed``."""
    seen = start & allowed
    frontier = seen
    while frontier:
        nxt = 0
        for v in ss.to_indices(frontier):
            nxt |= G.neighbors(v)
        nxt &= allowed & ~seen
        seen |= nxt
        frontier = nxt
    return seen


def components(G: Graph, U: int = 0) -> list[int]:
    """Components of ``G - U``, ordered by smallest vertex."""
    ss.check_within(U, G.n)
    rest = G.vertices & ~U
    out = []
    while rest:
        low = rest & -rest
        comp = _reach(G, low, rest)
        out.append(comp)
        rest &= ~comp
    return out


def is_connected_set(G: Graph, W: int) -> bool:
    """``W`` is connected in the subgraph induced on it (the empty set is not)."""
    if not W:
        return False
    return _reach(G, W & -W, W) == W


def is_cutset(G: Graph, U: int) -> bool:
    return len(components(G, U)) >= 2


def separates(G: Graph, A: int, B: int, C: int) -> bool:
    """Every walk from ``A`` to ``B`` meets ``C``."""
    if A & B or A & C or B & C:
        raise ValueError("A, B and C must be pairwise disjoint")
    for X in (A, B, C):
        ss.check_within(X, G.n)
    return not (_reach(G, A, G.vertices & ~C) & B)


def disconnected_atoms(G: Graph) -> set[int]:
    return {W for W in range(1, 1 << G.n) if not (W & ~G.vertices) and not is_connected_set(G, W)}


def _check_size(diagram: Diagram, G: Graph) -> None:
    if diagram.n != G.n:
        raise ValueError(f"diagram has n={diagram.n}, graph has n={G.n}")


def test_mrf_diagram(diagram: Diagram, G: Graph) -> tuple[bool, list[int]]:
    """Markov random field iff every disconnected atom vanishes."""
    _check_size(diagram, G)
    bad = diagram.restrict_zero(disconnected_atoms(G))
    return not bad, bad


def test_mrf_oracle(G: Graph, oracle: Callable[[int, int, int], bool], mode: str = "global") -> bool:
    """MRF check against an independence oracle ``oracle(A, B, C)``.

    ``global`` enumerates all disjoint ``(A, B, C)`` with ``C`` separating ``A``
    from ``B`` (``n <= 8``); ``cutset`` checks, for every cutset ``U``, each
    component against the union of the others given ``U``.
    """
    if mode == "global":
        if G.n > GLOBAL_MAX_N:
            raise ValueError(f"global enumeration is limited to n <= {GLOBAL_MAX_N}")
        verts = list(ss.to_indices(G.vertices))
        for assign in _assignments(len(verts)):
            A = B = C = 0
            for v, a in zip(verts, assign):
                bit = 1 << (v - 1)
                if a == 1:
                    A |= bit
                elif a == 2:
                    B |= bit
                elif a == 3:
                    C |= bit
            if A and B and separates(G, A, B, C) and not oracle(A, B, C):
                return False
        return True
    if mode == "cutset":
        for U in ss.subsets_of(G.vertices):
            comps = components(G, U)
            if len(comps) < 2:
                continue
            union = G.vertices & ~U
            for c in comps:
                if not oracle(c, union & ~c, U):
                    return False
        return True
    raise ValueError(f"unknown mode {mode!r}")


# library API, not pytest tests
test_mrf_diagram.__test__ = False  # type: ignore[attr-defined]
test_mrf_oracle.__test__ = False  # type: ignore[attr-defined]


def _assignments(k: int):
    # 0 = unused, 1 = A, 2 = B, 3 = C
    for code in range(4**k):
        yield [(code >> (2 * t)) & 3 for t in range(k)]


def markov_chain_violations(diagram: Diagram) -> list[int]:
    return diagram.restrict_zero(W for W in diagram.atoms if not ss.is_interval(W))


def test_markov_chain(diagram: Diagram) -> bool:
    """Markov chain iff every atom whose index set is not an interval vanishes."""
    return not markov_chain_violations(diagram)


test_markov_chain.__test__ = False  # type: ignore[attr-defined]


def interval_collapse(backend: Backend, J: int, I: Iterable[int], verify: bool = False,
                      diagram: Diagram | None = None):
    """``X_J.F(X_{i1}; ...; X_{iq})`` of a chain reduces to ``X_J.F(X_{i1}; X_{iq})``."""
    idx = list(I)
    if not idx or idx != sorted(set(idx)):
        raise ValueError("indices must be strictly increasing")
    diagram = diagram if diagram is not None else build_diagram(backend)
    bad = markov_chain_violations(diagram)
    if bad:
        labels = ", ".join(ss.atom_label(W) for W in bad[:5])
        raise PreconditionError(f"not a Markov chain; non-interval atoms {labels} are nonzero")
    first, last = 1 << (idx[0] - 1), 1 << (idx[-1] - 1)
    value = conditioned_interaction(backend, J, [first] if first == last else [first, last])
    if verify:
        full = conditioned_interaction(backend, J, [1 << (i - 1) for i in idx])
        if not backend.is_zero(backend.group.sub(full, value)):
            raise VerificationError(f"interval collapse failed: {full} != {value}")
    return value


def marginalize_graph(G: Graph, Vp: int) -> Graph:
    """Graph on ``Vp``: ``{i, j}`` is an edge iff some walk joins them through ``V - Vp`` only."""
    ss.check_within(Vp, G.n)
    if Vp & ~G.vertices:
        raise ValueError("Vp must be a subset of the vertex set")
    outside = G.vertices & ~Vp
    edges = set()
    for i in ss.to_indices(Vp):
        hub = _reach(G, G.neighbors(i) & outside, outside)
        ends = G.neighbors(i)
        for v in ss.to_indices(hub):
            ends |= G.neighbors(v)
        for j in ss.to_indices(ends & Vp):
            if j != i:
                edges.add((min(i, j), max(i, j)))
    return Graph(G.n, frozenset(edges), vertices=Vp)


@dataclass(frozen=True)
class CandidateGraph:
    graph: Graph
    mrf_verified: bool
    violations: tuple = ()
    warning: str | None = None


def candidate_smallest_graph(diagram: Diagram) -> CandidateGraph:
    """Edge ``{i, j}`` wherever the pair atom ``p_ij`` is nonzero.

    If a smallest graph representation exists it is this graph; whether the
    diagram is actually an MRF on it is reported, not assumed.
    """
    n = diagram.n
    edges = frozenset(
        (i, j)
        for i in range(1, n + 1)
        for j in range(i + 1, n + 1)
        if not diagram.is_zero_atom((1 << (i - 1)) | (1 << (j - 1)))
    )
    G = Graph(n, edges)
    ok, bad = test_mrf_diagram(diagram, G)
    warning = None
    if not diagram.nonzero_atoms():
        warning = "diagram is identically zero; no graph is singled out"
    return CandidateGraph(G, ok, tuple(bad), warning)


def connected_atom_boundary(G: Graph, I: int, backend: Backend | None = None,
                            verify: bool = False) -> int:
    """``B = {i in I : I - i connected}`` for a connected atom ``p_I``.

    With ``verify`` and a backend whose diagram is an MRF on ``G``, checks
    ``F(p_I) = X_{V-I}.F(;_{i in B} X_i)``.
    """
    ss.check_within(I, G.n)
    if ss.size(I) < 2:
        raise ValueError("boundary needs |I| >= 2")
    if not is_connected_set(G, I):
        raise ValueError(f"{ss.format_set(I)} is disconnected in G")
    B = 0
    for i in ss.singletons(I):
        if is_connected_set(G, I & ~i):
            B |= i
    if verify:
        if backend is None:
            raise ValueError("verification needs a backend")
        ok, bad = test_mrf_diagram(build_diagram(backend), G)
        if not ok:
            raise PreconditionError("backend diagram is not an MRF on G")
        direct = atom_value(backend, I)
        rewritten = conditioned_interaction(backend, ss.complement(I, G.n), ss.singletons(B))
        if not backend.is_zero(backend.group.sub(direct, rewritten)):
            raise VerificationError(f"boundary identity failed: {direct} != {rewritten}")
    return B
