"""Finite discrete probability systems and their entropy, KL and cross-entropy slices.

A system fixes a finite outcome set, ``n`` variables (value maps on outcomes)
and a tuple of one or two distributions ``(P)`` or ``(P || Q)``.  The
conditioned degree-1 terms are evaluated pointwise, e.g.

    X_J.H(X_S) = sum_{j,s} P(j,s) log(P(j) / P(j,s))

which is the action ``sum_j P(j) f(P|X_J=j)`` applied to the entropy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from . import subsets as ss
from .core import Backend, RealGroup, Tolerance

NORMALIZATION_TOL = 1e-12
INDEPENDENCE_TOL = 1e-9
STOCHASTIC_TOL = 1e-9


class ConditioningError(ValueError):
    """Conditioning on an event of zero probability."""


class AbsoluteContinuityError(ValueError):
    """``P`` is not absolutely continuous with respect to ``Q``."""


def _check_vector(p, m: int, what: str) -> np.ndarray:
    arr = np.asarray(p, dtype=float)
    if arr.shape != (m,):
        raise ValueError(f"{what}: expected {m} probabilities, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0):
        bad = int(np.flatnonzero(~np.isfinite(arr) | (arr < 0))[0])
        raise ValueError(f"{what}: invalid probability at outcome {bad}: {arr[bad]!r}")
    total = math.fsum(arr)
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise ValueError(f"{what}: probabilities sum to {total!r}, not 1")
    return arr / total


def _sort_labels(values) -> list:
    uniq = list(dict.fromkeys(values))
    try:
        return sorted(uniq)
    except TypeError:
        return uniq


class DiscreteSystem:
    """Outcomes, variables and a distribution tuple ``(P)`` or ``(P || Q)``.

    ``codes[w, i]`` is the index of the value of variable ``i + 1`` at outcome
    ``w`` within ``labels[i]``.  Instances are treated as immutable.
    """

    def __init__(self, codes, labels: Sequence[Sequence[Any]], dists, names=None,
                 outcome_ids=None):
        codes = np.array(codes, dtype=np.int64)
        if codes.ndim != 2:
            raise ValueError("codes must be an (outcomes x variables) array")
        m, n = codes.shape
        if m == 0:
            raise ValueError("a system needs at least one outcome")
        ss.check_n(n)
        if len(labels) != n:
            raise ValueError("one label list per variable required")
        for i, lab in enumerate(labels):
            if np.any(codes[:, i] < 0) or np.any(codes[:, i] >= len(lab)):
                raise ValueError(f"variable {i + 1}: code outside its label range")
        dists = [np.asarray(d, dtype=float) for d in dists]
        if not 1 <= len(dists) <= 2:
            raise ValueError("distribution tuple must have one or two members")
        names_d = ("P", "Q")
        dists = [_check_vector(d, m, names_d[k]) for k, d in enumerate(dists)]
        self.codes = codes
        self.codes.setflags(write=False)
        self.labels = [list(lab) for lab in labels]
        self.dists = np.vstack(dists)
        self.dists.setflags(write=False)
        self.names = list(names) if names is not None else [f"X{i + 1}" for i in range(n)]
        if len(self.names) != n:
            raise ValueError("one name per variable required")
        self.outcome_ids = list(outcome_ids) if outcome_ids is not None else list(range(m))
        if len(self.dists) == 2:
            bad = np.flatnonzero((self.dists[0] > 0) & (self.dists[1] == 0))
            if bad.size:
                shown = ", ".join(self.describe_outcome(int(w)) for w in bad[:5])
                raise AbsoluteContinuityError(
                    f"P has mass where Q vanishes at outcome(s) {shown}"
                )

    @classmethod
    def from_outcomes(cls, outcomes: Sequence[Sequence[Any]], P, Q=None, names=None,
                      labels=None):
        """Build from label tuples, one per outcome."""
        rows = [tuple(o) for o in outcomes]
        if not rows:
            raise ValueError("a system needs at least one outcome")
        n = len(rows[0])
        if any(len(r) != n for r in rows):
            raise ValueError("all outcomes must have one label per variable")
        if labels is None:
            labels = [_sort_labels(r[i] for r in rows) for i in range(n)]
        index = [{lab: k for k, lab in enumerate(labs)} for labs in labels]
        try:
            codes = [[index[i][r[i]] for i in range(n)] for r in rows]
        except KeyError as e:
            raise ValueError(f"label {e.args[0]!r} not declared for its variable") from None
        dists = [P] if Q is None else [P, Q]
        return cls(codes, labels, dists, names=names)

    # -- basic accessors

    @property
    def n(self) -> int:
        return self.codes.shape[1]

    @property
    def m(self) -> int:
        return self.codes.shape[0]

    @property
    def r(self) -> int:
        return len(self.dists) - 1

    def outcome_labels(self, w: int) -> tuple:
        return tuple(self.labels[i][c] for i, c in enumerate(self.codes[w]))

    def describe_outcome(self, w: int) -> str:
        return f"#{self.outcome_ids[w]} {self.outcome_labels(w)}"

    def keys(self, S: int) -> tuple[np.ndarray, int]:
        """Per-outcome index of the joint value of ``X_S`` and the number of cells."""
        cols = [i - 1 for i in ss.to_indices(S)]
        if not cols:
            return np.zeros(self.m, dtype=np.int64), 1
        dims = [len(self.labels[c]) for c in cols]
        size = math.prod(dims)
        if size < 2**62:
            return np.ravel_multi_index(self.codes[:, cols].T, dims), size
        _, inv = np.unique(self.codes[:, cols], axis=0, return_inverse=True)
        inv = inv.reshape(-1)
        return inv, int(inv.max()) + 1

    def check_index(self, index: int) -> None:
        if not 0 <= index <= self.r:
            raise IndexError(f"distribution index {index} outside 0..{self.r}")

    def with_dists(self, dists) -> "DiscreteSystem":
        return DiscreteSystem(self.codes, self.labels, dists, self.names, self.outcome_ids)

    def __repr__(self):
        return f"DiscreteSystem(n={self.n}, outcomes={self.m}, r={self.r})"


@dataclass(frozen=True)
class Marginal:
    S: int
    table: dict

    def __getitem__(self, key):
        return self.table[key]


def marginal(system: DiscreteSystem, index: int, S: int) -> Marginal:
    """Law of ``X_S`` under the chosen distribution, over all label combinations."""
    system.check_index(index)
    ss.check_within(S, system.n)
    keys, size = system.keys(S)
    mass = cell_sums(keys, system.dists[index], size)
    cols = [i - 1 for i in ss.to_indices(S)]
    if not cols:
        return Marginal(S, {(): 1.0})
    dims = [len(system.labels[c]) for c in cols]
    table = {}
    for flat, multi in enumerate(np.ndindex(*dims)):
        key = tuple(system.labels[c][k] for c, k in zip(cols, multi))
        table[key] = float(mass[flat])
    return Marginal(S, table)


def _event_mask(system: DiscreteSystem, Y: int, y: Sequence[Any]) -> np.ndarray:
    cols = [i - 1 for i in ss.to_indices(Y)]
    y = tuple(y)
    if len(y) != len(cols):
        raise ValueError(f"need {len(cols)} values to condition on {ss.format_set(Y)}")
    mask = np.ones(system.m, dtype=bool)
    for c, val in zip(cols, y):
        try:
            code = system.labels[c].index(val)
        except ValueError:
            raise ConditioningError(f"value {val!r} is not a label of X{c + 1}") from None
        mask &= system.codes[:, c] == code
    return mask


def condition(system: DiscreteSystem, Y: int, y: Sequence[Any]) -> DiscreteSystem:
    """All distributions of the tuple conditioned on ``X_Y = y``; outcomes are kept."""
    ss.check_within(Y, system.n)
    mask = _event_mask(system, Y, y)
    out = []
    for k, d in enumerate(system.dists):
        mass = math.fsum(d[mask])
        if mass == 0.0:
            if k == 0:
                raise ConditioningError(f"P({ss.format_set(Y)}={tuple(y)}) = 0")
            raise AbsoluteContinuityError(f"Q({ss.format_set(Y)}={tuple(y)}) = 0 while P > 0")
        out.append(np.where(mask, d / mass, 0.0))
    # renormalize away rounding from the division
    out = [d / math.fsum(d) for d in out]
    return system.with_dists(out)


# ---------------------------------------------------------------------------
# degree-1 evaluators


def _log_fn(base):
    if base == 2:
        return np.log2
    if base in ("e", math.e):
        return np.log
    b = float(base)
    if b <= 0 or b == 1:
        raise ValueError(f"invalid logarithm base {base!r}")
    return lambda x: np.log(x) / math.log(b)


def cell_sums(keys: np.ndarray, weights: np.ndarray, size: int) -> np.ndarray:
    """Exactly rounded per-cell sums (``bincount`` with ``fsum`` accuracy)."""
    order = np.argsort(keys, kind="stable")
    k = keys[order]
    w = weights[order]
    starts = np.flatnonzero(np.r_[True, k[1:] != k[:-1]])
    ends = np.r_[starts[1:], len(k)]
    out = np.zeros(size)
    for a, b in zip(starts.tolist(), ends.tolist()):
        out[k[a]] = math.fsum(w[a:b])
    return out


def _cells(system: DiscreteSystem, J: int, S: int, index: int):
    """Cell masses of ``X_{J|S}`` and of the ``X_J`` cell containing each, for one distribution."""
    kj, nj = system.keys(J)
    kjs, njs = system.keys(J | S)
    cells, first = np.unique(kjs, return_index=True)
    d = system.dists[index]
    p_js = cell_sums(kjs, d, njs)[cells]
    p_j = cell_sums(kj, d, nj)[kj[first]]
    return p_js, p_j


def entropy_value(system: DiscreteSystem, J: int, S: int, base=2, index: int = 0) -> float:
    system.check_index(index)
    log = _log_fn(base)
    p_js, p_j = _cells(system, J, S, index)
    live = p_js > 0
    return math.fsum(p_js[live] * log(p_j[live] / p_js[live]))


def kl_value(system: DiscreteSystem, J: int, S: int, base=2) -> float:
    if system.r != 1:
        raise ValueError("KL needs a (P || Q) system")
    log = _log_fn(base)
    p_js, p_j = _cells(system, J, S, 0)
    q_js, q_j = _cells(system, J, S, 1)
    live = p_js > 0
    if np.any(q_js[live] == 0):
        raise AbsoluteContinuityError("Q vanishes on a cell charged by P")
    ratio = (p_js[live] * q_j[live]) / (p_j[live] * q_js[live])
    return math.fsum(p_js[live] * log(ratio))


def ce_value(system: DiscreteSystem, J: int, S: int, base=2) -> float:
    if system.r != 1:
        raise ValueError("cross-entropy needs a (P || Q) system")
    log = _log_fn(base)
    p_js, _ = _cells(system, J, S, 0)
    q_js, q_j = _cells(system, J, S, 1)
    live = p_js > 0
    if np.any(q_js[live] == 0):
        raise AbsoluteContinuityError("Q vanishes on a cell charged by P")
    return math.fsum(p_js[live] * log(q_j[live] / q_js[live]))


class _SystemBackend(Backend):
    def __init__(self, system: DiscreteSystem, base=2, tol: Tolerance | None = None):
        super().__init__(system.n, RealGroup(tol))
        self.system = system
        self.base = base


class EntropyBackend(_SystemBackend):
    tag = "entropy"

    def __init__(self, system, base=2, tol=None, index: int = 0):
        super().__init__(system, base, tol)
        system.check_index(index)
        self.index = index

    def evaluate(self, J, S):
        return entropy_value(self.system, J, S, self.base, self.index)


class KLBackend(_SystemBackend):
    tag = "kl"

    def evaluate(self, J, S):
        return kl_value(self.system, J, S, self.base)


class CEBackend(_SystemBackend):
    tag = "ce"

    def evaluate(self, J, S):
        return ce_value(self.system, J, S, self.base)


BACKENDS = {"entropy": EntropyBackend, "kl": KLBackend, "ce": CEBackend}


# ---------------------------------------------------------------------------
# probabilistic independence


def joint_table(system: DiscreteSystem, index: int, *blocks: int) -> np.ndarray:
    """Dense joint law of ``(X_{B_1}, X_{B_2}, ...)``; blocks may overlap."""
    system.check_index(index)
    keys, dims = [], []
    for B in blocks:
        k, size = system.keys(B)
        keys.append(k)
        dims.append(size)
    flat = np.ravel_multi_index(keys, dims) if keys else np.zeros(system.m, dtype=np.int64)
    mass = cell_sums(flat, system.dists[index], math.prod(dims))
    return mass.reshape(dims)


def p_independent(system: DiscreteSystem, index: int, A: int, B: int, C: int,
                  tol: float = INDEPENDENCE_TOL) -> bool:
    """``P(a,b,c) = P(a|c) P(b,c)`` for all values, with ``P(a|c) := 0`` when ``P(c) = 0``."""
    for X in (A, B, C):
        ss.check_within(X, system.n)
    t = joint_table(system, index, A, B, C)
    p_ac = t.sum(axis=1)
    p_bc = t.sum(axis=0)
    p_c = p_ac.sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.where(p_c > 0, p_ac / np.where(p_c > 0, p_c, 1.0), 0.0)
    rhs = cond[:, None, :] * p_bc[None, :, :]
    return bool(np.all(np.abs(t - rhs) <= tol))


def p_mutually_independent(system: DiscreteSystem, index: int, parts: Sequence[int], C: int,
                           tol: float = INDEPENDENCE_TOL) -> bool:
    """Mutual independence of blocks given ``C``, as pairwise block-versus-rest."""
    union = 0
    for p in parts:
        union |= p
    return all(p_independent(system, index, p, union & ~p, C, tol) for p in parts)


def independence_oracle(system: DiscreteSystem, index: int = 0, tol: float = INDEPENDENCE_TOL):
    return lambda A, B, C: p_independent(system, index, A, B, C, tol)


# ---------------------------------------------------------------------------
# Markov chains


def _check_stochastic(T, rows: int, cols: int, what: str) -> np.ndarray:
    T = np.asarray(T, dtype=float)
    if T.shape != (rows, cols):
        raise ValueError(f"{what}: expected shape {(rows, cols)}, got {T.shape}")
    if np.any(T < 0) or not np.all(np.isfinite(T)):
        raise ValueError(f"{what}: negative or non-finite entry")
    sums = T.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > STOCHASTIC_TOL):
        raise ValueError(f"{what}: rows do not sum to 1")
    return T


def chain_joint(state_sizes: Sequence[int], initial, transitions) -> np.ndarray:
    sizes = list(state_sizes)
    if not sizes or any(k < 1 for k in sizes):
        raise ValueError("state sizes must be positive")
    if len(transitions) != len(sizes) - 1:
        raise ValueError(f"need {len(sizes) - 1} transition matrices")
    p = _check_vector(initial, sizes[0], "initial distribution")
    joint = p
    for i, T in enumerate(transitions):
        T = _check_stochastic(T, sizes[i], sizes[i + 1], f"transition {i + 1}")
        joint = joint[..., None] * T.reshape((1,) * i + T.shape)
    return joint


def _product_codes(sizes: Sequence[int]) -> np.ndarray:
    grid = np.indices(sizes).reshape(len(sizes), -1)
    return grid.T


def build_markov_chain(state_sizes: Sequence[int], initial, transitions) -> DiscreteSystem:
    """Joint law ``P(x_1) prod_i T_i(x_{i+1}|x_i)`` on the full product space."""
    joint = chain_joint(state_sizes, initial, transitions)
    labels = [list(range(k)) for k in state_sizes]
    return DiscreteSystem(_product_codes(state_sizes), labels, [joint.reshape(-1)])


def second_law_system(state_sizes: Sequence[int], P1, Q1, transitions) -> DiscreteSystem:
    """``(P || Q)`` chains started from ``P1`` and ``Q1`` that share transitions."""
    jp = chain_joint(state_sizes, P1, transitions)
    jq = chain_joint(state_sizes, Q1, transitions)
    labels = [list(range(k)) for k in state_sizes]
    return DiscreteSystem(_product_codes(state_sizes), labels, [jp.reshape(-1), jq.reshape(-1)])


def transition_matrices(system: DiscreteSystem, index: int) -> list[np.ndarray]:
    """Empirical ``P(x_{i+1} | x_i)``; rows with ``P(x_i) = 0`` are NaN."""
    out = []
    for i in range(1, system.n):
        t = joint_table(system, index, 1 << (i - 1), 1 << i)
        rows = t.sum(axis=1, keepdims=True)
        with np.errstate(divide="ignore", invalid="ignore"):
            out.append(np.where(rows > 0, t / rows, np.nan))
    return out


def is_markov_chain(system: DiscreteSystem, index: int = 0, tol: float = INDEPENDENCE_TOL) -> bool:
    n = system.n
    for i in range(2, n):
        past = ss.full(i - 1)
        if not p_independent(system, index, 1 << i, past, 1 << (i - 1), tol):
            return False
    return True


def equal_transitions(system: DiscreteSystem, tol: float = INDEPENDENCE_TOL) -> bool:
    """Both members are Markov chains with the same transitions where ``P(x_i) > 0``."""
    if system.r != 1:
        raise ValueError("equal transitions needs a (P || Q) system")
    if not (is_markov_chain(system, 0, tol) and is_markov_chain(system, 1, tol)):
        return False
    tp = transition_matrices(system, 0)
    tq = transition_matrices(system, 1)
    for a, b in zip(tp, tq):
        live = ~np.isnan(a[:, 0])
        if np.any(np.abs(a[live] - b[live]) > tol):
            return False
    return True


def _property_holds(system: DiscreteSystem, prop) -> bool:
    tag = prop[0]
    if tag == "fcmi":
        K = prop[1]
        return all(
            p_mutually_independent(system, k, K.parts, K.J) for k in range(system.r + 1)
        )
    if tag == "mrf":
        from .graphs import test_mrf_oracle

        G = prop[1]
        return all(
            test_mrf_oracle(G, independence_oracle(system, k), mode="cutset")
            for k in range(system.r + 1)
        )
    if tag == "equal_transitions":
        return equal_transitions(system)
    raise ValueError(f"unknown property {tag!r}")


def verify_stability(system: DiscreteSystem, prop, Y: int, y: Sequence[Any]) -> bool:
    """Whether ``prop`` still holds after conditioning the tuple on ``X_Y = y``.

    ``prop`` is ``("fcmi", K)``, ``("mrf", G)`` or ``("equal_transitions",)``.
    Properties are checked on every member of the tuple.
    """
    if not _property_holds(system, prop):
        raise ValueError(f"property {prop[0]!r} does not hold on the input system")
    return _property_holds(condition(system, Y, y), prop)


def same_variable(system: DiscreteSystem, A: int, B: int) -> bool:
    """``X_A`` and ``X_B`` induce the same partition of the outcomes."""
    ka, _ = system.keys(A)
    kb, _ = system.keys(B)
    pairs = set(zip(ka.tolist(), kb.tolist()))
    return len(pairs) == len(set(ka.tolist())) == len(set(kb.tolist()))


def support_values(system: DiscreteSystem, Y: int, index: int = 0) -> list[tuple]:
    """Label tuples ``y`` of ``X_Y`` with positive mass, ascending by code."""
    k, _ = system.keys(Y)
    cols = [i - 1 for i in ss.to_indices(Y)]
    seen = {}
    for w in np.flatnonzero(system.dists[index] > 0):
        seen.setdefault(int(k[w]), tuple(system.labels[c][system.codes[w, c]] for c in cols))
    return [seen[key] for key in sorted(seen)]

