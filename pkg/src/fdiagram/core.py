"""Generic information diagrams over a value-group backend.

A backend supplies a value group (zero, addition, negation, zero test) and one
primitive: the degree-1 conditioned term ``X_J.F(X_S)``.  Everything else, from
higher interaction terms to atom values, independence tests and FCMI images, is
computed here from that primitive and the union rule ``X_J.(X_K.f) = X_{J|K}.f``.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Callable, Iterable, Sequence

from . import subsets as ss


class VerificationError(AssertionError):
    """Two characterizations that must agree did not."""


class PreconditionError(ValueError):
    """An operation was called outside its documented precondition."""


# ---------------------------------------------------------------------------
# value groups


class ValueGroup(ABC):
    exact: bool

    @property
    @abstractmethod
    def zero(self) -> Any: ...

    @abstractmethod
    def add(self, a: Any, b: Any) -> Any: ...

    @abstractmethod
    def neg(self, a: Any) -> Any: ...

    def sub(self, a: Any, b: Any) -> Any:
        return self.add(a, self.neg(b))

    def total(self, values: Iterable[Any]) -> Any:
        acc = self.zero
        for v in values:
            acc = self.add(acc, v)
        return acc

    def scale(self, a: Any, k: int) -> Any:
        """``k * a`` for an integer ``k``."""
        out = self.zero
        base = a if k >= 0 else self.neg(a)
        for _ in range(abs(k)):
            out = self.add(out, base)
        return out

    @abstractmethod
    def is_zero(self, v: Any, scale: float = 1.0) -> bool: ...

    def equal(self, a: Any, b: Any, scale: float = 1.0) -> bool:
        return self.is_zero(self.sub(a, b), scale)


@dataclass(frozen=True)
class Tolerance:
    abs: float = 1e-9
    rel: float = 1e-9

    def __post_init__(self):
        if self.abs <= 0 or self.rel < 0:
            raise ValueError("tolerances must be positive")


class RealGroup(ValueGroup):
    """The reals, with a mixed absolute/relative zero test."""

    exact = False

    def __init__(self, tol: Tolerance | None = None):
        self.tol = tol or Tolerance()

    @property
    def zero(self) -> float:
        return 0.0

    def add(self, a, b):
        return a + b

    def neg(self, a):
        return -a

    def sub(self, a, b):
        return a - b

    def total(self, values):
        # exactly rounded, hence independent of summation order
        return math.fsum(values)

    def scale(self, a, k):
        return k * a

    def is_zero(self, v, scale=1.0):
        return abs(v) <= self.tol.abs + self.tol.rel * scale


# ---------------------------------------------------------------------------
# backends


class Backend(ABC):
    """Degree-1 evaluator ``X_J.F(X_S)`` for ``n`` fixed variables."""

    n: int
    group: ValueGroup
    tag: str = "backend"

    def __init__(self, n: int, group: ValueGroup, max_n: int = ss.DEFAULT_MAX_N):
        ss.check_n(n, max_n)
        self.n = n
        self.group = group
        self._degree1: dict[tuple[int, int], Any] = {}
        self._interactions: dict[tuple[int, tuple[int, ...]], Any] = {}
        self._scale: float | None = None

    @abstractmethod
    def evaluate(self, J: int, S: int) -> Any:
        """Uncached ``X_J.F(X_S)``."""

    def degree1(self, J: int, S: int) -> Any:
        key = (J, S)
        try:
            return self._degree1[key]
        except KeyError:
            pass
        ss.check_within(J, self.n)
        ss.check_within(S, self.n)
        v = self.evaluate(J, S)
        self._degree1[key] = v
        return v

    @property
    def zero_scale(self) -> float:
        """Magnitude used by the relative part of the zero test."""
        if self._scale is None:
            if self.group.exact:
                self._scale = 1.0
            else:
                vals = [abs(self.degree1(0, s)) for s in ss.singletons(ss.full(self.n))]
                vals.append(abs(self.degree1(0, ss.full(self.n))))
                m = max(vals)
                self._scale = m if m > self.group.tol.abs else 1.0
        return self._scale

    def is_zero(self, v: Any) -> bool:
        return self.group.is_zero(v, self.zero_scale)

    def clear_cache(self) -> None:
        self._degree1.clear()
        self._interactions.clear()


# ---------------------------------------------------------------------------
# interaction terms and atoms


def conditioned_interaction(backend: Backend, J: int, I_list: Sequence[int]) -> Any:
    """``X_J.F(X_{L_1}; ...; X_{L_q})`` via ``F_q = F_{q-1} - Y_q.F_{q-1}``."""
    if not I_list:
        raise ValueError("interaction needs at least one argument")
    key = (J, tuple(sorted(I_list)))
    return _interaction(backend, key)


def _interaction(backend: Backend, key: tuple[int, tuple[int, ...]]) -> Any:
    cache = backend._interactions
    try:
        return cache[key]
    except KeyError:
        pass
    J, args = key
    if len(args) == 1:
        v = backend.degree1(J, args[0])
    else:
        head, last = args[:-1], args[-1]
        v = backend.group.sub(
            _interaction(backend, (J, head)),
            _interaction(backend, (J | last, head)),
        )
    cache[key] = v
    return v


def atom_value(backend: Backend, I: int) -> Any:
    if I <= 0 or I >> backend.n:
        raise ValueError(f"not an atom of n={backend.n}: {I}")
    rest = ss.complement(I, backend.n)
    return conditioned_interaction(backend, rest, ss.singletons(I))


@dataclass
class Diagram:
    """Values of all ``2^n - 1`` atoms; ``values[I - 1]`` is the atom ``p_I``."""

    n: int
    values: list
    group: ValueGroup
    tag: str = "backend"
    _scale: float | None = field(default=None, repr=False)

    def __post_init__(self):
        if len(self.values) != (1 << self.n) - 1:
            raise ValueError("diagram needs exactly 2^n - 1 atom values")

    def __getitem__(self, I: int):
        return self.values[I - 1]

    def items(self):
        return [(I, self.values[I - 1]) for I in range(1, 1 << self.n)]

    @property
    def atoms(self) -> list[int]:
        return list(range(1, 1 << self.n))

    @property
    def zero_scale(self) -> float:
        if self._scale is None:
            if self.group.exact:
                self._scale = 1.0
            else:
                m = max(abs(v) for v in self.values)
                self._scale = m if m > self.group.tol.abs else 1.0
        return self._scale

    def is_zero_atom(self, I: int) -> bool:
        return self.group.is_zero(self[I], self.zero_scale)

    def is_zero_value(self, v) -> bool:
        return self.group.is_zero(v, self.zero_scale)

    def total(self):
        return measure(self, self.atoms)

    def nonzero_atoms(self) -> list[int]:
        return [I for I in self.atoms if not self.is_zero_atom(I)]

    def restrict_zero(self, atoms: Iterable[int]) -> list[int]:
        """Atoms from ``atoms`` (ascending) whose value is not zero."""
        return [I for I in sorted(atoms) if not self.is_zero_atom(I)]


def build_diagram(backend: Backend, jobs: int = 1) -> Diagram:
    atoms = range(1, 1 << backend.n)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            values = list(pool.map(lambda I: atom_value(backend, I), atoms))
    else:
        values = [atom_value(backend, I) for I in atoms]
    return Diagram(backend.n, values, backend.group, backend.tag)


def measure(diagram: Diagram, A: Iterable[int]):
    atoms = sorted(set(A))
    for I in atoms:
        if I <= 0 or I >> diagram.n:
            raise ValueError(f"not an atom of n={diagram.n}: {I}")
    return diagram.group.total(diagram[I] for I in atoms)


def subset_reconstruct(backend: Backend, A: Iterable[int], I: int) -> Any:
    """Recover ``F(p_I)`` from the region ``A`` by inclusion-exclusion over ``K <= I``.

    ``X_{[n]-K}.F(A)`` is expanded atom-wise: each ``p_L`` in ``A`` contributes
    ``X_{([n]-L) | ([n]-K)}.F(;_{l in L} X_l)``.
    """
    A = sorted(set(A))
    if I not in A:
        raise ValueError(f"atom {ss.atom_label(I)} is not in the region")
    n, g = backend.n, backend.group
    terms = []
    for K in ss.subsets_of(I):
        cond_k = ss.complement(K, n)
        region_value = g.total(
            conditioned_interaction(backend, ss.complement(L, n) | cond_k, ss.singletons(L))
            for L in A
        )
        sign = (ss.size(K) - ss.size(I)) % 2
        terms.append(g.neg(region_value) if sign else region_value)
    return g.total(terms)


# ---------------------------------------------------------------------------
# total correlation and friends


def _parts(I: int | Sequence[int]) -> list[int]:
    if isinstance(I, int):
        parts = ss.singletons(I)
    else:
        parts = list(I)
    if not parts:
        raise ValueError("need a nonempty index set")
    return parts


def total_correlation(backend: Backend, J: int, I: int | Sequence[int]) -> Any:
    """``X_J.(sum_i F(X_i) - F(X_I))``; ``I`` is an index set or a list of blocks."""
    parts = _parts(I)
    g = backend.group
    union = 0
    for p in parts:
        union |= p
    return g.sub(g.total(backend.degree1(J, p) for p in parts), backend.degree1(J, union))


def dual_total_correlation(backend: Backend, J: int, I: int | Sequence[int]) -> Any:
    """``X_J.(F(X_I) - sum_i X_{I-i}.F(X_i))``."""
    parts = _parts(I)
    g = backend.group
    union = 0
    for p in parts:
        union |= p
    rest = g.total(backend.degree1(J | (union & ~p), p) for p in parts)
    return g.sub(backend.degree1(J, union), rest)


def o_information(backend: Backend, I, J: int = 0):
    g = backend.group
    return g.sub(total_correlation(backend, J, I), dual_total_correlation(backend, J, I))


def s_information(backend: Backend, I, J: int = 0):
    g = backend.group
    return g.add(total_correlation(backend, J, I), dual_total_correlation(backend, J, I))


# ---------------------------------------------------------------------------
# independence


def is_independent(backend: Backend, A: int, B: int, C: int) -> bool:
    """``A`` and ``B`` are F-independent given ``C``: ``X_C.F(X_A; X_B) = 0``."""
    return backend.is_zero(conditioned_interaction(backend, C, [A, B]))


def _check_disjoint(parts: Sequence[int]) -> None:
    seen = 0
    for p in parts:
        if p & seen:
            raise ValueError("parts must be pairwise disjoint")
        seen |= p


def is_mutually_independent(
    backend: Backend, parts: Sequence[int], Y: int = 0, verify: bool = False
) -> bool:
    """Mutual F-independence of the blocks given ``Y``, via conditional DTC.

    With ``verify`` the two other equivalent criteria (vanishing of all
    conditioned interactions of two or more blocks, and pairwise independence
    of each block from the rest) are evaluated and must agree.
    """
    parts = list(parts)
    _check_disjoint(parts)
    if len(parts) < 2:
        return True
    verdict = backend.is_zero(dual_total_correlation(backend, Y, parts))
    if verify:
        q = len(parts)
        union = 0
        for p in parts:
            union |= p
        item3 = True
        for k in range(2, q + 1):
            for idx in combinations(range(q), k):
                chosen = [parts[i] for i in idx]
                outside = union & ~_union(chosen)
                if not backend.is_zero(conditioned_interaction(backend, Y | outside, chosen)):
                    item3 = False
        item4 = all(
            is_independent(backend, parts[i], union & ~parts[i], Y) for i in range(q)
        )
        if not (verdict == item3 == item4):
            raise VerificationError(
                f"mutual independence criteria disagree: dtc={verdict} "
                f"interactions={item3} pairwise={item4}"
            )
    return verdict


def _union(parts: Iterable[int]) -> int:
    out = 0
    for p in parts:
        out |= p
    return out


# ---------------------------------------------------------------------------
# full conditional mutual independences


@dataclass(frozen=True)
class ConditionalPartition:
    """``(J, L_1, ..., L_q)``: pairwise disjoint blocks covering ``{1..n}``.

    Empty blocks are allowed.
    """

    n: int
    J: int
    parts: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        ss.check_n(self.n, max(self.n, ss.DEFAULT_MAX_N))
        blocks = (self.J, *self.parts)
        seen = 0
        for b in blocks:
            ss.check_within(b, self.n)
            if b & seen:
                raise ValueError("conditional partition blocks overlap")
            seen |= b
        if seen != ss.full(self.n):
            missing = ss.format_set(ss.full(self.n) & ~seen)
            raise ValueError(f"conditional partition does not cover {missing}")

    @property
    def q(self) -> int:
        return len(self.parts)


def fcmi_image(K: ConditionalPartition) -> set[int]:
    """Atoms that vanish exactly when ``K`` induces an FCMI."""
    if K.q < 2:
        raise ValueError("the image needs at least two blocks")
    L = _union(K.parts)
    out: set[int] = set()
    for k in range(2, K.q + 1):
        for idx in combinations(range(K.q), k):
            chosen = [K.parts[i] for i in idx]
            out |= ss.region(chosen, K.J | (L & ~_union(chosen)), K.n)
    return out


def test_fcmi(
    backend: Backend, K: ConditionalPartition, verify: bool = False
) -> tuple[bool, list[int]]:
    """Whether ``K`` induces an F-FCMI, with the violating image atoms."""
    if K.n != backend.n:
        raise ValueError("partition and backend have different n")
    image = sorted(fcmi_image(K))
    violating = [W for W in image if not backend.is_zero(atom_value(backend, W))]
    ok = not violating
    if verify:
        L = _union(K.parts)
        item2 = True
        for k in range(2, K.q + 1):
            for idx in combinations(range(K.q), k):
                chosen = [K.parts[i] for i in idx]
                cond = K.J | (L & ~_union(chosen))
                if not backend.is_zero(conditioned_interaction(backend, cond, chosen)):
                    item2 = False
        if item2 != ok:
            raise VerificationError(
                f"FCMI criteria disagree: atoms={ok} block-interactions={item2}"
            )
    return ok, violating


# ``test_fcmi`` is library API, not a pytest test
test_fcmi.__test__ = False  # type: ignore[attr-defined]


def sum_formula_terms(n: int, parts: Sequence[int]) -> list[tuple[int, int]]:
    """``(conditioning, W)`` pairs whose terms ``X_{L-W}.F(;_{w in W} X_w)`` sum
    to ``F(;_i X_{L_i})`` for pairwise disjoint blocks."""
    parts = list(parts)
    _check_disjoint(parts)
    L = _union(parts)
    choices = [[w for w in ss.subsets_of(p) if w] for p in parts]
    out = []

    def rec(i: int, acc: int):
        if i == len(choices):
            out.append((L & ~acc, acc))
            return
        for w in choices[i]:
            rec(i + 1, acc | w)

    rec(0, 0)
    return out


def independence_oracle(backend: Backend) -> Callable[[int, int, int], bool]:
    return lambda A, B, C: is_independent(backend, A, B, C)
