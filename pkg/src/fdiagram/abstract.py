"""Exact finite models: commutative idempotent monoids acting on finite abelian groups.

All axioms are checked exhaustively when a model is built, so every value that
comes out of these models is exact.
"""

from __future__ import annotations

import itertools
import math
from typing import Sequence

import numpy as np

from . import subsets as ss
from .core import Backend, ValueGroup

MAX_MONOID = 64
MAX_GROUP = 256


class ModelError(ValueError):
    """A table violates the monoid, group, action or chain-rule axioms."""


class UnsupportedModelError(ValueError):
    """The operation needs a top element and the monoid has none."""


class FiniteMonoid:
    """Commutative idempotent monoid on ``0..m-1`` given by its table."""

    def __init__(self, table, identity: int, names: Sequence[str] | None = None):
        t = np.asarray(table, dtype=np.int64)
        if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] == 0:
            raise ModelError("monoid table must be square and nonempty")
        m = t.shape[0]
        if m > MAX_MONOID:
            raise ModelError(f"monoid has {m} elements, cap is {MAX_MONOID}")
        if np.any(t < 0) or np.any(t >= m):
            raise ModelError("monoid table entry out of range")
        if not 0 <= identity < m:
            raise ModelError("identity index out of range")
        r = np.arange(m)
        if np.any(t[identity] != r) or np.any(t[:, identity] != r):
            raise ModelError("identity is not neutral")
        if np.any(t != t.T):
            x, y = map(int, np.argwhere(t != t.T)[0])
            raise ModelError(f"not commutative at ({x}, {y})")
        if np.any(t[r, r] != r):
            x = int(np.flatnonzero(t[r, r] != r)[0])
            raise ModelError(f"not idempotent at {x}")
        # (xy)z == x(yz) for all triples
        left = t[t[:, :, None], r[None, None, :]]
        right = t[r[:, None, None], t[None, :, :]]
        if np.any(left != right):
            x, y, z = map(int, np.argwhere(left != right)[0])
            raise ModelError(f"not associative at ({x}, {y}, {z})")
        self.table = t
        self.table.setflags(write=False)
        self.identity = identity
        self.names = list(names) if names is not None else [str(i) for i in range(m)]

    @property
    def m(self) -> int:
        return self.table.shape[0]

    def mul(self, x: int, y: int) -> int:
        return int(self.table[x, y])

    def product(self, xs) -> int:
        out = self.identity
        for x in xs:
            out = int(self.table[out, x])
        return out

    def leq(self, x: int, y: int) -> bool:
        """``x <= y`` iff ``xy = y`` (``y`` is more informative)."""
        return self.mul(x, y) == y


class FiniteAbelianGroup(ValueGroup):
    """``Z/k_1 x ... x Z/k_s``; elements are tuples of residues."""

    exact = True

    def __init__(self, factors: Sequence[int]):
        factors = tuple(int(k) for k in factors)
        if any(k < 2 for k in factors):
            raise ModelError("cyclic factors must have order >= 2")
        if math.prod(factors) > MAX_GROUP:
            raise ModelError(f"group order {math.prod(factors)} exceeds cap {MAX_GROUP}")
        self.factors = factors
        self.elements = list(itertools.product(*(range(k) for k in factors)))
        self._index = {g: i for i, g in enumerate(self.elements)}

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def torsion_free(self) -> bool:
        return not self.factors

    @property
    def zero(self):
        return (0,) * len(self.factors)

    def add(self, a, b):
        return tuple((x + y) % k for x, y, k in zip(a, b, self.factors))

    def neg(self, a):
        return tuple((-x) % k for x, k in zip(a, self.factors))

    def scale(self, a, k):
        return tuple((k * x) % f for x, f in zip(a, self.factors))

    def scale_each(self, g, coeff):
        """Componentwise multiplication by integers."""
        return tuple((c * x) % k for x, c, k in zip(g, coeff, self.factors))

    def is_zero(self, v, scale=1.0):
        return tuple(v) == self.zero

    def index(self, g) -> int:
        try:
            return self._index[tuple(g)]
        except KeyError:
            raise ModelError(f"{g!r} is not an element of Z/{self.factors}") from None

    def coerce(self, g):
        if isinstance(g, (int, np.integer)):
            if len(self.factors) != 1:
                raise ModelError("integer group elements need a single cyclic factor")
            g = (int(g),)
        g = tuple(g)
        if len(g) != len(self.factors):
            raise ModelError("group element has the wrong number of components")
        return tuple(int(x) % k for x, k in zip(g, self.factors))


class AbstractModel:
    """Additive action of a monoid on a group; ``action[x][gi]`` is the index of ``x.g``."""

    def __init__(self, monoid: FiniteMonoid, group: FiniteAbelianGroup, action):
        a = np.asarray(action, dtype=np.int64)
        if a.shape != (monoid.m, group.order):
            raise ModelError(f"action table must have shape {(monoid.m, group.order)}")
        if np.any(a < 0) or np.any(a >= group.order):
            raise ModelError("action table entry out of range")
        G = group.elements
        if np.any(a[monoid.identity] != np.arange(group.order)):
            raise ModelError("identity does not act trivially")
        add_idx = np.array(
            [[group.index(group.add(g, h)) for h in G] for g in G], dtype=np.int64
        )
        for x in range(monoid.m):
            for y in range(monoid.m):
                if np.any(a[x, a[y]] != a[monoid.mul(x, y)]):
                    raise ModelError(f"action not compatible with product at ({x}, {y})")
            # x.(g + h) == x.g + x.h
            lhs = a[x][add_idx]
            rhs = add_idx[a[x][:, None], a[x][None, :]]
            if np.any(lhs != rhs):
                raise ModelError(f"action of {x} is not additive")
        self.monoid = monoid
        self.group = group
        self.action = a
        self.action.setflags(write=False)

    def act(self, x: int, g):
        return self.group.elements[self.action[x, self.group.index(g)]]

    def cocycle(self, values) -> "Cocycle":
        return Cocycle(self, values)


class Cocycle:
    """A map ``M -> G`` satisfying ``F(xy) = F(x) + x.F(y)``."""

    def __init__(self, model: AbstractModel, values):
        g = model.group
        vals = [g.coerce(v) for v in values]
        if len(vals) != model.monoid.m:
            raise ModelError("cocycle needs one value per monoid element")
        for x in range(model.monoid.m):
            for y in range(model.monoid.m):
                lhs = vals[model.monoid.mul(x, y)]
                rhs = g.add(vals[x], model.act(x, vals[y]))
                if lhs != rhs:
                    raise ModelError(f"chain rule fails at ({x}, {y})")
        self.model = model
        self.values = vals

    def __call__(self, x: int):
        return self.values[x]

    def __eq__(self, other):
        return isinstance(other, Cocycle) and self.model is other.model and self.values == other.values

    def __hash__(self):
        return hash(tuple(self.values))

    def __repr__(self):
        return f"Cocycle({self.values})"


def satisfies_chain_rule(model: AbstractModel, values) -> bool:
    try:
        Cocycle(model, values)
    except ModelError:
        return False
    return True


def top_element(monoid: FiniteMonoid) -> int | None:
    for x in range(monoid.m):
        if np.all(monoid.table[:, x] == x):
            return x
    return None


def _require_top(model: AbstractModel) -> int:
    top = top_element(model.monoid)
    if top is None:
        raise UnsupportedModelError("monoid has no top element")
    return top


def annihilated(model: AbstractModel) -> list:
    """Group elements ``g`` with ``top.g = 0``."""
    top = _require_top(model)
    g = model.group
    return [h for h in g.elements if g.is_zero(model.act(top, h))]


def psi(model: AbstractModel, g) -> Cocycle:
    """``Psi(g)(X) = g - X.g``."""
    top = _require_top(model)
    G = model.group
    g = G.coerce(g)
    if not G.is_zero(model.act(top, g)):
        raise ValueError(f"{g} is not annihilated by the top element")
    return Cocycle(model, [G.sub(g, model.act(x, g)) for x in range(model.monoid.m)])


def phi(model: AbstractModel, F: Cocycle):
    """``Phi(F) = F(top)``."""
    return F(_require_top(model))


def enumerate_cocycles(model: AbstractModel) -> list[Cocycle]:
    return [psi(model, g) for g in annihilated(model)]


def brute_force_cocycles(model: AbstractModel) -> list[Cocycle]:
    """Every map ``M -> G`` that satisfies the chain rule (small models only)."""
    G = model.group
    if G.order ** model.monoid.m > 200_000:
        raise ValueError("model too large for brute force")
    out = []
    for vals in itertools.product(G.elements, repeat=model.monoid.m):
        if satisfies_chain_rule(model, vals):
            out.append(Cocycle(model, vals))
    return out


class AbstractBackend(Backend):
    """``X_J.F(X_S)`` for monoid elements ``X_1..X_n`` and a cocycle ``F``."""

    tag = "abstract"

    def __init__(self, model: AbstractModel, F: Cocycle, variables: Sequence[int]):
        if F.model is not model:
            raise ValueError("cocycle belongs to a different model")
        for x in variables:
            if not 0 <= x < model.monoid.m:
                raise ModelError(f"variable {x} is not a monoid element")
        super().__init__(len(variables), model.group)
        self.model = model
        self.F = F
        self.variables = list(variables)
        self._joint = {}

    def joint(self, S: int) -> int:
        """The product ``X_S``; ``X_{}`` is the identity."""
        try:
            return self._joint[S]
        except KeyError:
            v = self.model.monoid.product(self.variables[i - 1] for i in ss.to_indices(S))
            self._joint[S] = v
            return v

    def evaluate(self, J, S):
        return self.model.act(self.joint(J), self.F(self.joint(S)))


# ---------------------------------------------------------------------------
# model constructors


def torsion_model():
    """``(Z/2, *)`` acting on ``Z/2`` by multiplication, ``X1 = X2 = X3 = 0``, ``F = Psi(1)``.

    Monoid element ``k`` is the residue ``k``; the identity is 1 and the top is 0.
    """
    monoid = FiniteMonoid([[0, 0], [0, 1]], identity=1, names=["0", "1"])
    group = FiniteAbelianGroup([2])
    action = [[0, 0], [0, 1]]  # x.g = x * g
    model = AbstractModel(monoid, group, action)
    F = psi(model, 1)
    return model, [0, 0, 0], F


def union_monoid(family: Sequence[int]) -> FiniteMonoid:
    """Monoid of a union-closed family of bit sets containing the empty set."""
    fam = sorted(set(family))
    if 0 not in fam:
        raise ModelError("family must contain the empty set")
    index = {s: i for i, s in enumerate(fam)}
    try:
        table = [[index[a | b] for b in fam] for a in fam]
    except KeyError:
        raise ModelError("family is not closed under union") from None
    return FiniteMonoid(table, identity=index[0], names=[ss.format_set(s) for s in fam])


def subset_monoid(n: int) -> FiniteMonoid:
    return union_monoid(range(1 << n))


def idempotent_action(monoid_family: Sequence[int], group: FiniteAbelianGroup,
                      multipliers) -> list[list[int]]:
    """Action ``X.g_j = (prod_{b in X} e_{b,j}) g_j`` from idempotent multipliers.

    ``multipliers[b][j]`` must satisfy ``e^2 = e`` mod ``k_j``.
    """
    fam = sorted(set(monoid_family))
    rows = []
    for X in fam:
        coeff = [1] * len(group.factors)
        for b in ss.to_indices(X):
            coeff = [c * e for c, e in zip(coeff, multipliers[b - 1])]
        rows.append([group.index(group.scale_each(g, coeff)) for g in group.elements])
    return rows


def idempotents(k: int) -> list[int]:
    return [e for e in range(k) if (e * e) % k == e]


def union_closure(generators: Sequence[int]) -> list[int]:
    fam = {0}
    frontier = set(generators)
    while frontier:
        new = set()
        for a in frontier:
            for b in list(fam):
                c = a | b
                if c not in fam:
                    new.add(c)
            fam.add(a)
        frontier = new - fam
    return sorted(fam)


def random_model(rng: np.random.Generator, base: int = 3, max_monoid: int = 8,
                 max_group: int = 8):
    """A random valid model with a top element, plus its base family.

    The monoid is a union-closed family of subsets of ``{1..base}``; the group is a
    product of cyclic factors; each base element scales each factor by an
    idempotent residue.  Returns ``(model, family)``.
    """
    while True:
        gens = [int(g) for g in rng.integers(1, 1 << base, size=rng.integers(1, base + 2))]
        fam = union_closure(gens)
        if len(fam) <= max_monoid:
            break
    factors = []
    choices = [2, 3, 4, 6]
    while True:
        k = int(rng.choice(choices))
        if math.prod(factors) * k > max_group:
            break
        factors.append(k)
        if rng.random() < 0.4:
            break
    group = FiniteAbelianGroup(factors)
    mult = [[int(rng.choice(idempotents(k))) for k in factors] for _ in range(base)]
    monoid = union_monoid(fam)
    model = AbstractModel(monoid, group, idempotent_action(fam, group, mult))
    return model, fam
