"""Variable subsets encoded as integer bit patterns.

Index ``i`` (1-based) is stored in bit ``i - 1``, so ``{1, 3}`` is ``0b101``.
A nonempty subset doubles as the name of a diagram atom, and any subset doubles
as the joint variable ``X_I`` of the generated submonoid (joint of variables is
union of index sets).
"""

from __future__ import annotations

from typing import Iterable, Iterator, Sequence

DEFAULT_MAX_N = 16


class SizeError(ValueError):
    """Raised when the ground-set size is outside the supported range."""


def check_n(n: int, max_n: int = DEFAULT_MAX_N) -> None:
    if not isinstance(n, int) or n < 1 or n > max_n:
        raise SizeError(f"ground-set size n={n!r} outside 1..{max_n}")


def full(n: int) -> int:
    return (1 << n) - 1


def from_indices(indices: Iterable[int]) -> int:
    bits = 0
    for i in indices:
        if i < 1:
            raise ValueError(f"variable indices are 1-based, got {i}")
        bits |= 1 << (i - 1)
    return bits


def to_indices(bits: int) -> tuple[int, ...]:
    out = []
    i = 1
    while bits:
        if bits & 1:
            out.append(i)
        bits >>= 1
        i += 1
    return tuple(out)


def singletons(bits: int) -> list[int]:
    return [1 << (i - 1) for i in to_indices(bits)]


def size(bits: int) -> int:
    return bin(bits).count("1")


def complement(bits: int, n: int) -> int:
    return full(n) & ~bits


def is_subset(a: int, b: int) -> bool:
    return a & ~b == 0


def subsets_of(bits: int) -> Iterator[int]:
    """All subsets of ``bits`` (including empty), ascending."""
    return iter(sorted(_submasks(bits)))


def _submasks(bits: int) -> list[int]:
    out = []
    sub = bits
    while True:
        out.append(sub)
        if sub == 0:
            break
        sub = (sub - 1) & bits
    return out


def check_within(bits: int, n: int) -> None:
    if bits < 0 or bits >> n:
        raise ValueError(f"subset {format_set(bits)} not within 1..{n}")


def enumerate_atoms(n: int, max_n: int = DEFAULT_MAX_N) -> list[int]:
    """All nonempty subsets of ``{1..n}`` in ascending bit-pattern order."""
    check_n(n, max_n)
    return list(range(1, 1 << n))


def region(L_list: Sequence[int], J: int, n: int) -> set[int]:
    """Atoms inside every circle ``X_{L_k}`` and outside the circle ``X_J``.

    ``p_W`` belongs to the region iff ``W`` meets every ``L_k`` and misses ``J``.
    """
    for b in (*L_list, J):
        check_within(b, n)
    return {
        W
        for W in range(1, 1 << n)
        if not (W & J) and all(W & L for L in L_list)
    }


def is_interval(bits: int) -> bool:
    """True iff the index set is a run of consecutive integers."""
    if bits == 0:
        return False
    low = bits & -bits
    shifted = bits // low
    return shifted & (shifted + 1) == 0


def format_set(bits: int) -> str:
    return "{" + ",".join(str(i) for i in to_indices(bits)) + "}"


def atom_label(bits: int) -> str:
    idx = to_indices(bits)
    if all(i < 10 for i in idx):
        return "p" + "".join(str(i) for i in idx)
    return "p{" + ",".join(str(i) for i in idx) + "}"


def parse_set(text: str) -> int:
    """Parse ``"1,2,3"``, ``"{1,2}"``, ``"123"`` or ``""`` into a bit pattern."""
    s = text.strip().strip("{}").strip()
    if not s or s in ("-", "0", "empty"):
        return 0
    if "," in s or " " in s:
        parts = [p for p in s.replace(",", " ").split() if p]
        return from_indices(int(p) for p in parts)
    return from_indices(int(c) for c in s)
