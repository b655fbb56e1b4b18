"""The four-element variance algebra.

Variances order the subtyping behaviour of a type parameter: covariant
(`+`), contravariant (`-`), invariant (`=`) and irrelevant (`~`).  This
module holds the composition table, the lattice order with its bounds,
the partial zip operation, and their pointwise extensions to contexts
(finite ordered maps from type-variable names to variances).

Everything here is a pure table-driven function over immutable values.
"""
from __future__ import annotations

from enum import Enum
from typing import Iterable, Iterator, Mapping, Optional


class Variance(Enum):
    INV = "="
    COV = "+"
    CONTRA = "-"
    IRR = "~"

    def __repr__(self) -> str:
        return f"Variance({self.value!r})"

    def __str__(self) -> str:
        return self.value


INV = Variance.INV
COV = Variance.COV
CONTRA = Variance.CONTRA
IRR = Variance.IRR

#: All variances, in the witness-search order used throughout: `= + - ~`.
ALL_VARIANCES = (INV, COV, CONTRA, IRR)

#: Rendering order for variance sets: `+ - = ~`.
DISPLAY_ORDER = (COV, CONTRA, INV, IRR)


def render_variance_set(s: Iterable[Variance]) -> str:
    members = set(s)
    return "{" + ",".join(v.value for v in DISPLAY_ORDER if v in members) + "}"


def variance_of(symbol: str) -> Variance:
    """Parse one of `= + - ~` into a Variance."""
    try:
        return Variance(symbol)
    except ValueError:
        raise ValueError(f"not a variance symbol: {symbol!r}") from None


# Composition v.w: the variance of a w-position nested inside a v-position.
# COV is the identity; IRR is absorbing on the left and on the right.
_COMPOSE = {
    (INV, INV): INV, (INV, COV): INV, (INV, CONTRA): INV, (INV, IRR): IRR,
    (COV, INV): INV, (COV, COV): COV, (COV, CONTRA): CONTRA, (COV, IRR): IRR,
    (CONTRA, INV): INV, (CONTRA, COV): CONTRA, (CONTRA, CONTRA): COV, (CONTRA, IRR): IRR,
    (IRR, INV): IRR, (IRR, COV): IRR, (IRR, CONTRA): IRR, (IRR, IRR): IRR,
}


def compose(v: Variance, w: Variance) -> Variance:
    """Variance of a w-position inside a v-position (associative, commutative)."""
    return _COMPOSE[(v, w)]


def var_leq(v: Variance, w: Variance) -> bool:
    """Lattice order: IRR at the bottom, INV at the top, COV/CONTRA incomparable."""
    return v is w or v is IRR or w is INV


def var_glb(v: Variance, w: Variance) -> Variance:
    """Greatest lower bound in the var_leq lattice."""
    if var_leq(v, w):
        return v
    if var_leq(w, v):
        return w
    return IRR


def var_lub(v: Variance, w: Variance) -> Variance:
    """Least upper bound in the var_leq lattice."""
    if var_leq(v, w):
        return w
    if var_leq(w, v):
        return v
    return INV


def up_set(v: Variance) -> frozenset[Variance]:
    """All variances above v (inclusive)."""
    return frozenset(w for w in ALL_VARIANCES if var_leq(v, w))


def zip_var(v: Variance, w: Variance) -> Optional[Variance]:
    """Partial merge of two occurrence variances for one variable.

    Defined exactly when one side is IRR (identity) or both are INV;
    returns None on the undefined cells.
    """
    if v is IRR:
        return w
    if w is IRR:
        return v
    if v is INV and w is INV:
        return INV
    return None


def zip_fold(variances: Iterable[Variance]) -> Optional[Variance]:
    """Zip a family of variances together; IRR for the empty family."""
    acc = IRR
    for v in variances:
        merged = zip_var(acc, v)
        if merged is None:
            return None
        acc = merged
    return acc


class VarianceContext(Mapping[str, Variance]):
    """An ordered, immutable map from type-variable names to variances.

    Entry order is the declaration order of the variables described, so
    iteration and rendering are stable.  Hashable, usable as a memo key.
    """

    __slots__ = ("_entries", "_index", "_hash")

    def __init__(self, entries: Iterable[tuple[str, Variance]]):
        entries = tuple(entries)
        index = {name: v for name, v in entries}
        if len(index) != len(entries):
            raise ValueError("duplicate variable in context")
        object.__setattr__(self, "_entries", entries)
        object.__setattr__(self, "_index", index)
        object.__setattr__(self, "_hash", hash(entries))

    @property
    def entries(self) -> tuple[tuple[str, Variance], ...]:
        return self._entries

    def domain(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self._entries)

    def variances(self) -> tuple[Variance, ...]:
        return tuple(v for _, v in self._entries)

    def with_entry(self, name: str, v: Variance) -> "VarianceContext":
        return VarianceContext(
            (n, v if n == name else w) for n, w in self._entries
        )

    def __getitem__(self, name: str) -> Variance:
        return self._index[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._index)

    def __len__(self) -> int:
        return len(self._entries)

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        if isinstance(other, VarianceContext):
            return self._entries == other._entries
        return NotImplemented

    def __repr__(self) -> str:
        return f"VarianceContext({self._entries!r})"

    def __str__(self) -> str:
        return "(" + ", ".join(f"{v}'{n}" for n, v in self._entries) + ")"


def ctx(*pairs: tuple[str, Variance]) -> VarianceContext:
    return VarianceContext(pairs)


def const_ctx(domain: Iterable[str], v: Variance) -> VarianceContext:
    return VarianceContext((name, v) for name in domain)


def _require_same_domain(g1: VarianceContext, g2: VarianceContext) -> None:
    if g1.domain() != g2.domain():
        raise ValueError(f"context domain mismatch: {g1.domain()} vs {g2.domain()}")


def ctx_leq(g1: VarianceContext, g2: VarianceContext) -> bool:
    """Pointwise lattice order; domains must coincide."""
    _require_same_domain(g1, g2)
    return all(var_leq(v1, v2) for (_, v1), (_, v2) in zip(g1.entries, g2.entries))


def ctx_glb(g1: VarianceContext, g2: VarianceContext) -> VarianceContext:
    _require_same_domain(g1, g2)
    return VarianceContext(
        (n, var_glb(v1, v2)) for (n, v1), (_, v2) in zip(g1.entries, g2.entries)
    )


def ctx_lub(g1: VarianceContext, g2: VarianceContext) -> VarianceContext:
    _require_same_domain(g1, g2)
    return VarianceContext(
        (n, var_lub(v1, v2)) for (n, v1), (_, v2) in zip(g1.entries, g2.entries)
    )


def ctx_zip(g1: VarianceContext, g2: VarianceContext) -> Optional[VarianceContext]:
    """Pointwise zip; None as soon as one entry's zip is undefined."""
    _require_same_domain(g1, g2)
    merged = []
    for (n, v1), (_, v2) in zip(g1.entries, g2.entries):
        v = zip_var(v1, v2)
        if v is None:
            return None
        merged.append((n, v))
    return VarianceContext(merged)


def ctx_zip_all(
    contexts: Iterable[VarianceContext], domain: Iterable[str]
) -> Optional[VarianceContext]:
    """Zip a family of contexts over `domain`.

    The zip of the empty family is the all-IRR context over the domain:
    IRR is the neutral element of zipping, and a constant type (which
    decomposes with a trivial witness) must be reachable through it.
    """
    acc = const_ctx(domain, IRR)
    for g in contexts:
        merged = ctx_zip(acc, g)
        if merged is None:
            return None
        acc = merged
    return acc
