"""Brute-force semantics over bounded ground-type universes.

Every universally quantified semantic definition (variance
interpretation, decomposability, simultaneous decomposition,
well-signedness, the per-constructor req-SP condition and the two
structural requirements it presumes) is evaluated literally, with the
ground-type quantifiers finitized to all types of bounded syntactic
depth.  A bounded verdict is labeled with its depth by the caller and is
never a theorem: `True` means "no counterexample up to this depth".

Existential witnesses are searched through the subterm-closed universe,
trying the subterms of the candidate supertype first: in head-atomic
worlds witnesses arise by inversion on that type, so a statement true at
depth d is not falsified by a witness living one level deeper.

The subtyping decision procedure is structural: same heads compare
pointwise under the declared variances, distinct heads are incomparable
unless an upward chain of private or base-order edges connects them
(such edges preserve arity and variances, so parameters still compare
pointwise).  Reflexivity and transitivity hold as consequences, not as
extra rules.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .syntax import (
    App,
    ConstraintRel,
    DataConstructorDecl,
    DatatypeDecl,
    Signature,
    TypeExpr,
    is_ground,
    normalize_constructor,
    render_type,
    subst,
)
from .variance import (
    CONTRA,
    COV,
    INV,
    IRR,
    Variance,
    VarianceContext,
)

DEFAULT_UNIVERSE_CAP = 200_000


class UniverseSizeError(Exception):
    pass


@dataclass
class GroundUniverse:
    """All variable-free types of bounded depth over a signature.

    Enumeration order is deterministic (by depth, then constructor
    declaration order, then argument order) and duplicate-free; the list
    is closed under subterms because every shallower type is included.
    """

    sig: Signature
    depth: int
    types: tuple[TypeExpr, ...]
    index: dict[TypeExpr, int] = field(default_factory=dict)
    _subterm_order: dict[TypeExpr, tuple[int, ...]] = field(default_factory=dict)
    _related: dict[Variance, list[list[int]]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.index:
            self.index = {t: i for i, t in enumerate(self.types)}

    def __len__(self) -> int:
        return len(self.types)

    def witness_order(self, target: TypeExpr) -> tuple[int, ...]:
        """Universe indices with the subterms of `target` first."""
        cached = self._subterm_order.get(target)
        if cached is not None:
            return cached
        first: list[int] = []
        seen: set[int] = set()
        stack = [target]
        while stack:
            node = stack.pop()
            i = self.index.get(node)
            if i is not None and i not in seen:
                seen.add(i)
                first.append(i)
            if isinstance(node, App):
                stack.extend(node.args)
        order = tuple(first) + tuple(i for i in range(len(self.types))
                                     if i not in seen)
        self._subterm_order[target] = order
        return order


def enumerate_types(sig: Signature, depth: int,
                    cap: int = DEFAULT_UNIVERSE_CAP) -> GroundUniverse:
    """All ground types of syntactic depth <= depth (constants have
    depth 1).  Raises UniverseSizeError beyond `cap` types."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    ctors = list(sig.ctors.values())
    types: list[TypeExpr] = [App(info.name, ()) for info in ctors
                             if info.arity == 0]
    seen: set[TypeExpr] = set(types)
    if len(types) > cap:
        raise UniverseSizeError(f"universe exceeds cap of {cap} types")
    prev = list(types)
    for _ in range(depth - 1):
        new: list[TypeExpr] = []
        for info in ctors:
            if info.arity == 0:
                continue
            for args in itertools.product(prev, repeat=info.arity):
                t = App(info.name, args)
                if t not in seen:
                    seen.add(t)
                    new.append(t)
                    if len(seen) > cap:
                        raise UniverseSizeError(
                            f"universe exceeds cap of {cap} types "
                            f"(depth {depth})")
        types.extend(new)
        prev = list(types)
    return GroundUniverse(sig, depth, tuple(types))


# ---------------------------------------------------------------------------
# Subtyping decision procedure


class SemanticOracle:
    """Memoized subtyping and the derived per-variance relations."""

    def __init__(self, sig: Signature):
        self.sig = sig
        self.reach = sig.head_reach()
        self._sub: dict[tuple[TypeExpr, TypeExpr], bool] = {}

    def subtype(self, a: TypeExpr, b: TypeExpr) -> bool:
        if a == b:
            return True
        key = (a, b)
        cached = self._sub.get(key)
        if cached is not None:
            return cached
        assert isinstance(a, App) and isinstance(b, App), "ground types only"
        if a.ctor == b.ctor or b.ctor in self.reach.get(a.ctor, ()):
            ws = self.sig.variances(a.ctor)
            result = all(self.prec(w, x, y)
                         for w, x, y in zip(ws, a.args, b.args))
        else:
            result = False
        self._sub[key] = result
        return result

    def prec(self, v: Variance, a: TypeExpr, b: TypeExpr) -> bool:
        if v is IRR:
            return True
        if v is COV:
            return self.subtype(a, b)
        if v is CONTRA:
            return self.subtype(b, a)
        return self.subtype(a, b) and self.subtype(b, a)

    def prec_tuple(self, g: VarianceContext, xs: Sequence[TypeExpr],
                   ys: Sequence[TypeExpr]) -> bool:
        return all(self.prec(w, x, y)
                   for (_, w), x, y in zip(g.entries, xs, ys))

    def related(self, u: GroundUniverse, w: Variance) -> list[list[int]]:
        """Adjacency lists over the universe: related[i] = all j with
        types[i] prec_w types[j]."""
        cached = u._related.get(w)
        if cached is not None:
            return cached
        n = len(u.types)
        if w is IRR:
            full = list(range(n))
            out = [full] * n
        else:
            out = [[j for j in range(n)
                    if self.prec(w, u.types[i], u.types[j])]
                   for i in range(n)]
        u._related[w] = out
        return out


_ORACLE_ATTR = "_semantic_oracle"


def oracle_for(sig: Signature) -> SemanticOracle:
    oracle = getattr(sig, _ORACLE_ATTR, None)
    if oracle is None:
        oracle = SemanticOracle(sig)
        object.__setattr__(sig, _ORACLE_ATTR, oracle)
    return oracle


def subtype(sig: Signature, a: TypeExpr, b: TypeExpr) -> bool:
    if not (is_ground(a) and is_ground(b)):
        raise ValueError("subtype compares ground types only")
    return oracle_for(sig).subtype(a, b)


def prec(sig: Signature, v: Variance, a: TypeExpr, b: TypeExpr) -> bool:
    if not (is_ground(a) and is_ground(b)):
        raise ValueError("prec compares ground types only")
    return oracle_for(sig).prec(v, a, b)


# ---------------------------------------------------------------------------
# Semantic definitions


def _assignments(u: GroundUniverse, m: int) -> Iterable[tuple[int, ...]]:
    return itertools.product(range(len(u.types)), repeat=m)


def _subst_at(t: TypeExpr, domain: tuple[str, ...], u: GroundUniverse,
              idx: tuple[int, ...], cache: dict) -> TypeExpr:
    got = cache.get(idx)
    if got is None:
        got = subst(t, {a: u.types[i] for a, i in zip(domain, idx)})
        cache[idx] = got
    return got


def sem_variance_cex(
    sig: Signature, u: GroundUniverse, g: VarianceContext, t: TypeExpr,
    v: Variance,
) -> Optional[tuple[tuple[TypeExpr, ...], tuple[TypeExpr, ...]]]:
    """First counterexample to the variance interpretation over u, or
    None: assignments related under g whose instances are not related
    under v."""
    orc = oracle_for(sig)
    domain = g.domain()
    m = len(domain)
    if m == 0:
        return None
    rel = [orc.related(u, w) for w in g.variances()]
    cache: dict = {}
    for idx in _assignments(u, m):
        lhs = _subst_at(t, domain, u, idx, cache)
        for jdx in itertools.product(*(rel[k][idx[k]] for k in range(m))):
            rhs = _subst_at(t, domain, u, jdx, cache)
            if not orc.prec(v, lhs, rhs):
                return (tuple(u.types[i] for i in idx),
                        tuple(u.types[j] for j in jdx))
    return None


def sem_variance(sig: Signature, u: GroundUniverse, g: VarianceContext,
                 t: TypeExpr, v: Variance) -> bool:
    return sem_variance_cex(sig, u, g, t, v) is None


def sem_decomp_cex(
    sig: Signature, u: GroundUniverse, g: VarianceContext, t: TypeExpr,
    v: Variance, v2: Variance,
) -> Optional[tuple[tuple[TypeExpr, ...], TypeExpr]]:
    """First counterexample to decomposability over u, or None: an
    assignment and supertype (subtype) admitting no witness assignment
    in the universe."""
    orc = oracle_for(sig)
    domain = g.domain()
    m = len(domain)
    cache: dict = {}
    n = len(u.types)
    for idx in _assignments(u, m):
        lhs = _subst_at(t, domain, u, idx, cache)
        rhos = tuple(u.types[i] for i in idx)
        for s in range(n):
            target = u.types[s]
            if not orc.prec(v, lhs, target):
                continue
            order = u.witness_order(target)
            found = False
            for jdx in itertools.product(order, repeat=m):
                if not all(orc.prec(w, rhos[k], u.types[jdx[k]])
                           for k, (_, w) in enumerate(g.entries)):
                    continue
                if orc.prec(v2, _subst_at(t, domain, u, jdx, cache), target):
                    found = True
                    break
            if not found:
                return (rhos, target)
    return None


def sem_decomp(sig: Signature, u: GroundUniverse, g: VarianceContext,
               t: TypeExpr, v: Variance, v2: Variance) -> bool:
    return sem_decomp_cex(sig, u, g, t, v, v2) is None


def sem_simultaneous_decomp(
    sig: Signature, u: GroundUniverse, g: VarianceContext,
    parts: Sequence[tuple[TypeExpr, Variance, Variance]],
) -> bool:
    """The simultaneous closure property for a family of type
    expressions over a shared context: related instances of all family
    members must admit one common witness assignment."""
    orc = oracle_for(sig)
    domain = g.domain()
    m = len(domain)
    cache: list[dict] = [{} for _ in parts]
    n = len(u.types)
    for idx in _assignments(u, m):
        rhos = tuple(u.types[i] for i in idx)
        lhss = [_subst_at(t, domain, u, idx, cache[i])
                for i, (t, _, _) in enumerate(parts)]
        for sdx in itertools.product(range(n), repeat=len(parts)):
            if not all(orc.prec(v, lhss[i], u.types[sdx[i]])
                       for i, (_, v, _) in enumerate(parts)):
                continue
            found = False
            for jdx in itertools.product(u.witness_order(u.types[sdx[0]]),
                                         repeat=m):
                if not all(orc.prec(w, rhos[k], u.types[jdx[k]])
                           for k, (_, w) in enumerate(g.entries)):
                    continue
                if all(orc.prec(v2, _subst_at(t, domain, u, jdx, cache[i]),
                                u.types[sdx[i]])
                       for i, (t, _, v2) in enumerate(parts)):
                    found = True
                    break
            if not found:
                return False
    return True


def sem_well_signed(sig: Signature, u: GroundUniverse, decl_params,
                    arg: TypeExpr) -> bool:
    """Well-signedness of a plain constructor over u: instances of the
    argument type covary whenever the parameters do."""
    g = VarianceContext(decl_params)
    return sem_variance(sig, u, g, arg, COV)


# ---------------------------------------------------------------------------
# req-SP


@dataclass
class ReqSpResult:
    holds: bool
    depth: int
    sigma: Optional[tuple[TypeExpr, ...]] = None
    sigma_prime: Optional[tuple[TypeExpr, ...]] = None
    rho: Optional[tuple[TypeExpr, ...]] = None

    def describe(self) -> str:
        if self.holds:
            return f"holds (depth {self.depth})"
        def tup(ts):
            return "(" + ", ".join(render_type(t) for t in ts) + ")"
        return (f"fails (depth {self.depth}): sigma={tup(self.sigma)} "
                f"sigma'={tup(self.sigma_prime)} rho={tup(self.rho)}")


def _merged_witness_order(u: GroundUniverse,
                          targets: Sequence[TypeExpr]) -> tuple[int, ...]:
    """Universe indices with the subterms of every target first."""
    if len(targets) == 1:
        return u.witness_order(targets[0])
    seen: set[int] = set()
    first: list[int] = []
    for t in targets:
        stack = [t]
        while stack:
            node = stack.pop()
            i = u.index.get(node)
            if i is not None and i not in seen:
                seen.add(i)
                first.append(i)
            if isinstance(node, App):
                stack.extend(node.args)
    return tuple(first) + tuple(i for i in range(len(u.types))
                                if i not in seen)


def _rel_holds(orc: SemanticOracle, rel: ConstraintRel, param: TypeExpr,
               bound: TypeExpr) -> bool:
    if rel is ConstraintRel.EQ:
        return orc.prec(INV, param, bound)
    if rel is ConstraintRel.SUP:
        return orc.subtype(bound, param)
    return orc.subtype(param, bound)


def req_sp(sig: Signature, u: GroundUniverse, d: DatatypeDecl,
           k: DataConstructorDecl) -> ReqSpResult:
    """The per-constructor soundness condition over u: whenever the
    instantiated datatype is coerced, constrained arguments stay
    constructible over some related witnesses."""
    orc = oracle_for(sig)
    norm = normalize_constructor(d, k)
    domain = norm.exist_vars
    m = len(domain)
    varis = d.param_variances()
    n = len(varis)
    rel_up = [orc.related(u, w) for w in varis]
    arg_cache: dict = {}
    bound_caches: list[dict] = [{} for _ in norm.constraints]

    def bounds_at(idx: tuple[int, ...]) -> list[TypeExpr]:
        return [
            _subst_at(c.bound, domain, u, idx, bound_caches[i])
            for i, c in enumerate(norm.constraints)
        ]

    universe = u.types
    for ridx in _assignments(u, m):
        bounds = bounds_at(ridx)
        # Parameter tuples satisfying the constraints at this rho.
        per_param: list[list[int]] = [[] for _ in range(n)]
        for i, c in enumerate(norm.constraints):
            per_param[c.param] = [
                s for s in range(len(universe))
                if _rel_holds(orc, c.rel, universe[s], bounds[i])
            ]
        if any(not options for options in per_param):
            continue
        lhs_arg = _subst_at(norm.arg, domain, u, ridx, arg_cache)
        rho = tuple(universe[i] for i in ridx)
        for sidx in itertools.product(*per_param):
            for spidx in itertools.product(*(rel_up[p][sidx[p]]
                                             for p in range(n))):
                found = False
                order = _merged_witness_order(
                    u, [universe[i] for i in spidx])
                for rpidx in itertools.product(order, repeat=m):
                    bounds_p = bounds_at(rpidx)
                    if not all(
                        _rel_holds(orc, c.rel, universe[spidx[c.param]],
                                   bounds_p[i])
                        for i, c in enumerate(norm.constraints)
                    ):
                        continue
                    if orc.subtype(lhs_arg,
                                   _subst_at(norm.arg, domain, u, rpidx,
                                             arg_cache)):
                        found = True
                        break
                if not found:
                    return ReqSpResult(
                        False, u.depth,
                        sigma=tuple(universe[i] for i in sidx),
                        sigma_prime=tuple(universe[i] for i in spidx),
                        rho=rho)
    return ReqSpResult(True, u.depth)


# ---------------------------------------------------------------------------
# Structural requirements


@dataclass
class SpRequirementsReport:
    incomparability_violations: list[str] = field(default_factory=list)
    decomposition_violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.incomparability_violations
                    or self.decomposition_violations)


def check_sp_requirements(sig: Signature, u: GroundUniverse
                          ) -> SpRequirementsReport:
    """Exhaustively verify, over u, that distinct non-base heads are
    incomparable and that arrow and product types decompose
    componentwise.  Violations are listed, not raised: non-atomic worlds
    (private edges) are expected to violate incomparability."""
    orc = oracle_for(sig)
    report = SpRequirementsReport()
    n = len(u.types)
    is_base = {
        name: info.arity == 0 and info.kind != "builtin"
        for name, info in sig.ctors.items()
    }
    for i in range(n):
        a = u.types[i]
        assert isinstance(a, App)
        for j in range(n):
            b = u.types[j]
            assert isinstance(b, App)
            if a.ctor == b.ctor:
                continue
            if not orc.subtype(a, b):
                continue
            if (is_base[a.ctor] and is_base[b.ctor]
                    and sig.base_leq(a.ctor, b.ctor)):
                continue
            report.incomparability_violations.append(
                f"{render_type(a)} <= {render_type(b)} with distinct heads")
    for head, contra_first in (("->", True), ("*", False)):
        members = [t for t in u.types
                   if isinstance(t, App) and t.ctor == head]
        for f1 in members:
            for f2 in members:
                if not orc.subtype(f1, f2):
                    continue
                d_ok = (orc.subtype(f2.args[0], f1.args[0]) if contra_first
                        else orc.subtype(f1.args[0], f2.args[0]))
                c_ok = orc.subtype(f1.args[1], f2.args[1])
                if not (d_ok and c_ok):
                    report.decomposition_violations.append(
                        f"{render_type(f1)} <= {render_type(f2)} does not "
                        f"decompose componentwise")
    return report
