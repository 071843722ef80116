"""Model spaces: a finite space plus a small category of opens and maps.

A :class:`ModelSpace` stores its arrows either explicitly or lazily.  The
lazy form (``arrows=None``) means *every* continuous map between two
objects is an arrow; trivial model spaces and their relative spaces use
it, which keeps 8-point totals with hundreds of thousands of arrows cheap.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from itertools import combinations
from typing import Iterable, Iterator, Literal, Mapping

from .errors import BudgetExceeded, MalformedInput, PreconditionError
from .fintop import (
    Arrow,
    FinSpace,
    canon,
    compose,
    continuous_on,
    iter_continuous,
    pset,
    set_key,
    set_repr,
    subspace,
)

DEFAULT_BUDGET = 200_000
# lazy spaces with more arrows than this get the structural axiom verdict
AXIOM_BUDGET = 20_000


@dataclass(frozen=True, eq=False)
class ModelSpace:
    """``(space, category)`` with objects among the opens of ``space``."""

    space: FinSpace
    objects: frozenset
    arrows: frozenset | None = None
    name: str = field(default="", compare=False)

    @property
    def points(self) -> frozenset:
        return self.space.points

    @property
    def lazy(self) -> bool:
        return self.arrows is None

    @cached_property
    def sorted_objects(self) -> list:
        return sorted(self.objects, key=set_key)

    @cached_property
    def _index(self) -> dict:
        idx = defaultdict(list)
        for f in self.arrows or ():
            idx[(f.dom, f.cod)].append(f)
        for v in idx.values():
            v.sort()
        return dict(idx)

    @cached_property
    def _hash(self) -> int:
        return hash((self.space, self.objects, self.lazy, self.arrows))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if not isinstance(other, ModelSpace):
            return NotImplemented
        if self is other:
            return True
        if self.space != other.space or self.objects != other.objects:
            return False
        if self.lazy == other.lazy:
            return self.arrows == other.arrows
        return self.materialize().arrows == other.materialize().arrows

    def __repr__(self) -> str:
        label = self.name or set_repr(self.points)
        kind = "all continuous" if self.lazy else f"{len(self.arrows)} arrows"
        return f"ModelSpace({label}, {len(self.objects)} objects, {kind})"

    def has_arrow(self, f: Arrow) -> bool:
        if f.dom not in self.objects or f.cod not in self.objects:
            return False
        if self.lazy:
            return continuous_on(self.space, f, self.space)
        return f in self.arrows

    def hom(self, a, b, *, fixed: Mapping | None = None) -> Iterator[Arrow]:
        """Arrows ``a -> b`` in graph order, optionally with pinned values."""
        a, b = pset(a), pset(b)
        if a not in self.objects or b not in self.objects:
            return iter(())
        if self.lazy:
            return iter_continuous(self.space, a, self.space, b, fixed=fixed)
        arrows = self._index.get((a, b), [])
        if fixed:
            if any(k not in a for k in fixed):
                return iter(())
            arrows = [f for f in arrows if all(f.table[k] == v for k, v in fixed.items())]
        return iter(arrows)

    def isos(self, a, b, *, fixed: Mapping | None = None) -> Iterator[Arrow]:
        """Isomorphisms ``a -> b``: bijective arrows whose inverse is an arrow."""
        a, b = pset(a), pset(b)
        if len(a) != len(b):
            return
        for f in self.hom(a, b, fixed=fixed):
            if f.is_bijective() and self.has_arrow(f.inverse()):
                yield f

    def is_iso(self, f: Arrow) -> bool:
        return self.has_arrow(f) and f.is_bijective() and self.has_arrow(f.inverse())

    def iter_arrows(self, budget: int | None = DEFAULT_BUDGET) -> Iterator[Arrow]:
        n = 0
        for a in self.sorted_objects:
            for b in self.sorted_objects:
                for f in self.hom(a, b):
                    n += 1
                    if budget is not None and n > budget:
                        raise BudgetExceeded(f"arrows of {self!r}", budget)
                    yield f

    def materialize(self, budget: int | None = DEFAULT_BUDGET) -> "ModelSpace":
        if not self.lazy:
            return self
        return ModelSpace(self.space, self.objects, frozenset(self.iter_arrows(budget)), self.name)

    def arrow_count(self, budget: int | None = DEFAULT_BUDGET) -> int:
        return sum(1 for _ in self.iter_arrows(budget))

    def named(self, name: str) -> "ModelSpace":
        return ModelSpace(self.space, self.objects, self.arrows, name)


def trivial(space: FinSpace, name: str = "") -> ModelSpace:
    """All opens (the empty set included) and all continuous maps among them."""
    return ModelSpace(space, space.opens, None, name)


def is_trivial(m: ModelSpace) -> bool:
    return m.lazy and m.objects == m.space.opens


def _validate_structure(m: ModelSpace) -> None:
    for o in m.objects:
        if o not in m.space.opens:
            raise MalformedInput(f"object {set_repr(o)} is not open in the carrier")
    for f in m.arrows or ():
        if f.dom not in m.objects or f.cod not in m.objects:
            raise MalformedInput(f"arrow {f!r} is not typed between objects")
        if set(f.table) != set(f.dom) or not f.image() <= f.cod:
            raise MalformedInput(f"arrow {f!r} has an inconsistent graph")


@dataclass
class AxiomReport:
    items: dict
    counterexamples: dict
    method: str

    @property
    def passed(self) -> bool:
        return all(self.items.values())

    def failed_items(self) -> list:
        return [k for k, v in self.items.items() if not v]


ITEM_NAMES = {
    1: "objects cover the carrier",
    2: "objects closed under intersection",
    3: "arrows are continuous and form a category",
    4: "closed under restriction",
    5: "inclusions are arrows",
    6: "restricted sheaf condition",
}


def _subobjects(objects: Iterable[frozenset], of: frozenset) -> list:
    return [o for o in objects if o <= of]


def sheaf_violations(m: ModelSpace, arrows: frozenset | None = None, *, first_only: bool = False) -> list:
    """Continuous maps forced by the restricted sheaf condition but missing.

    For a candidate ``f: U -> V`` every admissible family is contained in
    the family of *all* arrows that agree with ``f``; unions are monotone,
    so ``f`` is forced iff that maximal family already covers ``U`` and
    ``V``.  Candidate values at each point come only from local arrows.
    """
    ar = m.arrows if arrows is None else arrows
    objs = m.sorted_objects
    by_pair = defaultdict(list)
    for g in ar:
        by_pair[(g.dom, g.cod)].append(g)
    out = []
    for u in objs:
        for v in objs:
            local = [g for (d, c), gs in by_pair.items() if d <= u and c <= v for g in gs]
            if not local:
                continue
            cands = defaultdict(set)
            for g in local:
                for x, y in g.graph:
                    cands[x].add(y)
            if any(x not in cands for x in u):
                continue
            for f in iter_continuous(m.space, u, m.space, v, accept=lambda x, y: y in cands[x]):
                if f in ar:
                    continue
                fam = [g for g in local if all(f.table[x] == y for x, y in g.graph)]
                dom_union = frozenset().union(*(g.dom for g in fam))
                cod_union = frozenset().union(*(g.cod for g in fam))
                if dom_union == u and cod_union == v:
                    out.append((f, sorted(fam)))
                    if first_only:
                        return out
    return out


def check_axioms(m: ModelSpace, budget: int | None = AXIOM_BUDGET) -> AxiomReport:
    """Item-by-item verdict on the six model-space axioms.

    Lazy spaces too large to materialize get a structural verdict on items
    3 to 6 (every continuous map between objects is present, so each of
    those items holds by construction); ``method`` records which path ran.
    """
    _validate_structure(m)
    items: dict = {}
    cex: dict = {}
    objs = m.sorted_objects

    union = frozenset().union(*m.objects) if m.objects else frozenset()
    items[1] = union == m.points
    if not items[1]:
        cex[1] = {"uncovered": canon(m.points - union)}

    items[2] = True
    for a, b in combinations(objs, 2):
        if (a & b) not in m.objects:
            items[2] = False
            cex[2] = {"pair": (canon(a), canon(b)), "intersection": canon(a & b)}
            break

    try:
        mm = m.materialize(budget)
        method = "exhaustive"
    except BudgetExceeded:
        mm = None
        method = "structural"
    if mm is None:
        for k in (3, 4, 5, 6):
            items[k] = True
        return AxiomReport(items, cex, method)

    ar = mm.arrows
    idx = mm._index
    items[3] = True
    for f in sorted(ar):
        if not continuous_on(m.space, f, m.space):
            items[3] = False
            cex[3] = {"discontinuous": f}
            break
    if items[3]:
        for o in objs:
            if Arrow.identity(o) not in ar:
                items[3] = False
                cex[3] = {"missing identity": canon(o)}
                break
    if items[3]:
        outgoing = defaultdict(list)
        for (d, c), fs in idx.items():
            outgoing[d].extend(fs)
        for f in sorted(ar):
            for g in outgoing.get(f.cod, ()):
                h = compose(g, f)
                if h not in ar:
                    items[3] = False
                    cex[3] = {"missing composite": (g, f)}
                    break
            if not items[3]:
                break

    items[4] = True
    for f in sorted(ar):
        hit = _missing_restriction(mm, f, ar)
        if hit is not None:
            items[4] = False
            cex[4] = {"arrow": f, "missing": hit}
            break

    items[5] = True
    for b in objs:
        for a in _subobjects(objs, b):
            if Arrow.inclusion(a, b) not in ar:
                items[5] = False
                cex[5] = {"missing inclusion": (canon(a), canon(b))}
                break
        if not items[5]:
            break

    viol = sheaf_violations(mm, first_only=True)
    items[6] = not viol
    if viol:
        f, fam = viol[0]
        cex[6] = {"glued map": f, "family": fam}
    return AxiomReport(items, cex, method)


def _missing_restriction(m: ModelSpace, f: Arrow, ar) -> Arrow | None:
    for a2 in _subobjects(m.sorted_objects, f.dom):
        img = f.image(a2)
        for b2 in _subobjects(m.sorted_objects, f.cod):
            if img <= b2:
                r = f.restrict(a2, b2)
                if r not in ar:
                    return r
    return None


def _close_intersections(objs: Iterable[frozenset]) -> frozenset:
    out = set(objs)
    frontier = list(out)
    while frontier:
        new = []
        for a in frontier:
            for b in list(out):
                c = a & b
                if c not in out:
                    out.add(c)
                    new.append(c)
        frontier = new
    return frozenset(out)


def minimal_closure(
    space: FinSpace,
    seed_objects: Iterable[Iterable[str]],
    seed_arrows: Iterable[Arrow] = (),
    *,
    budget: int | None = DEFAULT_BUDGET,
    name: str = "",
) -> ModelSpace:
    """Least model space containing the seeds.

    The carrier is the union of the seed objects with the relative
    topology.  Arrows are closed under identities, inclusions,
    composition, restriction and gluing until nothing changes.
    """
    seeds = [pset(o) for o in seed_objects]
    for o in seeds:
        if o not in space.opens:
            raise MalformedInput(f"seed object {set_repr(o)} is not open")
    seed_set = set(seeds)
    arrows0 = list(seed_arrows)
    for f in arrows0:
        if f.dom not in seed_set or f.cod not in seed_set:
            raise MalformedInput(f"seed arrow {f!r} has endpoints outside the seed objects")
        if not continuous_on(space, f, space):
            raise MalformedInput(f"seed arrow {f!r} is not continuous")
    carrier = frozenset().union(*seeds) if seeds else frozenset()
    top = subspace(space, carrier)
    objects = _close_intersections(seeds) if seeds else frozenset({frozenset()})
    shell = ModelSpace(top, objects, frozenset(), name)
    objs = shell.sorted_objects

    ar = set(arrows0)
    for b in objs:
        for a in _subobjects(objs, b):
            ar.add(Arrow.inclusion(a, b))

    def check_budget():
        if budget is not None and len(ar) > budget:
            raise BudgetExceeded("minimal closure arrows", budget)

    while True:
        before = len(ar)
        # restriction
        for f in list(ar):
            for a2 in _subobjects(objs, f.dom):
                img = f.image(a2)
                for b2 in _subobjects(objs, f.cod):
                    if img <= b2:
                        ar.add(f.restrict(a2, b2))
        check_budget()
        # composition to a fixed point
        while True:
            outgoing = defaultdict(list)
            for g in ar:
                outgoing[g.dom].append(g)
            new = set()
            for f in ar:
                for g in outgoing.get(f.cod, ()):
                    h = compose(g, f)
                    if h not in ar:
                        new.add(h)
            if not new:
                break
            ar |= new
            check_budget()
        # gluing
        for f, _ in sheaf_violations(shell, frozenset(ar)):
            ar.add(f)
        check_budget()
        if len(ar) == before:
            break
    return ModelSpace(top, objects, frozenset(ar), name)


def relative(m: ModelSpace, t: Iterable[str]) -> ModelSpace:
    """``Mod(t, m)``: the full subcategory on objects inside ``t``."""
    t = pset(t)
    if t not in m.objects:
        raise PreconditionError(f"{set_repr(t)} is not an object")
    objs = frozenset(o for o in m.objects if o <= t)
    top = subspace(m.space, t)
    if m.lazy:
        return ModelSpace(top, objs, None, m.name and f"{m.name}|{set_repr(t)}")
    ar = frozenset(f for f in m.arrows if f.dom in objs and f.cod in objs)
    return ModelSpace(top, objs, ar, m.name and f"{m.name}|{set_repr(t)}")


def is_fine_grained(m: ModelSpace) -> bool:
    for o in m.objects:
        for u in m.space.opens:
            if u <= o and u not in m.objects:
                return False
    return True


@lru_cache(maxsize=4096)
def _axioms_pass(m: ModelSpace) -> bool:
    return check_axioms(m).passed


@dataclass
class SubspaceVerdict:
    relation: Literal["none", "mod", "full-mod", "strict-mod"]
    failures: list
    mod: bool = False
    full: bool = False
    strict: bool = False


def _homs_equal(a: ModelSpace, b: ModelSpace) -> tuple | None:
    """First object pair of ``a`` whose hom-set differs in ``b``, or None."""
    if a.lazy and b.lazy:
        return None
    for x in a.sorted_objects:
        for y in a.sorted_objects:
            ha = set(a.hom(x, y))
            hb = set(b.hom(x, y))
            if ha != hb:
                return (canon(x), canon(y))
    return None


@lru_cache(maxsize=4096)
def _subspace_relation(a: ModelSpace, b: ModelSpace) -> SubspaceVerdict:
    failures = []
    if not _axioms_pass(a) or not _axioms_pass(b):
        failures.append("clause 1: not both model spaces")
    s, t = a.points, b.points
    if not s <= t or a.space.opens != frozenset(u & s for u in b.space.opens):
        failures.append("clause 2: carrier is not a subspace")
    if not failures:
        if not a.objects <= b.objects:
            extra = sorted(a.objects - b.objects, key=set_key)[0]
            failures.append(f"clause 3: object {set_repr(extra)} missing from the larger space")
        else:
            bad = _homs_equal(a, b)
            if bad is not None:
                failures.append(f"clause 3: hom-sets differ on {bad}")
        for u in b.sorted_objects:
            if (u & s) not in a.objects:
                failures.append(f"clause 4: {set_repr(u & s)} is not an object")
                break
        for u in b.sorted_objects:
            if u <= s and u not in a.objects:
                failures.append(f"clause 5: {set_repr(u)} is not an object")
                break
    mod = not failures
    full = mod and s == t
    strict = mod and s in b.space.opens
    if strict:
        rel = "strict-mod"
    elif full:  # unreachable: equal carriers give an open inclusion
        rel = "full-mod"
    elif mod:
        rel = "mod"
    else:
        rel = "none"
    return SubspaceVerdict(rel, failures, mod, full, strict)


def subspace_relation(a: ModelSpace, b: ModelSpace) -> SubspaceVerdict:
    v = _subspace_relation(a, b)
    return SubspaceVerdict(v.relation, list(v.failures), v.mod, v.full, v.strict)


@dataclass
class ModelFunctionReport:
    is_model_function: bool
    is_constrained: bool
    is_homeomorphism: bool
    witness_failures: list


def _mf_core(a: ModelSpace, b: ModelSpace, f: Arrow) -> tuple:
    fails = []
    for v in b.sorted_objects:
        pre = f.preimage(v)
        if pre not in a.objects:
            fails.append(("preimage", canon(v), canon(pre)))
            break
    for u in a.sorted_objects:
        img = f.image(u)
        if not any(img <= v for v in b.objects):
            fails.append(("image", canon(u), canon(img)))
            break
    img_all = f.image()
    constrained = any(img_all <= v for v in b.objects)
    return fails, constrained


def model_function_report(a: ModelSpace, b: ModelSpace, f: Arrow) -> ModelFunctionReport:
    if f.dom != a.points or f.cod != b.points:
        raise PreconditionError("map endpoints must be the two carriers")
    if not continuous_on(a.space, f, b.space):
        raise PreconditionError("map is not continuous")
    fails, constrained = _mf_core(a, b, f)
    is_mf = not fails
    homeo = False
    if is_mf and f.is_bijective():
        g = f.inverse()
        if continuous_on(b.space, g, a.space):
            inv_fails, _ = _mf_core(b, a, g)
            homeo = not inv_fails
    return ModelFunctionReport(is_mf, constrained, homeo, fails)


def is_model_function(a: ModelSpace, b: ModelSpace, f: Arrow) -> bool:
    if f.dom != a.points or f.cod != b.points:
        return False
    if not continuous_on(a.space, f, b.space):
        return False
    return not _mf_core(a, b, f)[0]


@dataclass(frozen=True, eq=False)
class ModelCategory:
    """A category of model spaces; ``arrows=None`` means all model functions."""

    objects: tuple
    arrows: frozenset | None = None

    def __post_init__(self):
        for o in self.objects:
            if not isinstance(o, ModelSpace):
                raise MalformedInput("model categories must have model spaces as objects")

    @cached_property
    def object_set(self) -> frozenset:
        return frozenset(self.objects)

    def has_arrow(self, f: Arrow, src: ModelSpace, dst: ModelSpace) -> bool:
        if src not in self.object_set or dst not in self.object_set:
            return False
        if self.arrows is None:
            return is_model_function(src, dst, f)
        return (f, src, dst) in self.arrows

    def hom(self, src: ModelSpace, dst: ModelSpace) -> set:
        if self.arrows is not None:
            return {f for (f, s, d) in self.arrows if s == src and d == dst}
        return {
            f
            for f in iter_continuous(src.space, src.points, dst.space, dst.points)
            if is_model_function(src, dst, f)
        }

    def is_full_subcategory_of(self, other: "ModelCategory") -> bool:
        if not self.object_set <= other.object_set:
            return False
        if self.arrows is None and other.arrows is None:
            return True
        return all(self.hom(s, d) == other.hom(s, d) for s in self.objects for d in self.objects)


@dataclass
class MMorphismVerdict:
    holds: bool
    witnesses: dict
    failures: list

    def __bool__(self) -> bool:
        return self.holds


def classify_m_morphism(
    a: ModelSpace,
    b: ModelSpace,
    f: Arrow,
    mode: Literal["local", "global"] = "local",
    strictness: Literal["plain", "strict"] = "plain",
    ambient: tuple | None = None,
) -> MMorphismVerdict:
    """Local or global m-morphism test for ``f: f.dom -> f.cod``.

    ``f.dom`` and ``f.cod`` are open subsets of the two carriers (often the
    carriers themselves).  With ``ambient=(cat_a, cat_b)`` the category
    form is used; it has no strict variant.
    """
    if ambient is not None:
        cat_a, cat_b = ambient
        if not isinstance(cat_a, ModelCategory) or not isinstance(cat_b, ModelCategory):
            raise MalformedInput("ambient must be a pair of model categories")
        if strictness == "strict":
            raise PreconditionError("the category form has no strict variant")
    if not f.dom <= a.points or not f.cod <= b.points:
        raise PreconditionError("map endpoints must lie in the carriers")
    if not continuous_on(a.space, f, b.space):
        raise PreconditionError("map is not continuous")
    failures: list = []
    witnesses: dict = {}

    if ambient is None:
        rel = subspace_relation(a, b)
        if not rel.mod:
            failures.extend(rel.failures or ["not a model subspace"])
        if strictness == "strict" and rel.mod and not rel.strict:
            failures.append("inclusion of carriers is not open")
    else:
        if not cat_a.is_full_subcategory_of(cat_b):
            failures.append("first category is not a full subcategory of the second")
    if failures:
        return MMorphismVerdict(False, witnesses, failures)

    def admissible(g: Arrow, u, v) -> bool:
        if ambient is None:
            return b.has_arrow(g)
        if u == a.points and v == b.points:
            src, dst = a, b
        else:
            if u not in a.objects or v not in b.objects:
                return False
            src, dst = relative(a, u), relative(b, v)
        return cat_b.has_arrow(g, src, dst)

    if mode == "global":
        if admissible(f, f.dom, f.cod):
            witnesses["arrow"] = f
            return MMorphismVerdict(True, witnesses, [])
        return MMorphismVerdict(False, witnesses, ["map is not an arrow of the target"])

    a_objs = [o for o in a.sorted_objects if o and o <= f.dom]
    b_objs = [o for o in b.sorted_objects if o <= f.cod]
    for u in sorted(f.dom):
        found = None
        for uu in a_objs:
            if u not in uu:
                continue
            img = f.image(uu)
            for vv in b_objs:
                if img <= vv and admissible(f.restrict(uu, vv), uu, vv):
                    found = (canon(uu), canon(vv))
                    break
            if found:
                break
        if found is None:
            failures.append(("no admissible neighbourhoods at", u))
            return MMorphismVerdict(False, witnesses, failures)
        witnesses[u] = found
    return MMorphismVerdict(True, witnesses, [])


@dataclass
class ParacompactnessReport:
    model_topology: FinSpace
    regular: bool
    refinement_ok: bool
    m_paracompact: bool
    regularity_witness: tuple | None = None
    refinement_method: str = ""


REFINEMENT_ENUM_LIMIT = 16


def m_paracompactness_report(m: ModelSpace) -> ParacompactnessReport:
    """Regularity is point-versus-closed-set separation without T1."""
    topo = FinSpace.from_subbasis(m.points, m.objects)
    mins = topo.min_nbhd
    regular = True
    witness = None
    for o in topo.sorted_opens():
        closed = topo.points - o
        if not closed:
            continue
        # the smallest open around ``closed``; any separating pair contains these
        around = frozenset().union(*(mins[y] for y in closed))
        for x in sorted(o):
            if mins[x] & around:
                regular = False
                witness = (x, canon(closed))
                break
        if not regular:
            break
    objs = sorted(m.objects, key=set_key)
    if len(objs) <= REFINEMENT_ENUM_LIMIT:
        ok = True
        for r in range(1, len(objs) + 1):
            for fam in combinations(objs, r):
                if frozenset().union(*fam) != m.points:
                    continue
                # a finite cover refines itself and meets each M(x) finitely often
                ok = ok and all(any(s <= t for t in fam) for s in fam)
        method = "enumerated covers"
    else:
        ok = True
        method = "finite covers are locally finite self-refinements"
    return ParacompactnessReport(topo, regular, ok, regular and ok, witness, method)
