"""Presheaves as covariant set-valued functors on a finite category.

Everything a presheaf stores is explicit: a finite element set per object
and a total map per arrow. Elements are opaque hashable tokens with
equality only; any further meaning (projectors, eigenvalues) lives in the
quantum layer. The covariant convention is used throughout: all arrow
maps push forward.

The module provides the sieve-valued subobject classifier, characteristic
arrows and their converse, exhaustive subobject and natural-transformation
enumeration (both guarded), and a deterministic backtracking search for
global sections.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import SieveLogicError, SizeLimitExceeded
from .fincat import FinCategory, arrows_from
from .heyting import Sieve, all_sieves, principal_sieve, push_sieve


class ComponentDomainMismatch(SieveLogicError):
    pass


class NotASubobject(SieveLogicError):
    pass


class NotNatural(SieveLogicError):
    pass


DEFAULT_NODE_BUDGET = 1 << 20
DEFAULT_ENUM_LOG2 = 20


def element_key(x) -> tuple:
    """A total, run-stable sort key over the element kinds used here."""
    if isinstance(x, Sieve):
        return ("sieve", x.base, x.sorted_members())
    if isinstance(x, frozenset):
        return ("set", tuple(sorted(element_key(e) for e in x)))
    if isinstance(x, bool):
        return ("q", Fraction(int(x)))
    if isinstance(x, (int, Fraction)):
        return ("q", Fraction(x))
    if isinstance(x, str):
        return ("s", x)
    if isinstance(x, tuple):
        return ("t", tuple(element_key(e) for e in x))
    return ("r", repr(x))


@dataclass(frozen=True)
class Presheaf:
    """A covariant functor to finite sets: ``object_sets`` per object and a
    total ``arrow_maps`` dict per arrow token."""

    cat: FinCategory
    object_sets: dict[str, frozenset]
    arrow_maps: dict[str, dict]

    def at(self, obj: str) -> frozenset:
        return self.object_sets[obj]

    def map(self, arrow_id: str) -> dict:
        return self.arrow_maps[arrow_id]


def make_presheaf(
    cat: FinCategory,
    object_sets: Mapping[str, Iterable],
    arrow_maps: Mapping[str, Mapping],
) -> Presheaf:
    return Presheaf(
        cat,
        {obj: frozenset(els) for obj, els in object_sets.items()},
        {aid: dict(m) for aid, m in arrow_maps.items()},
    )


@dataclass(frozen=True)
class PresheafCheck:
    ok: bool
    witness: str | None = None

    def __bool__(self) -> bool:
        return self.ok


def validate_presheaf(x: Presheaf) -> PresheafCheck:
    """Diagnostic functor-law check: identities act as identities and the
    map of a composite is the composite of the maps. Never raises; the
    witness names the first offending arrow (pair)."""
    cat = x.cat
    for obj in cat.objects:
        if obj not in x.object_sets:
            return PresheafCheck(False, f"no element set for object {obj!r}")
    for a in cat.arrows.values():
        m = x.arrow_maps.get(a.id)
        if m is None:
            return PresheafCheck(False, f"no map for arrow {a.id!r}")
        if set(m.keys()) != set(x.object_sets[a.dom]):
            return PresheafCheck(False, f"map of {a.id!r} is not total on its domain")
        for v in m.values():
            if v not in x.object_sets[a.cod]:
                return PresheafCheck(False, f"map of {a.id!r} leaves its codomain")
    for obj, iid in cat.identities.items():
        m = x.arrow_maps[iid]
        for e in x.object_sets[obj]:
            if m[e] != e:
                return PresheafCheck(False, f"identity law fails at {obj!r} on {e!r}")
    for (f_id, g_id), h_id in cat.composition.items():
        mf, mg, mh = x.arrow_maps[f_id], x.arrow_maps[g_id], x.arrow_maps[h_id]
        for e in x.object_sets[cat.arrows[g_id].dom]:
            if mf[mg[e]] != mh[e]:
                return PresheafCheck(
                    False, f"composition law fails for {f_id!r} after {g_id!r} on {e!r}"
                )
    return PresheafCheck(True)


def terminal_presheaf(cat: FinCategory) -> Presheaf:
    """The terminal presheaf: a singleton at every object."""
    star = "*"
    return Presheaf(
        cat,
        {obj: frozenset((star,)) for obj in cat.objects},
        {aid: {star: star} for aid in cat.arrows},
    )


def omega_presheaf(cat: FinCategory) -> Presheaf:
    """The subobject classifier: all sieves per object, arrows push forward."""
    sets = {obj: all_sieves(cat, obj) for obj in cat.objects}
    maps = {}
    for a in cat.arrows.values():
        maps[a.id] = {s: push_sieve(cat, a, s) for s in sets[a.dom]}
    return Presheaf(cat, {obj: frozenset(sv) for obj, sv in sets.items()}, maps)


@dataclass(frozen=True)
class NaturalTransformation:
    source: Presheaf
    target: Presheaf
    components: dict[str, dict]


@dataclass(frozen=True)
class NaturalityCheck:
    ok: bool
    witness: str | None = None

    def __bool__(self) -> bool:
        return self.ok


def is_natural(nt: NaturalTransformation) -> NaturalityCheck:
    """True iff every square commutes; the witness names the failing arrow."""
    x, y = nt.source, nt.target
    if x.cat is not y.cat and x.cat.arrows != y.cat.arrows:
        raise ComponentDomainMismatch("source and target live on different categories")
    for obj in x.cat.objects:
        comp = nt.components.get(obj)
        if comp is None or set(comp.keys()) != set(x.object_sets[obj]):
            raise ComponentDomainMismatch(
                f"component at {obj!r} is not a total map on the source set"
            )
        for v in comp.values():
            if v not in y.object_sets[obj]:
                raise ComponentDomainMismatch(
                    f"component at {obj!r} does not land in the target set"
                )
    for a in x.cat.arrows.values():
        n_dom, n_cod = nt.components[a.dom], nt.components[a.cod]
        xm, ym = x.arrow_maps[a.id], y.arrow_maps[a.id]
        for e in x.object_sets[a.dom]:
            if ym[n_dom[e]] != n_cod[xm[e]]:
                return NaturalityCheck(False, a.id)
    return NaturalityCheck(True)


@dataclass(frozen=True)
class Subobject:
    """A per-object subset family ``sub`` of ``parent`` closed under the maps."""

    sub: Presheaf
    parent: Presheaf


def validate_subobject(s: Subobject) -> tuple[bool, str | None]:
    x, k = s.parent, s.sub
    for obj in x.cat.objects:
        if not k.object_sets.get(obj, frozenset()) <= x.object_sets[obj]:
            return False, f"subset inclusion fails at {obj!r}"
    for a in x.cat.arrows.values():
        xm = x.arrow_maps[a.id]
        km = k.arrow_maps.get(a.id, {})
        for e in k.object_sets.get(a.dom, frozenset()):
            if xm[e] not in k.object_sets.get(a.cod, frozenset()):
                return False, f"not closed under {a.id!r} at {e!r}"
            if km.get(e) != xm[e]:
                return False, f"map of {a.id!r} is not the restriction at {e!r}"
    return True, None


def subobject_from_family(parent: Presheaf, family: Mapping[str, Iterable]) -> Subobject:
    """Build a Subobject from per-object subsets, restricting the maps."""
    sets = {obj: frozenset(family.get(obj, ())) for obj in parent.cat.objects}
    maps = {
        aid: {e: m[e] for e in sets[parent.cat.arrows[aid].dom]}
        for aid, m in parent.arrow_maps.items()
    }
    sub = Presheaf(parent.cat, sets, maps)
    s = Subobject(sub, parent)
    ok, witness = validate_subobject(s)
    if not ok:
        raise NotASubobject(witness)
    return s


def characteristic_arrow(
    k: Subobject, omega: Presheaf | None = None
) -> NaturalTransformation:
    """The classifying arrow of a subobject: at stage ``A`` an element ``x``
    is sent to the sieve of arrows pushing ``x`` into the subobject."""
    ok, witness = validate_subobject(k)
    if not ok:
        raise NotASubobject(witness)
    x = k.parent
    cat = x.cat
    if omega is None:
        omega = omega_presheaf(cat)
    components: dict[str, dict] = {}
    for obj in cat.objects:
        comp = {}
        for e in x.object_sets[obj]:
            members = frozenset(
                f.id for f in arrows_from(cat, obj)
                if x.arrow_maps[f.id][e] in k.sub.object_sets[f.cod]
            )
            comp[e] = Sieve(obj, members)
        components[obj] = comp
    return NaturalTransformation(x, omega, components)


def subobject_from_arrow(chi: NaturalTransformation) -> Subobject:
    """The converse of the classifier: pull back the principal sieves."""
    check = is_natural(chi)
    if not check:
        raise NotNatural(f"naturality fails at arrow {check.witness!r}")
    x = chi.source
    cat = x.cat
    family = {
        obj: frozenset(
            e for e in x.object_sets[obj]
            if chi.components[obj][e] == principal_sieve(cat, obj)
        )
        for obj in cat.objects
    }
    try:
        return subobject_from_family(x, family)
    except NotASubobject as exc:
        raise NotNatural(
            f"arrow does not classify a subobject (is the target the "
            f"sieve classifier?): {exc}"
        ) from None


def enumerate_subobjects(
    x: Presheaf, max_total_elements: int = DEFAULT_ENUM_LOG2
) -> list[Subobject]:
    """Every family of subsets closed under the arrow maps, exactly once.

    Guarded: the product of ``2**|X(A)|`` over objects must stay at or
    below ``2**max_total_elements``.
    """
    total = sum(len(x.object_sets[obj]) for obj in x.cat.objects)
    if total > max_total_elements:
        raise SizeLimitExceeded(
            f"subobject enumeration over 2^{total} families exceeds "
            f"the 2^{max_total_elements} guard"
        )
    objs = x.cat.objects
    per_obj: list[list[frozenset]] = []
    for obj in objs:
        els = sorted(x.object_sets[obj], key=element_key)
        subsets = [
            frozenset(e for i, e in enumerate(els) if mask >> i & 1)
            for mask in range(1 << len(els))
        ]
        per_obj.append(subsets)
    arrows = list(x.cat.arrows.values())
    result = []
    for combo in itertools.product(*per_obj):
        family = dict(zip(objs, combo))
        if all(
            x.arrow_maps[a.id][e] in family[a.cod]
            for a in arrows for e in family[a.dom]
        ):
            result.append(subobject_from_family(x, family))
    return result


@dataclass(frozen=True)
class GlobalSection:
    """A choice of one element per object satisfying the matching condition."""

    choice: dict[str, object]


def check_global_section(x: Presheaf, gs: GlobalSection) -> bool:
    for a in x.cat.arrows.values():
        if x.arrow_maps[a.id][gs.choice[a.dom]] != gs.choice[a.cod]:
            return False
    return all(gs.choice[obj] in x.object_sets[obj] for obj in x.cat.objects)


@dataclass(frozen=True)
class SectionSearchResult:
    sections: tuple[GlobalSection, ...]
    nodes: int
    order: tuple[str, ...]


def _search_order(cat: FinCategory) -> tuple[str, ...]:
    """Fixed backtracking order: repeatedly take the object with the most
    already-ordered constraint neighbours, breaking ties by descending
    out-degree and then by token. Highly connected hubs come first, so
    every later object is checked against assigned neighbours immediately.
    """
    neighbours: dict[str, set[str]] = {obj: set() for obj in cat.objects}
    out_degree = {obj: 0 for obj in cat.objects}
    for a in cat.arrows.values():
        out_degree[a.dom] += 1
        if a.dom != a.cod:
            neighbours[a.dom].add(a.cod)
            neighbours[a.cod].add(a.dom)
    token_rank = {obj: i for i, obj in enumerate(sorted(cat.objects))}
    placed: set[str] = set()
    ordered: list[str] = []
    remaining = set(cat.objects)
    while remaining:
        best = max(
            remaining,
            key=lambda o: (len(neighbours[o] & placed), out_degree[o], -token_rank[o]),
        )
        ordered.append(best)
        placed.add(best)
        remaining.discard(best)
    return tuple(ordered)


def global_section_search(
    x: Presheaf, node_budget: int = DEFAULT_NODE_BUDGET
) -> SectionSearchResult:
    """Backtracking over objects in a fixed order, pruning on every violated
    matching constraint. Deterministic: the section list and its order
    depend only on the presheaf."""
    cat = x.cat
    order = _search_order(cat)
    pos = {obj: i for i, obj in enumerate(order)}
    n = len(order)

    elements = [sorted(x.object_sets[obj], key=element_key) for obj in order]
    against_earlier: list[list] = [[] for _ in range(n)]  # (map, j, outgoing?)
    self_maps: list[list] = [[] for _ in range(n)]
    for a in cat.arrows.values():
        if cat.is_identity(a.id):
            continue
        m = x.arrow_maps[a.id]
        if a.dom == a.cod:
            self_maps[pos[a.dom]].append(m)
        elif pos[a.dom] > pos[a.cod]:
            against_earlier[pos[a.dom]].append((m, pos[a.cod], True))
        else:
            against_earlier[pos[a.cod]].append((m, pos[a.dom], False))

    assignment: list = [None] * n
    sections: list[GlobalSection] = []
    nodes = 0

    def extend(i: int) -> None:
        nonlocal nodes
        if i == n:
            sections.append(
                GlobalSection({obj: assignment[pos[obj]] for obj in cat.objects})
            )
            return
        for v in elements[i]:
            nodes += 1
            if nodes > node_budget:
                raise SizeLimitExceeded(
                    f"global-section search exceeded its node budget of {node_budget}"
                )
            if any(m[v] != v for m in self_maps[i]):
                continue
            ok = True
            for m, j, outgoing in against_earlier[i]:
                if outgoing:
                    if m[v] != assignment[j]:
                        ok = False
                        break
                elif m[assignment[j]] != v:
                    ok = False
                    break
            if ok:
                assignment[i] = v
                extend(i + 1)
        assignment[i] = None

    extend(0)
    return SectionSearchResult(tuple(sections), nodes, order)


def global_sections(
    x: Presheaf, node_budget: int = DEFAULT_NODE_BUDGET
) -> list[GlobalSection]:
    """Complete, duplicate-free list of global sections, deterministic order."""
    return list(global_section_search(x, node_budget).sections)


def enumerate_natural_transformations(
    x: Presheaf, y: Presheaf, max_log2: float = DEFAULT_ENUM_LOG2
) -> list[NaturalTransformation]:
    """Exhaustive enumeration of arrows ``x -> y`` with early square checks.

    Guarded by the product of ``|Y(A)| ** |X(A)|`` over objects staying at
    or below ``2**max_log2``.
    """
    cat = x.cat
    objs = cat.objects
    x_els = {obj: sorted(x.object_sets[obj], key=element_key) for obj in objs}
    y_els = {obj: sorted(y.object_sets[obj], key=element_key) for obj in objs}

    bound = 0.0
    for obj in objs:
        nx, ny = len(x_els[obj]), len(y_els[obj])
        if nx and ny == 0:
            return []
        if nx and ny > 1:
            bound += nx * math.log2(ny)
    if bound > max_log2:
        raise SizeLimitExceeded(
            f"transformation enumeration needs 2^{bound:.1f} candidates, "
            f"over the 2^{max_log2} guard"
        )

    # For the object at position i, the arrows whose squares become fully
    # checkable once components 0..i are all chosen.
    pos = {obj: i for i, obj in enumerate(objs)}
    checkable: list[list] = [[] for _ in objs]
    for a in cat.arrows.values():
        checkable[max(pos[a.dom], pos[a.cod])].append(a)

    components: dict[str, dict] = {}
    result: list[NaturalTransformation] = []

    def extend(i: int) -> None:
        if i == len(objs):
            result.append(NaturalTransformation(x, y, dict(components)))
            return
        obj = objs[i]
        xs = x_els[obj]
        for choice in itertools.product(y_els[obj], repeat=len(xs)):
            comp = dict(zip(xs, choice))
            components[obj] = comp
            if all(
                y.arrow_maps[a.id][components[a.dom][e]]
                == components[a.cod][x.arrow_maps[a.id][e]]
                for a in checkable[i]
                for e in x.object_sets[a.dom]
            ):
                extend(i + 1)
        components.pop(obj, None)

    extend(0)
    return result
