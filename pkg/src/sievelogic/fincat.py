"""Finite categories with eager, total validation.

A category is stored as explicit object and arrow tokens plus a complete
composition table. Everything is checked at construction time: identity
arrows, domain/codomain bookkeeping, the identity laws, and associativity
over every composable triple. At desk scale this is cheap, and it means
every other module can trust any :class:`FinCategory` it is handed.

Composition order: for ``g: C -> B`` and ``f: B -> A`` the composite is
``compose(cat, f, g) = f after g : C -> A``. All modules use this order.
Arrow identity is nominal (by token); parallel arrows may coexist.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import SieveLogicError


class CategoryError(SieveLogicError):
    """Structural violation detected while building or using a category."""


class MissingIdentity(CategoryError):
    pass


class CompositionDomainMismatch(CategoryError):
    pass


class AssociativityViolation(CategoryError):
    pass


class IdentityLawViolation(CategoryError):
    pass


class NotAPoset(CategoryError):
    pass


class UnknownObject(CategoryError):
    pass


class UnknownArrow(CategoryError):
    pass


class NotComposable(CategoryError):
    pass


# Objects are opaque string tokens, unique within one category.
ObjectId = str


@dataclass(frozen=True, slots=True)
class Arrow:
    """An arrow ``id: dom -> cod``, identified by its token."""

    id: str
    dom: ObjectId
    cod: ObjectId


class FinCategory:
    """An immutable, fully validated finite category.

    Instances come from :func:`build_category`, :func:`poset_to_category`
    or the operator-category builder; nothing mutates them afterwards, so
    they are safe to share across threads.
    """

    __slots__ = ("objects", "arrows", "identities", "composition", "_by_dom",
                 "_identity_ids")

    def __init__(
        self,
        objects: tuple[str, ...],
        arrows: dict[str, Arrow],
        identities: dict[str, str],
        composition: dict[tuple[str, str], str],
        by_dom: dict[str, tuple[Arrow, ...]],
    ):
        self.objects = objects
        self.arrows = arrows
        self.identities = identities
        self.composition = composition
        self._by_dom = by_dom
        self._identity_ids = frozenset(identities.values())

    def __repr__(self) -> str:
        return f"FinCategory({len(self.objects)} objects, {len(self.arrows)} arrows)"

    def has_object(self, obj: str) -> bool:
        return obj in self.identities

    def arrow(self, arrow_id: str) -> Arrow:
        try:
            return self.arrows[arrow_id]
        except KeyError:
            raise UnknownArrow(f"no arrow with token {arrow_id!r}") from None

    def identity(self, obj: str) -> Arrow:
        try:
            return self.arrows[self.identities[obj]]
        except KeyError:
            raise UnknownObject(f"no object with token {obj!r}") from None

    def is_identity(self, arrow_id: str) -> bool:
        return arrow_id in self._identity_ids

    def compose_ids(self, f_id: str, g_id: str) -> str:
        """Token of ``f after g``; raises NotComposable when undefined."""
        try:
            return self.composition[(f_id, g_id)]
        except KeyError:
            raise NotComposable(
                f"arrows {f_id!r} after {g_id!r} do not compose"
            ) from None


def arrows_from(cat: FinCategory, obj: str) -> tuple[Arrow, ...]:
    """All arrows with domain ``obj`` (the identity included), sorted by token."""
    try:
        return cat._by_dom[obj]
    except KeyError:
        raise UnknownObject(f"no object with token {obj!r}") from None


def compose(cat: FinCategory, f: Arrow, g: Arrow) -> Arrow:
    """The composite ``f after g`` for ``g: C -> B`` and ``f: B -> A``."""
    for a in (f, g):
        if cat.arrows.get(a.id) != a:
            raise UnknownArrow(f"arrow {a.id!r} does not belong to this category")
    if g.cod != f.dom:
        raise NotComposable(
            f"cod of {g.id!r} is {g.cod!r} but dom of {f.id!r} is {f.dom!r}"
        )
    return cat.arrows[cat.composition[(f.id, g.id)]]


def build_category(
    objects: Iterable[str],
    arrows: Iterable[Arrow],
    identities: Mapping[str, str],
    composition_table: Mapping[tuple[str, str], str],
) -> FinCategory:
    """Validate and assemble a finite category.

    ``composition_table`` maps ``(f_id, g_id)`` to the token of ``f after g``.
    Entries forced by the identity laws may be omitted; everything else must
    be present. Raises MissingIdentity, CompositionDomainMismatch,
    AssociativityViolation or IdentityLawViolation, naming the offending
    arrows.
    """
    objs = tuple(objects)
    if len(set(objs)) != len(objs):
        raise CategoryError("duplicate object tokens")
    obj_set = set(objs)

    arrow_map: dict[str, Arrow] = {}
    for a in arrows:
        if a.id in arrow_map:
            raise CategoryError(f"duplicate arrow token {a.id!r}")
        if a.dom not in obj_set:
            raise UnknownObject(f"arrow {a.id!r} has unknown domain {a.dom!r}")
        if a.cod not in obj_set:
            raise UnknownObject(f"arrow {a.id!r} has unknown codomain {a.cod!r}")
        arrow_map[a.id] = a

    ident: dict[str, str] = {}
    for obj in objs:
        if obj not in identities:
            raise MissingIdentity(f"object {obj!r} has no identity arrow")
        iid = identities[obj]
        if iid not in arrow_map:
            raise MissingIdentity(f"identity {iid!r} of {obj!r} is not an arrow")
        ia = arrow_map[iid]
        if ia.dom != obj or ia.cod != obj:
            raise MissingIdentity(
                f"identity {iid!r} of {obj!r} has endpoints {ia.dom!r} -> {ia.cod!r}"
            )
        ident[obj] = iid

    identity_ids = set(ident.values())
    table: dict[tuple[str, str], str] = {}
    for (f_id, g_id), h_id in composition_table.items():
        for a_id in (f_id, g_id, h_id):
            if a_id not in arrow_map:
                raise UnknownArrow(f"composition table mentions unknown arrow {a_id!r}")
        f, g, h = arrow_map[f_id], arrow_map[g_id], arrow_map[h_id]
        if g.cod != f.dom:
            raise CompositionDomainMismatch(
                f"table defines {f_id!r} after {g_id!r} but cod {g.cod!r} != dom {f.dom!r}"
            )
        # The identity laws fix entries involving identities outright.
        forced = f_id if g_id in identity_ids else (g_id if f_id in identity_ids else None)
        if forced is not None and h_id != forced:
            raise IdentityLawViolation(
                f"table entry {f_id!r} after {g_id!r} = {h_id!r} violates the "
                f"identity law (expected {forced!r})"
            )
        if h.dom != g.dom or h.cod != f.cod:
            raise CompositionDomainMismatch(
                f"composite of {f_id!r} after {g_id!r} must go "
                f"{g.dom!r} -> {f.cod!r}, got {h_id!r}: {h.dom!r} -> {h.cod!r}"
            )
        table[(f_id, g_id)] = h_id

    # Identity laws force id after f = f and f after id = f; fill the table
    # and reject any conflicting user entry.
    for a in arrow_map.values():
        for pair, forced in (
            ((ident[a.cod], a.id), a.id),
            ((a.id, ident[a.dom]), a.id),
        ):
            existing = table.get(pair)
            if existing is None:
                table[pair] = forced
            elif existing != forced:
                raise IdentityLawViolation(
                    f"table entry {pair[0]!r} after {pair[1]!r} = {existing!r} "
                    f"violates the identity law (expected {forced!r})"
                )

    by_dom: dict[str, list[Arrow]] = {obj: [] for obj in objs}
    for a in arrow_map.values():
        by_dom[a.dom].append(a)
    by_dom_sorted = {obj: tuple(sorted(lst, key=lambda a: a.id)) for obj, lst in by_dom.items()}

    # Totality on composable pairs.
    for g in arrow_map.values():
        for f in by_dom_sorted[g.cod]:
            if (f.id, g.id) not in table:
                raise CompositionDomainMismatch(
                    f"no composite defined for {f.id!r} after {g.id!r}"
                )

    # Associativity over every composable triple.
    for h in arrow_map.values():
        for g in by_dom_sorted[h.cod]:
            gh = table[(g.id, h.id)]
            for f in by_dom_sorted[g.cod]:
                fg = table[(f.id, g.id)]
                if table[(fg, h.id)] != table[(f.id, gh)]:
                    raise AssociativityViolation(
                        f"({f.id!r} after {g.id!r}) after {h.id!r} != "
                        f"{f.id!r} after ({g.id!r} after {h.id!r})"
                    )

    return FinCategory(objs, arrow_map, ident, table, by_dom_sorted)


def poset_to_category(
    elements: Sequence[str],
    leq_relation: Iterable[tuple[str, str]],
) -> FinCategory:
    """The thin category of a finite poset: one arrow ``p -> q`` iff p <= q.

    ``leq_relation`` is the full set of related pairs, reflexive pairs
    included or not (reflexivity is required either way and checked).
    Raises NotAPoset with a witness on any axiom failure.
    """
    elems = tuple(elements)
    if len(set(elems)) != len(elems):
        raise NotAPoset("duplicate elements")
    elem_set = set(elems)

    rel = set()
    for p, q in leq_relation:
        if p not in elem_set or q not in elem_set:
            raise NotAPoset(f"relation mentions unknown element in ({p!r}, {q!r})")
        rel.add((p, q))
    for p in elems:
        rel.add((p, p))

    for p, q in rel:
        if p != q and (q, p) in rel:
            raise NotAPoset(f"antisymmetry fails: {p!r} <= {q!r} and {q!r} <= {p!r}")
    for p, q in rel:
        for r in elems:
            if (q, r) in rel and (p, r) not in rel:
                raise NotAPoset(
                    f"transitivity fails: {p!r} <= {q!r} <= {r!r} but not {p!r} <= {r!r}"
                )

    arrows = []
    identities = {}
    for p in elems:
        ia = Arrow(f"id_{p}", p, p)
        arrows.append(ia)
        identities[p] = ia.id
    arrow_of: dict[tuple[str, str], str] = {(p, p): f"id_{p}" for p in elems}
    for p, q in sorted(rel):
        if p != q:
            a = Arrow(f"{p}->{q}", p, q)
            arrows.append(a)
            arrow_of[(p, q)] = a.id

    # Thinness makes composition forced: the composite of p<=q and q<=r is
    # the unique arrow p -> r.
    table = {}
    for (p, q) in rel:
        for (q2, r) in rel:
            if q2 == q:
                table[(arrow_of[(q, r)], arrow_of[(p, q)])] = arrow_of[(p, r)]

    return build_category(elems, arrows, identities, table)
