"""Formulas of the expanded SOPML language and complex inequalities.

Every node is an immutable dataclass, so structural equality and hashing
come for free. Complex inequalities are addressed by paths (tuples of child
indices) which the rewrite engine uses as rule loci.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Union


class Formula:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class PropVar(Formula):
    name: str


@dataclass(frozen=True, slots=True)
class Nominal(Formula):
    name: str


@dataclass(frozen=True, slots=True)
class Bottom(Formula):
    pass


@dataclass(frozen=True, slots=True)
class Top(Formula):
    pass


@dataclass(frozen=True, slots=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True, slots=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Box(Formula):
    arg: Formula


@dataclass(frozen=True, slots=True)
class Dia(Formula):
    arg: Formula


@dataclass(frozen=True, slots=True)
class BackBox(Formula):
    arg: Formula


@dataclass(frozen=True, slots=True)
class BackDia(Formula):
    arg: Formula


@dataclass(frozen=True, slots=True)
class ForallProp(Formula):
    name: str
    body: Formula


@dataclass(frozen=True, slots=True)
class ExistsProp(Formula):
    name: str
    body: Formula


@dataclass(frozen=True, slots=True)
class ForallNom(Formula):
    name: str
    body: Formula


@dataclass(frozen=True, slots=True)
class ExistsNom(Formula):
    name: str
    body: Formula


@dataclass(frozen=True, slots=True)
class L(Formula):
    """Global implication: l(a, b) holds everywhere iff a implies b at every world."""

    left: Formula
    right: Formula


UNARY = (Not, Box, Dia, BackBox, BackDia)
BINARY = (And, Or, Implies, L)
PROP_BINDERS = (ForallProp, ExistsProp)
NOM_BINDERS = (ForallNom, ExistsNom)
BINDERS = PROP_BINDERS + NOM_BINDERS


class Comp:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Ineq(Comp):
    lhs: Formula
    rhs: Formula


Inequality = Ineq


@dataclass(frozen=True, slots=True)
class MetaAnd(Comp):
    """Meta-conjunction over an ordered tuple; the empty tuple is the true element."""

    conjuncts: tuple[Comp, ...]

    def __post_init__(self):
        if len(self.conjuncts) == 1:
            raise ValueError("a meta-conjunction needs zero or at least two conjuncts")


@dataclass(frozen=True, slots=True)
class MetaImplies(Comp):
    lhs: Comp
    rhs: Comp


@dataclass(frozen=True, slots=True)
class CForallProp(Comp):
    name: str
    body: Comp


@dataclass(frozen=True, slots=True)
class CExistsProp(Comp):
    name: str
    body: Comp


@dataclass(frozen=True, slots=True)
class CForallNom(Comp):
    name: str
    body: Comp


@dataclass(frozen=True, slots=True)
class CExistsNom(Comp):
    name: str
    body: Comp


C_PROP_BINDERS = (CForallProp, CExistsProp)
C_NOM_BINDERS = (CForallNom, CExistsNom)
C_BINDERS = C_PROP_BINDERS + C_NOM_BINDERS

ComplexInequality = Comp
Node = Union[Formula, Comp]


def conj(*fs: Formula) -> Formula:
    """Left-nested conjunction; ⊤ when empty."""
    if not fs:
        return Top()
    out = fs[0]
    for f in fs[1:]:
        out = And(out, f)
    return out


def disj(*fs: Formula) -> Formula:
    """Left-nested disjunction; ⊥ when empty."""
    if not fs:
        return Bottom()
    out = fs[0]
    for f in fs[1:]:
        out = Or(out, f)
    return out


def meta_and(*cs: Comp) -> Comp:
    return cs[0] if len(cs) == 1 else MetaAnd(tuple(cs))


def forall_props(names: Iterable[str], body: Formula) -> Formula:
    for n in reversed(tuple(names)):
        body = ForallProp(n, body)
    return body


def c_forall_props(names: Iterable[str], body: Comp) -> Comp:
    for n in reversed(tuple(names)):
        body = CForallProp(n, body)
    return body


def c_forall_noms(names: Iterable[str], body: Comp) -> Comp:
    for n in reversed(tuple(names)):
        body = CForallNom(n, body)
    return body


# ---------------------------------------------------------------- polarity


class Polarity(enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    BOTH = "both"
    ABSENT = "absent"

    def flip(self) -> Polarity:
        return _FLIP[self]

    def join(self, other: Polarity) -> Polarity:
        if self is Polarity.ABSENT:
            return other
        if other is Polarity.ABSENT or other is self:
            return self
        return Polarity.BOTH


_FLIP = {
    Polarity.POSITIVE: Polarity.NEGATIVE,
    Polarity.NEGATIVE: Polarity.POSITIVE,
    Polarity.BOTH: Polarity.BOTH,
    Polarity.ABSENT: Polarity.ABSENT,
}


def polarity(phi: Node, p: str) -> Polarity:
    """Polarity of the free occurrences of propositional variable `p`.

    Works on formulas and on complex inequalities (where the left side of an
    inequality and the antecedent of a meta-implication count as flips).
    """
    match phi:
        case PropVar(name):
            return Polarity.POSITIVE if name == p else Polarity.ABSENT
        case Nominal() | Bottom() | Top():
            return Polarity.ABSENT
        case Not(a):
            return polarity(a, p).flip()
        case Box(a) | Dia(a) | BackBox(a) | BackDia(a):
            return polarity(a, p)
        case And(a, b) | Or(a, b):
            return polarity(a, p).join(polarity(b, p))
        case Implies(a, b) | L(a, b):
            return polarity(a, p).flip().join(polarity(b, p))
        case ForallProp(n, b) | ExistsProp(n, b):
            return Polarity.ABSENT if n == p else polarity(b, p)
        case ForallNom(_, b) | ExistsNom(_, b):
            return polarity(b, p)
        case Ineq(a, b) | MetaImplies(a, b):
            return polarity(a, p).flip().join(polarity(b, p))
        case MetaAnd(cs):
            out = Polarity.ABSENT
            for c in cs:
                out = out.join(polarity(c, p))
            return out
        case CForallProp(n, b) | CExistsProp(n, b):
            return Polarity.ABSENT if n == p else polarity(b, p)
        case CForallNom(_, b) | CExistsNom(_, b):
            return polarity(b, p)
    raise TypeError(f"not a formula: {phi!r}")


def is_positive(phi: Node, p: str) -> bool:
    return polarity(phi, p) in (Polarity.POSITIVE, Polarity.ABSENT)


def is_negative(phi: Node, p: str) -> bool:
    return polarity(phi, p) in (Polarity.NEGATIVE, Polarity.ABSENT)


# ---------------------------------------------------------------- traversal


def children(node: Node) -> tuple[Node, ...]:
    match node:
        case PropVar() | Nominal() | Bottom() | Top():
            return ()
        case Not(a) | Box(a) | Dia(a) | BackBox(a) | BackDia(a):
            return (a,)
        case And(a, b) | Or(a, b) | Implies(a, b) | L(a, b):
            return (a, b)
        case ForallProp(_, b) | ExistsProp(_, b) | ForallNom(_, b) | ExistsNom(_, b):
            return (b,)
        case Ineq(a, b) | MetaImplies(a, b):
            return (a, b)
        case MetaAnd(cs):
            return cs
        case CForallProp(_, b) | CExistsProp(_, b) | CForallNom(_, b) | CExistsNom(_, b):
            return (b,)
    raise TypeError(f"not a formula: {node!r}")


def subterms(node: Node) -> Iterator[Node]:
    yield node
    for c in children(node):
        yield from subterms(c)


def is_pure(phi: Node) -> bool:
    """No propositional variables and no propositional quantifiers anywhere."""
    return not any(
        isinstance(s, (PropVar,) + PROP_BINDERS + C_PROP_BINDERS) for s in subterms(phi)
    )


def free_symbols(phi: Node) -> tuple[frozenset[str], frozenset[str]]:
    """(free propositional variables, free nominals)."""
    props: set[str] = set()
    noms: set[str] = set()
    _free(phi, frozenset(), frozenset(), props, noms)
    return frozenset(props), frozenset(noms)


def _free(node, bp, bn, props, noms):
    match node:
        case PropVar(name):
            if name not in bp:
                props.add(name)
        case Nominal(name):
            if name not in bn:
                noms.add(name)
        case ForallProp(n, b) | ExistsProp(n, b) | CForallProp(n, b) | CExistsProp(n, b):
            _free(b, bp | {n}, bn, props, noms)
        case ForallNom(n, b) | ExistsNom(n, b) | CForallNom(n, b) | CExistsNom(n, b):
            _free(b, bp, bn | {n}, props, noms)
        case _:
            for c in children(node):
                _free(c, bp, bn, props, noms)


def nominal_names(node: Node) -> frozenset[str]:
    """Every nominal name occurring in `node`, free or bound."""
    out = set()
    for s in subterms(node):
        if isinstance(s, Nominal):
            out.add(s.name)
        elif isinstance(s, NOM_BINDERS + C_NOM_BINDERS):
            out.add(s.name)
    return frozenset(out)


def prop_names(node: Node) -> frozenset[str]:
    """Every propositional name occurring in `node`, free or bound."""
    out = set()
    for s in subterms(node):
        if isinstance(s, PropVar):
            out.add(s.name)
        elif isinstance(s, PROP_BINDERS + C_PROP_BINDERS):
            out.add(s.name)
    return frozenset(out)


def rebuild(node: Node, kids: tuple[Node, ...]) -> Node:
    """Same constructor as `node`, new children."""
    match node:
        case PropVar() | Nominal() | Bottom() | Top():
            return node
        case Not() | Box() | Dia() | BackBox() | BackDia():
            return type(node)(kids[0])
        case And() | Or() | Implies() | L() | Ineq() | MetaImplies():
            return type(node)(kids[0], kids[1])
        case MetaAnd():
            return MetaAnd(tuple(kids))
        case _ if isinstance(node, BINDERS + C_BINDERS):
            return type(node)(node.name, kids[0])
    raise TypeError(f"not a formula: {node!r}")


# ---------------------------------------------------------------- substitution


class CaptureError(ValueError):
    """A binder of the host would capture a free nominal of the replacement."""


def substitute(host: Node, p: str, replacement: Formula) -> Node:
    """Replace the free occurrences of `p` in `host` by `replacement`."""
    _, rnoms = free_symbols(replacement)
    rprops = free_symbols(replacement)[0]
    return _subst(host, p, replacement, rprops, rnoms)


def _subst(node, p, rep, rprops, rnoms):
    match node:
        case PropVar(name):
            return rep if name == p else node
        case Nominal() | Bottom() | Top():
            return node
    if isinstance(node, PROP_BINDERS + C_PROP_BINDERS):
        if node.name == p:
            return node
        if node.name in rprops and p in free_symbols(node.body)[0]:
            raise CaptureError(f"binder {node.name} would capture a variable of the replacement")
    elif isinstance(node, NOM_BINDERS + C_NOM_BINDERS):
        if node.name in rnoms and p in free_symbols(node.body)[0]:
            raise CaptureError(f"binder @{node.name} would capture a nominal of the replacement")
    kids = children(node)
    new = tuple(_subst(c, p, rep, rprops, rnoms) for c in kids)
    if all(a is b for a, b in zip(new, kids)):
        return node
    return rebuild(node, new)


def rename_nominal(host: Node, old: str, new: str) -> Node:
    """Replace free occurrences of nominal `old` by nominal `new`."""
    match host:
        case Nominal(name):
            return Nominal(new) if name == old else host
        case PropVar() | Bottom() | Top():
            return host
    if isinstance(host, NOM_BINDERS + C_NOM_BINDERS):
        if host.name == old:
            return host
        if host.name == new and old in free_symbols(host.body)[1]:
            raise CaptureError(f"binder @{new} would capture the renamed nominal")
    kids = children(host)
    return rebuild(host, tuple(rename_nominal(c, old, new) for c in kids))


# ---------------------------------------------------------------- fresh names


def fresh_nominal(used: Iterable[str], prefix: str = "j") -> str:
    """First name of the form prefix1, prefix2, ... not in `used`."""
    used = set(used)
    for k in itertools.count(1):
        name = f"{prefix}{k}"
        if name not in used:
            return name
    raise AssertionError("unreachable")


class FreshSupply:
    """Deterministic nominal name supply shared by one run."""

    def __init__(self, used: Iterable[str] = ()):
        self.used = set(used)

    def reserve(self, names: Iterable[str]) -> None:
        self.used.update(names)

    def nominal(self, prefix: str = "j") -> str:
        name = fresh_nominal(self.used, prefix)
        self.used.add(name)
        return name


# ---------------------------------------------------------------- paths


Path = tuple[int, ...]


def get_at(node: Node, path: Path) -> Node:
    for k in path:
        kids = children(node)
        if not 0 <= k < len(kids):
            raise IndexError(f"path {path} leaves the tree")
        node = kids[k]
    return node


def replace_at(node: Node, path: Path, new: Node) -> Node:
    if not path:
        return new
    kids = list(children(node))
    k = path[0]
    if not 0 <= k < len(kids):
        raise IndexError(f"path {path} leaves the tree")
    kids[k] = replace_at(kids[k], path[1:], new)
    return rebuild(node, tuple(kids))
