"""First-order (and monadic second-order) formulas over a single binary relation R."""

from __future__ import annotations

from dataclasses import dataclass


class FOFormula:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class RelAtom(FOFormula):
    x: str
    y: str


@dataclass(frozen=True, slots=True)
class Eq(FOFormula):
    x: str
    y: str


@dataclass(frozen=True, slots=True)
class PredAtom(FOFormula):
    pred: str
    x: str


@dataclass(frozen=True, slots=True)
class Verum(FOFormula):
    pass


@dataclass(frozen=True, slots=True)
class Falsum(FOFormula):
    pass


@dataclass(frozen=True, slots=True)
class Not(FOFormula):
    arg: FOFormula


@dataclass(frozen=True, slots=True)
class And(FOFormula):
    left: FOFormula
    right: FOFormula


@dataclass(frozen=True, slots=True)
class Or(FOFormula):
    left: FOFormula
    right: FOFormula


@dataclass(frozen=True, slots=True)
class Implies(FOFormula):
    left: FOFormula
    right: FOFormula


@dataclass(frozen=True, slots=True)
class ForallInd(FOFormula):
    var: str
    body: FOFormula


@dataclass(frozen=True, slots=True)
class ExistsInd(FOFormula):
    var: str
    body: FOFormula


@dataclass(frozen=True, slots=True)
class ForallPred(FOFormula):
    var: str
    body: FOFormula


@dataclass(frozen=True, slots=True)
class ExistsPred(FOFormula):
    var: str
    body: FOFormula


IND_BINDERS = (ForallInd, ExistsInd)
PRED_BINDERS = (ForallPred, ExistsPred)


def fo_children(phi: FOFormula) -> tuple[FOFormula, ...]:
    match phi:
        case Not(a):
            return (a,)
        case And(a, b) | Or(a, b) | Implies(a, b):
            return (a, b)
        case ForallInd(_, b) | ExistsInd(_, b) | ForallPred(_, b) | ExistsPred(_, b):
            return (b,)
    return ()


def fo_subterms(phi: FOFormula):
    yield phi
    for c in fo_children(phi):
        yield from fo_subterms(c)


def fo_free(phi: FOFormula) -> tuple[frozenset[str], frozenset[str]]:
    """(free individual variables, free predicate variables)."""
    inds: set[str] = set()
    preds: set[str] = set()

    def walk(f, bi, bp):
        match f:
            case RelAtom(x, y) | Eq(x, y):
                inds.update(v for v in (x, y) if v not in bi)
            case PredAtom(p, x):
                if x not in bi:
                    inds.add(x)
                if p not in bp:
                    preds.add(p)
            case ForallInd(v, b) | ExistsInd(v, b):
                walk(b, bi | {v}, bp)
            case ForallPred(v, b) | ExistsPred(v, b):
                walk(b, bi, bp | {v})
            case _:
                for c in fo_children(f):
                    walk(c, bi, bp)

    walk(phi, frozenset(), frozenset())
    return frozenset(inds), frozenset(preds)


def is_first_order(phi: FOFormula) -> bool:
    """No predicate quantifiers and no monadic predicate atoms."""
    return not any(isinstance(s, PRED_BINDERS + (PredAtom,)) for s in fo_subterms(phi))
