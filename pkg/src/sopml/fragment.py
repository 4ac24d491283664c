"""Recognizer for the Pi_n-Sahlqvist hierarchy of SOPML formulas.

Each classifier returns either a derivation node certifying membership or a
`Rejection` value naming the first subterm that fails. The derivation is a
parse tree of the grammar:

    POS(p)      := p | false | true | POS & POS | POS | POS | []POS | <>POS
    Sahl_1(p)   := []^n p | false | true | ~POS(p) | Sahl & Sahl | <>Sahl
    PIA(q, p)   := p | []PIA | PIA & PIA | POS(q) | PIA      (either disjunct order)
    Sahl_n(p)   := Sahl_{n-1}(p) | !q.(Sahl_{n-1}(q) -> PIA(q, p)) | ...
    Pi_n        := !p.(Sahl_n(p) -> POS(p))

Levels are computed, not stored: a node's level is the least n for which the
subtree is a Sahl_n derivation.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .formula import (
    And,
    Bottom,
    Box,
    Dia,
    ExistsProp,
    ForallProp,
    Formula,
    Implies,
    Not,
    Or,
    PropVar,
    Top,
    free_symbols,
)


@dataclass(frozen=True)
class Rejection:
    subterm: Formula
    reason: str


# -- stable rejection reasons
NOT_PI_SHAPE = "not of the form !p1. ... !pn. (antecedent -> consequent)"
UNBOUND_VARIABLE = "propositional variable {} is not bound by the enclosing quantifier prefix"
FOREIGN_SYMBOL = "{} is outside the SOPML fragment"
NEG_IN_POS = "negation is not allowed in a positive formula"
IMP_IN_POS = "implication is not allowed in a positive formula"
QUANT_IN_POS = "propositional quantifiers are not allowed in positive formulas"
BOX_NOT_ATOM = "a box in a Sahlqvist antecedent must sit over a boxed atom"
IMP_IN_ANTECEDENT = "implication is only allowed under a universal quantifier in a Sahlqvist antecedent"
OR_IN_ANTECEDENT = "disjunction is not allowed in a Sahlqvist antecedent"
UNIVERSAL_SHAPE = "a quantified antecedent must have the form !q1. ... !qn. (antecedent -> PIA)"
REBOUND_VARIABLE = "quantifier rebinds the variable {} of an enclosing scope"
EXISTS_IN_ANTECEDENT = "existential propositional quantifiers are not allowed in a Sahlqvist antecedent"
DIA_IN_PIA = "diamond is not allowed in a PIA formula"
NEG_IN_PIA = "negation is not allowed in a PIA formula"
OR_IN_PIA = "disjunction in a PIA formula needs a POS disjunct over the inner variables"
CONST_IN_PIA = "constants are not allowed as PIA leaves"
INNER_IN_PIA = "inner variable {} occurs outside a POS disjunct of a PIA formula"
LEVEL_TOO_HIGH = "antecedent has level {} which exceeds the requested maximum {}"


def _foreign(phi: Formula) -> Rejection:
    return Rejection(phi, FOREIGN_SYMBOL.format(type(phi).__name__))


# ---------------------------------------------------------------- derivation nodes


@dataclass(frozen=True)
class PosNode:
    formula: Formula


@dataclass(frozen=True)
class BoxedAtom:
    formula: Formula
    n: int
    var: str
    level = 1


@dataclass(frozen=True)
class SBot:
    formula: Formula
    level = 1


@dataclass(frozen=True)
class STop:
    formula: Formula
    level = 1


@dataclass(frozen=True)
class NegPos:
    formula: Formula
    pos: PosNode
    level = 1


@dataclass(frozen=True)
class SConj:
    formula: Formula
    left: SahlNode
    right: SahlNode

    @property
    def level(self) -> int:
        return max(self.left.level, self.right.level)


@dataclass(frozen=True)
class SDia:
    formula: Formula
    child: SahlNode

    @property
    def level(self) -> int:
        return self.child.level


@dataclass(frozen=True)
class Quantified:
    formula: Formula
    qvars: tuple[str, ...]
    antecedent: SahlNode
    pia: PiaNode

    @property
    def level(self) -> int:
        return self.antecedent.level + 1


SahlNode = Union[BoxedAtom, SBot, STop, NegPos, SConj, SDia, Quantified]


@dataclass(frozen=True)
class PAtom:
    formula: Formula
    var: str


@dataclass(frozen=True)
class PBox:
    formula: Formula
    child: PiaNode


@dataclass(frozen=True)
class PConj:
    formula: Formula
    left: PiaNode
    right: PiaNode


@dataclass(frozen=True)
class OrPos:
    formula: Formula
    pos: PosNode
    child: PiaNode
    pos_left: bool


PiaNode = Union[PAtom, PBox, PConj, OrPos]


@dataclass(frozen=True)
class SahlqvistDerivation:
    formula: Formula
    pvars: tuple[str, ...]
    antecedent: SahlNode
    consequent: PosNode

    @property
    def level(self) -> int:
        return self.antecedent.level


# ---------------------------------------------------------------- classifiers


def classify_pos(phi: Formula, vars) -> PosNode | Rejection:
    bad = _pos_error(phi, frozenset(vars))
    return bad if bad else PosNode(phi)


def _pos_error(phi: Formula, vars) -> Rejection | None:
    match phi:
        case PropVar(name):
            return None if name in vars else Rejection(phi, UNBOUND_VARIABLE.format(name))
        case Bottom() | Top():
            return None
        case And(a, b) | Or(a, b):
            return _pos_error(a, vars) or _pos_error(b, vars)
        case Box(a) | Dia(a):
            return _pos_error(a, vars)
        case Not():
            return Rejection(phi, NEG_IN_POS)
        case Implies():
            return Rejection(phi, IMP_IN_POS)
        case ForallProp() | ExistsProp():
            return Rejection(phi, QUANT_IN_POS)
    return _foreign(phi)


def _peel_foralls(phi: Formula) -> tuple[tuple[str, ...], Formula]:
    names = []
    while isinstance(phi, ForallProp):
        names.append(phi.name)
        phi = phi.body
    return tuple(names), phi


def classify_sahl(phi: Formula, vars, max_level: int | None = None) -> SahlNode | Rejection:
    """Classify `phi` as a Sahl_n antecedent over `vars`, optionally capping n."""
    out = _sahl(phi, frozenset(vars), frozenset(vars))
    if isinstance(out, Rejection) or max_level is None or out.level <= max_level:
        return out
    return Rejection(phi, LEVEL_TOO_HIGH.format(out.level, max_level))


def classify_sahl1(phi: Formula, vars) -> SahlNode | Rejection:
    return classify_sahl(phi, vars, max_level=1)


def _sahl(phi: Formula, vars: frozenset, bound: frozenset) -> SahlNode | Rejection:
    match phi:
        case Bottom():
            return SBot(phi)
        case Top():
            return STop(phi)
        case PropVar(name):
            if name not in vars:
                return Rejection(phi, UNBOUND_VARIABLE.format(name))
            return BoxedAtom(phi, 0, name)
        case Box():
            n, inner = 0, phi
            while isinstance(inner, Box):
                n, inner = n + 1, inner.arg
            if not isinstance(inner, PropVar):
                return Rejection(phi, BOX_NOT_ATOM)
            if inner.name not in vars:
                return Rejection(inner, UNBOUND_VARIABLE.format(inner.name))
            return BoxedAtom(phi, n, inner.name)
        case Not(a):
            pos = classify_pos(a, vars)
            return pos if isinstance(pos, Rejection) else NegPos(phi, pos)
        case And(a, b):
            left = _sahl(a, vars, bound)
            if isinstance(left, Rejection):
                return left
            right = _sahl(b, vars, bound)
            return right if isinstance(right, Rejection) else SConj(phi, left, right)
        case Dia(a):
            child = _sahl(a, vars, bound)
            return child if isinstance(child, Rejection) else SDia(phi, child)
        case ForallProp():
            return _quantified(phi, vars, bound)
        case Implies():
            return Rejection(phi, IMP_IN_ANTECEDENT)
        case Or():
            return Rejection(phi, OR_IN_ANTECEDENT)
        case ExistsProp():
            return Rejection(phi, EXISTS_IN_ANTECEDENT)
    return _foreign(phi)


def _quantified(phi: Formula, vars: frozenset, bound: frozenset) -> Quantified | Rejection:
    qvars, body = _peel_foralls(phi)
    seen = set()
    for q in qvars:
        if q in bound or q in seen:
            return Rejection(phi, REBOUND_VARIABLE.format(q))
        seen.add(q)
    if not isinstance(body, Implies):
        return Rejection(phi, UNIVERSAL_SHAPE)
    inner = frozenset(qvars)
    ant = _sahl(body.left, inner, bound | inner)
    if isinstance(ant, Rejection):
        return ant
    pia = _pia(body.right, inner, vars)
    if isinstance(pia, Rejection):
        return pia
    return Quantified(phi, qvars, ant, pia)


def classify_pia(phi: Formula, q_vars, p_vars) -> PiaNode | Rejection:
    q_vars, p_vars = frozenset(q_vars), frozenset(p_vars)
    if q_vars & p_vars:
        raise ValueError("inner and outer variable bunches must be disjoint")
    return _pia(phi, q_vars, p_vars)


def _pia(phi: Formula, q_vars: frozenset, p_vars: frozenset) -> PiaNode | Rejection:
    match phi:
        case PropVar(name):
            if name in p_vars:
                return PAtom(phi, name)
            if name in q_vars:
                return Rejection(phi, INNER_IN_PIA.format(name))
            return Rejection(phi, UNBOUND_VARIABLE.format(name))
        case Box(a):
            child = _pia(a, q_vars, p_vars)
            return child if isinstance(child, Rejection) else PBox(phi, child)
        case And(a, b):
            left = _pia(a, q_vars, p_vars)
            if isinstance(left, Rejection):
                return left
            right = _pia(b, q_vars, p_vars)
            return right if isinstance(right, Rejection) else PConj(phi, left, right)
        case Or(a, b):
            for pos_side, pia_side, pos_left in ((a, b, True), (b, a, False)):
                pos = classify_pos(pos_side, q_vars)
                if isinstance(pos, Rejection):
                    continue
                child = _pia(pia_side, q_vars, p_vars)
                if not isinstance(child, Rejection):
                    return OrPos(phi, pos, child, pos_left)
            return Rejection(phi, OR_IN_PIA)
        case Dia():
            return Rejection(phi, DIA_IN_PIA)
        case Not():
            return Rejection(phi, NEG_IN_PIA)
        case Bottom() | Top():
            return Rejection(phi, CONST_IN_PIA)
    return _foreign(phi)


def classify_sahlqvist(phi: Formula, max_level: int | None = None) -> SahlqvistDerivation | Rejection:
    """Recognize !p.(Sahl_n(p) -> POS(p)); the derivation's level is the least such n."""
    pvars, body = _peel_foralls(phi)
    if not isinstance(body, Implies):
        return Rejection(phi, NOT_PI_SHAPE)
    if len(set(pvars)) != len(pvars):
        dup = next(p for p in pvars if pvars.count(p) > 1)
        return Rejection(phi, REBOUND_VARIABLE.format(dup))
    unbound = sorted(free_symbols(body)[0] - set(pvars))
    if unbound:
        return Rejection(phi, UNBOUND_VARIABLE.format(unbound[0]))
    ant = classify_sahl(body.left, pvars, max_level)
    if isinstance(ant, Rejection):
        return ant
    cons = classify_pos(body.right, pvars)
    if isinstance(cons, Rejection):
        return cons
    return SahlqvistDerivation(phi, pvars, ant, cons)


# ---------------------------------------------------------------- verification


def verify_derivation(phi: Formula, d: SahlqvistDerivation) -> bool:
    """Independent check that `d` is a well-formed derivation of `phi`."""
    try:
        if d.formula != phi:
            return False
        rebuilt = _check_pos(d.consequent, set(d.pvars))
        ant = _check_sahl(d.antecedent, set(d.pvars), set(d.pvars))
        body = Implies(ant, rebuilt)
        for p in reversed(d.pvars):
            body = ForallProp(p, body)
        return body == phi
    except _Invalid:
        return False


class _Invalid(Exception):
    pass


def _need(cond: bool):
    if not cond:
        raise _Invalid


def _check_pos(node: PosNode, vars: set) -> Formula:
    _need(isinstance(node, PosNode))

    def walk(f):
        match f:
            case PropVar(name):
                _need(name in vars)
            case Bottom() | Top():
                pass
            case And(a, b) | Or(a, b):
                walk(a)
                walk(b)
            case Box(a) | Dia(a):
                walk(a)
            case _:
                raise _Invalid

    walk(node.formula)
    return node.formula


def _check_sahl(node, vars: set, bound: set) -> Formula:
    match node:
        case BoxedAtom(_, n, var):
            _need(var in vars and n >= 0)
            out = PropVar(var)
            for _ in range(n):
                out = Box(out)
        case SBot():
            out = Bottom()
        case STop():
            out = Top()
        case NegPos(_, pos):
            out = Not(_check_pos(pos, vars))
        case SConj(_, left, right):
            out = And(_check_sahl(left, vars, bound), _check_sahl(right, vars, bound))
        case SDia(_, child):
            out = Dia(_check_sahl(child, vars, bound))
        case Quantified(_, qvars, ant, pia):
            _need(len(qvars) > 0 and len(set(qvars)) == len(qvars) and not set(qvars) & bound)
            inner = set(qvars)
            out = Implies(_check_sahl(ant, inner, bound | inner), _check_pia(pia, inner, vars))
            for q in reversed(qvars):
                out = ForallProp(q, out)
        case _:
            raise _Invalid
    _need(out == node.formula)
    return out


def _check_pia(node, q_vars: set, p_vars: set) -> Formula:
    match node:
        case PAtom(_, var):
            _need(var in p_vars)
            out = PropVar(var)
        case PBox(_, child):
            out = Box(_check_pia(child, q_vars, p_vars))
        case PConj(_, left, right):
            out = And(_check_pia(left, q_vars, p_vars), _check_pia(right, q_vars, p_vars))
        case OrPos(_, pos, child, pos_left):
            a = _check_pos(pos, q_vars)
            b = _check_pia(child, q_vars, p_vars)
            out = Or(a, b) if pos_left else Or(b, a)
        case _:
            raise _Invalid
    _need(out == node.formula)
    return out


# ---------------------------------------------------------------- outline


def outline(d) -> list[str]:
    """Indented text rendering of a derivation, one node per line."""
    from .syntax import print_formula

    lines: list[str] = []

    def emit(depth, text, f):
        lines.append(f"{'  ' * depth}{text}: {print_formula(f)}")

    def walk(node, depth):
        match node:
            case SahlqvistDerivation(_, pvars, ant, cons):
                lines.append(f"Pi_{node.level}-Sahlqvist over {{{', '.join(pvars)}}}")
                walk(ant, depth + 1)
                emit(depth + 1, "consequent POS", cons.formula)
            case BoxedAtom(f, n, var):
                emit(depth, f"boxed atom []^{n} {var}", f)
            case SBot(f):
                emit(depth, "bottom", f)
            case STop(f):
                emit(depth, "top", f)
            case NegPos(f, _):
                emit(depth, "negated POS", f)
            case SConj(f, a, b) | PConj(f, a, b):
                emit(depth, "conjunction", f)
                walk(a, depth + 1)
                walk(b, depth + 1)
            case SDia(f, c):
                emit(depth, "diamond", f)
                walk(c, depth + 1)
            case Quantified(f, qvars, ant, pia):
                emit(depth, f"universal over {{{', '.join(qvars)}}} (level {node.level})", f)
                walk(ant, depth + 1)
                walk(pia, depth + 1)
            case PAtom(f, var):
                emit(depth, "PIA atom", f)
            case PBox(f, c):
                emit(depth, "PIA box", f)
                walk(c, depth + 1)
            case OrPos(f, pos, c, _):
                emit(depth, "PIA disjunction", f)
                emit(depth + 1, "POS disjunct", pos.formula)
                walk(c, depth + 1)

    walk(d, 0)
    return lines
