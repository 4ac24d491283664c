"""Concrete text syntax for formulas, complex inequalities and FO sentences.

Formulas::

    atom   := ident | @ident | true | false
    unary  := ~u | []u | <>u | [^]u | <^>u | !b. u | ?b. u | l(f, f) | (f) | atom
    f      := unary (& unary)* (| ...)* (-> f)?        precedence & > | > ->

Complex inequalities use ``<=``, ``&&``, ``=>`` and the same binders.
FO sentences use ``forall x.``, ``exists P.``, ``R(x,y)``, ``P(x)``, ``x = y``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path as FsPath

from . import fo
from .formula import (
    And,
    BackBox,
    BackDia,
    Bottom,
    Box,
    CExistsNom,
    CExistsProp,
    CForallNom,
    CForallProp,
    Comp,
    Dia,
    ExistsNom,
    ExistsProp,
    ForallNom,
    ForallProp,
    Formula,
    Implies,
    Ineq,
    L,
    MetaAnd,
    MetaImplies,
    Nominal,
    Not,
    Or,
    PropVar,
    Top,
)
from .semantics import KripkeFrame


class ParseError(ValueError):
    def __init__(self, position: int, expected: str, found: str):
        self.position = position
        self.expected = expected
        self.found = found
        super().__init__(f"at offset {position}: expected {expected}, found {found}")


@dataclass(frozen=True, slots=True)
class Token:
    kind: str  # "op", "ident", "end"
    text: str
    pos: int


_OPS = ["<^>", "[^]", "<=", "<>", "[]", "->", "=>", "&&", "&", "|", "~", "!", "?", ".", ",", "(", ")", "@", "="]
_TOKEN_RE = re.compile(
    r"\s*(?:(?P<ident>[A-Za-z][A-Za-z0-9_]*)|(?P<op>" + "|".join(re.escape(o) for o in _OPS) + r"))"
)


def tokenize(text: str) -> list[Token]:
    out = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            out.append(Token("end", "end of input", pos))
            return out
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(pos, "a token", repr(text[pos]))
        kind = "ident" if m.group("ident") else "op"
        tok = m.group(kind)
        out.append(Token(kind, tok, m.start(kind)))
        pos = m.end()


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        return self.tok.kind == "op" and self.tok.text == text

    def fail(self, expected: str):
        t = self.tok
        raise ParseError(t.pos, expected, repr(t.text) if t.kind != "end" else t.text)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(repr(text))
        t = self.tok
        self.i += 1
        return t

    def ident(self, what: str = "an identifier") -> str:
        if self.tok.kind != "ident":
            self.fail(what)
        t = self.tok
        self.i += 1
        return t.text

    def finish(self):
        if self.tok.kind != "end":
            self.fail("end of input")

    # -- modal formulas

    def formula(self) -> Formula:
        left = self.disjunction()
        if self.at("->"):
            self.i += 1
            return Implies(left, self.formula())
        return left

    def disjunction(self) -> Formula:
        out = self.conjunction()
        while self.at("|"):
            self.i += 1
            out = Or(out, self.conjunction())
        return out

    def conjunction(self) -> Formula:
        out = self.unary()
        while self.at("&"):
            self.i += 1
            out = And(out, self.unary())
        return out

    _PREFIX = {"~": Not, "[]": Box, "<>": Dia, "[^]": BackBox, "<^>": BackDia}

    def unary(self) -> Formula:
        t = self.tok
        if t.kind == "op":
            if t.text in self._PREFIX:
                self.i += 1
                return self._PREFIX[t.text](self.unary())
            if t.text in ("!", "?"):
                self.i += 1
                nominal, name = self.binder()
                self.expect(".")
                body = self.unary()
                if t.text == "!":
                    return ForallNom(name, body) if nominal else ForallProp(name, body)
                return ExistsNom(name, body) if nominal else ExistsProp(name, body)
            if t.text == "(":
                self.i += 1
                out = self.formula()
                self.expect(")")
                return out
            if t.text == "@":
                self.i += 1
                return Nominal(self.name("a nominal name"))
            self.fail("a formula")
        if t.kind == "ident":
            if t.text == "l" and self.peek().kind == "op" and self.peek().text == "(":
                self.i += 2
                a = self.formula()
                self.expect(",")
                b = self.formula()
                self.expect(")")
                return L(a, b)
            if t.text == "true":
                self.i += 1
                return Top()
            if t.text == "false":
                self.i += 1
                return Bottom()
            return PropVar(self.name("a formula"))
        self.fail("a formula")

    def binder(self) -> tuple[bool, str]:
        if self.at("@"):
            self.i += 1
            return True, self.name("a nominal name")
        return False, self.name("a variable name")

    def name(self, what: str) -> str:
        t = self.tok
        if t.kind != "ident" or not t.text[0].islower() or t.text in _RESERVED:
            self.fail(what)
        self.i += 1
        return t.text

    # -- complex inequalities

    def comp(self) -> Comp:
        left = self.comp_conjunction()
        if self.at("=>"):
            self.i += 1
            return MetaImplies(left, self.comp())
        return left

    def comp_conjunction(self) -> Comp:
        items = [self.comp_unary()]
        while self.at("&&"):
            self.i += 1
            items.append(self.comp_unary())
        return items[0] if len(items) == 1 else MetaAnd(tuple(items))

    def comp_unary(self) -> Comp:
        t = self.tok
        if t.kind == "op" and t.text in ("!", "?"):
            self.i += 1
            nominal, name = self.binder()
            self.expect(".")
            body = self.comp_unary()
            if t.text == "!":
                return CForallNom(name, body) if nominal else CForallProp(name, body)
            return CExistsNom(name, body) if nominal else CExistsProp(name, body)
        if self.at("("):
            if self.peek().text == "&&" and self.peek(2).text == ")":
                self.i += 3
                return MetaAnd(())
            start = self.i
            try:
                return self.inequality()
            except ParseError as err:
                first = err
                self.i = start
            self.i += 1
            try:
                inner = self.comp()
                self.expect(")")
            except ParseError as err:
                raise max(first, err, key=lambda e: e.position) from None
            return inner
        return self.inequality()

    def inequality(self) -> Ineq:
        lhs = self.formula()
        self.expect("<=")
        return Ineq(lhs, self.formula())

    # -- first-order sentences

    def fo(self) -> fo.FOFormula:
        left = self.fo_disjunction()
        if self.at("->"):
            self.i += 1
            return fo.Implies(left, self.fo())
        return left

    def fo_disjunction(self):
        out = self.fo_conjunction()
        while self.at("|"):
            self.i += 1
            out = fo.Or(out, self.fo_conjunction())
        return out

    def fo_conjunction(self):
        out = self.fo_unary()
        while self.at("&"):
            self.i += 1
            out = fo.And(out, self.fo_unary())
        return out

    def fo_unary(self) -> fo.FOFormula:
        t = self.tok
        if self.at("~"):
            self.i += 1
            return fo.Not(self.fo_unary())
        if self.at("("):
            self.i += 1
            out = self.fo()
            self.expect(")")
            return out
        if t.kind != "ident":
            self.fail("a first-order formula")
        if t.text in ("forall", "exists"):
            self.i += 1
            var = self.ident("a variable")
            self.expect(".")
            body = self.fo_unary()
            if var[0].isupper():
                cls = fo.ForallPred if t.text == "forall" else fo.ExistsPred
            else:
                cls = fo.ForallInd if t.text == "forall" else fo.ExistsInd
            return cls(var, body)
        if t.text == "true":
            self.i += 1
            return fo.Verum()
        if t.text == "false":
            self.i += 1
            return fo.Falsum()
        if t.text[0].isupper():
            self.i += 1
            self.expect("(")
            x = self.individual()
            if self.at(","):
                self.i += 1
                y = self.individual()
                self.expect(")")
                if t.text != "R":
                    raise ParseError(t.pos, "R for a binary atom", repr(t.text))
                return fo.RelAtom(x, y)
            self.expect(")")
            return fo.PredAtom(t.text, x)
        x = self.individual()
        self.expect("=")
        return fo.Eq(x, self.individual())

    def individual(self) -> str:
        t = self.tok
        if t.kind != "ident" or not t.text[0].islower() or t.text in _FO_KEYWORDS:
            self.fail("an individual variable")
        self.i += 1
        return t.text


_FO_KEYWORDS = {"forall", "exists", "true", "false"}
_RESERVED = _FO_KEYWORDS


def parse_formula(text: str) -> Formula:
    p = _Parser(text)
    out = p.formula()
    p.finish()
    return out


def parse_complex(text: str) -> Comp:
    p = _Parser(text)
    out = p.comp()
    p.finish()
    return out


def parse_fo(text: str) -> fo.FOFormula:
    p = _Parser(text)
    out = p.fo()
    p.finish()
    return out


# ---------------------------------------------------------------- printing

_IMP, _OR, _AND, _UNARY = range(4)
_PREFIX_TEXT = {Not: "~", Box: "[]", Dia: "<>", BackBox: "[^]", BackDia: "<^>"}
_BINDER_TEXT = {
    ForallProp: ("!", ""),
    ExistsProp: ("?", ""),
    ForallNom: ("!", "@"),
    ExistsNom: ("?", "@"),
    CForallProp: ("!", ""),
    CExistsProp: ("?", ""),
    CForallNom: ("!", "@"),
    CExistsNom: ("?", "@"),
}


def _wrap(text: str, level: int, needed: int) -> str:
    return f"({text})" if level < needed else text


def print_formula(phi: Formula) -> str:
    return _fmt(phi, _IMP)


def _fmt(phi: Formula, ctx: int) -> str:
    match phi:
        case PropVar(name):
            return name
        case Nominal(name):
            return "@" + name
        case Top():
            return "true"
        case Bottom():
            return "false"
        case L(a, b):
            return f"l({_fmt(a, _IMP)}, {_fmt(b, _IMP)})"
        case Implies(a, b):
            return _wrap(f"{_fmt(a, _OR)} -> {_fmt(b, _IMP)}", _IMP, ctx)
        case Or(a, b):
            return _wrap(f"{_fmt(a, _OR)} | {_fmt(b, _AND)}", _OR, ctx)
        case And(a, b):
            return _wrap(f"{_fmt(a, _AND)} & {_fmt(b, _UNARY)}", _AND, ctx)
        case ForallProp() | ExistsProp() | ForallNom() | ExistsNom():
            q, at = _BINDER_TEXT[type(phi)]
            return f"{q}{at}{phi.name}. {_fmt(phi.body, _UNARY)}"
    if type(phi) in _PREFIX_TEXT:
        return _PREFIX_TEXT[type(phi)] + _fmt(phi.arg, _UNARY)
    raise TypeError(f"not a formula: {phi!r}")


_CIMP, _CAND, _CUNARY = range(3)


def print_complex(c: Comp) -> str:
    return _cfmt(c, _CIMP)


def _cfmt(c: Comp, ctx: int) -> str:
    match c:
        case Ineq(a, b):
            lhs = print_formula(a)
            if lhs[0] in "!?":
                lhs = f"({lhs})"
            return f"{lhs} <= {print_formula(b)}"
        case MetaAnd(()):
            return "(&&)"
        case MetaAnd(cs):
            return _wrap(" && ".join(_cfmt(x, _CUNARY) for x in cs), _CAND, ctx)
        case MetaImplies(a, b):
            return _wrap(f"{_cfmt(a, _CAND)} => {_cfmt(b, _CIMP)}", _CIMP, ctx)
        case CForallProp() | CExistsProp() | CForallNom() | CExistsNom():
            q, at = _BINDER_TEXT[type(c)]
            return f"{q}{at}{c.name}. {_cfmt(c.body, _CUNARY)}"
    raise TypeError(f"not a complex inequality: {c!r}")


def print_fo(phi: fo.FOFormula) -> str:
    return _ffmt(phi, _IMP)


def _ffmt(phi: fo.FOFormula, ctx: int) -> str:
    match phi:
        case fo.RelAtom(x, y):
            return f"R({x},{y})"
        case fo.Eq(x, y):
            return f"{x} = {y}"
        case fo.PredAtom(p, x):
            return f"{p}({x})"
        case fo.Verum():
            return "true"
        case fo.Falsum():
            return "false"
        case fo.Not(a):
            return "~" + _ffmt(a, _UNARY)
        case fo.Implies(a, b):
            return _wrap(f"{_ffmt(a, _OR)} -> {_ffmt(b, _IMP)}", _IMP, ctx)
        case fo.Or(a, b):
            return _wrap(f"{_ffmt(a, _OR)} | {_ffmt(b, _AND)}", _OR, ctx)
        case fo.And(a, b):
            return _wrap(f"{_ffmt(a, _AND)} & {_ffmt(b, _UNARY)}", _AND, ctx)
        case fo.ForallInd(v, b) | fo.ForallPred(v, b):
            return f"forall {v}. {_ffmt(b, _UNARY)}"
        case fo.ExistsInd(v, b) | fo.ExistsPred(v, b):
            return f"exists {v}. {_ffmt(b, _UNARY)}"
    raise TypeError(f"not a first-order formula: {phi!r}")


# ---------------------------------------------------------------- frames


def frame_from_json(obj) -> KripkeFrame:
    """Build a frame from {"worlds": [...], "edges": [[a, b], ...]}."""
    if not isinstance(obj, dict) or "worlds" not in obj:
        raise ValueError('frame JSON must be an object with a "worlds" list')
    worlds = obj["worlds"]
    edges = obj.get("edges", [])
    if not isinstance(worlds, list) or not all(isinstance(w, str) for w in worlds):
        raise ValueError('"worlds" must be a list of strings')
    if not isinstance(edges, list) or not all(
        isinstance(e, list) and len(e) == 2 and all(isinstance(x, str) for x in e) for e in edges
    ):
        raise ValueError('"edges" must be a list of [source, target] string pairs')
    return KripkeFrame(tuple(worlds), frozenset(tuple(e) for e in edges))


def frame_to_json(frame: KripkeFrame) -> dict:
    order = {w: k for k, w in enumerate(frame.worlds)}
    edges = sorted(frame.relation, key=lambda e: (order[e[0]], order[e[1]]))
    return {"worlds": list(frame.worlds), "edges": [list(e) for e in edges]}


def load_frame(path: str | FsPath) -> KripkeFrame:
    return frame_from_json(json.loads(FsPath(path).read_text()))
