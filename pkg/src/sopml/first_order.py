"""Standard translation into first-order logic, and a finite-frame FO evaluator."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable

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
    nominal_names,
)
from .semantics import KripkeFrame, enumerate_frames, frame_valid


def predicate_name(p: str) -> str:
    return p[0].upper() + p[1:]


class _Translator:
    def __init__(self, reserved: Iterable[str]):
        self.reserved = set(reserved)
        self.counter = itertools.count()

    def var(self) -> str:
        while True:
            name = f"x{next(self.counter)}"
            if name not in self.reserved:
                return name

    def st(self, phi: Formula, x: str) -> fo.FOFormula:
        match phi:
            case PropVar(p):
                return fo.PredAtom(predicate_name(p), x)
            case Nominal(i):
                return fo.Eq(x, i)
            case Top():
                return fo.Verum()
            case Bottom():
                return fo.Falsum()
            case Not(a):
                return fo.Not(self.st(a, x))
            case And(a, b):
                return fo.And(self.st(a, x), self.st(b, x))
            case Or(a, b):
                return fo.Or(self.st(a, x), self.st(b, x))
            case Implies(a, b):
                return fo.Implies(self.st(a, x), self.st(b, x))
            case Box(a):
                y = self.var()
                return fo.ForallInd(y, fo.Implies(fo.RelAtom(x, y), self.st(a, y)))
            case Dia(a):
                y = self.var()
                return fo.ExistsInd(y, fo.And(fo.RelAtom(x, y), self.st(a, y)))
            case BackBox(a):
                y = self.var()
                return fo.ForallInd(y, fo.Implies(fo.RelAtom(y, x), self.st(a, y)))
            case BackDia(a):
                y = self.var()
                return fo.ExistsInd(y, fo.And(fo.RelAtom(y, x), self.st(a, y)))
            case ForallProp(p, a):
                return fo.ForallPred(predicate_name(p), self.st(a, x))
            case ExistsProp(p, a):
                return fo.ExistsPred(predicate_name(p), self.st(a, x))
            case ForallNom(i, a):
                return fo.ForallInd(i, self.st(a, x))
            case ExistsNom(i, a):
                return fo.ExistsInd(i, self.st(a, x))
            case L(a, b):
                y = self.var()
                return fo.ForallInd(y, fo.Implies(self.st(a, y), self.st(b, y)))
        raise TypeError(f"not a formula: {phi!r}")

    def st_comp(self, c: Comp) -> fo.FOFormula:
        match c:
            case Ineq(a, b):
                x = self.var()
                return fo.ForallInd(x, fo.Implies(self.st(a, x), self.st(b, x)))
            case MetaAnd(()):
                return fo.Verum()
            case MetaAnd(cs):
                out = self.st_comp(cs[0])
                for d in cs[1:]:
                    out = fo.And(out, self.st_comp(d))
                return out
            case MetaImplies(a, b):
                return fo.Implies(self.st_comp(a), self.st_comp(b))
            case CForallProp(p, b):
                return fo.ForallPred(predicate_name(p), self.st_comp(b))
            case CExistsProp(p, b):
                return fo.ExistsPred(predicate_name(p), self.st_comp(b))
            case CForallNom(i, b):
                return fo.ForallInd(i, self.st_comp(b))
            case CExistsNom(i, b):
                return fo.ExistsInd(i, self.st_comp(b))
        raise TypeError(f"not a complex inequality: {c!r}")


def st_formula(phi: Formula, x: str = "x") -> fo.FOFormula:
    """ST_x(phi): nominals become individual variables, propositional variables predicates."""
    noms = nominal_names(phi)
    if x in noms:
        raise ValueError(f"the translation variable {x} clashes with a nominal name")
    return _Translator(noms | {x}).st(phi, x)


def st_complex(c: Comp) -> fo.FOFormula:
    return _Translator(nominal_names(c)).st_comp(c)


# ---------------------------------------------------------------- evaluation


class UnassignedVariableError(LookupError):
    pass


class _FOEvaluator:
    def __init__(self, frame: KripkeFrame):
        self.n = frame.size
        self.full = frame.full
        self.succ = frame.succ
        self._free: dict[int, tuple] = {}
        self._memo: dict = {}

    def ev(self, phi, ind: dict, preds: dict) -> bool:
        match phi:
            case fo.RelAtom(x, y):
                return bool(self.succ[self._ind(ind, x)] >> self._ind(ind, y) & 1)
            case fo.Eq(x, y):
                return self._ind(ind, x) == self._ind(ind, y)
            case fo.PredAtom(p, x):
                if p not in preds:
                    raise UnassignedVariableError(f"no value for predicate {p}")
                return bool(preds[p] >> self._ind(ind, x) & 1)
            case fo.Verum():
                return True
            case fo.Falsum():
                return False
            case fo.Not(a):
                return not self.ev(a, ind, preds)
            case fo.And(a, b):
                return self.ev(a, ind, preds) and self.ev(b, ind, preds)
            case fo.Or(a, b):
                return self.ev(a, ind, preds) or self.ev(b, ind, preds)
            case fo.Implies(a, b):
                return not self.ev(a, ind, preds) or self.ev(b, ind, preds)
        entry = self._free.get(id(phi))
        if entry is None:
            fi, fp = fo.fo_free(phi)
            entry = (phi, tuple(sorted(fi)), tuple(sorted(fp)))
            self._free[id(phi)] = entry
        _, fi, fp = entry
        key = (id(phi), tuple(self._ind(ind, v) for v in fi), tuple(self._pred(preds, p) for p in fp))
        hit = self._memo.get(key)
        if hit is None:
            hit = self._quant(phi, ind, preds)
            self._memo[key] = hit
        return hit

    def _ind(self, ind, v):
        try:
            return ind[v]
        except KeyError:
            raise UnassignedVariableError(f"no value for individual variable {v}") from None

    def _pred(self, preds, p):
        try:
            return preds[p]
        except KeyError:
            raise UnassignedVariableError(f"no value for predicate {p}") from None

    def _quant(self, phi, ind, preds) -> bool:
        match phi:
            case fo.ForallInd(v, b):
                return all(self.ev(b, {**ind, v: w}, preds) for w in range(self.n))
            case fo.ExistsInd(v, b):
                return any(self.ev(b, {**ind, v: w}, preds) for w in range(self.n))
            case fo.ForallPred(v, b):
                return all(self.ev(b, ind, {**preds, v: s}) for s in range(self.full + 1))
            case fo.ExistsPred(v, b):
                return any(self.ev(b, ind, {**preds, v: s}) for s in range(self.full + 1))
        raise TypeError(f"not a first-order formula: {phi!r}")


def fo_eval(f: KripkeFrame, phi: fo.FOFormula, env: dict | None = None) -> bool:
    """Truth of `phi` on `f`; `env` maps individual variables to worlds and
    predicate variables to world sets."""
    ind, preds = {}, {}
    for k, v in (env or {}).items():
        if k[0].isupper():
            preds[k] = f.mask(v)
        else:
            if v not in f.index:
                raise ValueError(f"unknown world {v!r}")
            ind[k] = f.index[v]
    return _FOEvaluator(f).ev(phi, ind, preds)


# ---------------------------------------------------------------- correspondence


@dataclass(frozen=True)
class EquivResult:
    equivalent: bool
    witness: KripkeFrame | None
    frames_checked: int

    def __bool__(self) -> bool:
        return self.equivalent


def equiv_on_frames(a: fo.FOFormula, b: fo.FOFormula, max_size: int = 3) -> EquivResult:
    """Compare two sentences on every frame up to `max_size` worlds."""
    count = 0
    for f in enumerate_frames(max_size):
        count += 1
        if fo_eval(f, a) != fo_eval(f, b):
            return EquivResult(False, f, count)
    return EquivResult(True, None, count)


def verify_correspondence(phi: Formula, sentence: fo.FOFormula, frames) -> EquivResult:
    """Check frame validity of `phi` against truth of `sentence` on the given frames."""
    count = 0
    for f in frames:
        count += 1
        if frame_valid(f, phi) != fo_eval(f, sentence):
            return EquivResult(False, f, count)
    return EquivResult(True, None, count)


def correspond(phi: Formula) -> fo.FOFormula:
    """First-order frame correspondent of a Pi_n-Sahlqvist formula."""
    from .alba import run

    return st_complex(run(phi).output)
