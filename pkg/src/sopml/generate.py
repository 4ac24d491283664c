"""Seeded random generators for formulas, complex inequalities, FO sentences,
Pi_n-Sahlqvist formulas of a known level, and applicable rule instances."""

from __future__ import annotations

import random

from . import fo
from .alba import Rule
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
    children,
    forall_props,
    free_symbols,
)

MODAL = (Box, Dia, BackBox, BackDia)


def modal_depth(phi: Formula) -> int:
    own = 1 if isinstance(phi, (Box, Dia, BackBox, BackDia, L)) else 0
    return own + max((modal_depth(c) for c in children(phi)), default=0)


# ---------------------------------------------------------------- general formulas


def random_formula(
    rng: random.Random,
    depth: int = 4,
    props=("p", "q"),
    noms=("i", "j"),
    prop_quants: int = 2,
    nom_quants: bool = True,
    use_l: bool = True,
) -> Formula:
    """Any constructor of the expanded language, at most `prop_quants` propositional quantifiers."""
    budget = [prop_quants]

    def atom():
        pool = [PropVar(p) for p in props] + [Nominal(i) for i in noms] + [Top(), Bottom()]
        return rng.choice(pool)

    def go(d):
        if d <= 0 or rng.random() < 0.2:
            return atom()
        r = rng.random()
        if r < 0.30:
            return rng.choice((Not, Box, Dia, BackBox, BackDia))(go(d - 1))
        if r < 0.65:
            return rng.choice((And, Or, Implies))(go(d - 1), go(d - 1))
        if r < 0.72 and use_l:
            return L(go(d - 1), go(d - 1))
        if r < 0.86 and budget[0] > 0 and props:
            budget[0] -= 1
            return rng.choice((ForallProp, ExistsProp))(rng.choice(props), go(d - 1))
        if nom_quants and noms:
            return rng.choice((ForallNom, ExistsNom))(rng.choice(noms), go(d - 1))
        return atom()

    return go(depth)


def random_comp(rng: random.Random, depth: int = 3, props=("p", "q"), noms=("i", "j"), **kw) -> Comp:
    def go(d):
        if d <= 0 or rng.random() < 0.3:
            return Ineq(
                random_formula(rng, 2, props, noms, **kw), random_formula(rng, 2, props, noms, **kw)
            )
        r = rng.random()
        if r < 0.3:
            n = rng.choice((0, 2, 2, 3))
            return MetaAnd(tuple(go(d - 1) for _ in range(n)))
        if r < 0.55:
            return MetaImplies(go(d - 1), go(d - 1))
        if r < 0.8 and noms:
            return rng.choice((CForallNom, CExistsNom))(rng.choice(noms), go(d - 1))
        if props:
            return rng.choice((CForallProp, CExistsProp))(rng.choice(props), go(d - 1))
        return go(d - 1)

    return go(depth)


def random_fo(rng: random.Random, depth: int = 4, inds=("x", "y", "i"), preds=("P", "Q")) -> fo.FOFormula:
    def atom():
        r = rng.random()
        if r < 0.35:
            return fo.RelAtom(rng.choice(inds), rng.choice(inds))
        if r < 0.55:
            return fo.Eq(rng.choice(inds), rng.choice(inds))
        if r < 0.85:
            return fo.PredAtom(rng.choice(preds), rng.choice(inds))
        return rng.choice((fo.Verum(), fo.Falsum()))

    def go(d):
        if d <= 0 or rng.random() < 0.2:
            return atom()
        r = rng.random()
        if r < 0.15:
            return fo.Not(go(d - 1))
        if r < 0.55:
            return rng.choice((fo.And, fo.Or, fo.Implies))(go(d - 1), go(d - 1))
        if r < 0.85:
            return rng.choice((fo.ForallInd, fo.ExistsInd))(rng.choice(inds), go(d - 1))
        return rng.choice((fo.ForallPred, fo.ExistsPred))(rng.choice(preds), go(d - 1))

    return go(depth)


# ---------------------------------------------------------------- Sahlqvist formulas


_LETTERS = "pqrstu"


def _bunch(rng, nest: int, max_vars: int) -> tuple[str, ...]:
    return tuple(f"{_LETTERS[nest]}{k}" for k in range(1, rng.randint(1, max_vars) + 1))


def _pos(rng, vars, budget) -> Formula:
    r = rng.random()
    if budget <= 0 or r < 0.4:
        return PropVar(rng.choice(vars)) if rng.random() < 0.93 else rng.choice((Top(), Bottom()))
    if r < 0.65:
        return rng.choice((And, Or))(_pos(rng, vars, budget - 1), _pos(rng, vars, budget - 1))
    return rng.choice((Box, Dia))(_pos(rng, vars, budget - 1))


def _sahl1(rng, vars, budget) -> Formula:
    r = rng.random()
    if budget <= 0 or r < 0.35:
        out = PropVar(rng.choice(vars))
        for _ in range(rng.randint(0, min(2, max(budget, 0)))):
            out = Box(out)
        return out
    if r < 0.5:
        return Not(_pos(rng, vars, budget - 1))
    if r < 0.55:
        return rng.choice((Top(), Bottom()))
    if r < 0.78:
        return And(_sahl1(rng, vars, budget - 1), _sahl1(rng, vars, budget - 1))
    return Dia(_sahl1(rng, vars, budget - 1))


def _pia(rng, qvars, pvars, budget) -> Formula:
    r = rng.random()
    if budget <= 0 or r < 0.35:
        return PropVar(rng.choice(pvars))
    if r < 0.55:
        return Box(_pia(rng, qvars, pvars, budget - 1))
    if r < 0.7:
        return And(_pia(rng, qvars, pvars, budget - 1), _pia(rng, qvars, pvars, budget - 1))
    pos = _pos(rng, qvars, budget - 1)
    child = _pia(rng, qvars, pvars, budget - 1)
    return Or(pos, child) if rng.random() < 0.5 else Or(child, pos)


def _sahl(rng, level, vars, nest, budget, max_vars) -> Formula:
    if level == 1:
        return _sahl1(rng, vars, budget)
    r = rng.random()
    if budget <= 1 or r < 0.5:
        return _quantified(rng, level, vars, nest, budget, max_vars)
    if r < 0.8:
        a = _quantified(rng, level, vars, nest, budget - 1, max_vars)
        b = _sahl(rng, rng.randint(1, level), vars, nest, budget - 1, max_vars)
        return And(a, b) if rng.random() < 0.5 else And(b, a)
    return Dia(_sahl(rng, level, vars, nest, budget - 1, max_vars))


def _quantified(rng, level, vars, nest, budget, max_vars) -> Formula:
    qvars = _bunch(rng, nest + 1, max_vars)
    ant = _sahl(rng, level - 1, qvars, nest + 1, budget, max_vars)
    pia = _pia(rng, qvars, vars, budget)
    return forall_props(qvars, Implies(ant, pia))


def random_sahlqvist(
    rng: random.Random, level: int, max_vars: int = 3, max_depth: int = 4
) -> Formula:
    """A Pi_n-Sahlqvist formula whose antecedent has exactly the given level."""
    if not 1 <= level < len(_LETTERS):
        raise ValueError("level out of range")
    while True:
        pvars = _bunch(rng, 0, max_vars)
        ant = _sahl(rng, level, pvars, 0, max_depth - 1, max_vars)
        cons = _pos(rng, pvars, 2)
        phi = forall_props(pvars, Implies(ant, cons))
        if modal_depth(phi) <= max_depth:
            return phi


# ---------------------------------------------------------------- rule instances


def _pure(rng, depth, noms=("i", "j")) -> Formula:
    return random_formula(rng, depth, props=(), noms=noms, prop_quants=0, nom_quants=False)


def _small(rng, depth=2, props=("p",), noms=("i", "j")) -> Formula:
    return random_formula(rng, depth, props=props, noms=noms, prop_quants=0, nom_quants=False)


def _monotone(rng, depth, var, positive: bool, others=("p",), noms=("i",)) -> Formula:
    """Formula in which `var` occurs with the given polarity only (and `others` freely)."""
    if depth <= 0 or rng.random() < 0.3:
        pool = [Nominal(n) for n in noms] + [PropVar(o) for o in others] + [Top(), Bottom()]
        if positive:
            pool += [PropVar(var)] * 3
        return rng.choice(pool)
    r = rng.random()
    if r < 0.2:
        return Not(_monotone(rng, depth - 1, var, not positive, others, noms))
    if r < 0.5:
        return rng.choice((And, Or))(
            _monotone(rng, depth - 1, var, positive, others, noms),
            _monotone(rng, depth - 1, var, positive, others, noms),
        )
    if r < 0.6:
        return Implies(
            _monotone(rng, depth - 1, var, not positive, others, noms),
            _monotone(rng, depth - 1, var, positive, others, noms),
        )
    return rng.choice(MODAL)(_monotone(rng, depth - 1, var, positive, others, noms))


def _ineq(rng, props=("p",), noms=("i", "j")) -> Ineq:
    return Ineq(_small(rng, 2, props, noms), _small(rng, 2, props, noms))


def _local_pool():
    from .pi2 import _local_correspondent, non_xi_rule
    from .syntax import parse_formula

    out = []
    for text in ("p -> <>p", "[]p -> [][]p", "p -> []<>p", "[]p -> p", "<>p -> []p", "p & []p -> <>p"):
        xi = parse_formula(text)
        found = _local_correspondent(non_xi_rule(xi))
        if found is not None:
            out.append((xi, *found))
    return out


_LOCALS: list | None = None


def rule_instance(rng: random.Random, rule: Rule) -> tuple[Comp, dict]:
    """A random complex inequality to which `rule` applies at the root, with its arguments."""
    i, j = Nominal("i"), Nominal("j")
    s = lambda d=2: _small(rng, d)  # noqa: E731
    match rule:
        case Rule.COMM:
            n = rng.randint(2, 3)
            return MetaAnd(tuple(_ineq(rng) for _ in range(n))), {"index": rng.randrange(n - 1)}
        case Rule.ASSOC:
            inner = MetaAnd(tuple(_ineq(rng) for _ in range(rng.choice((0, 2, 2)))))
            cs = [_ineq(rng) for _ in range(rng.randint(1, 2))]
            k = rng.randint(0, len(cs))
            cs.insert(k, inner)
            return MetaAnd(tuple(cs)), {"index": k}
        case Rule.SPL_NOM:
            return Ineq(i, And(s(), s())), {}
        case Rule.SEP_NOM:
            return Ineq(i, Implies(s(), s())), {}
        case Rule.QUANT_NOM:
            return Ineq(i, ForallProp("q", _small(rng, 3, ("p", "q")))), {}
        case Rule.APPROX_NOM:
            return Ineq(i, Dia(s())), {}
        case Rule.RES_BOX:
            return Ineq(s(), Box(s())), {}
        case Rule.RES_OR:
            return Ineq(s(), Or(s(), s())), {"side": rng.choice(("left", "right"))}
        case Rule.SPLITTING:
            return Ineq(s(), And(s(), s())), {}
        case Rule.SCOPE_AND:
            ex = CExistsNom("k", MetaAnd((Ineq(Nominal("k"), s()), _ineq(rng, noms=("i", "k")))))
            cs = [_ineq(rng) for _ in range(rng.randint(1, 2))]
            k = rng.randint(0, len(cs))
            cs.insert(k, ex)
            return MetaAnd(tuple(cs)), {"index": k}
        case Rule.SCOPE_IMP:
            ex = CExistsNom("k", _ineq(rng, noms=("i", "k")))
            return MetaImplies(ex, _ineq(rng)), {}
        case Rule.EX_PQ:
            return CForallProp("p", CForallProp("q", _ineq(rng, ("p", "q")))), {}
        case Rule.EX_PI:
            return CForallNom("k", CForallProp("q", _ineq(rng, ("p", "q"), ("i", "k")))), {}
        case Rule.EX_IP:
            return CForallProp("q", CForallNom("k", _ineq(rng, ("p", "q"), ("i", "k")))), {}
        case Rule.EX_JI:
            return CForallNom("k", CForallNom("j", _ineq(rng, ("p",), ("j", "k")))), {}
        case Rule.SPL_QUANT_P | Rule.SPL_QUANT_I:
            binder, name, props, noms = (
                (CForallProp, "q", ("p", "q"), ("i",))
                if rule is Rule.SPL_QUANT_P
                else (CForallNom, "k", ("p",), ("i", "k"))
            )
            cs = MetaAnd(tuple(_ineq(rng, props, noms) for _ in range(rng.randint(2, 3))))
            body = MetaImplies(_ineq(rng, props, noms), cs) if rng.random() < 0.7 else cs
            return binder(name, body), {}
        case Rule.ACKERMANN:
            lower = [Ineq(_pure(rng, 2), PropVar("q")) for _ in range(rng.randint(0, 2))]
            others = [
                Ineq(_monotone(rng, 2, "q", True), _monotone(rng, 2, "q", False))
                for _ in range(rng.randint(0, 2))
            ]
            ants = lower + others
            rng.shuffle(ants)
            cons = [
                Ineq(_monotone(rng, 2, "q", False), _monotone(rng, 2, "q", True))
                for _ in range(rng.choice((1, 1, 2)))
            ]
            c = cons[0] if len(cons) == 1 else MetaAnd(tuple(cons))
            body = c if not ants else MetaImplies(ants[0] if len(ants) == 1 else MetaAnd(tuple(ants)), c)
            return CForallProp("q", body), {}
        case Rule.PACKING:
            ants = [_ineq(rng, noms=("i", "k")) for _ in range(rng.randint(0, 2))]
            target = Ineq(_small(rng, 2, noms=("i", "k")), _small(rng, 2, noms=("i",)))
            form = rng.random()
            if form < 0.2:
                return MetaImplies(ants[0] if len(ants) == 1 else MetaAnd(tuple(ants)), target), {}
            if form < 0.4 or not ants:
                return CForallNom("k", target), {}
            ant = ants[0] if len(ants) == 1 else MetaAnd(tuple(ants))
            return CForallNom("k", MetaImplies(ant, target)), {}
        case Rule.TOP_ELIM:
            return Ineq(s(), Top()), {}
        case Rule.BOT_NEG:
            return Ineq(s(), Bottom()), {}
        case Rule.SPL_IMP:
            return MetaImplies(_ineq(rng), MetaAnd((_ineq(rng), _ineq(rng)))), {}
        case Rule.FIRST_APPROX:
            return _ineq(rng), {"fresh": "k"}
        case Rule.L_NOM:
            return Ineq(i, L(s(), s())), {}
        case Rule.VAC_NOM:
            return rng.choice((CForallNom, CExistsNom))("k", _ineq(rng)), {}
        case Rule.NEG_IMP:
            return Ineq(s(), Not(Implies(s(), s()))), {}
        case Rule.SCOPE_IMP_R:
            return MetaImplies(_ineq(rng), CForallNom("k", _ineq(rng, noms=("i", "k")))), {}
        case Rule.IMPORT:
            return MetaImplies(_ineq(rng), MetaImplies(_ineq(rng), _ineq(rng))), {}
        case Rule.LOCAL:
            global _LOCALS
            if _LOCALS is None:
                _LOCALS = _local_pool()
            xi, local, base = rng.choice(_LOCALS)
            names = sorted(free_symbols(xi)[0])
            body = MetaImplies(Ineq(j, Not(xi)), Ineq(j, _small(rng, 2, props=("s",))))
            return forall_props_c(names, body), {"xi": xi, "local": local, "base": base}
    raise ValueError(f"no generator for {rule}")


def forall_props_c(names, body: Comp) -> Comp:
    for n in reversed(tuple(names)):
        body = CForallProp(n, body)
    return body
