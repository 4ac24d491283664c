"""Pi_2-rules (Gabbay irreflexivity, non-xi rules, general rules) and their
first-order correspondents.

A rule  |- F(x, r) -> chi  =>  |- G(x) -> chi  becomes the SOPML formula

    !p. !q. ((!r. l(F, q)) -> l(G, q))

with the placeholders x read as the parameters p and the fresh variables r.
Its correspondent is computed by a dedicated driver over the same rewrite
rules, extended with steps for inequalities of the form i <= l(a, b).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import fo
from .alba import AlbaResult, Driver, Rule, RuleStep, run
from .first_order import st_complex
from .formula import (
    And,
    CForallNom,
    CForallProp,
    Comp,
    Dia,
    ForallProp,
    Formula,
    FreshSupply,
    Implies,
    Ineq,
    L,
    MetaImplies,
    Nominal,
    Not,
    Polarity,
    PropVar,
    Top,
    c_forall_props,
    forall_props,
    free_symbols,
    is_pure,
    polarity,
    prop_names,
)
from .fragment import Rejection, classify_pos, classify_sahl, classify_sahlqvist

KINDS = ("gabbay", "nonxi", "pi2")

PARAMS_AFTER_PACKING = (
    "parameters are eliminated after packing the fresh variables, not by substituting "
    "their minimal valuations inside the packed formula"
)
NO_LOCAL = "the formula has no single pure local correspondent; reduced through its negation instead"


class UnsupportedRule(ValueError):
    pass


@dataclass(frozen=True)
class Pi2Rule:
    kind: str
    F: Formula
    G: Formula
    params: tuple[str, ...]
    fresh: tuple[str, ...]
    xi: Formula | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown rule kind {self.kind!r}")
        if set(self.fresh) & free_symbols(self.G)[0]:
            raise ValueError("fresh variables must not occur in G")
        if set(self.fresh) & set(self.params):
            raise ValueError("fresh variables and parameters must be disjoint")


def gabbay_rule() -> Pi2Rule:
    p = PropVar("p")
    return Pi2Rule("gabbay", Not(Implies(p, Dia(p))), Top(), (), ("p",))


def non_xi_rule(xi: Formula) -> Pi2Rule:
    return Pi2Rule("nonxi", Not(xi), Top(), (), tuple(sorted(free_symbols(xi)[0])), xi)


def pi2_rule(F: Formula, G: Formula, fresh=None) -> Pi2Rule:
    fv, gv = free_symbols(F)[0], free_symbols(G)[0]
    fresh = tuple(sorted(fv - gv)) if fresh is None else tuple(fresh)
    params = tuple(sorted((fv | gv) - set(fresh)))
    return Pi2Rule("pi2", F, G, params, fresh)


def rule_from_json(obj) -> Pi2Rule:
    """{"kind": "gabbay" | "nonxi" | "pi2", "xi": text, "F": text, "G": text, "fresh": [names]}"""
    from .syntax import parse_formula

    if not isinstance(obj, dict):
        raise ValueError("a rule must be a JSON object")
    kind = obj.get("kind")
    if kind == "gabbay":
        return gabbay_rule()
    if kind == "nonxi":
        if not isinstance(obj.get("xi"), str):
            raise ValueError('a nonxi rule needs an "xi" formula')
        return non_xi_rule(parse_formula(obj["xi"]))
    if kind == "pi2":
        if not isinstance(obj.get("F"), str):
            raise ValueError('a pi2 rule needs an "F" formula')
        G = parse_formula(obj["G"]) if isinstance(obj.get("G"), str) else Top()
        fresh = obj.get("fresh")
        if fresh is not None and not (isinstance(fresh, list) and all(isinstance(x, str) for x in fresh)):
            raise ValueError('"fresh" must be a list of variable names')
        return pi2_rule(parse_formula(obj["F"]), G, fresh)
    raise ValueError(f"unknown rule kind {kind!r}")


def _target_name(r: Pi2Rule) -> str:
    used = prop_names(r.F) | prop_names(r.G) | set(r.params) | set(r.fresh)
    if "q" not in used:
        return "q"
    k = 1
    while f"q{k}" in used:
        k += 1
    return f"q{k}"


def rule_to_formula(r: Pi2Rule) -> Formula:
    """!p. !q. ((!r. l(F, q)) -> l(G, q))"""
    q = PropVar(_target_name(r))
    body = ForallProp(q.name, Implies(forall_props(r.fresh, L(r.F, q)), L(r.G, q)))
    return forall_props(r.params, body)


def rule_statement(r: Pi2Rule) -> Comp:
    """The rule's validity condition as a complex inequality: !p. !q. (!r. F <= q => G <= q)."""
    q = PropVar(_target_name(r))
    body = CForallProp(q.name, MetaImplies(c_forall_props(r.fresh, Ineq(r.F, q)), Ineq(r.G, q)))
    return c_forall_props(r.params, body)


# ---------------------------------------------------------------- reduction


@dataclass(frozen=True)
class RuleReduction:
    rule: Pi2Rule
    formula: Formula
    initial: Comp
    output: Comp
    trace: tuple[RuleStep, ...]
    route: str
    local: Formula | None = None
    departures: tuple[str, ...] = field(default=())


def _local_correspondent(r: Pi2Rule) -> tuple[Formula, str] | None:
    """Pure Local with i0 <= xi equivalent to i0 <= Local, if the engine yields one."""
    if r.xi is None or not isinstance(r.xi, Implies):
        return None
    d = classify_sahlqvist(forall_props(r.fresh, r.xi))
    if isinstance(d, Rejection):
        return None
    res: AlbaResult = run(d)
    out = res.output
    if (
        isinstance(out, CForallNom)
        and isinstance(out.body, Ineq)
        and out.body.lhs == Nominal(out.name)
        and is_pure(out.body.rhs)
    ):
        return out.body.rhs, out.name
    return None


def _antecedent_formula(F: Formula) -> Formula:
    if isinstance(F, Not) and isinstance(F.arg, Implies):
        return And(F.arg.left, Not(F.arg.right))
    return F


def _check_supported(r: Pi2Rule):
    F = _antecedent_formula(r.F)
    dF = classify_sahl(F, set(r.params) | set(r.fresh))
    if isinstance(dF, Rejection):
        raise UnsupportedRule(f"F is not a Sahlqvist antecedent: {dF.reason}")
    for p in r.params:
        if polarity(F, p) not in (Polarity.POSITIVE, Polarity.ABSENT):
            raise UnsupportedRule(f"parameter {p} must occur only positively in F")
    dG = None
    if r.G != Top():
        pos = classify_pos(r.G, r.params)
        if isinstance(pos, Rejection):
            raise UnsupportedRule(f"G is not a positive formula: {pos.reason}")
        dG = classify_sahl(r.G, r.params)
        if isinstance(dG, Rejection):
            raise UnsupportedRule(f"G is not a Sahlqvist antecedent: {dG.reason}")
    return dF, dG


def reduce_rule(r: Pi2Rule) -> RuleReduction:
    """Reduce the rule's SOPML formula to a pure complex inequality."""
    local = _local_correspondent(r) if r.kind == "nonxi" else None
    dF, dG = (None, None) if local else _check_supported(r)
    departures = []
    if r.kind == "nonxi" and not local:
        departures.append(NO_LOCAL)
    if r.params:
        departures.append(PARAMS_AFTER_PACKING)

    phi = rule_to_formula(r)
    q = _target_name(r)
    P, R = len(r.params), len(r.fresh)
    supply = FreshSupply(["i0"])
    i0 = "i0"
    A = forall_props(r.fresh, L(r.F, PropVar(q)))
    initial = c_forall_props(
        r.params + (q,),
        CForallNom(i0, MetaImplies(Ineq(Nominal(i0), A), Ineq(Nominal(i0), L(r.G, PropVar(q))))),
    )
    drv = Driver(initial, supply)
    top = (0,) * (P + 1)
    imp = top + (0,)
    for t in range(R):
        drv.apply(Rule.QUANT_NOM, imp + (0,) + (0,) * t)
    drv.apply(Rule.L_NOM, imp + (0,) + (0,) * R)
    drv.apply(Rule.L_NOM, imp + (1,))
    drv.apply(Rule.VAC_NOM, top)
    M = top
    ant_at = M + (0,) + (0,) * R

    drv.apply(Rule.FIRST_APPROX, ant_at)
    if local:
        formula, base = local
        drv.hoist(M + (0,), R + 1)
        drv.apply(Rule.LOCAL, M + (0, 0), xi=r.xi, local=formula, base=base)
        drv.apply(Rule.PACKING, M + (0,))
    else:
        j = drv.at(ant_at).name
        ineq = ant_at + (0, 0)
        if isinstance(drv.at(ineq).rhs, Not):
            drv.apply(Rule.NEG_IMP, ineq)
        drv.antecedent(j, dF, ineq)
        drv.group(ineq)
        s = drv.scope_out(ant_at + (0,))
        drv.hoist(M + (0,), R + 1 + s)
        for t in reversed(range(R)):
            drv.apply(Rule.ACKERMANN, M + (0,) + (0,) * (1 + s + t))
        drv.pack(M + (0,), 1 + s)

    n_noms = 0
    if dG is not None:
        drv.apply(Rule.FIRST_APPROX, M + (1,))
        k = drv.at(M + (1,)).name
        drv.apply(Rule.SCOPE_IMP_R, M)
        drv.apply(Rule.IMPORT, M + (0,))
        drv.antecedent(k, dG, M + (0, 0, 1))
        drv.merge(M + (0, 0))
        drv.group(M + (0, 0))
        n_noms = 1 + drv.scope_out(M + (0,))

    order = {q: 1, **{p: 2 + n for n, p in enumerate(r.params)}}
    drv.hoist((), P + 1 + n_noms, key=lambda c: 0 if isinstance(c, CForallNom) else order[c.name])
    for t in reversed(range(P)):
        drv.apply(Rule.ACKERMANN, (0,) * (n_noms + 1 + t))
    drv.apply(Rule.ACKERMANN, (0,) * n_noms)
    if not is_pure(drv.state):
        raise AssertionError("rule reduction finished with propositional variables left")
    return RuleReduction(
        r,
        phi,
        initial,
        drv.state,
        tuple(drv.trace),
        "local" if local else "generic",
        local[0] if local else None,
        tuple(departures),
    )


def rule_correspondent(r: Pi2Rule) -> fo.FOFormula:
    return st_complex(reduce_rule(r).output)
