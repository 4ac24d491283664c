"""Rewrite rules on complex inequalities and the derivation-directed driver.

`apply_rule` rewrites the subterm at a path (locus) and checks the rule's
premise shape and side conditions. The `Driver` walks a Sahlqvist
derivation and fires rules at absolute loci, recording every step, so a run
is a replayable trace from the first approximation to a pure output.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Callable

from .formula import (
    And,
    BackDia,
    Box,
    CExistsNom,
    CForallNom,
    CForallProp,
    Comp,
    Dia,
    ExistsNom,
    Formula,
    FreshSupply,
    Implies,
    Ineq,
    L,
    MetaAnd,
    MetaImplies,
    Nominal,
    Not,
    Or,
    Path,
    PropVar,
    Top,
    Bottom,
    CaptureError,
    conj,
    disj,
    free_symbols,
    get_at,
    is_negative,
    is_positive,
    is_pure,
    meta_and,
    nominal_names,
    rename_nominal,
    replace_at,
    substitute,
)
from .fragment import (
    BoxedAtom,
    NegPos,
    OrPos,
    PAtom,
    PBox,
    PConj,
    Quantified,
    Rejection,
    SahlqvistDerivation,
    SBot,
    SConj,
    SDia,
    STop,
    classify_sahlqvist,
)


class Rule(str, enum.Enum):
    COMM = "Comm-&"
    ASSOC = "Assoc-&"
    SPL_NOM = "Spl-Nom"
    SEP_NOM = "Sep-Nom"
    QUANT_NOM = "Quant-Nom"
    APPROX_NOM = "Approx-Nom"
    RES_BOX = "Res-Box"
    RES_OR = "Res-Or"
    SPLITTING = "Splitting"
    SCOPE_AND = "Scope-&"
    SCOPE_IMP = "Scope-=>"
    EX_PQ = "Ex-pq"
    EX_PI = "Ex-pi"
    EX_IP = "Ex-ip"
    EX_JI = "Ex-ji"
    SPL_QUANT_P = "Spl-Quant-p"
    SPL_QUANT_I = "Spl-Quant-i"
    ACKERMANN = "Ackermann"
    PACKING = "Packing"
    # auxiliary steps for constant leaves and empty nominal bunches
    TOP_ELIM = "Top-Elim"
    BOT_NEG = "Bot-Neg"
    SPL_IMP = "Spl-=>"
    # steps for inequalities involving the global implication l
    FIRST_APPROX = "First-Approx"
    L_NOM = "L-Nom"
    VAC_NOM = "Vac-Nom"
    NEG_IMP = "Neg-Imp"
    SCOPE_IMP_R = "Scope-=>R"
    IMPORT = "Import"
    LOCAL = "Local"


class RuleError(ValueError):
    def __init__(self, rule: Rule, reason: str):
        self.rule = rule
        self.reason = reason
        super().__init__(f"{rule.value}: {reason}")


class ShapeMismatch(RuleError):
    pass


class SideConditionViolation(RuleError):
    pass


class NotSahlqvist(ValueError):
    def __init__(self, rejection: Rejection):
        self.rejection = rejection
        super().__init__(rejection.reason)


@dataclass(frozen=True)
class RuleStep:
    rule: Rule
    locus: Path
    before: Comp
    after: Comp
    args: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        from .syntax import print_complex, print_formula

        args = {k: print_formula(v) if isinstance(v, Formula) else v for k, v in self.args.items()}
        return {
            "rule": self.rule.value,
            "locus": list(self.locus),
            "before": print_complex(self.before),
            "after": print_complex(self.after),
            "args": args,
        }


@dataclass(frozen=True)
class AlbaResult:
    formula: Formula
    derivation: SahlqvistDerivation
    initial: Comp
    output: Comp
    trace: tuple[RuleStep, ...]

    @property
    def level(self) -> int:
        return self.derivation.level


# ---------------------------------------------------------------- rules


def _shape(rule: Rule, cond: bool, what: str):
    if not cond:
        raise ShapeMismatch(rule, f"expected {what}")


def _side(rule: Rule, cond: bool, what: str):
    if not cond:
        raise SideConditionViolation(rule, what)


def _is_nominal_ineq(c) -> bool:
    return isinstance(c, Ineq) and isinstance(c.lhs, Nominal)


def _fresh(rule: Rule, root: Comp, fresh: str | None) -> str:
    used = nominal_names(root)
    if fresh is None:
        from .formula import fresh_nominal

        return fresh_nominal(used)
    _side(rule, fresh not in used, f"nominal {fresh} already occurs in the complex inequality")
    return fresh


def _comm(node, root, index: int = 0):
    _shape(Rule.COMM, isinstance(node, MetaAnd) and 0 <= index < len(node.conjuncts) - 1,
           "a meta-conjunction with a conjunct after the given index")
    cs = list(node.conjuncts)
    cs[index], cs[index + 1] = cs[index + 1], cs[index]
    return MetaAnd(tuple(cs))


def _assoc(node, root, index: int = 0):
    _shape(Rule.ASSOC, isinstance(node, MetaAnd) and 0 <= index < len(node.conjuncts)
           and isinstance(node.conjuncts[index], MetaAnd), "a nested meta-conjunction at the index")
    cs = node.conjuncts
    spliced = cs[:index] + cs[index].conjuncts + cs[index + 1:]
    return meta_and(*spliced) if spliced else MetaAnd(())


def _spl_nom(node, root):
    _shape(Rule.SPL_NOM, _is_nominal_ineq(node) and isinstance(node.rhs, And), "i <= a & b")
    return MetaAnd((Ineq(node.lhs, node.rhs.left), Ineq(node.lhs, node.rhs.right)))


def _sep_nom(node, root):
    _shape(Rule.SEP_NOM, _is_nominal_ineq(node) and isinstance(node.rhs, Implies), "i <= a -> b")
    return MetaImplies(Ineq(node.lhs, node.rhs.left), Ineq(node.lhs, node.rhs.right))


def _quant_nom(node, root):
    from .formula import ForallProp

    _shape(Rule.QUANT_NOM, _is_nominal_ineq(node) and isinstance(node.rhs, ForallProp), "i <= !q. a")
    return CForallProp(node.rhs.name, Ineq(node.lhs, node.rhs.body))


def _approx_nom(node, root, fresh: str | None = None):
    _shape(Rule.APPROX_NOM, _is_nominal_ineq(node) and isinstance(node.rhs, Dia), "i <= <>a")
    j = _fresh(Rule.APPROX_NOM, root, fresh)
    return CExistsNom(j, MetaAnd((Ineq(Nominal(j), node.rhs.arg), Ineq(node.lhs, Dia(Nominal(j))))))


def _res_box(node, root):
    _shape(Rule.RES_BOX, isinstance(node, Ineq) and isinstance(node.rhs, Box), "a <= []b")
    return Ineq(BackDia(node.lhs), node.rhs.arg)


def _res_or(node, root, side: str = "left"):
    # `side` names the disjunct that moves to the left, negated
    _shape(Rule.RES_OR, isinstance(node, Ineq) and isinstance(node.rhs, Or), "a <= b | c")
    _shape(Rule.RES_OR, side in ("left", "right"), "side 'left' or 'right'")
    b, c = node.rhs.left, node.rhs.right
    if side == "right":
        b, c = c, b
    return Ineq(And(node.lhs, Not(b)), c)


def _splitting(node, root):
    _shape(Rule.SPLITTING, isinstance(node, Ineq) and isinstance(node.rhs, And), "a <= b & c")
    return MetaAnd((Ineq(node.lhs, node.rhs.left), Ineq(node.lhs, node.rhs.right)))


def _scope_and(node, root, index: int = 0):
    _shape(Rule.SCOPE_AND, isinstance(node, MetaAnd) and 0 <= index < len(node.conjuncts)
           and isinstance(node.conjuncts[index], CExistsNom), "a meta-conjunct ?@j. C at the index")
    ex = node.conjuncts[index]
    others = node.conjuncts[:index] + node.conjuncts[index + 1:]
    _side(Rule.SCOPE_AND, all(ex.name not in free_symbols(c)[1] for c in others),
          f"@{ex.name} occurs free in another conjunct")
    return CExistsNom(ex.name, MetaAnd(node.conjuncts[:index] + (ex.body,) + node.conjuncts[index + 1:]))


def _scope_imp(node, root):
    _shape(Rule.SCOPE_IMP, isinstance(node, MetaImplies) and isinstance(node.lhs, CExistsNom),
           "(?@j. C1) => C2")
    j = node.lhs.name
    _side(Rule.SCOPE_IMP, j not in free_symbols(node.rhs)[1], f"@{j} occurs free in the consequent")
    return CForallNom(j, MetaImplies(node.lhs.body, node.rhs))


def _swap(rule: Rule, outer, inner):
    def apply(node, root):
        _shape(rule, isinstance(node, outer) and isinstance(node.body, inner),
               f"{outer.__name__} over {inner.__name__}")
        return inner(node.body.name, outer(node.name, node.body.body))

    return apply


def _spl_quant(rule: Rule, binder):
    def apply(node, root):
        _shape(rule, isinstance(node, binder), f"{binder.__name__} at the locus")
        body = node.body
        if isinstance(body, MetaImplies) and isinstance(body.rhs, MetaAnd) and body.rhs.conjuncts:
            return MetaAnd(tuple(binder(node.name, MetaImplies(body.lhs, c)) for c in body.rhs.conjuncts))
        if isinstance(body, MetaAnd) and body.conjuncts:
            return MetaAnd(tuple(binder(node.name, c) for c in body.conjuncts))
        raise ShapeMismatch(rule, "a quantified meta-conjunction, possibly under an implication")

    return apply


def _ineqs(rule: Rule, c: Comp, what: str) -> list[Ineq]:
    if isinstance(c, Ineq):
        return [c]
    _shape(rule, isinstance(c, MetaAnd) and all(isinstance(x, Ineq) for x in c.conjuncts),
           f"{what} made of inequalities")
    return list(c.conjuncts)


def _ackermann(node, root):
    rule = Rule.ACKERMANN
    _shape(rule, isinstance(node, CForallProp), "!q. (C1 => C2)")
    q = node.name
    body = node.body
    if isinstance(body, MetaImplies):
        entries = _ineqs(rule, body.lhs, "an antecedent")
        cons = _ineqs(rule, body.rhs, "a consequent")
    else:
        entries, cons = [], _ineqs(rule, body, "a consequent")
    lower, others = [], []
    for e in entries:
        if e.rhs == PropVar(q) and q not in free_symbols(e.lhs)[0]:
            _side(rule, is_pure(e.lhs), "every lower bound of the variable must be pure")
            lower.append(e.lhs)
        else:
            _side(rule, is_positive(e.lhs, q) and is_negative(e.rhs, q),
                  f"antecedent entries must be positive on the left and negative on the right in {q}")
            others.append(e)
    for e in cons:
        _side(rule, is_negative(e.lhs, q) and is_positive(e.rhs, q),
              f"the consequent must be negative on the left and positive on the right in {q}")
    theta = disj(*lower)
    try:
        new_others = [substitute(e, q, theta) for e in others]
        new_cons = [substitute(e, q, theta) for e in cons]
    except CaptureError as err:
        raise SideConditionViolation(rule, str(err)) from None
    consequent = meta_and(*new_cons) if new_cons else MetaAnd(())
    if not new_others:
        return consequent
    return MetaImplies(meta_and(*new_others), consequent)


def _packing(node, root):
    rule = Rule.PACKING
    if isinstance(node, CForallNom):
        i, body = node.name, node.body
    else:
        i, body = None, node
    if isinstance(body, MetaImplies):
        _shape(rule, isinstance(body.rhs, Ineq), "a single inequality as consequent")
        ants = [] if body.lhs == MetaAnd(()) else _ineqs(rule, body.lhs, "an antecedent")
        target = body.rhs
    else:
        _shape(rule, i is not None and isinstance(body, Ineq), "!@i. (C => a <= b) or !@i. a <= b")
        ants, target = [], body
    if i is not None:
        _side(rule, i not in free_symbols(target.rhs)[1], f"@{i} occurs in the right-hand side")
    lhs = conj(*[L(a.lhs, a.rhs) for a in ants], target.lhs)
    if i is not None:
        lhs = ExistsNom(i, lhs)
    return Ineq(lhs, target.rhs)


def _top_elim(node, root):
    _shape(Rule.TOP_ELIM, isinstance(node, Ineq) and isinstance(node.rhs, Top), "a <= true")
    return MetaAnd(())


def _bot_neg(node, root):
    _shape(Rule.BOT_NEG, isinstance(node, Ineq) and isinstance(node.rhs, Bottom), "a <= false")
    return Ineq(node.lhs, Not(Top()))


def _spl_imp(node, root):
    _shape(Rule.SPL_IMP, isinstance(node, MetaImplies) and isinstance(node.rhs, MetaAnd)
           and node.rhs.conjuncts, "C => (C1 && ... && Cn)")
    return MetaAnd(tuple(MetaImplies(node.lhs, c) for c in node.rhs.conjuncts))


def _first_approx(node, root, fresh: str | None = None):
    _shape(Rule.FIRST_APPROX, isinstance(node, Ineq), "an inequality")
    j = _fresh(Rule.FIRST_APPROX, root, fresh)
    return CForallNom(j, MetaImplies(Ineq(Nominal(j), node.lhs), Ineq(Nominal(j), node.rhs)))


def _l_nom(node, root):
    _shape(Rule.L_NOM, _is_nominal_ineq(node) and isinstance(node.rhs, L), "i <= l(a, b)")
    return Ineq(node.rhs.left, node.rhs.right)


def _vac_nom(node, root):
    _shape(Rule.VAC_NOM, isinstance(node, (CForallNom, CExistsNom)), "a nominal quantifier")
    _side(Rule.VAC_NOM, node.name not in free_symbols(node.body)[1], f"@{node.name} occurs in the body")
    return node.body


def _neg_imp(node, root):
    _shape(Rule.NEG_IMP, isinstance(node, Ineq) and isinstance(node.rhs, Not)
           and isinstance(node.rhs.arg, Implies), "a <= ~(b -> c)")
    imp = node.rhs.arg
    return Ineq(node.lhs, And(imp.left, Not(imp.right)))


def _scope_imp_r(node, root):
    _shape(Rule.SCOPE_IMP_R, isinstance(node, MetaImplies) and isinstance(node.rhs, CForallNom),
           "C1 => !@k. C2")
    k = node.rhs.name
    _side(Rule.SCOPE_IMP_R, k not in free_symbols(node.lhs)[1], f"@{k} occurs free in the antecedent")
    return CForallNom(k, MetaImplies(node.lhs, node.rhs.body))


def _import(node, root):
    _shape(Rule.IMPORT, isinstance(node, MetaImplies) and isinstance(node.rhs, MetaImplies),
           "C1 => (C2 => C3)")
    return MetaImplies(MetaAnd((node.lhs, node.rhs.lhs)), node.rhs.rhs)


def _local(node, root, xi: Formula = None, local: Formula = None, base: str = "i0"):
    """!r. (j <= ~xi => C)  ~>  j <= ~local[j/base] => C, with i <= xi equivalent to i <= local."""
    rule = Rule.LOCAL
    _shape(rule, xi is not None and local is not None, "the formula and its local correspondent")
    names, body = [], node
    while isinstance(body, CForallProp):
        names.append(body.name)
        body = body.body
    _shape(rule, isinstance(body, MetaImplies) and _is_nominal_ineq(body.lhs)
           and body.lhs.rhs == Not(xi), "!r. (j <= ~xi => C)")
    _side(rule, free_symbols(xi)[0] <= set(names), "every variable of the formula must be quantified")
    _side(rule, not set(names) & free_symbols(body.rhs)[0], "quantified variables occur in the consequent")
    _side(rule, is_pure(local) and free_symbols(local)[1] <= {base}, "the local correspondent must be pure in @" + base)
    j = body.lhs.lhs.name
    return MetaImplies(Ineq(body.lhs.lhs, Not(rename_nominal(local, base, j))), body.rhs)


_RULES: dict[Rule, Callable[..., Comp]] = {
    Rule.COMM: _comm,
    Rule.ASSOC: _assoc,
    Rule.SPL_NOM: _spl_nom,
    Rule.SEP_NOM: _sep_nom,
    Rule.QUANT_NOM: _quant_nom,
    Rule.APPROX_NOM: _approx_nom,
    Rule.RES_BOX: _res_box,
    Rule.RES_OR: _res_or,
    Rule.SPLITTING: _splitting,
    Rule.SCOPE_AND: _scope_and,
    Rule.SCOPE_IMP: _scope_imp,
    Rule.EX_PQ: _swap(Rule.EX_PQ, CForallProp, CForallProp),
    Rule.EX_PI: _swap(Rule.EX_PI, CForallNom, CForallProp),
    Rule.EX_IP: _swap(Rule.EX_IP, CForallProp, CForallNom),
    Rule.EX_JI: _swap(Rule.EX_JI, CForallNom, CForallNom),
    Rule.SPL_QUANT_P: _spl_quant(Rule.SPL_QUANT_P, CForallProp),
    Rule.SPL_QUANT_I: _spl_quant(Rule.SPL_QUANT_I, CForallNom),
    Rule.ACKERMANN: _ackermann,
    Rule.PACKING: _packing,
    Rule.TOP_ELIM: _top_elim,
    Rule.BOT_NEG: _bot_neg,
    Rule.SPL_IMP: _spl_imp,
    Rule.FIRST_APPROX: _first_approx,
    Rule.L_NOM: _l_nom,
    Rule.VAC_NOM: _vac_nom,
    Rule.NEG_IMP: _neg_imp,
    Rule.SCOPE_IMP_R: _scope_imp_r,
    Rule.IMPORT: _import,
    Rule.LOCAL: _local,
}

# Rules of the second stage proper; the remaining members are auxiliary.
STAGE2_RULES = (
    Rule.COMM, Rule.ASSOC, Rule.SPL_NOM, Rule.SEP_NOM, Rule.QUANT_NOM, Rule.APPROX_NOM,
    Rule.RES_BOX, Rule.RES_OR, Rule.SPLITTING, Rule.SCOPE_AND, Rule.SCOPE_IMP, Rule.EX_PQ,
    Rule.EX_PI, Rule.EX_IP, Rule.EX_JI, Rule.SPL_QUANT_P, Rule.SPL_QUANT_I, Rule.ACKERMANN,
    Rule.PACKING,
)


def apply_rule(c: Comp, rule: Rule, locus: Path = (), **args: Any) -> Comp:
    """Rewrite the subterm of `c` at `locus` with `rule`; everything else is unchanged."""
    rule = Rule(rule)
    try:
        node = get_at(c, tuple(locus))
    except IndexError as err:
        raise ShapeMismatch(rule, str(err)) from None
    if not isinstance(node, Comp):
        raise ShapeMismatch(rule, "the locus must address a complex inequality")
    return replace_at(c, tuple(locus), _RULES[rule](node, c, **args))


# ---------------------------------------------------------------- shapes


class EntryKind(enum.IntEnum):
    NEG = 0
    NOM = 1
    MINVAL = 2
    OTHER = 3


def entry_kind(c: Comp) -> EntryKind:
    if isinstance(c, Ineq):
        if isinstance(c.lhs, Nominal) and isinstance(c.rhs, Not):
            return EntryKind.NEG
        if isinstance(c.lhs, Nominal) and isinstance(c.rhs, Dia) and isinstance(c.rhs.arg, Nominal):
            return EntryKind.NOM
        if isinstance(c.rhs, PropVar) and is_pure(c.lhs):
            return EntryKind.MINVAL
    return EntryKind.OTHER


# ---------------------------------------------------------------- driver


class Driver:
    """Holds the working complex inequality, the trace and the fresh-name supply."""

    def __init__(self, state: Comp, supply: FreshSupply | None = None):
        self.state = state
        self.trace: list[RuleStep] = []
        self.supply = supply if supply is not None else FreshSupply()
        self.supply.reserve(nominal_names(state))

    def at(self, locus: Path) -> Comp:
        return get_at(self.state, locus)

    def apply(self, rule: Rule, locus: Path, **args) -> Comp:
        if rule in (Rule.APPROX_NOM, Rule.FIRST_APPROX) and "fresh" not in args:
            args["fresh"] = self.supply.nominal()
        after = apply_rule(self.state, rule, locus, **args)
        self.trace.append(RuleStep(rule, tuple(locus), self.state, after, args))
        self.state = after
        return after

    # -- meta-conjunction housekeeping

    def flatten(self, locus: Path) -> None:
        while True:
            node = self.at(locus)
            if not isinstance(node, MetaAnd):
                return
            k = next((n for n, c in enumerate(node.conjuncts) if isinstance(c, MetaAnd)), None)
            if k is None:
                return
            self.apply(Rule.ASSOC, locus, index=k)

    def merge(self, locus: Path) -> None:
        """Pull existential nominals out of a meta-conjunction, then flatten it."""
        while True:
            node = self.at(locus)
            if not isinstance(node, MetaAnd):
                break
            k = next((n for n, c in enumerate(node.conjuncts) if isinstance(c, CExistsNom)), None)
            if k is None:
                break
            self.apply(Rule.SCOPE_AND, locus, index=k)
            locus = locus + (0,)
        self.flatten(locus)

    def group(self, locus: Path) -> None:
        """Order the entries under an existential prefix as NEG, NOM, MinVal."""
        while isinstance(self.at(locus), CExistsNom):
            locus = locus + (0,)
        node = self.at(locus)
        if not isinstance(node, MetaAnd):
            return
        changed = True
        while changed:
            changed = False
            cs = self.at(locus).conjuncts
            for k in range(len(cs) - 1):
                if entry_kind(cs[k]) > entry_kind(cs[k + 1]):
                    self.apply(Rule.COMM, locus, index=k)
                    cs = self.at(locus).conjuncts
                    changed = True

    def scope_out(self, locus: Path) -> int:
        """Turn existential nominals in an antecedent into universal ones; returns how many."""
        count = 0
        while True:
            node = self.at(locus)
            if not (isinstance(node, MetaImplies) and isinstance(node.lhs, CExistsNom)):
                return count
            self.apply(Rule.SCOPE_IMP, locus)
            locus = locus + (0,)
            count += 1

    def hoist(self, locus: Path, depth: int, key: Callable[[Comp], Any] | None = None) -> None:
        """Stable sort of a universal prefix of length `depth` (nominals first by default)."""
        if key is None:
            key = lambda q: 0 if isinstance(q, CForallNom) else 1  # noqa: E731
        swaps = {
            (CForallProp, CForallNom): Rule.EX_IP,
            (CForallNom, CForallProp): Rule.EX_PI,
            (CForallProp, CForallProp): Rule.EX_PQ,
            (CForallNom, CForallNom): Rule.EX_JI,
        }
        changed = True
        while changed:
            changed = False
            for d in range(depth - 1):
                here = locus + (0,) * d
                a, b = self.at(here), self.at(here + (0,))
                if key(a) > key(b):
                    self.apply(swaps[type(a), type(b)], here)
                    changed = True

    # -- derivation-directed reduction

    def antecedent(self, i: str, d, locus: Path) -> None:
        """Reduce i <= A at `locus` into the NEG/NOM/MinVal shape."""
        match d:
            case BoxedAtom(_, n, _):
                for _ in range(n):
                    self.apply(Rule.RES_BOX, locus)
            case NegPos():
                pass
            case STop():
                self.apply(Rule.TOP_ELIM, locus)
            case SBot():
                self.apply(Rule.BOT_NEG, locus)
            case SConj(_, left, right):
                self.apply(Rule.SPL_NOM, locus)
                self.antecedent(i, left, locus + (0,))
                self.antecedent(i, right, locus + (1,))
                self.merge(locus)
            case SDia(_, child):
                self.apply(Rule.APPROX_NOM, locus)
                j = self.at(locus).name
                self.antecedent(j, child, locus + (0, 0))
                self.merge(locus + (0,))
            case Quantified():
                self.universal(i, d, locus)
            case _:
                raise TypeError(f"not an antecedent derivation: {d!r}")

    def pia(self, d, locus: Path) -> None:
        """Reduce psi <= PIA at `locus` into a meta-conjunction of inequalities psi' <= p."""
        match d:
            case PAtom():
                pass
            case PBox(_, child):
                self.apply(Rule.RES_BOX, locus)
                self.pia(child, locus)
            case PConj(_, left, right):
                self.apply(Rule.SPLITTING, locus)
                self.pia(left, locus + (0,))
                self.pia(right, locus + (1,))
                self.flatten(locus)
            case OrPos(_, _, child, pos_left):
                self.apply(Rule.RES_OR, locus, side="left" if pos_left else "right")
                self.pia(child, locus)
            case _:
                raise TypeError(f"not a PIA derivation: {d!r}")

    def universal(self, i: str, d: Quantified, locus: Path) -> None:
        """Reduce i <= !q.(A -> PIA) at `locus` into MinVal entries for the outer variables."""
        m = len(d.qvars)
        for t in range(m):
            self.apply(Rule.QUANT_NOM, locus + (0,) * t)
        inner = locus + (0,) * m
        self.apply(Rule.SEP_NOM, inner)
        self.antecedent(i, d.antecedent, inner + (0,))
        self.group(inner + (0,))
        self.pia(d.pia, inner + (1,))
        r = self.scope_out(inner)
        self.hoist(locus, m + r)
        for t in reversed(range(m)):
            self.apply(Rule.ACKERMANN, locus + (0,) * (r + t))
        self.pack(locus, r)

    def pack(self, locus: Path, r: int) -> None:
        """Pack r universal nominals (innermost first) into pure left-hand sides."""
        for t in reversed(range(r)):
            here = locus + (0,) * t
            body = self.at(here).body
            cons = body.rhs if isinstance(body, MetaImplies) else body
            if isinstance(cons, MetaAnd):
                self.apply(Rule.SPL_QUANT_I, here)
                for e in range(len(cons.conjuncts)):
                    self.apply(Rule.PACKING, here + (e,))
            else:
                self.apply(Rule.PACKING, here)
            self.flatten(here)
        if r == 0:
            node = self.at(locus)
            if isinstance(node, MetaImplies):
                if isinstance(node.rhs, MetaAnd):
                    self.apply(Rule.SPL_IMP, locus)
                    for e in range(len(node.rhs.conjuncts)):
                        self.apply(Rule.PACKING, locus + (e,))
                else:
                    self.apply(Rule.PACKING, locus)


# ---------------------------------------------------------------- entry points


def _derive(phi) -> SahlqvistDerivation:
    if isinstance(phi, SahlqvistDerivation):
        return phi
    d = classify_sahlqvist(phi)
    if isinstance(d, Rejection):
        raise NotSahlqvist(d)
    return d


def first_approximation(phi, i0: str | None = None) -> Comp:
    """!p. !@i0. (i0 <= A => i0 <= POS) for a Pi_n-Sahlqvist formula !p.(A -> POS)."""
    d = _derive(phi)
    if i0 is None:
        used = nominal_names(d.formula)
        i0 = "i0" if "i0" not in used else FreshSupply(used).nominal("i")
    ant, cons = d.antecedent.formula, d.consequent.formula
    body = CForallNom(i0, MetaImplies(Ineq(Nominal(i0), ant), Ineq(Nominal(i0), cons)))
    for p in reversed(d.pvars):
        body = CForallProp(p, body)
    return body


def run(phi) -> AlbaResult:
    """Eliminate all propositional variables of a Pi_n-Sahlqvist formula."""
    d = _derive(phi)
    initial = first_approximation(d)
    k = len(d.pvars)
    i0 = get_at(initial, (0,) * k).name
    drv = Driver(initial)
    imp = (0,) * (k + 1)
    drv.antecedent(i0, d.antecedent, imp + (0,))
    drv.group(imp + (0,))
    r = drv.scope_out(imp)
    drv.hoist((), k + 1 + r)
    for t in reversed(range(k)):
        drv.apply(Rule.ACKERMANN, (0,) * (1 + r + t))
    if not is_pure(drv.state):
        raise AssertionError("reduction finished with propositional variables left")
    return AlbaResult(d.formula, d, initial, drv.state, tuple(drv.trace))


def _single(i: str, phi: Formula, extra=()) -> Driver:
    start = Ineq(Nominal(i), phi)
    return Driver(start, FreshSupply(set(extra) | {i}))


def reduce_antecedent(i: str, d) -> Comp:
    drv = _single(i, d.formula)
    drv.antecedent(i, d, ())
    drv.group(())
    return drv.state


def reduce_pia(psi: Formula, d) -> Comp:
    drv = Driver(Ineq(psi, d.formula))
    drv.pia(d, ())
    return drv.state


def reduce_universal(i: str, d: Quantified) -> Comp:
    drv = _single(i, d.formula)
    drv.universal(i, d, ())
    return drv.state


def replay(initial: Comp, trace) -> Comp:
    """Re-apply a recorded trace starting from `initial`."""
    state = initial
    for step in trace:
        state = apply_rule(state, step.rule, step.locus, **step.args)
    return state


def output_shape_ok(c: Comp) -> bool:
    """A universal nominal prefix over an inequality, or over a meta-conjunction
    of inequalities implying an inequality."""
    while isinstance(c, CForallNom):
        c = c.body
    if isinstance(c, Ineq):
        return True
    if isinstance(c, MetaImplies) and isinstance(c.rhs, Ineq):
        return isinstance(c.lhs, Ineq) or (
            isinstance(c.lhs, MetaAnd) and all(isinstance(x, Ineq) for x in c.lhs.conjuncts)
        )
    return False
