"""Semantic checks shared by the rule and acceptance tests."""

from sopml.alba import apply_rule
from sopml.formula import MetaAnd
from sopml.generate import rule_instance
from sopml.semantics import Evaluator


def same_truth(f, a, b) -> bool:
    """`a` and `b` agree on `f` under every assignment of their free symbols."""
    ev = Evaluator(f)
    return all(
        ev.holds(a, props, noms) == ev.holds(b, props, noms)
        for props, noms in ev.assignments(MetaAnd((a, b)))
    )


def rule_discrepancies(rng, rule, count, frames):
    """Apply `rule` to `count` random instances; return those whose truth changes somewhere."""
    bad = []
    for _ in range(count):
        before, args = rule_instance(rng, rule)
        after = apply_rule(before, rule, (), **args)
        for f in frames:
            if not same_truth(f, before, after):
                bad.append((before, after, f))
                break
    return bad
