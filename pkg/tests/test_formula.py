import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracle
from sopml.formula import (
    And,
    Box,
    CaptureError,
    CForallProp,
    Dia,
    FreshSupply,
    Ineq,
    MetaAnd,
    Nominal,
    Not,
    Polarity,
    PropVar,
    Top,
    Bottom,
    conj,
    disj,
    fresh_nominal,
    free_symbols,
    get_at,
    is_pure,
    meta_and,
    polarity,
    rename_nominal,
    replace_at,
    substitute,
)
from sopml.generate import random_formula
from sopml.semantics import enumerate_frames
from sopml.syntax import parse_complex, parse_formula as P

seeds = st.integers(0, 2**32 - 1)


@pytest.mark.parametrize(
    "text, var, expected",
    [
        ("p -> <>p", "p", Polarity.BOTH),
        ("~<><>q", "q", Polarity.NEGATIVE),
        ("[]([]q | []p)", "q", Polarity.POSITIVE),
        ("[]p", "q", Polarity.ABSENT),
        ("!q. q", "q", Polarity.ABSENT),
        ("l(p, q)", "p", Polarity.NEGATIVE),
    ],
)
def test_polarity(text, var, expected):
    assert polarity(P(text), var) is expected


def test_polarity_of_inequalities():
    assert polarity(parse_complex("p <= q"), "p") is Polarity.NEGATIVE
    assert polarity(parse_complex("p <= q => @i <= p"), "p") is Polarity.POSITIVE
    assert polarity(parse_complex("@i <= p => @i <= p"), "p") is Polarity.BOTH
    assert polarity(parse_complex("@i <= []p && @j <= p"), "p") is Polarity.POSITIVE


@given(seeds)
def test_polarity_flips_under_negation(seed):
    phi = random_formula(random.Random(seed), 4)
    for p in ("p", "q"):
        assert polarity(Not(phi), p) is polarity(phi, p).flip()


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_positive_polarity_is_monotone(seed):
    rng = random.Random(seed)
    phi = random_formula(rng, 3, props=("p", "q"), noms=("i",), prop_quants=1)
    pol = polarity(phi, "p")
    if pol in (Polarity.BOTH, Polarity.ABSENT):
        return
    for f in list(enumerate_frames(2))[::3]:
        ws, rel = list(f.worlds), set(f.relation)
        q = frozenset(w for w in ws if rng.random() < 0.5)
        i = rng.choice(ws)
        for small in oracle.subsets(ws):
            for big in oracle.subsets(ws):
                if not small <= big:
                    continue
                for w in ws:
                    lo = oracle.truth(ws, rel, {"p": small, "q": q}, {"i": i}, phi, w)
                    hi = oracle.truth(ws, rel, {"p": big, "q": q}, {"i": i}, phi, w)
                    if pol is Polarity.POSITIVE:
                        assert not lo or hi
                    else:
                        assert not hi or lo


def test_is_pure():
    assert is_pure(P("<^>@i & ~[]<^>@j"))
    assert not is_pure(P("p"))
    assert is_pure(P("?@i. (l(@i, ~<>@i) & @i)"))
    assert not is_pure(P("!p. @i"))


def test_free_symbols():
    assert free_symbols(P("!p. (p -> <>p | q)")) == ({"q"}, set())
    assert free_symbols(Ineq(Nominal("i"), Dia(Nominal("j")))) == (set(), {"i", "j"})
    c = parse_complex("?@j. (@j <= []p && @i <= <>@j)")
    assert free_symbols(c) == ({"p"}, {"i"})


def test_substitute():
    host = parse_complex("@i <= <>[]p")
    assert substitute(host, "p", P("<^>@k")) == parse_complex("@i <= <>[]<^>@k")
    assert substitute(PropVar("q"), "q", Bottom()) == Bottom()
    bound = CForallProp("q", Ineq(PropVar("q"), PropVar("q")))
    assert substitute(bound, "q", Nominal("i")) == bound


def test_substitute_detects_capture_only_when_real():
    with pytest.raises(CaptureError):
        substitute(P("!@i. (p & @i)"), "p", Nominal("i"))
    # binder does not scope over p: no capture
    phi = P("(!@i. @i) & p")
    assert substitute(phi, "p", Nominal("i")) == P("(!@i. @i) & @i")


@given(seeds)
def test_substitute_absent_variable_is_identity(seed):
    phi = random_formula(random.Random(seed), 4, props=("q",))
    assert substitute(phi, "p", P("<>@i")) == phi


def test_rename_nominal():
    assert rename_nominal(P("@i & ?@i. @i"), "i", "k") == P("@k & ?@i. @i")
    with pytest.raises(CaptureError):
        rename_nominal(P("?@k. (@i & @k)"), "i", "k")


def test_fresh_nominal():
    assert fresh_nominal({"i"}) == "j1"
    assert fresh_nominal({"i", "j1"}) == "j2"
    assert fresh_nominal(set()) == "j1"
    s = FreshSupply(["j1"])
    assert [s.nominal(), s.nominal(), s.nominal("k")] == ["j2", "j3", "k1"]


@given(st.sets(st.sampled_from([f"j{k}" for k in range(1, 8)] + ["i", "k"])))
def test_fresh_nominal_is_fresh(used):
    assert fresh_nominal(used) not in used


def test_builders():
    p, q = PropVar("p"), PropVar("q")
    assert conj() == Top() and disj() == Bottom()
    assert conj(p, q, p) == And(And(p, q), p)
    a = Ineq(p, q)
    assert meta_and(a) is a
    assert meta_and(a, a) == MetaAnd((a, a))
    with pytest.raises(ValueError):
        MetaAnd((a,))


def test_paths():
    phi = P("[](p & <>q)")
    assert get_at(phi, (0, 1)) == Dia(PropVar("q"))
    assert replace_at(phi, (0, 0), Top()) == Box(And(Top(), Dia(PropVar("q"))))
    with pytest.raises(IndexError):
        get_at(phi, (1,))
