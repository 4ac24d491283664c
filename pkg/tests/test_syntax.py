import json
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sopml import fo
from sopml.formula import (
    And,
    Box,
    CForallNom,
    Dia,
    ExistsNom,
    ForallProp,
    Implies,
    Ineq,
    L,
    MetaAnd,
    Nominal,
    Not,
    Or,
    PropVar,
)
from sopml.generate import random_comp, random_fo, random_formula
from sopml.semantics import frame
from sopml.syntax import (
    ParseError,
    frame_from_json,
    frame_to_json,
    load_frame,
    parse_complex,
    parse_fo,
    parse_formula,
    print_complex,
    print_fo,
    print_formula,
)

seeds = st.integers(0, 2**32 - 1)
p, q = PropVar("p"), PropVar("q")


def test_parse_irreflexivity_formula():
    phi = parse_formula("!q. (!p. (p -> <>p | q) -> q)")
    assert phi == ForallProp("q", Implies(ForallProp("p", Implies(p, Or(Dia(p), q))), q))


def test_parse_l_and_antecedent():
    assert parse_formula("l(@i, <>@j)") == L(Nominal("i"), Dia(Nominal("j")))
    phi = parse_formula("[]p & !q.(q -> <><>q | p)")
    assert phi == And(Box(p), ForallProp("q", Implies(q, Or(Dia(Dia(q)), p))))


def test_l_is_an_ordinary_variable_without_parenthesis():
    assert parse_formula("l & p") == And(PropVar("l"), p)


def test_print():
    assert print_formula(Box(p)) == "[]p"
    assert print_formula(Implies(p, Dia(p))) == "p -> <>p"
    j = Nominal("j")
    assert print_formula(ExistsNom("j", And(L(j, Not(Dia(j))), j))) == "?@j. (l(@j, ~<>@j) & @j)"


def test_implication_associates_right():
    assert parse_formula("p -> q -> p") == Implies(p, Implies(q, p))
    assert print_formula(Implies(Implies(p, q), p)) == "(p -> q) -> p"


def test_parse_complex():
    i, k = Nominal("i"), Nominal("k")
    assert parse_complex("@i <= <>@k && @k <= []p") == MetaAnd((Ineq(i, Dia(k)), Ineq(k, Box(p))))
    assert parse_complex("!@i. @i <= ~<>@i") == CForallNom("i", Ineq(i, Not(Dia(i))))
    assert parse_complex("(&&)") == MetaAnd(())


def test_parse_fo():
    assert parse_fo("forall x. ~R(x,x)") == fo.ForallInd("x", fo.Not(fo.RelAtom("x", "x")))
    s = parse_fo("forall x. forall y. (R(x,y) & R(y,x) -> R(x,x))")
    assert s == fo.ForallInd(
        "x",
        fo.ForallInd(
            "y",
            fo.Implies(fo.And(fo.RelAtom("x", "y"), fo.RelAtom("y", "x")), fo.RelAtom("x", "x")),
        ),
    )
    assert parse_fo("true") == fo.Verum()
    assert parse_fo("exists P. (P(x) & x = y)") == fo.ExistsPred(
        "P", fo.And(fo.PredAtom("P", "x"), fo.Eq("x", "y"))
    )
    # quantifiers bind as tightly as negation
    assert parse_fo("exists P. P(x) & x = y") == fo.And(
        fo.ExistsPred("P", fo.PredAtom("P", "x")), fo.Eq("x", "y")
    )


@pytest.mark.parametrize(
    "text, parser",
    [
        ("p &", parse_formula),
        ("(p", parse_formula),
        ("[]", parse_formula),
        ("P", parse_formula),
        ("forall", parse_formula),
        ("p <= ", parse_complex),
        ("@i <= p =>", parse_complex),
        ("forall x.", parse_fo),
        ("Q(x,y)", parse_fo),
        ("p $ q", parse_formula),
    ],
)
def test_parse_errors(text, parser):
    with pytest.raises(ParseError) as err:
        parser(text)
    assert err.value.position <= len(text)


def test_parse_error_position():
    with pytest.raises(ParseError) as err:
        parse_formula("p & & q")
    assert err.value.position == 4


@given(seeds)
def test_formula_round_trip(seed):
    phi = random_formula(random.Random(seed), 5)
    assert parse_formula(print_formula(phi)) == phi


@given(seeds)
def test_complex_round_trip(seed):
    c = random_comp(random.Random(seed), 3)
    text = print_complex(c)
    assert text.count("(") == text.count(")")
    assert parse_complex(text) == c


@given(seeds)
def test_fo_round_trip(seed):
    s = random_fo(random.Random(seed), 5)
    assert parse_fo(print_fo(s)) == s


def test_frame_json(tmp_path):
    f = frame(2, [(0, 1), (1, 0)])
    obj = frame_to_json(f)
    assert obj == {"worlds": ["w0", "w1"], "edges": [["w0", "w1"], ["w1", "w0"]]}
    assert frame_from_json(obj) == f
    path = tmp_path / "f.json"
    path.write_text(json.dumps(obj))
    assert load_frame(path) == f


@pytest.mark.parametrize(
    "obj",
    [
        [],
        {"edges": []},
        {"worlds": []},
        {"worlds": ["a", "a"]},
        {"worlds": ["a"], "edges": [["a", "b"]]},
        {"worlds": ["a"], "edges": [["a"]]},
        {"worlds": [1]},
    ],
)
def test_bad_frame_json(obj):
    with pytest.raises(ValueError):
        frame_from_json(obj)
