import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sopml import fo
from sopml.alba import run
from sopml.first_order import (
    UnassignedVariableError,
    correspond,
    equiv_on_frames,
    fo_eval,
    st_complex,
    st_formula,
    verify_correspondence,
)
from sopml.generate import random_comp, random_formula, random_sahlqvist
from sopml.semantics import (
    enumerate_frames,
    eval_at,
    frame,
    holds_comp,
    random_frame,
    random_model,
)
from sopml.syntax import parse_complex as C, parse_fo as F, parse_formula as P

seeds = st.integers(0, 2**32 - 1)
loop, two_cycle = frame(1, [(0, 0)]), frame(2, [(0, 1), (1, 0)])


def env_of(m):
    env = {k[0].upper() + k[1:]: v for k, v in m.valuation.props.items()}
    env.update(m.valuation.noms)
    return env


def test_translation_clauses():
    assert st_formula(P("<>p")) == F("exists x0. (R(x,x0) & P(x0))")
    assert st_formula(P("@i")) == F("x = i")
    assert st_formula(P("<^>p"), "y") == F("exists x0. (R(x0,y) & P(x0))")
    assert st_formula(P("l(p, q)")) == F("forall x0. (P(x0) -> Q(x0))")
    assert st_complex(C("@i <= <>@j")) == F("forall x0. (x0 = i -> exists x1. (R(x0,x1) & x1 = j))")
    assert st_complex(C("!p. @i <= p")) == F("forall P. forall x0. (x0 = i -> P(x0))")
    assert st_complex(C("(&&)")) == fo.Verum()


def test_translation_variable_must_not_clash():
    with pytest.raises(ValueError):
        st_formula(P("@x"), "x")
    # counter variables skip nominal names
    assert st_complex(C("@x0 <= @x0")) == F("forall x1. (x1 = x0 -> x1 = x0)")


def test_irreflexivity_translation_is_irreflexivity():
    s = st_complex(C("!@i. @i <= ~<>@i"))
    assert s == F("forall i. forall x0. (x0 = i -> ~exists x1. (R(x0,x1) & x1 = i))")
    assert equiv_on_frames(s, F("forall x. ~R(x,x)"), 3)


def test_fo_eval():
    assert fo_eval(loop, F("forall x. R(x,x)"))
    assert not fo_eval(two_cycle, F("forall x. forall y. (R(x,y) & R(y,x) -> R(x,x))"))
    for f in enumerate_frames(2):
        assert fo_eval(f, fo.Verum())
    assert fo_eval(two_cycle, F("P(x) & R(x,y)"), {"P": {"w0"}, "x": "w0", "y": "w1"})
    assert fo_eval(two_cycle, F("exists P. forall x. P(x)"))
    assert not fo_eval(two_cycle, F("forall P. exists x. P(x)"))
    with pytest.raises(UnassignedVariableError):
        fo_eval(loop, F("R(x,x)"))
    with pytest.raises(ValueError):
        fo_eval(loop, F("R(x,x)"), {"x": "nowhere"})


def test_equiv_on_frames():
    res = equiv_on_frames(F("forall x. R(x,x)"), F("forall x. ~R(x,x)"), 1)
    assert not res and res.witness == frame(1, []) and res.frames_checked == 1
    s = F("forall x. exists y. R(x,y)")
    assert equiv_on_frames(s, s, 2) and equiv_on_frames(s, s, 2).frames_checked == 18


@pytest.mark.parametrize(
    "text, sentence",
    [
        ("!q. (!p. (p -> <>p | q) -> q)", "forall x. ~R(x,x)"),
        ("!p. ([]p & !q. (q -> <><>q | p) -> p)", "forall x. forall y. (R(x,y) & R(y,x) -> R(x,x))"),
        ("!p. (p -> <>p)", "forall x. R(x,x)"),
        ("!p. ([]p -> [][]p)", "forall x. forall y. forall z. (R(x,y) & R(y,z) -> R(x,z))"),
        ("!p. (p -> []<>p)", "forall x. forall y. (R(x,y) -> R(y,x))"),
    ],
)
def test_known_correspondents(text, sentence):
    out = correspond(P(text))
    assert fo.is_first_order(out)
    assert equiv_on_frames(out, F(sentence), 3)
    assert verify_correspondence(P(text), out, enumerate_frames(3))


def test_verify_correspondence_reports_witness():
    res = verify_correspondence(P("!p. (p -> <>p)"), F("forall x. ~R(x,x)"), enumerate_frames(2))
    assert not res and res.witness is not None


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_standard_translation_is_truth_preserving(seed):
    rng = random.Random(seed)
    phi = random_formula(rng, 4, props=("p", "q"), noms=("i", "j"), prop_quants=2)
    m = random_model(rng, random_frame(rng, rng.randint(1, 3)), ("p", "q"), ("i", "j"))
    s = st_formula(phi)
    env = env_of(m)
    for w in m.frame.worlds:
        assert eval_at(m, w, phi) == fo_eval(m.frame, s, {**env, "x": w})


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_complex_translation_is_truth_preserving(seed):
    rng = random.Random(seed)
    c = random_comp(rng, 3, prop_quants=1)
    m = random_model(rng, random_frame(rng, rng.randint(1, 3)), ("p", "q"), ("i", "j"))
    assert holds_comp(m, c) == fo_eval(m.frame, st_complex(c), env_of(m))


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(1, 3))
def test_pure_output_translates_to_first_order(seed, level):
    out = run(random_sahlqvist(random.Random(seed), level)).output
    s = st_complex(out)
    assert fo.is_first_order(s)
    assert fo.fo_free(s) == (frozenset(), frozenset())
