"""Acceptance gate: one test per criterion, each with its own time budget.

A summary line per criterion is printed at the end of the pytest run.
"""

import json
import random
import time

import pytest

from rulecheck import rule_discrepancies
from sopml import fo
from sopml.alba import Rule, run
from sopml.cli import main
from sopml.first_order import correspond, equiv_on_frames, fo_eval, st_formula
from sopml.formula import C_PROP_BINDERS, is_pure, subterms
from sopml.fragment import Rejection, SahlqvistDerivation, classify_sahlqvist
from sopml.generate import modal_depth, random_comp, random_fo, random_formula, random_sahlqvist
from sopml.semantics import (
    enumerate_frames,
    eval_at,
    frame,
    frame_valid,
    random_frame,
    random_model,
)
from sopml.syntax import (
    parse_complex,
    parse_fo,
    parse_formula,
    print_complex,
    print_fo,
    print_formula,
)

IRREFLEXIVITY = "!q.(!p.(p -> <>p | q) -> q)"
NON_DEFINABLE = "!p.([]p & !q.(q -> <><>q | p) -> p)"
EXAMPLE_1 = "!p. (<>[]p & !q. (<>[]q -> []([]q | []p)) -> []<>[]p)"
FRAMES_2 = list(enumerate_frames(2))
FRAMES_3 = list(enumerate_frames(3))


class Budget:
    def __init__(self, request, seconds):
        self.request, self.seconds = request, seconds

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        self.request.node.elapsed = self.elapsed
        if exc[0] is None:
            assert self.elapsed < self.seconds, f"took {self.elapsed:.2f} s, budget {self.seconds} s"


@pytest.mark.criterion(1, "irreflexivity correspondent")
def test_irreflexivity(request):
    with Budget(request, 1):
        out = correspond(parse_formula(IRREFLEXIVITY))
        res = equiv_on_frames(out, parse_fo("forall x. ~R(x,x)"), 3)
    assert res.equivalent and res.frames_checked == 530


@pytest.mark.criterion(2, "non-Sahlqvist-definable condition and its witness pair")
def test_non_definable(request):
    target = parse_fo("forall x. forall y. (R(x,y) & R(y,x) -> R(x,x))")
    with Budget(request, 1):
        out = correspond(parse_formula(NON_DEFINABLE))
        res = equiv_on_frames(out, target, 3)
        two_cycle, reflexive_point = frame(2, [(0, 1), (1, 0)]), frame(1, [(0, 0)])
        falsified = not fo_eval(two_cycle, out)
        validated = fo_eval(reflexive_point, out)
    assert res.equivalent and res.frames_checked == 530
    assert falsified and validated


@pytest.mark.criterion(3, "nested example: pure, first-order, faithful on frames <= 3")
def test_example_1(request):
    phi = parse_formula(EXAMPLE_1)
    with Budget(request, 30):
        res = run(phi)
        out = correspond(phi)
        mismatches = [f for f in FRAMES_3 if frame_valid(f, phi) != fo_eval(f, out)]
    assert is_pure(res.output) and fo.is_first_order(out)
    assert mismatches == []


@pytest.mark.criterion(4, "Gabbay rule translates to irreflexivity")
def test_gabbay_rule(request, tmp_path, capsys):
    path = tmp_path / "gabbay.json"
    path.write_text(json.dumps({"kind": "gabbay"}))
    with Budget(request, 1):
        code = main(["translate-rule", str(path), "--no-verify", "--format", "json"])
        sentence = parse_fo(json.loads(capsys.readouterr().out)["correspondent"])
        res = equiv_on_frames(sentence, parse_fo("forall x. ~R(x,x)"), 3)
    assert code == 0
    assert res.equivalent and res.frames_checked == 530


@pytest.mark.criterion(5, "success on 200 generated Pi_n-Sahlqvist formulas")
def test_success(request):
    rng = random.Random(5)
    failures = []
    with Budget(request, 60):
        for k in range(200):
            level = 1 + k % 3
            phi = random_sahlqvist(rng, level, max_vars=3, max_depth=4)
            assert modal_depth(phi) <= 4
            try:
                out = run(phi).output
            except Exception as err:  # a crash counts as a failure, not an error
                failures.append((print_formula(phi), repr(err)))
                continue
            if not is_pure(out) or any(isinstance(n, C_PROP_BINDERS) for n in subterms(out)):
                failures.append((print_formula(phi), print_complex(out)))
    assert failures == []


@pytest.mark.criterion(6, "soundness of 100 correspondents on small and random frames")
def test_soundness(request):
    rng = random.Random(6)
    discrepancies = []
    with Budget(request, 300):
        for k in range(100):
            phi = random_sahlqvist(rng, 1 + k % 3)
            sentence = correspond(phi)
            frames = FRAMES_2 + [random_frame(rng, 3) for _ in range(50)]
            for f in frames:
                if frame_valid(f, phi) != fo_eval(f, sentence):
                    discrepancies.append((print_formula(phi), f))
                    break
    assert discrepancies == []


@pytest.mark.criterion(7, "per-rule soundness, 50 instances per rule on frames <= 2")
def test_rule_soundness(request):
    bad = {}
    with Budget(request, 300):
        for rule in Rule:
            found = rule_discrepancies(random.Random(f"rule-{rule.name}"), rule, 50, FRAMES_2)
            if found:
                bad[rule.value] = found[0]
    assert bad == {}


@pytest.mark.criterion(8, "standard translation on 500 random triples")
def test_standard_translation(request):
    rng = random.Random(8)
    disagreements = []
    with Budget(request, 60):
        for _ in range(500):
            phi = random_formula(rng, 4, props=("p", "q"), noms=("i", "j"), prop_quants=2)
            m = random_model(rng, random_frame(rng, rng.randint(1, 3)), ("p", "q"), ("i", "j"))
            w = rng.choice(m.frame.worlds)
            env = {"P": m.valuation.props["p"], "Q": m.valuation.props["q"], **m.valuation.noms, "x": w}
            if eval_at(m, w, phi) != fo_eval(m.frame, st_formula(phi), env):
                disagreements.append(print_formula(phi))
    assert disagreements == []


@pytest.mark.criterion(9, "classifier sanity")
def test_classifier(request):
    def level(text):
        d = classify_sahlqvist(parse_formula(text))
        return d.level if isinstance(d, SahlqvistDerivation) else None

    with Budget(request, 5):
        first = [level(t) for t in ("!p.(p -> <>p)", "!p.([]p -> [][]p)", "!p.(p -> []<>p)")]
        second = [level(t) for t in (IRREFLEXIVITY, NON_DEFINABLE, EXAMPLE_1)]
        rejected = [
            classify_sahlqvist(parse_formula(t))
            for t in ("?p. p", "!p. !q. (<>(p -> q) -> p)", "!p. !q. (<>(p -> q) & []p -> <>q)")
        ]
    assert first == [1, 1, 1]
    assert second == [2, 2, 2]
    assert all(isinstance(r, Rejection) for r in rejected)


@pytest.mark.criterion(10, "parse and print round trip, 1000 ASTs per syntax kind")
def test_round_trip(request):
    rng = random.Random(10)
    broken = []
    with Budget(request, 60):
        for _ in range(1000):
            phi = random_formula(rng, 5)
            if parse_formula(print_formula(phi)) != phi:
                broken.append(print_formula(phi))
            c = random_comp(rng, 3)
            if parse_complex(print_complex(c)) != c:
                broken.append(print_complex(c))
            s = random_fo(rng, 5)
            if parse_fo(print_fo(s)) != s:
                broken.append(print_fo(s))
    assert broken == []
