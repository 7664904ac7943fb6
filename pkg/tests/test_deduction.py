"""Kernel: tautologies, schema matching, constant specifications, checking."""

import random

import pytest

from jck.errors import InvalidInput, ParseError, ResourceError
from jck.gen import random_axiom_instance, random_derivation, random_formula
from jck.deduction import (
    AGENT_FRAGMENT_SCHEMATA, Axiom, AxiomSchema, AxNec, ConstantSpecification,
    Derivation, Hyp, MP, Step, check_derivation, cs_contains,
    deduction_theorem, is_agent_fragment_formula, is_agent_fragment_term,
    is_axiom, is_tautology, match_axiom, matches_schema, parse_derivation,
    print_derivation,
)
from jck.syntax import (
    C, E, And, App, Bang, Const, Head, Imp, Ind, Just, Neg, Or, Proj, Prop,
    Sum, Tail, Tuple, Var, agent, conj, parse_formula, print_formula,
)

TC = ConstantSpecification.total_c()


# ---------------------------------------------------------------------------
# tautology checking


def test_tautology_basics():
    p, q = Prop(1), Prop(2)
    assert is_tautology(Imp(p, p))
    assert is_tautology(Imp(Imp(Imp(p, q), p), p))  # Peirce
    assert is_tautology(Or(p, Neg(p)))
    assert not is_tautology(Imp(p, q))
    assert not is_tautology(And(p, Neg(p)))


def test_justified_assertions_are_opaque_atoms():
    t = Var(1, C)
    assert is_tautology(Imp(Just(t, C, Prop(1)), Just(t, C, Prop(1))))
    # the same body under different terms gives distinct atoms
    assert not is_tautology(Imp(Just(t, C, Prop(1)), Just(Var(2, C), C, Prop(1))))
    # boxes do not decompose: [t] (P1 & P2) does not entail [t] P1
    assert not is_tautology(Imp(Just(t, C, And(Prop(1), Prop(2))), Just(t, C, Prop(1))))


def test_tautology_atom_cap():
    parts = [Prop(i) for i in range(1, 26)]
    with pytest.raises(ResourceError):
        is_tautology(Imp(conj(parts), conj(parts)))  # 25 atoms, default cap 24
    small = [Prop(i) for i in range(1, 6)]
    with pytest.raises(ResourceError):
        is_tautology(Imp(conj(small), conj(small)), max_atoms=4)
    assert is_tautology(Imp(conj(small), conj(small)), max_atoms=5)


def test_tautology_rejects_non_formula():
    with pytest.raises(InvalidInput):
        is_tautology(Var(1, C))


# ---------------------------------------------------------------------------
# schema matching


def test_match_axiom_hand_instances():
    two = agent(2)
    t, s = Var(1, two), Var(2, two)
    a, b = Prop(1), Prop(2)
    cases = {
        AxiomSchema.APP: Imp(Just(t, two, Imp(a, b)),
                             Imp(Just(s, two, a), Just(App(t, s, two), two, b))),
        AxiomSchema.SUML: Imp(Just(t, two, a), Just(Sum(t, s, two), two, a)),
        AxiomSchema.SUMR: Imp(Just(s, two, a), Just(Sum(t, s, two), two, a)),
        AxiomSchema.REFL: Imp(Just(t, two, a), a),
        AxiomSchema.INSP: Imp(Just(t, two, a), Just(Bang(t, 2), two, Just(t, two, a))),
        AxiomSchema.PROJ: Imp(Just(Var(1, E), E, a), Just(Proj(2, Var(1, E)), two, a)),
        AxiomSchema.COCLOSHEAD: Imp(Just(Var(1, C), C, a), Just(Head(Var(1, C)), E, a)),
        AxiomSchema.COCLOSTAIL: Imp(Just(Var(1, C), C, a),
                                    Just(Tail(Var(1, C)), E, Just(Var(1, C), C, a))),
    }
    for schema, inst in cases.items():
        assert schema in match_axiom(inst), schema
        assert is_axiom(inst)


def test_match_axiom_tupling_and_induction():
    a = Prop(1)
    t1, t2 = Var(1, agent(1)), Var(2, agent(2))
    tupling = Imp(And(Just(t1, agent(1), a), Just(t2, agent(2), a)),
                  Just(Tuple((t1, t2)), E, a))
    assert AxiomSchema.TUPLING in match_axiom(tupling)
    tc, se = Var(1, C), Var(1, E)
    induction = Imp(And(a, Just(tc, C, Imp(a, Just(se, E, a)))),
                    Just(Ind(tc, se), C, a))
    assert AxiomSchema.INDUCTION in match_axiom(induction)


def test_match_axiom_near_misses():
    two = agent(2)
    t, s = Var(1, two), Var(2, two)
    a, b = Prop(1), Prop(2)
    # application with the sides swapped in the result term
    wrong_app = Imp(Just(t, two, Imp(a, b)),
                    Imp(Just(s, two, a), Just(App(s, t, two), two, b)))
    assert AxiomSchema.APP not in match_axiom(wrong_app)
    # left/right pooling are distinct
    suml = Imp(Just(t, two, a), Just(Sum(t, s, two), two, a))
    assert AxiomSchema.SUMR not in match_axiom(suml)
    # inspection must box the original assertion
    wrong_insp = Imp(Just(t, two, a), Just(Bang(t, 2), two, a))
    assert not match_axiom(wrong_insp)
    # tail co-closure without the re-boxing is not an axiom
    weak_tail = Imp(Just(Var(1, C), C, a), Just(Tail(Var(1, C)), E, a))
    assert not match_axiom(weak_tail)
    # induction with a different evidence term in the body
    tc, se = Var(1, C), Var(1, E)
    wrong_ind = Imp(And(a, Just(tc, C, Imp(a, Just(Var(2, E), E, a)))),
                    Just(Ind(tc, se), C, a))
    assert AxiomSchema.INDUCTION not in match_axiom(wrong_ind)


def test_match_axiom_against_generator():
    # every generated instance of a schema matches that schema
    rng = random.Random(5)
    for k in range(220):
        schema = list(AxiomSchema)[k % len(AxiomSchema)]
        h = rng.randint(1, 3)
        inst = random_axiom_instance(rng, schema, h, depth=rng.randint(0, 1))
        assert schema in match_axiom(inst), (schema, print_formula(inst))


def test_random_formulas_rarely_axioms():
    # sanity: the matcher does not accept everything
    rng = random.Random(6)
    hits = sum(bool(match_axiom(random_formula(rng, 2, 2))) for _ in range(200))
    assert hits <= 20


# ---------------------------------------------------------------------------
# agent fragment


def test_agent_fragment_membership():
    assert is_agent_fragment_term(Sum(Var(1, agent(1)), Bang(Var(2, agent(1)), 1), agent(1)))
    assert not is_agent_fragment_term(Proj(1, Var(1, E)))
    assert is_agent_fragment_formula(Just(Var(1, agent(2)), agent(2), Prop(1)))
    assert not is_agent_fragment_formula(Just(Var(1, C), C, Prop(1)))
    assert not is_agent_fragment_formula(
        Just(Var(1, agent(1)), agent(1), Just(Var(1, C), C, Prop(1))))
    assert AGENT_FRAGMENT_SCHEMATA == {
        AxiomSchema.TAUT, AxiomSchema.APP, AxiomSchema.SUML, AxiomSchema.SUMR,
        AxiomSchema.REFL, AxiomSchema.INSP}


# ---------------------------------------------------------------------------
# constant specifications


def test_total_specification():
    c = Const(1, C)
    refl = Imp(Just(Var(1, agent(1)), agent(1), Prop(1)), Prop(1))
    assert cs_contains(TC, c, C, refl)
    assert not cs_contains(TC, c, C, Prop(1))  # not an axiom
    assert not cs_contains(TC, Const(1, agent(1)), agent(1), refl)  # C only
    assert TC.is_c_axiomatically_appropriate
    assert TC.is_pure == C
    with pytest.raises(InvalidInput):
        list(TC.pairs())


def test_extensional_specification_validates():
    refl = Imp(Just(Var(1, agent(1)), agent(1), Prop(1)), Prop(1))
    cs = ConstantSpecification.extensional({(4, agent(2), refl)})
    assert cs_contains(cs, Const(4, agent(2)), agent(2), refl)
    assert not cs_contains(cs, Const(4, C), C, refl)
    assert list(cs.pairs()) == [(Const(4, agent(2)), refl)]
    assert not cs.is_c_axiomatically_appropriate
    with pytest.raises(InvalidInput):
        ConstantSpecification.extensional({(1, C, Prop(1))})
    # validation can be waived for deliberately non-well-founded tables
    loose = ConstantSpecification.extensional({(1, C, Prop(1))}, validate=False)
    assert cs_contains(loose, Const(1, C), C, Prop(1))


# ---------------------------------------------------------------------------
# the checker


def _drv(*steps, hyps=()):
    return Derivation(tuple(hyps), tuple(steps))


def test_check_accepts_modus_ponens_chain():
    p, q = Prop(1), Prop(2)
    d = _drv(
        Step(p, Hyp(1)),
        Step(Imp(p, q), Hyp(2)),
        Step(q, MP(2, 1)),
        hyps=(p, Imp(p, q)))
    assert check_derivation(d, TC).ok
    assert d.conclusion == q


def test_check_statuses():
    p = Prop(1)
    bad_hyp = _drv(Step(p, Hyp(3)), hyps=(p,))
    assert check_derivation(bad_hyp, TC).status == "BadHypIndex"

    not_axiom = _drv(Step(Imp(p, Prop(2)), Axiom(AxiomSchema.TAUT)))
    r = check_derivation(not_axiom, TC)
    assert r.status == "NotAnAxiom" and r.step == 1

    bad_mp = _drv(Step(Imp(p, p), Axiom(AxiomSchema.TAUT)), Step(p, MP(1, 1)))
    assert check_derivation(bad_mp, TC).status == "BadMP"

    dangling = _drv(Step(p, MP(2, 3)))
    assert check_derivation(dangling, TC).status == "BadMP"

    refl = Imp(Just(Var(1, agent(1)), agent(1), p), p)
    agent_const = _drv(Step(Just(Const(1, agent(1)), agent(1), refl),
                            AxNec(Const(1, agent(1)))))
    assert check_derivation(agent_const, TC).status == "NotInCS"

    c_level = _drv(Step(Just(Const(1, C), C, refl), AxNec(Const(1, C))))
    assert check_derivation(c_level, TC).ok


def test_check_fragment_restriction():
    proj = Imp(Just(Var(1, E), E, Prop(1)), Just(Proj(1, Var(1, E)), agent(1), Prop(1)))
    d = _drv(Step(proj, Axiom(AxiomSchema.PROJ)))
    assert check_derivation(d, TC).ok
    assert check_derivation(d, TC, fragment="agent").status == "NotInFragment"
    # hypothesis steps outside the fragment are barred when cited
    boxed = Just(Var(1, C), C, Prop(1))
    d2 = _drv(Step(boxed, Hyp(1)), hyps=(boxed,))
    assert check_derivation(d2, TC).ok
    assert check_derivation(d2, TC, fragment="agent").status == "NotInFragment"


def test_check_agent_bound():
    d = _drv(Step(Imp(Just(Var(1, agent(3)), agent(3), Prop(1)), Prop(1)),
                  Axiom(AxiomSchema.REFL)))
    assert check_derivation(d, TC, h=3).ok
    assert check_derivation(d, TC, h=2).status == "IllFormed"


def test_random_derivations_check():
    rng = random.Random(9)
    for _ in range(40):
        d = random_derivation(rng, rng.randint(1, 3))
        assert check_derivation(d, TC).ok


# ---------------------------------------------------------------------------
# deduction theorem


def test_deduction_theorem_shape_and_validity():
    rng = random.Random(10)
    for _ in range(30):
        d = random_derivation(rng, rng.randint(1, 3))
        if not d.hypotheses:
            continue
        hyp = d.hypotheses[rng.randrange(len(d.hypotheses))]
        out = deduction_theorem(d, hyp, TC)
        assert check_derivation(out, TC).ok
        assert out.conclusion == Imp(hyp, d.conclusion)
        assert hyp not in out.hypotheses


def test_deduction_theorem_removes_duplicates():
    p, q = Prop(1), Prop(2)
    d = _drv(
        Step(p, Hyp(1)),
        Step(Imp(p, Imp(p, q)), Hyp(2)),
        Step(Imp(p, q), MP(2, 1)),
        Step(q, MP(3, 1)),
        hyps=(p, Imp(p, Imp(p, q)), p))
    out = deduction_theorem(d, p, TC)
    assert out.hypotheses == (Imp(p, Imp(p, q)),)
    assert out.conclusion == Imp(p, q)
    assert check_derivation(out, TC).ok


def test_deduction_theorem_requires_present_hypothesis():
    d = _drv(Step(Prop(1), Hyp(1)), hyps=(Prop(1),))
    with pytest.raises(InvalidInput):
        deduction_theorem(d, Prop(2), TC)


def test_deduction_theorem_rejects_invalid_input():
    d = _drv(Step(Prop(1), Hyp(1)), Step(Prop(2), MP(1, 1)), hyps=(Prop(1),))
    with pytest.raises(InvalidInput):
        deduction_theorem(d, Prop(1), TC)


# ---------------------------------------------------------------------------
# derivation files


def test_derivation_file_round_trip():
    rng = random.Random(11)
    for _ in range(25):
        d = random_derivation(rng, 2)
        text = print_derivation(d)
        assert parse_derivation(text, 2) == d


def test_derivation_file_errors():
    with pytest.raises(ParseError):
        parse_derivation("1. P1 ; axiom Bogus", 2)
    with pytest.raises(ParseError):
        parse_derivation("2. P1 ; hyp 1", 2)  # numbering starts at 1
    with pytest.raises(ParseError):
        parse_derivation("1. P1 ; mp 1", 2)  # mp needs two indexes
    with pytest.raises(ParseError):
        parse_derivation("# only a comment\n", 2)
    with pytest.raises(ParseError):
        parse_derivation("1. P1 ; hyp 1\nhyp: P1", 2)  # hyps come first


def test_derivation_file_comments_and_blanks():
    text = "# leading comment\nhyp: P1\n\n1. P1 ; hyp 1\n"
    d = parse_derivation(text, 2)
    assert d.hypotheses == (Prop(1),)
    assert d.conclusion == Prop(1)
