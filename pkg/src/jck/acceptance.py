"""Acceptance runners: end-to-end checks the finished toolkit must pass.

Each runner draws a seeded corpus, exercises one slice of the library, and
returns a CriterionResult.  The same runners back both `jck selftest` and the
test suite, so a green run here is the release gate.

Expected shapes are rebuilt from raw constructors next to every call; the
checks never trust a synthesis routine to describe its own output.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass

from .syntax import (
    C, E, agent, And, App, Bang, Const, Formula, Head, Imp, Ind, Just, Neg,
    Or, Proj, Prop, Sum, Tail, Term, Tuple, Var, conj, formula_terms,
    parse_formula, parse_term, print_formula, print_term, subformulas,
    subterms, variables_in,
)
from .deduction import (
    Axiom, AxiomSchema, AxNec, ConstantSpecification, Derivation, Hyp, MP,
    Step, check_derivation, deduction_theorem, match_axiom,
)
from .errors import InvalidInput, ResourceError
from .synthesis import (
    ConstantAllocator, LiftingContext, c_inspection, c_reflexivity, c_shift,
    e_application, e_reflexivity, e_sum, i_conversion,
    internalize_induction_1, internalize_induction_2, lift, necessitate,
)
from .gen import (
    enumerate_terms, random_agent_fragment_formula, random_axiom,
    random_axiom_instance, random_derivation, random_formula, random_sort,
    random_term, random_theorem,
)
from .semantics import (
    AFModel, EvidenceFact, SaturationUniverse, attack_four_world_model,
    attack_singleton_model, build_universe, evidence_holds, random_model,
    reach_C, satisfies, saturate, valid_in_model,
)
from .modal import (
    attack_kripke_model, conservative_projection, forgetful,
    forgetful_soundness_probe, kripke_satisfies, parse_modal_formula,
    probe_modal_formula, realizes, translate_derivation_x,
)


@dataclass(frozen=True)
class CriterionResult:
    name: str
    ok: bool
    summary: str
    failures: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.ok


_MAX_FAILURES = 8  # keep reports readable; the count is still exact


def _collect(failures: list[str], label: str, problem: str) -> None:
    if len(failures) < _MAX_FAILURES:
        failures.append(f"{label}: {problem}")


# ---------------------------------------------------------------------------
# small derivation fixtures, built from raw steps


def _axiom_step(schema: AxiomSchema, instance: Formula) -> Derivation:
    return Derivation((), (Step(instance, Axiom(schema)),))


def _imp_intro(d: Derivation, premise: Formula) -> Derivation:
    """From a hypothesis-free proof of X, a proof of `premise -> X`."""
    x = d.conclusion
    steps = list(d.steps)
    n = len(steps)
    steps.append(Step(Imp(x, Imp(premise, x)), Axiom(AxiomSchema.TAUT)))
    steps.append(Step(Imp(premise, x), MP(n + 1, n)))
    return Derivation((), tuple(steps))


def _boxed_hyps_first(d: Derivation) -> Derivation:
    """Permute hypotheses into the declared lifting order, remapping Hyp steps.

    Group-boxed hypotheses stay fixed under lifting and must precede the rest;
    a random derivation may interleave them.
    """
    def is_boxed(f: Formula) -> bool:
        return isinstance(f, Just) and f.sort == C

    order = sorted(range(len(d.hypotheses)),
                   key=lambda i: (not is_boxed(d.hypotheses[i]), i))
    if order == list(range(len(d.hypotheses))):
        return d
    remap = {old + 1: new + 1 for new, old in enumerate(order)}
    steps = tuple(
        Step(s.formula, Hyp(remap[s.rule.index]) if isinstance(s.rule, Hyp) else s.rule)
        for s in d.steps)
    return Derivation(tuple(d.hypotheses[i] for i in order), steps)


def _conj_intro(d1: Derivation, d2: Derivation) -> Derivation:
    """From hypothesis-free proofs of A and B, a proof of `A & B`."""
    a, b = d1.conclusion, d2.conclusion
    steps = list(d1.steps)
    n1 = len(steps)
    for st in d2.steps:
        rule = st.rule
        if isinstance(rule, MP):
            rule = MP(rule.i + n1, rule.j + n1)
        steps.append(Step(st.formula, rule))
    n2 = len(steps)
    steps.append(Step(Imp(a, Imp(b, And(a, b))), Axiom(AxiomSchema.TAUT)))
    steps.append(Step(Imp(b, And(a, b)), MP(n2 + 1, n1)))
    steps.append(Step(And(a, b), MP(n2 + 2, n2)))
    return Derivation((), tuple(steps))


# ---------------------------------------------------------------------------
# criterion 1: every synthesis routine emits kernel-valid proofs with the
# exact conclusion its contract states


def check_synthesis_contracts(seed: int = 0) -> CriterionResult:
    """Corpus of at least 50 inputs per operation; zero tolerance on shapes."""
    rng = random.Random(seed)
    total = ConstantSpecification.total_c()
    failures: list[str] = []
    counts: dict[str, int] = {}
    started = time.monotonic()

    def run(op: str, k: int, produced: Derivation, want: Formula,
            cs: ConstantSpecification = total, fragment: str = "full") -> None:
        counts[op] = counts.get(op, 0) + 1
        label = f"{op}[{k}]"
        report = check_derivation(produced, cs, fragment=fragment)
        if not report:
            _collect(failures, label, f"kernel: {report.status} at step {report.step}")
            return
        if print_formula(produced.conclusion) != print_formula(want):
            _collect(failures, label, "conclusion differs from the stated shape")

    for k in range(50):
        h = rng.randint(1, 3)
        a = random_formula(rng, h, rng.randint(0, 2))
        b = random_formula(rng, h, rng.randint(0, 2))
        te = random_term(rng, E, h, rng.randint(0, 2))
        se = random_term(rng, E, h, rng.randint(0, 2))
        tc = random_term(rng, C, h, rng.randint(0, 2))

        run("e_reflexivity", k, e_reflexivity(te, a), Imp(Just(te, E, a), a))

        term, d = e_application(h, te, se, a, b)
        want_term = Tuple(tuple(App(Proj(i, te), Proj(i, se), agent(i))
                                for i in range(1, h + 1)))
        if term != want_term:
            _collect(failures, f"e_application[{k}]", "term shape differs")
        run("e_application", k, d,
            Imp(Just(te, E, Imp(a, b)), Imp(Just(se, E, a), Just(want_term, E, b))))

        term, dl, dr = e_sum(h, te, se, a)
        want_term = Tuple(tuple(Sum(Proj(i, te), Proj(i, se), agent(i))
                                for i in range(1, h + 1)))
        if term != want_term:
            _collect(failures, f"e_sum[{k}]", "term shape differs")
        run("e_sum", k, dl, Imp(Just(te, E, a), Just(want_term, E, a)))
        run("e_sum", k, dr, Imp(Just(se, E, a), Just(want_term, E, a)))

        i = rng.randint(1, h)
        term, d = i_conversion(tc, i, a)
        if term != Proj(i, Head(tc)):
            _collect(failures, f"i_conversion[{k}]", "term shape differs")
        run("i_conversion", k, d,
            Imp(Just(tc, C, a), Just(Proj(i, Head(tc)), agent(i), a)))

        run("c_reflexivity", k, c_reflexivity(tc, a), Imp(Just(tc, C, a), a))

        alloc = ConstantAllocator()
        f = Just(tc, C, a)
        term, d = c_inspection(tc, a, alloc)
        c1 = alloc.constant_for(Imp(f, Just(Tail(tc), E, f)))  # memoized lookup
        if term != Ind(c1, Tail(tc)):
            _collect(failures, f"c_inspection[{k}]", "term shape differs")
        run("c_inspection", k, d, Imp(f, Just(Ind(c1, Tail(tc)), C, f)))

        term, d = c_shift(tc, a, alloc)
        c2 = alloc.constant_for(Imp(f, Just(Head(tc), E, a)))
        if term != App(c2, Ind(c1, Tail(tc)), C):
            _collect(failures, f"c_shift[{k}]", "term shape differs")
        run("c_shift", k, d, Imp(f, Just(term, C, Just(Head(tc), E, a))))

    # lifting: random derivations, all five step kinds must appear in the corpus
    seen_cases: set[str] = set()
    targets = [agent(1), E, C]
    k = 0
    while k < 50 or len(seen_cases) < 5:
        if k >= 200:
            _collect(failures, "lift", f"only saw step kinds {sorted(seen_cases)}")
            break
        h = rng.randint(1, 3)
        d = _boxed_hyps_first(random_derivation(rng, h, n_extra=rng.randint(1, 4)))
        for st in d.steps:
            if isinstance(st.rule, Hyp):
                hyp = d.hypotheses[st.rule.index - 1]
                boxed = isinstance(hyp, Just) and hyp.sort == C
                seen_cases.add("hyp-boxed" if boxed else "hyp-plain")
            elif isinstance(st.rule, Axiom):
                seen_cases.add("axiom")
            elif isinstance(st.rule, AxNec):
                seen_cases.add("axnec")
            else:
                seen_cases.add("mp")
        target = targets[k % 3] if targets[k % 3] != agent(1) else agent(rng.randint(1, h))
        ctx = LiftingContext.from_derivation(d)
        term, lifted = lift(d, target, ctx, ConstantAllocator(), h=h)
        counts["lift"] = counts.get("lift", 0) + 1
        label = f"lift[{k}]"
        report = check_derivation(lifted, total, fragment="full")
        if not report:
            _collect(failures, label, f"kernel: {report.status} at step {report.step}")
        want = Just(term, target, d.conclusion)
        if lifted.conclusion != want:
            _collect(failures, label, "conclusion differs from the stated shape")
        n_boxed = len(ctx.boxed)
        front = lifted.hypotheses[:n_boxed]
        back = lifted.hypotheses[n_boxed:]
        if front != tuple(Just(s, C, bb) for s, bb in ctx.boxed):
            _collect(failures, label, "boxed hypotheses were not kept fixed")
        if len(back) != len(ctx.plain) or any(
                not (isinstance(f, Just) and f.sort == target
                     and isinstance(f.term, Var) and f.body == ck)
                for f, ck in zip(back, ctx.plain)):
            _collect(failures, label, "plain hypotheses not boxed under fresh variables")
        k += 1

    for k in range(50):
        h = rng.randint(1, 3)
        d = random_theorem(rng, h)
        target = targets[k % 3] if targets[k % 3] != agent(1) else agent(rng.randint(1, h))
        term, boxed = necessitate(d, target, ConstantAllocator(), h=h)
        run("necessitate", k, boxed, Just(term, target, d.conclusion))
        if boxed.hypotheses:
            _collect(failures, f"necessitate[{k}]", "output kept hypotheses")
        if variables_in(term):
            _collect(failures, f"necessitate[{k}]", "term is not ground")

    for k in range(50):
        h = rng.randint(1, 3)
        alloc = ConstantAllocator()
        schema, inst = random_axiom(rng, h)
        base = _axiom_step(schema, inst)
        a0 = inst
        s_term, boxed = necessitate(base, E, alloc, h=h)
        d = _imp_intro(boxed, a0)  # proves A -> [s]@E A
        t, proof = internalize_induction_1(a0, s_term, d, alloc, h=h)
        run("internalize_induction_1", k, proof,
            Imp(a0, Just(Ind(t, s_term), C, a0)))

    for k in range(50):
        h = rng.randint(1, 3)
        alloc = ConstantAllocator()
        sch1, a0 = random_axiom(rng, h)
        sch2, b0 = random_axiom(rng, h)
        both = _conj_intro(_axiom_step(sch1, a0), _axiom_step(sch2, b0))
        s_term, boxed = necessitate(both, E, alloc, h=h)
        d = _imp_intro(boxed, b0)  # proves B -> [s]@E (A & B)
        t, c, proof = internalize_induction_2(a0, b0, s_term, d, alloc, h=h)
        if c != alloc.constant_for(Imp(And(a0, b0), a0)):
            _collect(failures, f"internalize_induction_2[{k}]", "constant differs")
        run("internalize_induction_2", k, proof,
            Imp(b0, Just(App(c, Ind(t, s_term), C), C, a0)))

    for k in range(50):
        h = rng.randint(1, 3)
        d = random_derivation(rng, h, n_extra=rng.randint(1, 4))
        if not d.hypotheses:
            d = Derivation((random_formula(rng, h, 1),), d.steps)
        hyp = d.hypotheses[rng.randrange(len(d.hypotheses))]
        out = deduction_theorem(d, hyp, total)
        counts["deduction_theorem"] = counts.get("deduction_theorem", 0) + 1
        label = f"deduction_theorem[{k}]"
        report = check_derivation(out, total)
        if not report:
            _collect(failures, label, f"kernel: {report.status} at step {report.step}")
        if out.conclusion != Imp(hyp, d.conclusion):
            _collect(failures, label, "conclusion differs from the stated shape")
        if out.hypotheses != tuple(f for f in d.hypotheses if f != hyp):
            _collect(failures, label, "hypothesis list not reduced correctly")

    for k in range(50):
        h = rng.randint(1, 3)
        d = random_derivation(rng, h, n_extra=rng.randint(1, 4))
        x = translate_derivation_x(d, total)
        counts["translate_derivation_x"] = counts.get("translate_derivation_x", 0) + 1
        label = f"translate_derivation_x[{k}]"
        report = check_derivation(x.derivation, x.cs, fragment="agent")
        if not report:
            _collect(failures, label, f"kernel: {report.status} at step {report.step}")
        if x.derivation.conclusion != conservative_projection(d.conclusion):
            _collect(failures, label, "conclusion is not the projected image")
        if x.derivation.hypotheses != tuple(conservative_projection(f)
                                            for f in d.hypotheses):
            _collect(failures, label, "hypotheses are not the projected images")

    elapsed = time.monotonic() - started
    low = [op for op, n in counts.items() if n < 50]
    ok = not failures and not low and elapsed < 60.0
    parts = [f"{op}={n}" for op, n in sorted(counts.items())]
    summary = (f"{sum(counts.values())} synthesized proofs kernel-checked in "
               f"{elapsed:.1f}s ({', '.join(parts)})")
    if low:
        summary += f"; under-sampled: {low}"
    return CriterionResult("synthesis-contracts", ok, summary, tuple(failures))


# ---------------------------------------------------------------------------
# criterion 2: theorems hold in every unrestricted-evidence model


def check_provable_implies_valid(seed: int = 0) -> CriterionResult:
    """100 random full-evidence models against 25 synthesized theorems."""
    rng = random.Random(seed)
    total = ConstantSpecification.total_c()
    failures: list[str] = []

    pool: list[tuple[int, Formula]] = []
    for k in range(25):
        h = (k % 3) + 1 if k < 3 else rng.randint(1, 3)
        d = random_theorem(rng, h)
        if not check_derivation(d, total):
            _collect(failures, f"theorem[{k}]", "generator emitted an invalid proof")
            continue
        pool.append((h, d.conclusion))

    n_checks = 0
    for k in range(100):
        h = rng.randint(1, 3)
        m = random_model(h, rng.randint(1, 5), density=0.4, n_base=0,
                         seed=rng.randrange(10 ** 9), mode="full")
        for h_t, f in pool:
            if h_t != h:
                continue
            n_checks += 1
            if not valid_in_model(m, f):
                _collect(failures, f"model[{k}]",
                         f"theorem fails: {print_formula(f)}")

    ok = not failures and len(pool) == 25 and n_checks >= 100
    summary = (f"{len(pool)} theorems checked against 100 models, "
               f"{n_checks} validity checks, {len(failures)} failures")
    return CriterionResult("provable-implies-valid", ok, summary, tuple(failures))


# ---------------------------------------------------------------------------
# criterion 3: the indexed saturator agrees with a naive fixpoint oracle


def naive_saturate(m: AFModel, universe: SaturationUniverse) -> frozenset:
    """Reference closure: re-scan every fact against every rule until stable.

    Deliberately unoptimized and structured rule-by-rule so it can be audited
    against the closure conditions by eye.
    """
    tu, fu = universe.terms, universe.formulas
    facts: set[tuple[int, Term, Formula]] = set()
    for fact in m.evidence_base:
        if fact.world in m.worlds and fact.term in tu and fact.formula in fu:
            facts.add((fact.world, fact.term, fact.formula))
    if m.cs.kind == "totalC":
        for t in tu:
            if isinstance(t, Const) and t.sort == C:
                for a in fu:
                    if match_axiom(a):
                        for w in m.worlds:
                            facts.add((w, t, a))
    else:
        for c, a in m.cs.pairs():
            if c in tu and a in fu:
                for w in m.worlds:
                    facts.add((w, c, a))

    rels = {agent(i): m.relations[i] for i in range(1, m.h + 1)}
    rels[C] = reach_C(m)  # evidence persists along reachability, not one step

    changed = True
    while changed:
        changed = False
        new: set[tuple[int, Term, Formula]] = set()
        for (w, t, a) in facts:
            s = t.sort
            if s.is_agent or s == C:  # no monotonicity at the group sort
                for (x, v) in rels[s]:
                    if x == w:
                        new.add((v, t, a))
            for u in tu:
                if isinstance(u, Sum) and u.sort == s and (u.t == t or u.s == t):
                    new.add((w, u, a))
                if isinstance(u, App) and u.t == t and isinstance(a, Imp) \
                        and a.right in fu and (w, u.s, a.left) in facts:
                    new.add((w, u, a.right))
                if isinstance(u, Bang) and u.t == t and s.is_agent:
                    boxed = Just(t, s, a)
                    if boxed in fu:
                        new.add((w, u, boxed))
                if isinstance(u, Tuple) and s.is_agent and len(u.items) >= s.index \
                        and u.items[s.index - 1] == t \
                        and all((w, item, a) in facts for item in u.items):
                    new.add((w, u, a))
                if isinstance(u, Proj) and u.t == t and s == E:
                    new.add((w, u, a))
                if isinstance(u, Head) and u.t == t and s == C:
                    new.add((w, u, a))
                if isinstance(u, Tail) and u.t == t and s == C:
                    boxed = Just(t, C, a)
                    if boxed in fu:
                        new.add((w, u, boxed))
                if isinstance(u, Ind) and u.s == t and s == E \
                        and (w, u.t, Imp(a, Just(t, E, a))) in facts:
                    new.add((w, u, a))
        fresh = new - facts
        if fresh:
            facts |= fresh
            changed = True
    return frozenset(facts)


def _biased_saturation_instance(rng: random.Random) -> tuple[AFModel, Formula]:
    """A small model whose evidence base reuses the query's own material.

    Sharing terms and formulas with the query makes the closure rules fire;
    fully random bases mostly saturate in one round.
    """
    h = rng.choice((1, 2, 3))
    frame = random_model(h, rng.randint(1, 4), density=0.4, n_base=0,
                         seed=rng.randrange(10 ** 9), mode="base")
    q = random_formula(rng, h, rng.randint(1, 3))

    cs = ConstantSpecification.total_c()
    extra_terms: list[Term] = []
    if rng.random() < 0.3:
        members = set()
        for _ in range(rng.randint(1, 3)):
            sort = random_sort(rng, h, star=True)
            body = random_axiom(rng, h)[1]
            index = rng.randint(1, 3)
            members.add((index, sort, body))
            extra_terms.append(Const(index, sort))
        cs = ConstantSpecification.extensional(frozenset(members))

    term_pool = sorted(
        {s for t in formula_terms(q) for s in subterms(t)} | set(extra_terms),
        key=print_term)
    formula_pool = sorted(subformulas(q), key=print_formula)
    worlds = sorted(frame.worlds)

    base = []
    for _ in range(rng.randint(1, 6)):
        if term_pool and rng.random() < 0.7:
            t = rng.choice(term_pool)
        else:
            t = random_term(rng, random_sort(rng, h), h, 1)
        a = rng.choice(formula_pool)
        base.append(EvidenceFact(rng.choice(worlds), t, a))
    m = AFModel(h, frame.worlds, frame.relations, frame.valuation,
                evidence_base=tuple(base), cs=cs, mode="base")
    return m, q


def check_saturation_oracle(seed: int = 0) -> CriterionResult:
    """200+ instances, at most 4 worlds and 40 universe formulas, exact match."""
    rng = random.Random(seed)
    failures: list[str] = []
    ran = 0
    attempts = 0
    max_facts = 0
    while ran < 200 and attempts < 1200:
        attempts += 1
        m, q = _biased_saturation_instance(rng)
        try:
            universe = build_universe(m, q, depth_budget=2, max_size=4000)
        except ResourceError:
            continue
        if len(universe.formulas) > 40:
            continue
        fast = saturate(m, universe)
        slow = naive_saturate(m, universe)
        ran += 1
        max_facts = max(max_facts, len(slow))
        if fast != slow:
            only_fast = sorted(print_term(t) for (_, t, _) in fast - slow)[:2]
            only_slow = sorted(print_term(t) for (_, t, _) in slow - fast)[:2]
            _collect(failures, f"instance[{attempts}]",
                     f"indexed-only={only_fast} naive-only={only_slow}")
    ok = not failures and ran >= 200
    summary = (f"{ran} instances compared ({attempts} drawn), largest fact set "
               f"{max_facts}, {len(failures)} mismatches")
    return CriterionResult("saturation-oracle", ok, summary, tuple(failures))


# ---------------------------------------------------------------------------
# criterion 4: the coordinated-attack scenario, reproduced end to end


def attack_term_families(max_depth: int = 3) -> tuple[list[Term], list[Term]]:
    """All candidate messenger terms over the scenario's constants.

    Returns (agent-2 terms, group-level terms) built from m1, m2 and one
    common-sort constant, up to the given structural depth.
    """
    leaves: list[Term] = [Const("m1", agent(2)), Const("m2", agent(1)), Const(1, C)]
    fam2 = enumerate_terms(leaves, agent(2), max_depth, h=2)
    fam_c = enumerate_terms(leaves, C, max_depth, h=2)
    return fam2, fam_c


def check_attack_scenario(seed: int = 0) -> CriterionResult:
    """Positive and negative claims of the two-general exchange, all three parts.

    Part (c) is a bounded check: it sweeps every candidate term up to depth 3
    under saturation budget 3, not all terms of every depth.
    """
    failures: list[str] = []
    del_ = Prop("del")
    m1 = Const("m1", agent(2))
    m2 = Const("m2", agent(1))
    got_msg = Just(m1, agent(2), del_)            # agent 2 holds the delivery
    knows_msg = Just(m2, agent(1), got_msg)       # agent 1 holds agent 2's receipt

    # (a) four-world model: both positives at world 0, no third-level evidence
    m4 = attack_four_world_model()
    if not satisfies(m4, 0, got_msg):
        _collect(failures, "a", "first-hand delivery claim fails at world 0")
    if not satisfies(m4, 0, knows_msg):
        _collect(failures, "a", "second-hand delivery claim fails at world 0")
    fam2, fam_c = attack_term_families()
    bad2 = [s for s in fam2 if satisfies(m4, 0, Just(s, agent(2), knows_msg))]
    if bad2:
        _collect(failures, "a", f"third-level witness found: {print_term(bad2[0])}")
    bad_c = [t for t in fam_c if satisfies(m4, 0, Just(t, C, del_))]
    if bad_c:
        _collect(failures, "a", f"common witness found: {print_term(bad_c[0])}")

    # (b) the relational counterpart refutes the same pattern
    mk = attack_kripke_model()
    phi = parse_modal_formula("#2 del & #1 #2 del -> #C del", 2)
    if kripke_satisfies(mk, 0, phi):
        _collect(failures, "b", "relational model satisfies the implication")

    # (c) minimal-evidence model: no enumerated term earns common evidence.
    # Bounded: depth 3 candidates, saturation budget 3.
    ms = attack_singleton_model()
    if not satisfies(ms, 0, got_msg) or not satisfies(ms, 0, knows_msg):
        _collect(failures, "c", "base facts do not support the positives")
    bad_e = [t for t in fam_c if evidence_holds(ms, 0, t, del_, depth_budget=3)]
    if bad_e:
        _collect(failures, "c", f"common evidence found: {print_term(bad_e[0])}")

    ok = not failures
    summary = (f"positives hold; {len(fam2)} agent-2 terms and {len(fam_c)} "
               f"common terms all refused (part (c) is a bounded check: "
               f"depth 3, saturation budget 3)")
    return CriterionResult("attack-scenario", ok, summary, tuple(failures))


# ---------------------------------------------------------------------------
# criterion 5: translation contracts


def check_translation_contracts(seed: int = 0) -> CriterionResult:
    """Projection fixes the single-agent fragment; axiom images re-check."""
    rng = random.Random(seed)
    total = ConstantSpecification.total_c()
    failures: list[str] = []

    for k in range(100):
        h = rng.randint(1, 3)
        a = random_agent_fragment_formula(rng, h, rng.randint(0, 3))
        if conservative_projection(a) != a:
            _collect(failures, f"identity[{k}]", print_formula(a))

    schemata = list(AxiomSchema)
    for k in range(50):
        h = rng.randint(1, 3)
        schema = schemata[k % len(schemata)]
        inst = random_axiom_instance(rng, schema, h)
        x = translate_derivation_x(_axiom_step(schema, inst), total)
        report = check_derivation(x.derivation, x.cs, fragment="agent")
        if not report:
            _collect(failures, f"axiom[{k}] {schema.value}",
                     f"kernel: {report.status} at step {report.step}")
        if x.derivation.conclusion != conservative_projection(inst):
            _collect(failures, f"axiom[{k}] {schema.value}",
                     "conclusion is not the projected image")

    for k in range(100):
        h = rng.randint(1, 3)
        r = random_formula(rng, h, rng.randint(0, 3))
        if not realizes(r, forgetful(r)):
            _collect(failures, f"realizes[{k}]", print_formula(r))

    ok = not failures
    summary = ("100 fragment identities, 50 translated axiom instances, "
               f"100 realization checks, {len(failures)} failures")
    return CriterionResult("translation-contracts", ok, summary, tuple(failures))


# ---------------------------------------------------------------------------
# criterion 6: the modal image of a theorem survives random model search


def check_forgetful_probe(seed: int = 0) -> CriterionResult:
    """25 theorems, 100 trials each, plus one deliberately broken control."""
    rng = random.Random(seed)
    total = ConstantSpecification.total_c()
    failures: list[str] = []

    for k in range(25):
        h = rng.randint(1, 3)
        d = random_theorem(rng, h)
        if not check_derivation(d, total):
            _collect(failures, f"theorem[{k}]", "generator emitted an invalid proof")
            continue
        report = forgetful_soundness_probe(d, h, trials=100,
                                           seed=rng.randrange(10 ** 9))
        if report.refuted:
            _collect(failures, f"theorem[{k}]",
                     f"countermodel for {print_formula(d.conclusion)}")

    control = parse_modal_formula("#1 P1 -> #C P1", 2)
    control_report = probe_modal_formula(control, 2, trials=100, seed=seed)
    if not control_report.refuted:
        _collect(failures, "control", "broken formula was not refuted in 100 trials")

    ok = not failures
    summary = (f"25 theorems unrefuted in 100 trials each; control refuted: "
               f"{control_report.refuted}")
    return CriterionResult("forgetful-probe", ok, summary, tuple(failures))


# ---------------------------------------------------------------------------
# criterion 7: printing then parsing is the identity


def check_round_trip(seed: int = 0) -> CriterionResult:
    """500 random terms and formulas survive a print/parse cycle unchanged."""
    rng = random.Random(seed)
    failures: list[str] = []

    for k in range(250):
        h = rng.randint(1, 3)
        t = random_term(rng, random_sort(rng, h), h, rng.randint(0, 4))
        text = print_term(t)
        back = parse_term(text, h)
        if back != t or print_term(back) != text:
            _collect(failures, f"term[{k}]", text)

    for k in range(250):
        h = rng.randint(1, 3)
        a = random_formula(rng, h, rng.randint(0, 4))
        text = print_formula(a)
        back = parse_formula(text, h)
        if back != a or print_formula(back) != text:
            _collect(failures, f"formula[{k}]", text)

    ok = not failures
    summary = f"250 terms and 250 formulas round-tripped, {len(failures)} failures"
    return CriterionResult("round-trip", ok, summary, tuple(failures))


# ---------------------------------------------------------------------------


ALL_CHECKS = (
    check_synthesis_contracts,
    check_provable_implies_valid,
    check_saturation_oracle,
    check_attack_scenario,
    check_translation_contracts,
    check_forgetful_probe,
    check_round_trip,
)


def run_all(seed: int = 0) -> tuple[CriterionResult, ...]:
    """Run every acceptance check on independent streams derived from `seed`."""
    return tuple(fn(seed + k) for k, fn in enumerate(ALL_CHECKS))


def format_results(results) -> str:
    lines = []
    for r in results:
        mark = "PASS" if r.ok else "FAIL"
        lines.append(f"[{mark}] {r.name}: {r.summary}")
        for f in r.failures:
            lines.append(f"       - {f}")
    n_bad = sum(1 for r in results if not r.ok)
    lines.append(f"{len(results) - n_bad}/{len(results)} checks passed")
    return "\n".join(lines)
