"""Constructive evidence-term and derivation synthesis.

Every operation here returns an explicit derivation and never trusts itself:
callers (and the test suite) re-check each output with the kernel.  Derived
group-level operations are built from projections and tupling; common-level
introspection and conversion go through the co-closure operators and the
induction axiom, consuming constants from a ConstantAllocator.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .deduction import (
    Axiom, AxiomSchema, AxNec, ConstantSpecification, Derivation, Hyp, MP,
    Rule, Step, is_axiom,
)
from .errors import InvalidInput
from .syntax import (
    And, App, C, Const, E, Formula, Head, Imp, Ind, Just, Proj, Sort, Sum,
    Tail, Term, Tuple, Var, agent, conj, print_formula, variables_in,
)


@dataclass
class ConstantAllocator:
    """Hands out C-sorted proof constants for axiom instances, memoized.

    The same axiom instance always receives the same constant, so repeated
    synthesis calls are deterministic.  The live table doubles as a pure,
    C-axiomatically appropriate constant specification.
    """

    memo: dict[Formula, int] = field(default_factory=dict)
    next_index: int = 1

    def constant_for(self, axiom_formula: Formula) -> Const:
        if not is_axiom(axiom_formula):
            raise InvalidInput(f"not an axiom instance: {print_formula(axiom_formula)}")
        idx = self.memo.get(axiom_formula)
        if idx is None:
            idx = self.next_index
            self.memo[axiom_formula] = idx
            self.next_index += 1
        return Const(idx, C)

    def as_cs(self) -> ConstantSpecification:
        return ConstantSpecification.allocated(self)

    def snapshot(self) -> "ConstantAllocator":
        """Independent copy, for forked test shards."""
        return ConstantAllocator(dict(self.memo), self.next_index)


class _Builder:
    """Accumulates steps; all indices are 1-based, as in derivation files."""

    def __init__(self, hypotheses: tuple[Formula, ...] = ()):
        self.hypotheses = tuple(hypotheses)
        self.steps: list[Step] = []

    def _emit(self, formula: Formula, rule: Rule) -> int:
        self.steps.append(Step(formula, rule))
        return len(self.steps)

    def formula(self, k: int) -> Formula:
        return self.steps[k - 1].formula

    def hyp(self, index: int) -> int:
        return self._emit(self.hypotheses[index - 1], Hyp(index))

    def axiom(self, schema: AxiomSchema, formula: Formula) -> int:
        return self._emit(formula, Axiom(schema))

    def taut(self, formula: Formula) -> int:
        return self._emit(formula, Axiom(AxiomSchema.TAUT))

    def axnec(self, constant: Const, body: Formula) -> int:
        return self._emit(Just(constant, constant.sort, body), AxNec(constant))

    def mp(self, i: int, j: int) -> int:
        major = self.formula(i)
        if not isinstance(major, Imp) or major.left != self.formula(j):
            raise InvalidInput("builder misuse: steps do not compose under modus ponens")
        return self._emit(major.right, MP(i, j))

    def include(self, d: Derivation) -> int:
        """Splice a hypothesis-free derivation in; returns its conclusion's index."""
        if d.hypotheses:
            raise InvalidInput("can only include hypothesis-free derivations")
        offset = len(self.steps)
        for step in d.steps:
            rule = step.rule
            if isinstance(rule, MP):
                rule = MP(rule.i + offset, rule.j + offset)
            self.steps.append(Step(step.formula, rule))
        return len(self.steps)

    def by_taut(self, premises: list[int], target: Formula) -> int:
        """Close a propositional gap: premises F1..Fn entail `target`.

        Emits the curried tautology F1 -> (F2 -> ... -> target) and peels it
        with one modus ponens per premise.  The kernel verifies the tautology.
        """
        curried = target
        for k in reversed(premises):
            curried = Imp(self.formula(k), curried)
        at = self.taut(curried)
        for k in premises:
            at = self.mp(at, k)
        return at

    def build(self) -> Derivation:
        return Derivation(self.hypotheses, tuple(self.steps))


# ---------------------------------------------------------------------------
# derived group-level operations


def e_reflexivity(t: Term, a: Formula) -> Derivation:
    """Proof of `[t]@E A -> A` via projection to agent 1 and reflexivity."""
    if t.sort != E:
        raise InvalidInput(f"expected an E-sorted term, got sort {t.sort}")
    b = _Builder()
    p1 = Just(Proj(1, t), agent(1), a)
    s1 = b.axiom(AxiomSchema.PROJ, Imp(Just(t, E, a), p1))
    s2 = b.axiom(AxiomSchema.REFL, Imp(p1, a))
    b.by_taut([s1, s2], Imp(Just(t, E, a), a))
    return b.build()


def e_application(h: int, t: Term, s: Term, a: Formula, bb: Formula) -> tuple[Term, Derivation]:
    """Derived application at E: componentwise application under a tuple.

    Returns the term `<pi_1(t)*pi_1(s), ..., pi_h(t)*pi_h(s)>` and a proof of
    `[t]@E (A -> B) -> ([s]@E A -> [term]@E B)`.
    """
    if t.sort != E or s.sort != E:
        raise InvalidInput("expected E-sorted terms")
    term = Tuple(tuple(App(Proj(i, t), Proj(i, s), agent(i)) for i in range(1, h + 1)))
    x = Just(t, E, Imp(a, bb))
    y = Just(s, E, a)
    z = Just(term, E, bb)
    b = _Builder()
    premises = []
    results = []
    for i in range(1, h + 1):
        pi = Just(Proj(i, t), agent(i), Imp(a, bb))
        qi = Just(Proj(i, s), agent(i), a)
        ri = Just(App(Proj(i, t), Proj(i, s), agent(i)), agent(i), bb)
        premises.append(b.axiom(AxiomSchema.PROJ, Imp(x, pi)))
        premises.append(b.axiom(AxiomSchema.APP, Imp(pi, Imp(qi, ri))))
        premises.append(b.axiom(AxiomSchema.PROJ, Imp(y, qi)))
        results.append(ri)
    premises.append(b.axiom(AxiomSchema.TUPLING, Imp(conj(results), z)))
    b.by_taut(premises, Imp(x, Imp(y, z)))
    return term, b.build()


def e_sum(h: int, t: Term, s: Term, a: Formula) -> tuple[Term, Derivation, Derivation]:
    """Derived pooling at E: componentwise sums under a tuple.

    Returns `<pi_1(t)+pi_1(s), ...>` with proofs of `[t]@E A -> [term]@E A`
    and `[s]@E A -> [term]@E A`.
    """
    if t.sort != E or s.sort != E:
        raise InvalidInput("expected E-sorted terms")
    term = Tuple(tuple(Sum(Proj(i, t), Proj(i, s), agent(i)) for i in range(1, h + 1)))
    z = Just(term, E, a)

    def one_side(source: Term, schema: AxiomSchema) -> Derivation:
        x = Just(source, E, a)
        b = _Builder()
        premises = []
        results = []
        for i in range(1, h + 1):
            pi = Just(Proj(i, source), agent(i), a)
            ri = Just(Sum(Proj(i, t), Proj(i, s), agent(i)), agent(i), a)
            premises.append(b.axiom(AxiomSchema.PROJ, Imp(x, pi)))
            premises.append(b.axiom(schema, Imp(pi, ri)))
            results.append(ri)
        premises.append(b.axiom(AxiomSchema.TUPLING, Imp(conj(results), z)))
        b.by_taut(premises, Imp(x, z))
        return b.build()

    return term, one_side(t, AxiomSchema.SUML), one_side(s, AxiomSchema.SUMR)


# ---------------------------------------------------------------------------
# common-level operations


def i_conversion(t: Term, i: int, a: Formula) -> tuple[Term, Derivation]:
    """Convert common evidence to one agent: `[t]@C A -> [pi_i(head(t))]@i A`."""
    if t.sort != C:
        raise InvalidInput(f"expected a C-sorted term, got sort {t.sort}")
    term = Proj(i, Head(t))
    b = _Builder()
    x = Just(t, C, a)
    mid = Just(Head(t), E, a)
    out = Just(term, agent(i), a)
    s1 = b.axiom(AxiomSchema.COCLOSHEAD, Imp(x, mid))
    s2 = b.axiom(AxiomSchema.PROJ, Imp(mid, out))
    b.by_taut([s1, s2], Imp(x, out))
    return term, b.build()


def c_reflexivity(t: Term, a: Formula) -> Derivation:
    """Proof of `[t]@C A -> A`, chaining conversion to agent 1 with reflexivity."""
    if t.sort != C:
        raise InvalidInput(f"expected a C-sorted term, got sort {t.sort}")
    term, conversion = i_conversion(t, 1, a)
    b = _Builder()
    s1 = b.include(conversion)
    s2 = b.axiom(AxiomSchema.REFL, Imp(Just(term, agent(1), a), a))
    b.by_taut([s1, s2], Imp(Just(t, C, a), a))
    return b.build()


def c_inspection(t: Term, a: Formula, alloc: ConstantAllocator) -> tuple[Term, Derivation]:
    """Positive introspection at C: `[t]@C A -> [ind(c, tail(t))]@C [t]@C A`.

    The constant c justifies the co-closure instance
    `[t]@C A -> [tail(t)]@E [t]@C A`; the induction axiom then closes the loop.
    """
    if t.sort != C:
        raise InvalidInput(f"expected a C-sorted term, got sort {t.sort}")
    f = Just(t, C, a)
    g = Just(Tail(t), E, f)
    c = alloc.constant_for(Imp(f, g))
    term = Ind(c, Tail(t))
    out = Just(term, C, f)
    b = _Builder()
    s1 = b.axnec(c, Imp(f, g))
    s2 = b.axiom(AxiomSchema.INDUCTION, Imp(And(f, Just(c, C, Imp(f, g))), out))
    b.by_taut([s1, s2], Imp(f, out))
    return term, b.build()


def c_shift(t: Term, a: Formula, alloc: ConstantAllocator) -> tuple[Term, Derivation]:
    """Shift common evidence to the group: `[t]@C A -> [c * !C(t)]@C [head(t)]@E A`.

    Uses inspection at C plus a constant for the head co-closure instance,
    applied at C.
    """
    if t.sort != C:
        raise InvalidInput(f"expected a C-sorted term, got sort {t.sort}")
    f = Just(t, C, a)
    k = Just(Head(t), E, a)
    insp_term, insp = c_inspection(t, a, alloc)
    c = alloc.constant_for(Imp(f, k))
    term = App(c, insp_term, C)
    b = _Builder()
    s1 = b.include(insp)                       # F -> [!C t]@C F
    s2 = b.axnec(c, Imp(f, k))                 # [c]@C (F -> K)
    boxed_f = Just(insp_term, C, f)
    out = Just(term, C, k)
    s3 = b.axiom(AxiomSchema.APP, Imp(Just(c, C, Imp(f, k)), Imp(boxed_f, out)))
    b.by_taut([s1, s2, s3], Imp(f, out))
    return term, b.build()


# ---------------------------------------------------------------------------
# constructive lifting


@dataclass
class LiftingContext:
    """Declared hypothesis shape for lifting.

    `boxed` lists pairs (s_j, B_j) for hypotheses of the form [s_j]@C B_j that
    stay fixed; `plain` lists hypotheses C_k that are replaced by boxed fresh
    variables at the target sort.
    """

    boxed: list[tuple[Term, Formula]]
    plain: list[Formula]

    @classmethod
    def from_derivation(cls, d: Derivation) -> "LiftingContext":
        """Classify every C-boxed hypothesis as fixed, the rest as plain."""
        boxed = []
        plain = []
        for f in d.hypotheses:
            if isinstance(f, Just) and f.sort == C:
                boxed.append((f.term, f.body))
            else:
                plain.append(f)
        return cls(boxed, plain)

    def expected_hypotheses(self) -> tuple[Formula, ...]:
        return tuple(Just(s, C, bb) for s, bb in self.boxed) + tuple(self.plain)


def _fresh_variables(d: Derivation, sort: Sort, count: int) -> list[Var]:
    used = set()
    for f in list(d.hypotheses) + [s.formula for s in d.steps]:
        for v in variables_in(f):
            if v.sort == sort:
                used.add(v.index)
    out = []
    k = 1
    while len(out) < count:
        if k not in used:
            out.append(Var(k, sort))
        k += 1
    return out


def lift(d: Derivation, target: Sort, ctx: LiftingContext | None = None,
         alloc: ConstantAllocator | None = None, h: int | None = None) -> tuple[Term, Derivation]:
    """Internalize a derivation as evidence at `target`.

    From D proving A under hypotheses [s_1]@C B_1, ..., [s_n]@C B_n,
    C_1, ..., C_m, produce a term built over s_1..s_n and fresh variables
    y_1..y_m, together with a derivation of [term]@target A from hypotheses
    [s_1]@C B_1, ..., [s_n]@C B_n, [y_1]@target C_1, ..., [y_m]@target C_m.

    `h` is the agent count, needed only when `target` is E (the derived
    group-level application builds h-tuples); it defaults to the largest agent
    index mentioned, or 1.
    """
    if not target.is_star and target != E:
        raise InvalidInput(f"cannot lift to sort {target}")
    if alloc is None:
        alloc = ConstantAllocator()
    if ctx is None:
        ctx = LiftingContext.from_derivation(d)
    if d.hypotheses != ctx.expected_hypotheses():
        raise InvalidInput("derivation hypotheses do not match the declared lifting shape")

    if h is None:
        h = max([target.index if target.is_agent else 1]
                + [f.sort.index for s in d.steps for f in [s.formula]
                   if isinstance(f, Just) and f.sort.is_agent])

    fresh = _fresh_variables(d, target, len(ctx.plain))
    out_hyps = tuple(Just(s, C, bb) for s, bb in ctx.boxed) + tuple(
        Just(y, target, ck) for y, ck in zip(fresh, ctx.plain))
    b = _Builder(out_hyps)

    def lift_c_boxed(step_idx: int, boxed: Just) -> tuple[Term, int]:
        """Turn a step proving [u]@C B into evidence for that very formula."""
        u = boxed.term
        if target == C:
            term, insp = c_inspection(u, boxed.body, alloc)
            k = b.include(insp)
            return term, b.mp(k, step_idx)
        if target.is_agent:
            insp_term, insp = c_inspection(u, boxed.body, alloc)
            k = b.include(insp)
            at_c = b.mp(k, step_idx)
            term, conv = i_conversion(insp_term, target.index, boxed)
            k2 = b.include(conv)
            return term, b.mp(k2, at_c)
        # target E: the co-closure tail axiom directly boxes the formula
        term = Tail(u)
        ax = b.axiom(AxiomSchema.COCLOSTAIL, Imp(boxed, Just(term, E, boxed)))
        return term, b.mp(ax, step_idx)

    mapped: dict[int, tuple[Term, int]] = {}
    for k, step in enumerate(d.steps, start=1):
        f = step.formula
        rule = step.rule
        if isinstance(rule, Hyp):
            idx = rule.index
            if idx <= len(ctx.boxed):
                # fixed hypothesis [s_j]@C B_j; f is that boxed formula
                base = b.hyp(idx)
                mapped[k] = lift_c_boxed(base, f)
            else:
                # plain hypothesis C_k, replaced by a boxed fresh variable
                j = idx - len(ctx.boxed)
                y = fresh[j - 1]
                out_idx = b.hyp(len(ctx.boxed) + j)
                mapped[k] = (y, out_idx)
        elif isinstance(rule, Axiom):
            c = alloc.constant_for(f)
            base = b.axnec(c, f)
            cf = Just(c, C, f)
            if target == C:
                mapped[k] = (c, base)
            elif target.is_agent:
                term, conv = i_conversion(c, target.index, f)
                k2 = b.include(conv)
                mapped[k] = (term, b.mp(k2, base))
            else:
                term = Head(c)
                ax = b.axiom(AxiomSchema.COCLOSHEAD, Imp(cf, Just(term, E, f)))
                mapped[k] = (term, b.mp(ax, base))
        elif isinstance(rule, AxNec):
            # f is [c]@C B for a specification member; box it like a fixed hypothesis
            if not (isinstance(f, Just) and f.sort == C):
                raise InvalidInput("lifting expects a pure C constant specification")
            base = b.axnec(rule.constant, f.body)
            mapped[k] = lift_c_boxed(base, f)
        elif isinstance(rule, MP):
            r_term, r_idx = mapped[rule.i]
            s_term, s_idx = mapped[rule.j]
            major = d.steps[rule.i - 1].formula
            x, y = major.left, major.right
            if target == E:
                term, application = e_application(h, r_term, s_term, x, y)
                k2 = b.include(application)
            else:
                term = App(r_term, s_term, target)
                k2 = b.axiom(AxiomSchema.APP,
                             Imp(Just(r_term, target, Imp(x, y)),
                                 Imp(Just(s_term, target, x), Just(term, target, y))))
            partial = b.mp(k2, r_idx)
            mapped[k] = (term, b.mp(partial, s_idx))
        else:
            raise InvalidInput(f"unknown rule {rule!r}")

    term, _ = mapped[len(d.steps)]
    return term, b.build()


def necessitate(d: Derivation, target: Sort, alloc: ConstantAllocator | None = None,
                h: int | None = None) -> tuple[Term, Derivation]:
    """Internalize a hypothesis-free derivation; the returned term is ground."""
    if d.hypotheses:
        raise InvalidInput("necessitation needs a hypothesis-free derivation")
    return lift(d, target, LiftingContext([], []), alloc, h)


# ---------------------------------------------------------------------------
# induction rules


def internalize_induction_1(a: Formula, s: Term, d: Derivation,
                            alloc: ConstantAllocator | None = None,
                            h: int | None = None) -> tuple[Term, Derivation]:
    """From a proof of `A -> [s]@E A`, produce t and a proof of `A -> [ind(t,s)]@C A`."""
    if alloc is None:
        alloc = ConstantAllocator()
    if d.hypotheses:
        raise InvalidInput("induction internalization needs a hypothesis-free derivation")
    want = Imp(a, Just(s, E, a))
    if d.conclusion != want:
        raise InvalidInput(f"derivation must conclude {print_formula(want)}")
    t, boxed = necessitate(d, C, alloc, h)
    b = _Builder()
    s1 = b.include(boxed)  # [t]@C (A -> [s]@E A)
    out = Just(Ind(t, s), C, a)
    s2 = b.axiom(AxiomSchema.INDUCTION, Imp(And(a, Just(t, C, want)), out))
    b.by_taut([s1, s2], Imp(a, out))
    return t, b.build()


def internalize_induction_2(a: Formula, bb: Formula, s: Term, d: Derivation,
                            alloc: ConstantAllocator | None = None,
                            h: int | None = None) -> tuple[Term, Const, Derivation]:
    """From a proof of `B -> [s]@E (A & B)`, produce t, c and a proof of
    `B -> [c * ind(t, s)]@C A`.

    The constant c justifies the projection tautology `A & B -> A`.
    """
    if alloc is None:
        alloc = ConstantAllocator()
    if d.hypotheses:
        raise InvalidInput("induction internalization needs a hypothesis-free derivation")
    ab = And(a, bb)
    want = Imp(bb, Just(s, E, ab))
    if d.conclusion != want:
        raise InvalidInput(f"derivation must conclude {print_formula(want)}")

    # strengthen the premise: A & B -> [s]@E (A & B)
    pre = _Builder()
    base = pre.include(d)
    pre.by_taut([base], Imp(ab, Just(s, E, ab)))
    t, ind_step = internalize_induction_1(ab, s, pre.build(), alloc, h)

    c = alloc.constant_for(Imp(ab, a))
    term = App(c, Ind(t, s), C)
    b = _Builder()
    s1 = b.include(ind_step)                     # A & B -> [ind(t,s)]@C (A & B)
    s2 = b.axnec(c, Imp(ab, a))
    boxed_ab = Just(Ind(t, s), C, ab)
    out = Just(term, C, a)
    s3 = b.axiom(AxiomSchema.APP, Imp(Just(c, C, Imp(ab, a)), Imp(boxed_ab, out)))
    s4 = b.include(d)                            # B -> [s]@E (A & B)
    s5 = b.include(e_reflexivity(s, ab))         # [s]@E (A & B) -> A & B
    b.by_taut([s1, s2, s3, s4, s5], Imp(bb, out))
    return t, c, b.build()
