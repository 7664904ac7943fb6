"""The modal side: plain epistemic formulas, the two syntactic translations,
and randomized Kripke-model probing.

`forgetful` erases evidence terms, sending [t]@i to the agent box, [t]@E to
the everyone box, and [t]@C to the common box.  `conservative_projection`
instead stays inside the justification language: it deletes exactly the boxes
whose terms mention any group-level or common-level machinery, which lands in
the single-agent fragment.  `translate_derivation_x` rewrites a full
derivation along the projection, expanding the handful of steps whose axioms
do not survive verbatim.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .deduction import (
    AGENT_FRAGMENT_SCHEMATA, Axiom, AxiomSchema, AxNec, ConstantSpecification,
    Derivation, Hyp, MP, Step, _flatten_and, is_agent_fragment_formula,
    match_axiom,
)
from .errors import InvalidInput, ParseError, UnknownWorld
from .syntax import (
    And, E, Formula, Imp, Just, Neg, Or, Prop, Term, _tokenize, print_formula,
    subterms,
)
from .semantics import (
    ValidationReport, reflexive_transitive_closure, transitive_closure,
)


# ---------------------------------------------------------------------------
# modal formulas


class ModalFormula:
    """Base class; nodes are frozen and compare structurally."""

    __slots__ = ()


@dataclass(frozen=True)
class MProp(ModalFormula):
    index: int | str


@dataclass(frozen=True)
class MNeg(ModalFormula):
    body: ModalFormula


@dataclass(frozen=True)
class MAnd(ModalFormula):
    left: ModalFormula
    right: ModalFormula


@dataclass(frozen=True)
class MOr(ModalFormula):
    left: ModalFormula
    right: ModalFormula


@dataclass(frozen=True)
class MImp(ModalFormula):
    left: ModalFormula
    right: ModalFormula


@dataclass(frozen=True)
class Box(ModalFormula):
    agent: int
    body: ModalFormula

    def __post_init__(self):
        if not (isinstance(self.agent, int) and self.agent >= 1):
            raise InvalidInput(f"bad agent index {self.agent!r}")


@dataclass(frozen=True)
class EveryBox(ModalFormula):
    body: ModalFormula


@dataclass(frozen=True)
class CommonBox(ModalFormula):
    body: ModalFormula


def print_modal_formula(a: ModalFormula) -> str:
    return _pm(a, 1)


def _pm(a: ModalFormula, need: int) -> str:
    # precedence levels mirror the evidence-formula printer
    if isinstance(a, MProp):
        return f"P{a.index}" if isinstance(a.index, int) else str(a.index)
    if isinstance(a, MNeg):
        return f"~{_pm(a.body, 4)}"
    if isinstance(a, Box):
        return f"#{a.agent} {_pm(a.body, 4)}"
    if isinstance(a, EveryBox):
        return f"#E {_pm(a.body, 4)}"
    if isinstance(a, CommonBox):
        return f"#C {_pm(a.body, 4)}"
    if isinstance(a, MAnd):
        out = f"{_pm(a.left, 3)} & {_pm(a.right, 4)}"
        return f"({out})" if need > 3 else out
    if isinstance(a, MOr):
        out = f"{_pm(a.left, 2)} | {_pm(a.right, 3)}"
        return f"({out})" if need > 2 else out
    if isinstance(a, MImp):
        out = f"{_pm(a.left, 2)} -> {_pm(a.right, 1)}"
        return f"({out})" if need > 1 else out
    raise InvalidInput(f"not a modal formula: {a!r}")


class _ModalParser:
    def __init__(self, text: str, h: int):
        if not isinstance(h, int) or h < 1:
            raise InvalidInput(f"agent count h must be a positive int, got {h!r}")
        self.h = h
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def parse(self) -> ModalFormula:
        out = self.parse_imp()
        tok = self.peek()
        if tok[0] != "EOF":
            raise ParseError(f"unexpected trailing input {tok[1]!r}", tok[2])
        return out

    def parse_imp(self) -> ModalFormula:
        left = self.parse_or()
        if self.peek()[0] == "->":
            self.take()
            return MImp(left, self.parse_imp())
        return left

    def parse_or(self) -> ModalFormula:
        left = self.parse_and()
        while self.peek()[0] == "|":
            self.take()
            left = MOr(left, self.parse_and())
        return left

    def parse_and(self) -> ModalFormula:
        left = self.parse_unary()
        while self.peek()[0] == "&":
            self.take()
            left = MAnd(left, self.parse_unary())
        return left

    def parse_unary(self) -> ModalFormula:
        tok = self.peek()
        if tok[0] == "~":
            self.take()
            return MNeg(self.parse_unary())
        if tok[0] == "#":
            self.take()
            sort = self.take()
            if sort[0] == "INT":
                k = int(sort[1])
                if not 1 <= k <= self.h:
                    raise ParseError(f"agent index {k} outside 1..{self.h}", sort[2])
                return Box(k, self.parse_unary())
            if sort[0] == "IDENT" and sort[1] == "E":
                return EveryBox(self.parse_unary())
            if sort[0] == "IDENT" and sort[1] == "C":
                return CommonBox(self.parse_unary())
            raise ParseError(f"expected a sort after '#', found {sort[1]!r}", sort[2])
        return self.parse_atom()

    def parse_atom(self) -> ModalFormula:
        tok = self.take()
        if tok[0] == "PROP":
            return MProp(tok[3])
        if tok[0] == "IDENT" and tok[1] not in ("E", "C"):
            return MProp(tok[1])
        if tok[0] == "(":
            out = self.parse_imp()
            close = self.take()
            if close[0] != ")":
                raise ParseError(f"expected ')', found {close[1] or 'end of input'!r}",
                                 close[2])
            return out
        raise ParseError(f"expected a modal formula, found {tok[1] or 'end of input'!r}",
                         tok[2])


def parse_modal_formula(text: str, h: int) -> ModalFormula:
    return _ModalParser(text, h).parse()


# ---------------------------------------------------------------------------
# translations


def forgetful(a: Formula) -> ModalFormula:
    """Erase evidence terms, keeping only which box each one inhabited."""
    if isinstance(a, Prop):
        return MProp(a.index)
    if isinstance(a, Neg):
        return MNeg(forgetful(a.body))
    if isinstance(a, And):
        return MAnd(forgetful(a.left), forgetful(a.right))
    if isinstance(a, Or):
        return MOr(forgetful(a.left), forgetful(a.right))
    if isinstance(a, Imp):
        return MImp(forgetful(a.left), forgetful(a.right))
    if isinstance(a, Just):
        body = forgetful(a.body)
        if a.sort.is_agent:
            return Box(a.sort.index, body)
        if a.sort == E:
            return EveryBox(body)
        return CommonBox(body)
    raise InvalidInput(f"not a formula: {a!r}")


def realizes(r: Formula, a: ModalFormula) -> bool:
    """Is `r` an evidence-term realization of the modal formula `a`?"""
    return forgetful(r) == a


def _term_erased(t: Term) -> bool:
    # a single group- or common-sorted subterm disqualifies the whole box
    return any(not s.sort.is_agent for s in subterms(t))


def conservative_projection(a: Formula) -> Formula:
    """Project onto the single-agent fragment: boxes whose terms touch the
    group or common machinery are dropped; everything else is kept as is."""
    if isinstance(a, Prop):
        return a
    if isinstance(a, Neg):
        return Neg(conservative_projection(a.body))
    if isinstance(a, And):
        return And(conservative_projection(a.left), conservative_projection(a.right))
    if isinstance(a, Or):
        return Or(conservative_projection(a.left), conservative_projection(a.right))
    if isinstance(a, Imp):
        return Imp(conservative_projection(a.left), conservative_projection(a.right))
    if isinstance(a, Just):
        body = conservative_projection(a.body)
        if _term_erased(a.term):
            return body
        return Just(a.term, a.sort, body)
    raise InvalidInput(f"not a formula: {a!r}")


@dataclass(frozen=True)
class XTranslation:
    """Projection of a whole derivation.

    `flagged` lists translated specification members whose bodies are not
    axiom instances of the single-agent fragment; the kernel will still accept
    them because the translated specification is taken at face value.
    """

    derivation: Derivation
    cs: ConstantSpecification
    flagged: tuple


_SCHEMA_ORDER = list(AxiomSchema)


def _expand_projected_axiom(schema: AxiomSchema, a: Formula, steps: list[Step]) -> None:
    """Append steps deriving the projection of the axiom instance `a`."""
    image = conservative_projection(a)

    def refl_then_glue(refl_instance: Formula) -> None:
        steps.append(Step(refl_instance, Axiom(AxiomSchema.REFL)))
        steps.append(Step(Imp(refl_instance, image), Axiom(AxiomSchema.TAUT)))
        steps.append(Step(image, MP(len(steps), len(steps) - 1)))

    if schema == AxiomSchema.APP:
        boxed_imp = a.left
        boxed_minor = a.right.left
        t_kept = not _term_erased(boxed_imp.term)
        s_kept = not _term_erased(boxed_minor.term)
        if t_kept and s_kept:
            steps.append(Step(image, Axiom(AxiomSchema.APP)))
        elif t_kept:
            # image is literally [t](X -> Y) -> (X -> Y)
            steps.append(Step(image, Axiom(AxiomSchema.REFL)))
        elif s_kept:
            minor = conservative_projection(boxed_minor)
            refl_then_glue(Imp(minor, minor.body))
        else:
            steps.append(Step(image, Axiom(AxiomSchema.TAUT)))
    elif schema in (AxiomSchema.SUML, AxiomSchema.SUMR):
        premise = a.left
        sum_kept = not _term_erased(a.right.term) if isinstance(a.right, Just) else False
        if sum_kept:
            steps.append(Step(image, Axiom(schema)))
        elif not _term_erased(premise.term):
            steps.append(Step(image, Axiom(AxiomSchema.REFL)))
        else:
            steps.append(Step(image, Axiom(AxiomSchema.TAUT)))
    elif schema in (AxiomSchema.REFL, AxiomSchema.INSP):
        if not _term_erased(a.left.term):
            steps.append(Step(image, Axiom(schema)))
        else:
            steps.append(Step(image, Axiom(AxiomSchema.TAUT)))
    elif schema == AxiomSchema.TUPLING:
        # flatten before projecting: a projected conjunct may itself be an And
        parts = [conservative_projection(p) for p in _flatten_and(a.left)]
        if any(p == image.right for p in parts):
            steps.append(Step(image, Axiom(AxiomSchema.TAUT)))
        else:
            refl_then_glue(Imp(parts[0], image.right))
    else:
        # taut, projection, both co-closure forms, induction: the image is a
        # propositional tautology
        steps.append(Step(image, Axiom(AxiomSchema.TAUT)))


def translate_derivation_x(d: Derivation, cs: ConstantSpecification) -> XTranslation:
    """Rewrite `d` along the conservative projection.

    The result derives the projected conclusion from the projected hypotheses
    inside the single-agent fragment, under the projected specification
    (agent-sorted members only, bodies projected)."""
    members = []
    flagged = []
    if cs.kind == "extensional":
        for c, body in cs.pairs():
            if c.sort.is_agent:
                image = conservative_projection(body)
                members.append((c.index, c.sort, image))
                if not (is_agent_fragment_formula(image)
                        and any(s in AGENT_FRAGMENT_SCHEMATA for s in match_axiom(image))):
                    flagged.append((c.index, c.sort, image))
    cs_x = ConstantSpecification.extensional(members, validate=False)

    hyps = tuple(conservative_projection(f) for f in d.hypotheses)
    steps: list[Step] = []
    mapped: dict[int, int] = {}
    for k, step in enumerate(d.steps, start=1):
        rule = step.rule
        if isinstance(rule, Hyp):
            steps.append(Step(hyps[rule.index - 1], Hyp(rule.index)))
        elif isinstance(rule, Axiom):
            _expand_projected_axiom(rule.schema, step.formula, steps)
        elif isinstance(rule, MP):
            image = conservative_projection(step.formula)
            steps.append(Step(image, MP(mapped[rule.i], mapped[rule.j])))
        elif isinstance(rule, AxNec):
            c = rule.constant
            body = step.formula.body
            if c.sort.is_agent:
                steps.append(Step(Just(c, c.sort, conservative_projection(body)),
                                  AxNec(c)))
            else:
                schemata = match_axiom(body)
                if not schemata:
                    raise InvalidInput(
                        "cannot project a specification step whose body "
                        f"{print_formula(body)} is not an axiom instance")
                schema = min(schemata, key=_SCHEMA_ORDER.index)
                _expand_projected_axiom(schema, body, steps)
        else:
            raise InvalidInput(f"unknown rule {rule!r}")
        mapped[k] = len(steps)
    return XTranslation(Derivation(hyps, tuple(steps)), cs_x, tuple(flagged))


# ---------------------------------------------------------------------------
# Kripke models


class KripkeModel:
    """Plain multi-agent S4 frame with a valuation; no evidence anywhere."""

    def __init__(self, h: int, worlds, relations, valuation):
        if h < 1:
            raise InvalidInput("need at least one agent")
        self.h = h
        self.worlds = frozenset(worlds)
        self.relations = {i: frozenset(relations.get(i, ())) for i in range(1, h + 1)}
        self.valuation = {p: frozenset(ws) for p, ws in valuation.items()}
        self._succ_cache: dict = {}

    def _succ(self, key, rel) -> dict[int, list[int]]:
        if key not in self._succ_cache:
            succ: dict[int, list[int]] = {w: [] for w in self.worlds}
            for w, v in rel:
                succ[w].append(v)
            self._succ_cache[key] = succ
        return self._succ_cache[key]

    def successors_agent(self, i: int):
        return self._succ(("agent", i), self.relations[i])

    def successors_every(self):
        union = frozenset().union(*self.relations.values())
        return self._succ("every", union)

    def successors_common(self):
        union = frozenset().union(*self.relations.values())
        return self._succ("common", transitive_closure(union))


def validate_kripke_model(m: KripkeModel):
    problems = []
    for i in range(1, m.h + 1):
        rel = m.relations[i]
        for w, v in rel:
            if w not in m.worlds or v not in m.worlds:
                problems.append(f"rel {i}: pair ({w},{v}) uses an unknown world")
        for w in m.worlds:
            if (w, w) not in rel:
                problems.append(f"rel {i}: missing reflexive pair ({w},{w})")
        for w, v in rel:
            for v2, u in rel:
                if v2 == v and (w, u) not in rel:
                    problems.append(f"rel {i}: missing transitive pair ({w},{u})")
    for p, ws in m.valuation.items():
        for w in ws:
            if w not in m.worlds:
                problems.append(f"val {p}: unknown world {w}")
    dedup = tuple(dict.fromkeys(problems))
    return ValidationReport(not dedup, dedup)


def kripke_satisfies(m: KripkeModel, w: int, a: ModalFormula) -> bool:
    if w not in m.worlds:
        raise UnknownWorld(f"unknown world {w}")
    if isinstance(a, MProp):
        return w in m.valuation.get(a.index, frozenset())
    if isinstance(a, MNeg):
        return not kripke_satisfies(m, w, a.body)
    if isinstance(a, MAnd):
        return kripke_satisfies(m, w, a.left) and kripke_satisfies(m, w, a.right)
    if isinstance(a, MOr):
        return kripke_satisfies(m, w, a.left) or kripke_satisfies(m, w, a.right)
    if isinstance(a, MImp):
        return (not kripke_satisfies(m, w, a.left)) or kripke_satisfies(m, w, a.right)
    if isinstance(a, Box):
        if a.agent > m.h:
            raise InvalidInput(f"agent index {a.agent} outside 1..{m.h}")
        succ = m.successors_agent(a.agent)
        return all(kripke_satisfies(m, v, a.body) for v in succ.get(w, ()))
    if isinstance(a, EveryBox):
        return all(kripke_satisfies(m, v, a.body)
                   for v in m.successors_every().get(w, ()))
    if isinstance(a, CommonBox):
        return all(kripke_satisfies(m, v, a.body)
                   for v in m.successors_common().get(w, ()))
    raise InvalidInput(f"not a modal formula: {a!r}")


def random_kripke_model(h: int, n_worlds: int, density: float = 0.3,
                        seed: int = 0, n_props: int = 4) -> KripkeModel:
    rng = random.Random(seed)
    worlds = set(range(n_worlds))
    relations = {}
    for i in range(1, h + 1):
        edges = {(w, v) for w in worlds for v in worlds
                 if w != v and rng.random() < density}
        relations[i] = reflexive_transitive_closure(edges, worlds)
    valuation = {k: {w for w in worlds if rng.random() < 0.5}
                 for k in range(1, n_props + 1)}
    return KripkeModel(h, worlds, relations, valuation)


def format_kripke_model(m: KripkeModel) -> str:
    lines = [f"h: {m.h}"]
    lines.append("worlds: " + " ".join(f"w{w}" for w in sorted(m.worlds)))
    for i in range(1, m.h + 1):
        pairs = " ".join(f"(w{w},w{v})" for w, v in sorted(m.relations[i]))
        lines.append(f"rel {i}: {pairs}")
    for p in sorted(m.valuation, key=str):
        name = f"P{p}" if isinstance(p, int) else str(p)
        lines.append(f"val {name}: " + " ".join(f"w{w}" for w in sorted(m.valuation[p])))
    return "\n".join(lines) + "\n"


def parse_kripke_file(text: str) -> tuple[KripkeModel, tuple[str, ...]]:
    """Same surface as the evidence-model format, minus evidence facts.
    Stray mode/cs lines are ignored with a warning."""
    from .semantics import parse_model_file
    warnings = []
    kept = []
    for raw in text.splitlines():
        stripped = raw.split("#", 1)[0].strip()
        if stripped.startswith("evidence"):
            raise InvalidInput("evidence lines do not belong in a relational model file")
        if stripped.startswith(("mode", "cs")):
            warnings.append(f"ignored line {stripped!r}")
            continue
        kept.append(raw)
    model, warns = parse_model_file("\n".join(kept))
    k = KripkeModel(model.h, model.worlds, model.relations, model.valuation)
    return k, tuple(warnings) + warns


def attack_kripke_model() -> KripkeModel:
    """Relational half of the four-world messenger scenario."""
    worlds = {0, 1, 2, 3}
    return KripkeModel(
        h=2,
        worlds=worlds,
        relations={
            1: reflexive_transitive_closure({(1, 2)}, worlds),
            2: reflexive_transitive_closure({(0, 1), (2, 3)}, worlds),
        },
        valuation={"del": {0, 1, 2}},
    )


# ---------------------------------------------------------------------------
# probing


@dataclass(frozen=True)
class ProbeReport:
    formula: ModalFormula
    trials: int
    counterexample: tuple | None  # (KripkeModel, world) when found

    @property
    def refuted(self) -> bool:
        return self.counterexample is not None


def probe_modal_formula(a: ModalFormula, h: int, trials: int = 100,
                        seed: int = 0, max_worlds: int = 5) -> ProbeReport:
    """Search seeded random reflexive-transitive models for a world falsifying
    `a`.  No counterexample is evidence of validity only to the extent of the
    trial budget."""
    rng = random.Random(seed)
    for _ in range(trials):
        m = random_kripke_model(h, rng.randint(1, max_worlds),
                                density=rng.uniform(0.1, 0.5),
                                seed=rng.randrange(10 ** 9))
        for w in sorted(m.worlds):
            if not kripke_satisfies(m, w, a):
                return ProbeReport(a, trials, (m, w))
    return ProbeReport(a, trials, None)


def forgetful_soundness_probe(d: Derivation, h: int, trials: int = 100,
                              seed: int = 0) -> ProbeReport:
    """Probe the forgetful image of a theorem: a hypothesis-free derivation's
    conclusion should never be refuted by any reflexive-transitive model."""
    if d.hypotheses:
        raise InvalidInput("the probe needs a hypothesis-free derivation")
    return probe_modal_formula(forgetful(d.conclusion), h, trials, seed)
