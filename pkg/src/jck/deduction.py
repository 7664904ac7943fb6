"""Hilbert-style derivations and the acceptance kernel.

A derivation is a list of hypotheses followed by numbered steps; every step is
a hypothesis reference, an axiom-schema instance, a modus-ponens combination of
two earlier steps, or the necessitation of a constant-specification member.
`check_derivation` is the single arbiter of correctness: everything the
synthesis layer produces is routed back through it.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

from .errors import InvalidInput, ParseError, ResourceError
from .syntax import (
    And, App, Bang, C, Const, Formula, Head, Imp, Ind, Just, Neg, Or, Proj,
    Prop, Sort, Sum, Tail, Term, Tuple, bound_problems, parse_formula,
    parse_term, print_formula, print_term, subterms,
)


class AxiomSchema(Enum):
    TAUT = "Taut"
    APP = "App"
    SUML = "SumL"
    SUMR = "SumR"
    REFL = "Refl"
    INSP = "Insp"
    TUPLING = "Tupling"
    PROJ = "Proj"
    COCLOSHEAD = "CoClosHead"
    COCLOSTAIL = "CoClosTail"
    INDUCTION = "Induction"


# schemata whose instances stay inside the single-agent fragment
AGENT_FRAGMENT_SCHEMATA = frozenset({
    AxiomSchema.TAUT, AxiomSchema.APP, AxiomSchema.SUML, AxiomSchema.SUMR,
    AxiomSchema.REFL, AxiomSchema.INSP,
})


def is_agent_fragment_term(t: Term) -> bool:
    """True when `t` mentions no E- or C-sorted machinery at all."""
    return all(u.sort.is_agent for u in subterms(t))


def is_agent_fragment_formula(a: Formula) -> bool:
    if isinstance(a, Prop):
        return True
    if isinstance(a, Neg):
        return is_agent_fragment_formula(a.body)
    if isinstance(a, (And, Or, Imp)):
        return is_agent_fragment_formula(a.left) and is_agent_fragment_formula(a.right)
    if isinstance(a, Just):
        return a.sort.is_agent and is_agent_fragment_term(a.term) and is_agent_fragment_formula(a.body)
    return False


# ---------------------------------------------------------------------------
# tautology checking


def _compile_skeleton(a: Formula, atoms: dict[Formula, int]) -> tuple:
    # maximal justified assertions count as opaque atoms; compiling to atom
    # indexes keeps the per-row evaluation free of formula hashing
    if isinstance(a, (Prop, Just)):
        return ("atom", atoms.setdefault(a, len(atoms)))
    if isinstance(a, Neg):
        return ("not", _compile_skeleton(a.body, atoms))
    if isinstance(a, (And, Or, Imp)):
        tag = "and" if isinstance(a, And) else ("or" if isinstance(a, Or) else "imp")
        return (tag, _compile_skeleton(a.left, atoms), _compile_skeleton(a.right, atoms))
    raise InvalidInput(f"not a formula: {a!r}")


def _eval_skeleton(p: tuple, bits: tuple) -> bool:
    tag = p[0]
    if tag == "atom":
        return bits[p[1]]
    if tag == "not":
        return not _eval_skeleton(p[1], bits)
    if tag == "and":
        return _eval_skeleton(p[1], bits) and _eval_skeleton(p[2], bits)
    if tag == "or":
        return _eval_skeleton(p[1], bits) or _eval_skeleton(p[2], bits)
    return (not _eval_skeleton(p[1], bits)) or _eval_skeleton(p[2], bits)


@lru_cache(maxsize=None)
def _is_tautology(a: Formula, max_atoms: int) -> bool:
    atoms: dict[Formula, int] = {}
    prog = _compile_skeleton(a, atoms)
    if len(atoms) > max_atoms:
        raise ResourceError(f"{len(atoms)} propositional atoms exceed the cap of {max_atoms}")
    for bits in itertools.product((True, False), repeat=len(atoms)):
        if not _eval_skeleton(prog, bits):
            return False
    return True


def is_tautology(a: Formula, max_atoms: int = 24) -> bool:
    """Exhaustive valuation over the formula's atoms.

    Maximal justified assertions are treated as opaque atoms.  Raises
    ResourceError when the atom count exceeds `max_atoms`.
    """
    return _is_tautology(a, max_atoms)


# ---------------------------------------------------------------------------
# axiom schemata


def _flatten_and(a: Formula) -> list[Formula]:
    if isinstance(a, And):
        return _flatten_and(a.left) + _flatten_and(a.right)
    return [a]


def _match_structural(schema: AxiomSchema, a: Formula) -> bool:
    if not isinstance(a, Imp):
        return False
    pre, post = a.left, a.right

    if schema == AxiomSchema.APP:
        # [t]@*(A -> B) -> ([s]@* A -> [t*s]@* B)
        if not (isinstance(pre, Just) and isinstance(pre.body, Imp) and isinstance(post, Imp)):
            return False
        inner_pre, inner_post = post.left, post.right
        if not (isinstance(inner_pre, Just) and isinstance(inner_post, Just)):
            return False
        if not isinstance(inner_post.term, App):
            return False
        sort = pre.sort
        return (sort.is_star
                and inner_pre.sort == sort and inner_post.sort == sort
                and inner_post.term.t == pre.term and inner_post.term.s == inner_pre.term
                and pre.body.left == inner_pre.body and pre.body.right == inner_post.body)

    if schema in (AxiomSchema.SUML, AxiomSchema.SUMR):
        # [t]@* A -> [t+s]@* A   /   [s]@* A -> [t+s]@* A
        if not (isinstance(pre, Just) and isinstance(post, Just) and isinstance(post.term, Sum)):
            return False
        if not (pre.sort.is_star and pre.sort == post.sort and pre.body == post.body):
            return False
        part = post.term.t if schema == AxiomSchema.SUML else post.term.s
        return part == pre.term

    if schema == AxiomSchema.REFL:
        # [t]@i A -> A
        return isinstance(pre, Just) and pre.sort.is_agent and pre.body == post

    if schema == AxiomSchema.INSP:
        # [t]@i A -> [!i(t)]@i [t]@i A
        if not (isinstance(pre, Just) and pre.sort.is_agent and isinstance(post, Just)):
            return False
        return (isinstance(post.term, Bang) and post.term.t == pre.term
                and post.sort == pre.sort and post.body == pre)

    if schema == AxiomSchema.TUPLING:
        # [t1]@1 A & ... & [th]@h A -> [<t1,...,th>]@E A  (any conjunction shape)
        if not (isinstance(post, Just) and isinstance(post.term, Tuple)):
            return False
        items = post.term.items
        parts = _flatten_and(pre)
        if len(parts) != len(items):
            return False
        for k, (part, item) in enumerate(zip(parts, items), start=1):
            if not (isinstance(part, Just) and part.term == item
                    and part.sort == Sort("agent", k) and part.body == post.body):
                return False
        return True

    if schema == AxiomSchema.PROJ:
        # [t]@E A -> [pi_i(t)]@i A
        if not (isinstance(pre, Just) and pre.sort == Sort("E") and isinstance(post, Just)):
            return False
        return (isinstance(post.term, Proj) and post.term.t == pre.term
                and post.sort == Sort("agent", post.term.agent) and post.body == pre.body)

    if schema == AxiomSchema.COCLOSHEAD:
        # [t]@C A -> [head(t)]@E A
        if not (isinstance(pre, Just) and pre.sort == C and isinstance(post, Just)):
            return False
        return isinstance(post.term, Head) and post.term.t == pre.term and post.body == pre.body

    if schema == AxiomSchema.COCLOSTAIL:
        # [t]@C A -> [tail(t)]@E [t]@C A
        if not (isinstance(pre, Just) and pre.sort == C and isinstance(post, Just)):
            return False
        return isinstance(post.term, Tail) and post.term.t == pre.term and post.body == pre

    if schema == AxiomSchema.INDUCTION:
        # A & [t]@C (A -> [s]@E A) -> [ind(t,s)]@C A
        if not (isinstance(post, Just) and isinstance(post.term, Ind) and isinstance(pre, And)):
            return False
        a0 = post.body
        t, s = post.term.t, post.term.s
        want = And(a0, Just(t, C, Imp(a0, Just(s, Sort("E"), a0))))
        return pre == want

    raise InvalidInput(f"not a structural schema: {schema}")


_STRUCTURAL = [s for s in AxiomSchema if s != AxiomSchema.TAUT]


def matches_schema(schema: AxiomSchema, a: Formula, max_atoms: int = 24) -> bool:
    if schema == AxiomSchema.TAUT:
        return is_tautology(a, max_atoms)
    return _match_structural(schema, a)


def match_axiom(a: Formula, max_atoms: int = 24) -> frozenset[AxiomSchema]:
    """Every schema this formula instantiates.  Overlaps are possible."""
    out = {s for s in _STRUCTURAL if _match_structural(s, a)}
    if is_tautology(a, max_atoms):
        out.add(AxiomSchema.TAUT)
    return frozenset(out)


def is_axiom(a: Formula) -> bool:
    return bool(match_axiom(a))


# ---------------------------------------------------------------------------
# constant specifications


@dataclass(frozen=True)
class ConstantSpecification:
    """Which constants are declared to justify which axiom instances.

    kind "extensional": a finite member set, given outright.
    kind "totalC": every C-sorted constant justifies every axiom instance.
    kind "allocated": the live table of a ConstantAllocator (pure C).
    """

    kind: str
    members: frozenset[tuple[int | str, Sort, Formula]] = frozenset()
    allocator: object = field(default=None, compare=False)

    @classmethod
    def total_c(cls) -> "ConstantSpecification":
        return cls("totalC")

    @classmethod
    def extensional(cls, members, validate: bool = True) -> "ConstantSpecification":
        members = frozenset(members)
        if validate:
            for idx, sort, a in members:
                if not is_axiom(a):
                    raise InvalidInput(f"not an axiom instance: {print_formula(a)}")
        return cls("extensional", members)

    @classmethod
    def allocated(cls, allocator) -> "ConstantSpecification":
        return cls("allocated", allocator=allocator)

    @property
    def is_c_axiomatically_appropriate(self) -> bool:
        # a finite extensional table cannot cover every axiom instance
        return self.kind in ("totalC", "allocated")

    @property
    def is_pure(self) -> Sort | None:
        """The single sort all members share, if there is one."""
        if self.kind in ("totalC", "allocated"):
            return C
        sorts = {sort for _, sort, _ in self.members}
        return sorts.pop() if len(sorts) == 1 else None

    def pairs(self):
        """Iterate (constant term, formula) members; totalC is not enumerable."""
        if self.kind == "extensional":
            for idx, sort, a in self.members:
                yield Const(idx, sort), a
        elif self.kind == "allocated":
            for a, idx in self.allocator.memo.items():
                yield Const(idx, C), a
        else:
            raise InvalidInput("the total specification cannot be enumerated")


def cs_contains(cs: ConstantSpecification, c: Const, sort: Sort, a: Formula) -> bool:
    if not isinstance(c, Const) or c.sort != sort:
        return False
    if cs.kind == "totalC":
        return sort == C and is_axiom(a)
    if cs.kind == "extensional":
        return (c.index, sort, a) in cs.members
    if cs.kind == "allocated":
        return sort == C and cs.allocator.memo.get(a) == c.index
    raise InvalidInput(f"unknown specification kind {cs.kind!r}")


# ---------------------------------------------------------------------------
# derivations


@dataclass(frozen=True)
class Hyp:
    index: int  # 1-based position in the hypothesis list


@dataclass(frozen=True)
class Axiom:
    schema: AxiomSchema


@dataclass(frozen=True)
class MP:
    i: int  # earlier step proving X -> Y
    j: int  # earlier step proving X


@dataclass(frozen=True)
class AxNec:
    constant: Const


Rule = Hyp | Axiom | MP | AxNec


@dataclass(frozen=True)
class Step:
    formula: Formula
    rule: Rule


@dataclass(frozen=True)
class Derivation:
    hypotheses: tuple[Formula, ...]
    steps: tuple[Step, ...]

    def __post_init__(self):
        object.__setattr__(self, "hypotheses", tuple(self.hypotheses))
        object.__setattr__(self, "steps", tuple(self.steps))
        if not self.steps:
            raise InvalidInput("a derivation needs at least one step")

    @property
    def conclusion(self) -> Formula:
        return self.steps[-1].formula


@dataclass(frozen=True)
class CheckReport:
    ok: bool
    step: int | None = None  # 1-based index of first failing step
    status: str = "ok"       # ok | BadHypIndex | NotAnAxiom | BadMP | NotInCS | NotInFragment | IllFormed
    message: str = ""

    def __bool__(self) -> bool:
        return self.ok


def check_derivation(d: Derivation, cs: ConstantSpecification,
                     h: int | None = None, fragment: str = "full",
                     max_atoms: int = 24) -> CheckReport:
    """Accept or reject a derivation; the first failing step wins.

    With `h` given, every step formula is additionally screened for agent
    bounds and tuple arity.  `fragment="agent"` restricts steps to the
    single-agent language and to the schemata available there.
    """
    if fragment not in ("full", "agent"):
        raise InvalidInput(f"unknown fragment {fragment!r}")

    def fail(k, status, message):
        return CheckReport(False, k, status, message)

    for k, step in enumerate(d.steps, start=1):
        f = step.formula
        if h is not None:
            problems = bound_problems(f, h)
            if problems:
                return fail(k, "IllFormed", problems[0])
        if fragment == "agent" and not is_agent_fragment_formula(f):
            return fail(k, "NotInFragment", f"step formula leaves the single-agent fragment: {print_formula(f)}")
        rule = step.rule
        if isinstance(rule, Hyp):
            if not 1 <= rule.index <= len(d.hypotheses):
                return fail(k, "BadHypIndex", f"no hypothesis {rule.index}")
            if d.hypotheses[rule.index - 1] != f:
                return fail(k, "BadHypIndex", f"step formula differs from hypothesis {rule.index}")
        elif isinstance(rule, Axiom):
            if fragment == "agent" and rule.schema not in AGENT_FRAGMENT_SCHEMATA:
                return fail(k, "NotAnAxiom", f"schema {rule.schema.value} unavailable in the single-agent fragment")
            try:
                ok = matches_schema(rule.schema, f, max_atoms)
            except ResourceError as e:
                return fail(k, "NotAnAxiom", str(e))
            if not ok:
                return fail(k, "NotAnAxiom", f"not an instance of {rule.schema.value}: {print_formula(f)}")
        elif isinstance(rule, MP):
            if not (1 <= rule.i < k and 1 <= rule.j < k):
                return fail(k, "BadMP", f"premise indices {rule.i}, {rule.j} must point at earlier steps")
            major = d.steps[rule.i - 1].formula
            minor = d.steps[rule.j - 1].formula
            if not isinstance(major, Imp) or major.left != minor or major.right != f:
                return fail(k, "BadMP", f"steps {rule.i} and {rule.j} do not yield this formula")
        elif isinstance(rule, AxNec):
            c = rule.constant
            if not (isinstance(f, Just) and f.term == c and f.sort == c.sort):
                return fail(k, "NotInCS", "step formula is not the boxed form of its constant")
            if not cs_contains(cs, c, c.sort, f.body):
                return fail(k, "NotInCS",
                            f"({print_term(c)}, {print_formula(f.body)}) not in the constant specification")
        else:
            return fail(k, "IllFormed", f"unknown rule {rule!r}")
    return CheckReport(True)


# ---------------------------------------------------------------------------
# deduction theorem


def deduction_theorem(d: Derivation, hypothesis: Formula, cs: ConstantSpecification) -> Derivation:
    """Discharge one hypothesis: from D proving B, produce a proof of A -> B.

    The usual Hilbert transformation: hypothesis occurrences of A become the
    tautology A -> A, other leaves F are prefixed with F -> (A -> F), and each
    modus ponens is replayed through the composition tautology.
    """
    if hypothesis not in d.hypotheses:
        raise InvalidInput("the designated hypothesis does not occur in the derivation")
    report = check_derivation(d, cs)
    if not report.ok:
        raise InvalidInput(f"input derivation rejected at step {report.step}: {report.message}")

    a = hypothesis
    kept = [f for f in d.hypotheses if f != a]
    new_index = {f: i for i, f in enumerate(kept, start=1)}

    steps: list[Step] = []

    def emit(f: Formula, rule: Rule) -> int:
        steps.append(Step(f, rule))
        return len(steps)

    mapped: dict[int, int] = {}  # old step -> new step proving A -> F
    for k, step in enumerate(d.steps, start=1):
        f = step.formula
        if f == a:
            mapped[k] = emit(Imp(a, a), Axiom(AxiomSchema.TAUT))
            continue
        rule = step.rule
        if isinstance(rule, MP):
            major = emit(Imp(Imp(a, d.steps[rule.i - 1].formula),
                             Imp(Imp(a, d.steps[rule.j - 1].formula), Imp(a, f))),
                         Axiom(AxiomSchema.TAUT))
            partial = emit(Imp(Imp(a, d.steps[rule.j - 1].formula), Imp(a, f)), MP(major, mapped[rule.i]))
            mapped[k] = emit(Imp(a, f), MP(partial, mapped[rule.j]))
            continue
        if isinstance(rule, Hyp):
            base = emit(f, Hyp(new_index[f]))
        else:
            base = emit(f, rule)
        lifted = emit(Imp(f, Imp(a, f)), Axiom(AxiomSchema.TAUT))
        mapped[k] = emit(Imp(a, f), MP(lifted, base))

    return Derivation(tuple(kept), tuple(steps))


# ---------------------------------------------------------------------------
# derivation files

_STEP_RE = re.compile(r"(\d+)\.\s*(.*)\Z")


def print_derivation(d: Derivation) -> str:
    lines = [f"hyp: {print_formula(f)}" for f in d.hypotheses]
    for k, step in enumerate(d.steps, start=1):
        rule = step.rule
        if isinstance(rule, Hyp):
            tail = f"hyp {rule.index}"
        elif isinstance(rule, Axiom):
            tail = f"axiom {rule.schema.value}"
        elif isinstance(rule, MP):
            tail = f"mp {rule.i} {rule.j}"
        else:
            tail = f"axnec {print_term(rule.constant)}"
        lines.append(f"{k}. {print_formula(step.formula)} ; {tail}")
    return "\n".join(lines) + "\n"


_SCHEMA_BY_ID = {s.value: s for s in AxiomSchema}


def parse_derivation(text: str, h: int) -> Derivation:
    """Read the derivation file format: `hyp:` lines first, then numbered steps."""
    hypotheses: list[Formula] = []
    steps: list[Step] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("hyp:"):
            if steps:
                raise ParseError(f"line {lineno}: hypotheses must precede all steps")
            hypotheses.append(parse_formula(line[len("hyp:"):].strip(), h))
            continue
        m = _STEP_RE.match(line)
        if m is None:
            raise ParseError(f"line {lineno}: expected `<k>. <formula> ; <rule>`")
        k = int(m.group(1))
        if k != len(steps) + 1:
            raise ParseError(f"line {lineno}: step number {k}, expected {len(steps) + 1}")
        body = m.group(2)
        if ";" not in body:
            raise ParseError(f"line {lineno}: missing `; <rule>`")
        formula_text, rule_text = body.split(";", 1)
        formula = parse_formula(formula_text.strip(), h)
        parts = rule_text.strip().split()
        if not parts:
            raise ParseError(f"line {lineno}: empty rule")
        name = parts[0]
        if name == "hyp" and len(parts) == 2:
            rule: Rule = Hyp(int(parts[1]))
        elif name == "axiom" and len(parts) == 2:
            schema = _SCHEMA_BY_ID.get(parts[1])
            if schema is None:
                raise ParseError(f"line {lineno}: unknown schema {parts[1]!r}")
            rule = Axiom(schema)
        elif name == "mp" and len(parts) == 3:
            rule = MP(int(parts[1]), int(parts[2]))
        elif name == "axnec" and len(parts) == 2:
            const = parse_term(parts[1], h)
            if not isinstance(const, Const):
                raise ParseError(f"line {lineno}: axnec needs a constant, got {parts[1]!r}")
            rule = AxNec(const)
        else:
            raise ParseError(f"line {lineno}: cannot read rule {rule_text.strip()!r}")
        steps.append(Step(formula, rule))
    if not steps:
        raise ParseError("no steps found")
    return Derivation(tuple(hypotheses), tuple(steps))
