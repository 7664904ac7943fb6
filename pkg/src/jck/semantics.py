"""Finite evidence models: validation, saturation, and satisfaction.

A model carries per-agent accessibility relations, a valuation, and a finite
base of evidence facts.  Group reachability is the union of the agent
relations; common reachability is its transitive closure.  Evidence queries in
base mode answer by saturating the nine evidence-closure rules over a finite
universe of terms and formulas; the result is a sound under-approximation of
the least closed evidence function, exact whenever the relevant derivations
stay inside the universe.  Full mode answers every evidence query positively.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .deduction import ConstantSpecification, match_axiom
from .errors import InvalidInput, ParseError, ResourceError, UnknownWorld
from .syntax import (
    And, App, Bang, C, Const, E, Formula, Head, Imp, Ind, Just, Neg, Or, Prop,
    Proj, Sort, Sum, Tail, Term, Tuple, _Parser, agent, bound_problems,
    formula_terms, print_formula, print_term, subformulas, subterms,
)

Pair = tuple[int, int]


@dataclass(frozen=True)
class EvidenceFact:
    """One base assertion: at `world`, `term` counts as evidence for `formula`."""

    world: int
    term: Term
    formula: Formula


class AFModel:
    """Finite model over worlds 0..n with per-agent preorders.

    `mode` is "base" (evidence from the fact base, closed under the nine
    rules) or "full" (every term evidences every formula).  Treat instances
    as immutable after construction; the saturation cache assumes it.
    """

    def __init__(self, h: int, worlds, relations, valuation, evidence_base=(),
                 cs: ConstantSpecification | None = None, mode: str = "base"):
        if h < 1:
            raise InvalidInput("need at least one agent")
        if mode not in ("base", "full"):
            raise InvalidInput(f"unknown evidence mode {mode!r}")
        self.h = h
        self.worlds = frozenset(worlds)
        self.relations = {i: frozenset(relations.get(i, ())) for i in range(1, h + 1)}
        self.valuation = {p: frozenset(ws) for p, ws in valuation.items()}
        self.evidence_base = tuple(evidence_base)
        self.cs = cs if cs is not None else ConstantSpecification.total_c()
        self.mode = mode
        self._saturation_cache: dict = {}
        self._reach_cache: dict = {}

    def successors(self, sort: Sort):
        """World-successor map for the given sort's accessibility relation."""
        key = ("succ", sort)
        if key not in self._reach_cache:
            if sort.is_agent:
                rel = self.relations[sort.index]
            elif sort == E:
                rel = reach_E(self)
            else:
                rel = reach_C(self)
            succ: dict[int, list[int]] = {w: [] for w in self.worlds}
            for w, v in rel:
                succ[w].append(v)
            self._reach_cache[key] = succ
        return self._reach_cache[key]


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    problems: tuple[str, ...]

    def __bool__(self) -> bool:
        return self.ok


def validate_model(m: AFModel) -> ValidationReport:
    """Frame and typing checks: preorder relations, known worlds, sorted facts."""
    problems: list[str] = []
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
    for fact in m.evidence_base:
        if fact.world not in m.worlds:
            problems.append(f"evidence at unknown world {fact.world}")
        for issue in bound_problems(fact.term, m.h) + bound_problems(fact.formula, m.h):
            problems.append(f"evidence ({fact.world}, {print_term(fact.term)}, "
                            f"{print_formula(fact.formula)}): {issue}")
    dedup = tuple(dict.fromkeys(problems))
    return ValidationReport(not dedup, dedup)


def transitive_closure(pairs) -> frozenset:
    """Smallest transitive superset of `pairs` (paths of length >= 1)."""
    closure = set(pairs)
    changed = True
    while changed:
        changed = False
        fresh = {(w, u) for w, v in closure for v2, u in closure
                 if v2 == v and (w, u) not in closure}
        if fresh:
            closure |= fresh
            changed = True
    return frozenset(closure)


def reflexive_transitive_closure(pairs, worlds) -> frozenset:
    return transitive_closure(set(pairs) | {(w, w) for w in worlds})


def reach_E(m: AFModel) -> frozenset:
    key = "reach_E"
    if key not in m._reach_cache:
        out: set[Pair] = set()
        for rel in m.relations.values():
            out |= rel
        m._reach_cache[key] = frozenset(out)
    return m._reach_cache[key]


def reach_C(m: AFModel) -> frozenset:
    key = "reach_C"
    if key not in m._reach_cache:
        m._reach_cache[key] = transitive_closure(reach_E(m))
    return m._reach_cache[key]


# ---------------------------------------------------------------------------
# saturation


@dataclass(frozen=True)
class SaturationUniverse:
    """Finite fact space: only (world, term, formula) with term and formula
    drawn from these sets participate in closure."""

    terms: frozenset
    formulas: frozenset


def build_universe(m: AFModel, query: Formula, depth_budget: int = 3,
                   max_size: int = 50000) -> SaturationUniverse:
    """Subterm/subformula closure of the query and the fact base, then
    specification instances for constants present, then `depth_budget` rounds
    of the boxed forms the tail rule can emit."""
    terms: set[Term] = set()
    formulas: set[Formula] = set()

    def add_formula(a: Formula) -> None:
        for f in subformulas(a):
            formulas.add(f)
        for t in formula_terms(a):
            terms.update(subterms(t))

    add_formula(query)
    for fact in m.evidence_base:
        terms.update(subterms(fact.term))
        add_formula(fact.formula)

    if m.cs.kind != "totalC":
        for c, a in m.cs.pairs():
            if c in terms:
                add_formula(a)

    for _ in range(depth_budget):
        tails = [t for t in terms if isinstance(t, Tail)]
        fresh = []
        for tail in tails:
            for a in formulas:
                boxed = Just(tail.t, C, a)
                if boxed not in formulas:
                    fresh.append(boxed)
        formulas.update(fresh)
        if len(terms) + len(formulas) > max_size:
            raise ResourceError(
                f"saturation universe exceeded {max_size} entries; "
                "lower the depth budget or shrink the query")
        if not fresh:
            break
    if len(terms) + len(formulas) > max_size:
        raise ResourceError(
            f"saturation universe exceeded {max_size} entries; "
            "lower the depth budget or shrink the query")
    return SaturationUniverse(frozenset(terms), frozenset(formulas))


def saturate(m: AFModel, universe: SaturationUniverse) -> frozenset:
    """Least fixpoint of the nine closure rules inside `universe`.

    Returns a frozenset of (world, term, formula) triples.  Indexed worklist:
    each rule fires from the arrival of a premise fact, so work is linear in
    fired-rule instances rather than in universe size per pass.
    """
    tu = universe.terms
    fu = universe.formulas

    # structural indexes over the term universe
    sums_by_child: dict[Term, list[Sum]] = {}
    apps_by_left: dict[Term, list[App]] = {}
    apps_by_right: dict[Term, list[App]] = {}
    bangs_by_child: dict[Term, list[Bang]] = {}
    tuples_by_slot: dict[tuple[Term, int], list[Tuple]] = {}
    projs_by_child: dict[Term, list[Proj]] = {}
    heads_by_child: dict[Term, list[Head]] = {}
    tails_by_child: dict[Term, list[Tail]] = {}
    inds_by_e: dict[Term, list[Ind]] = {}
    inds_by_pair: dict[tuple[Term, Term], Ind] = {}
    constants: list[Const] = []
    for t in tu:
        if isinstance(t, Sum):
            sums_by_child.setdefault(t.t, []).append(t)
            if t.s != t.t:
                sums_by_child.setdefault(t.s, []).append(t)
        elif isinstance(t, App):
            apps_by_left.setdefault(t.t, []).append(t)
            apps_by_right.setdefault(t.s, []).append(t)
        elif isinstance(t, Bang):
            bangs_by_child.setdefault(t.t, []).append(t)
        elif isinstance(t, Tuple):
            for i, item in enumerate(t.items, start=1):
                tuples_by_slot.setdefault((item, i), []).append(t)
        elif isinstance(t, Proj):
            projs_by_child.setdefault(t.t, []).append(t)
        elif isinstance(t, Head):
            heads_by_child.setdefault(t.t, []).append(t)
        elif isinstance(t, Tail):
            tails_by_child.setdefault(t.t, []).append(t)
        elif isinstance(t, Ind):
            inds_by_e.setdefault(t.s, []).append(t)
            inds_by_pair[(t.t, t.s)] = t
        elif isinstance(t, Const):
            constants.append(t)

    succ_star: dict[Sort, dict[int, list[int]]] = {}
    for i in range(1, m.h + 1):
        succ_star[agent(i)] = m.successors(agent(i))
    succ_star[C] = m.successors(C)

    known: set[tuple[int, Term, Formula]] = set()
    by_world_term: dict[tuple[int, Term], set[Formula]] = {}
    queue: list[tuple[int, Term, Formula]] = []

    def emit(w: int, t: Term, a: Formula) -> None:
        fact = (w, t, a)
        if fact in known:
            return
        known.add(fact)
        by_world_term.setdefault((w, t), set()).add(a)
        queue.append(fact)

    def holds(w: int, t: Term, a: Formula) -> bool:
        return a in by_world_term.get((w, t), ())

    # seeds: the base plus specification facts at every world
    for fact in m.evidence_base:
        if fact.world in m.worlds and fact.term in tu and fact.formula in fu:
            emit(fact.world, fact.term, fact.formula)
    if m.cs.kind == "totalC":
        axioms = [a for a in fu if match_axiom(a)]
        for c in constants:
            if c.sort == C:
                for a in axioms:
                    for w in m.worlds:
                        emit(w, c, a)
    else:
        for c, a in m.cs.pairs():
            if c in tu and a in fu:
                for w in m.worlds:
                    emit(w, c, a)

    while queue:
        w, t, a = queue.pop()
        sort = t.sort

        # monotonicity along the star-sort relations
        if sort.is_agent or sort == C:
            for v in succ_star[sort].get(w, ()):
                emit(v, t, a)

        # application, both premise roles
        if isinstance(a, Imp):
            for u in apps_by_left.get(t, ()):
                if a.right in fu and holds(w, u.s, a.left):
                    emit(w, u, a.right)
        for u in apps_by_right.get(t, ()):
            for f in list(by_world_term.get((w, u.t), ())):
                if isinstance(f, Imp) and f.left == a and f.right in fu:
                    emit(w, u, f.right)

        # sum
        for u in sums_by_child.get(t, ()):
            emit(w, u, a)

        # inspection
        if sort.is_agent:
            boxed = Just(t, sort, a)
            for u in bangs_by_child.get(t, ()):
                if boxed in fu:
                    emit(w, u, boxed)

        # tupling
        if sort.is_agent:
            for u in tuples_by_slot.get((t, sort.index), ()):
                if all(holds(w, item, a) for item in u.items):
                    emit(w, u, a)

        # projection
        if sort == E:
            for u in projs_by_child.get(t, ()):
                emit(w, u, a)

        # co-closure, head and tail conclusions
        if sort == C:
            for u in heads_by_child.get(t, ()):
                emit(w, u, a)
            boxed = Just(t, C, a)
            for u in tails_by_child.get(t, ()):
                if boxed in fu:
                    emit(w, u, boxed)

        # induction, from either premise
        if sort == E:
            for u in inds_by_e.get(t, ()):
                if holds(w, u.t, Imp(a, Just(t, E, a))):
                    emit(w, u, a)
        if sort == C and isinstance(a, Imp):
            body = a.right
            if isinstance(body, Just) and body.sort == E and body.body == a.left:
                u = inds_by_pair.get((t, body.term))
                if u is not None and a.left in fu and holds(w, body.term, a.left):
                    emit(w, u, a.left)

    return frozenset(known)


def _facts_for_query(m: AFModel, query: Formula, depth_budget: int) -> frozenset:
    key = (query, depth_budget)
    if key not in m._saturation_cache:
        universe = build_universe(m, query, depth_budget)
        m._saturation_cache[key] = saturate(m, universe)
    return m._saturation_cache[key]


def evidence_holds(m: AFModel, w: int, t: Term, a: Formula,
                   depth_budget: int = 3) -> bool:
    """Does `t` evidence `a` at `w`?  Full mode: always.  Base mode: membership
    in the saturation of the query's own universe (a bounded, sound
    under-approximation; a negative answer is relative to the budget)."""
    if w not in m.worlds:
        raise UnknownWorld(f"unknown world {w}")
    if m.mode == "full":
        return True
    facts = _facts_for_query(m, Just(t, t.sort, a), depth_budget)
    return (w, t, a) in facts


def satisfies(m: AFModel, w: int, a: Formula, depth_budget: int = 3) -> bool:
    """Satisfaction at a world.  In base mode all evidence questions for the
    whole query are answered against one saturation of the query's universe."""
    if w not in m.worlds:
        raise UnknownWorld(f"unknown world {w}")
    facts = None
    if m.mode == "base":
        facts = _facts_for_query(m, a, depth_budget)
    memo: dict[tuple[int, Formula], bool] = {}

    def ev(v: int, t: Term, body: Formula) -> bool:
        if m.mode == "full":
            return True
        return (v, t, body) in facts

    def sat(v: int, f: Formula) -> bool:
        key = (v, f)
        if key in memo:
            return memo[key]
        if isinstance(f, Prop):
            out = v in m.valuation.get(f.index, frozenset())
        elif isinstance(f, Neg):
            out = not sat(v, f.body)
        elif isinstance(f, And):
            out = sat(v, f.left) and sat(v, f.right)
        elif isinstance(f, Or):
            out = sat(v, f.left) or sat(v, f.right)
        elif isinstance(f, Imp):
            out = (not sat(v, f.left)) or sat(v, f.right)
        elif isinstance(f, Just):
            out = ev(v, f.term, f.body) and all(
                sat(u, f.body) for u in m.successors(f.sort).get(v, ()))
        else:
            raise InvalidInput(f"cannot evaluate {f!r}")
        memo[key] = out
        return out

    return sat(w, a)


def valid_in_model(m: AFModel, a: Formula, depth_budget: int = 3) -> bool:
    return all(satisfies(m, w, a, depth_budget) for w in m.worlds)


def restrict_to_world(m: AFModel, w: int) -> AFModel:
    """Singleton submodel at `w`: one world, identity relations, base facts
    and valuation cut down to `w`."""
    if w not in m.worlds:
        raise UnknownWorld(f"unknown world {w}")
    return AFModel(
        h=m.h,
        worlds={w},
        relations={i: {(w, w)} for i in range(1, m.h + 1)},
        valuation={p: ws & {w} for p, ws in m.valuation.items()},
        evidence_base=[f for f in m.evidence_base if f.world == w],
        cs=m.cs,
        mode=m.mode,
    )


def random_model(h: int, n_worlds: int, density: float = 0.3, n_base: int = 4,
                 seed: int = 0, mode: str = "base",
                 cs: ConstantSpecification | None = None) -> AFModel:
    """Seed-deterministic model; agent relations are reflexive-transitive
    closures of random edge sets."""
    from .gen import random_formula, random_sort, random_term
    rng = random.Random(seed)
    worlds = set(range(n_worlds))
    relations = {}
    for i in range(1, h + 1):
        edges = {(w, v) for w in worlds for v in worlds
                 if w != v and rng.random() < density}
        relations[i] = reflexive_transitive_closure(edges, worlds)
    valuation = {k: {w for w in worlds if rng.random() < 0.5}
                 for k in range(1, 5)}
    base = []
    for _ in range(n_base):
        sort = random_sort(rng, h)
        base.append(EvidenceFact(rng.randrange(n_worlds),
                                 random_term(rng, sort, h, rng.randint(0, 2)),
                                 random_formula(rng, h, rng.randint(0, 2))))
    return AFModel(h, worlds, relations, valuation, base, cs, mode)


# ---------------------------------------------------------------------------
# model files


def format_model(m: AFModel) -> str:
    lines = [f"h: {m.h}"]
    lines.append("worlds: " + " ".join(f"w{w}" for w in sorted(m.worlds)))
    for i in range(1, m.h + 1):
        pairs = " ".join(f"(w{w},w{v})" for w, v in sorted(m.relations[i]))
        lines.append(f"rel {i}: {pairs}")
    for p in sorted(m.valuation, key=str):
        name = f"P{p}" if isinstance(p, int) else str(p)
        lines.append(f"val {name}: " + " ".join(f"w{w}" for w in sorted(m.valuation[p])))
    for fact in m.evidence_base:
        lines.append(f"evidence: (w{fact.world}, {print_term(fact.term)}, "
                     f"{print_formula(fact.formula)})")
    lines.append(f"mode: {m.mode}")
    if m.cs.kind == "totalC":
        lines.append("cs: totalC")
    return "\n".join(lines) + "\n"


def _world_id(token: str) -> int:
    if not token.startswith("w") or not token[1:].isdigit():
        raise ParseError(f"bad world name {token!r}; expected wN")
    return int(token[1:])


def parse_cs_table(text: str, h: int, validate: bool = True) -> ConstantSpecification:
    """Constant specification tables: one `<const> := <formula>` line each."""
    members = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":=" not in line:
            raise ParseError(f"bad specification line {line!r}; expected ':='")
        left, right = line.split(":=", 1)
        p = _Parser(left.strip(), h)
        const = p.parse_term()
        p.expect_end()
        if not isinstance(const, Const):
            raise ParseError(f"specification member {left.strip()!r} is not a constant")
        p = _Parser(right.strip(), h)
        body = p.parse_formula()
        p.expect_end()
        members.append((const.index, const.sort, body))
    return ConstantSpecification.extensional(members, validate=validate)


def parse_model_file(text: str, cs_loader=None) -> tuple[AFModel, tuple[str, ...]]:
    """Load a model from its text form; returns (model, warnings).

    Relations are closed reflexively and transitively on load; closure that
    adds pairs is reported as a warning, not an error.  `cs_loader` maps a
    path from a `cs: file <path>` line to that file's text.
    """
    h = None
    worlds: set[int] = set()
    relations: dict[int, set[Pair]] = {}
    valuation: dict = {}
    evidence: list[EvidenceFact] = []
    mode = "base"
    cs: ConstantSpecification | None = None
    warnings: list[str] = []

    def need_h() -> int:
        if h is None:
            raise ParseError("the h: line must come first")
        return h

    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, rest = line.partition(":")
        key = key.strip()
        rest = rest.strip()
        if key == "h":
            h = int(rest)
            if h < 1:
                raise ParseError("h must be at least 1")
        elif key == "worlds":
            worlds.update(_world_id(tok) for tok in rest.split())
        elif key.startswith("rel"):
            i = int(key[3:].strip())
            if not 1 <= i <= need_h():
                raise ParseError(f"agent index {i} outside 1..{h}")
            pairs = relations.setdefault(i, set())
            for chunk in rest.replace(" ", "").split(")"):
                chunk = chunk.strip(",")
                if not chunk:
                    continue
                if not chunk.startswith("("):
                    raise ParseError(f"bad relation pair {chunk!r}")
                a, _, b = chunk[1:].partition(",")
                pairs.add((_world_id(a), _world_id(b)))
        elif key.startswith("val"):
            name = key[3:].strip()
            if name.startswith("P") and name[1:].isdigit():
                prop_key = int(name[1:])
            else:
                prop_key = name
            valuation[prop_key] = {_world_id(tok) for tok in rest.split()}
        elif key == "evidence":
            p = _Parser(rest, need_h())
            p.expect("(")
            world = _world_id(p.expect("IDENT")[1])
            p.expect(",")
            term = p.parse_term()
            p.expect(",")
            body = p.parse_formula()
            p.expect(")")
            p.expect_end()
            evidence.append(EvidenceFact(world, term, body))
        elif key == "mode":
            if rest not in ("base", "full"):
                raise ParseError(f"unknown mode {rest!r}")
            mode = rest
        elif key == "cs":
            if rest == "totalC":
                cs = ConstantSpecification.total_c()
            elif rest.startswith("file"):
                path = rest[4:].strip()
                if cs_loader is None:
                    raise InvalidInput("model references a specification file "
                                       "but no loader was provided")
                cs = parse_cs_table(cs_loader(path), need_h())
            else:
                raise ParseError(f"unknown specification {rest!r}")
        else:
            raise ParseError(f"unknown model line {line!r}")

    if h is None:
        raise ParseError("missing h: line")
    if not worlds:
        raise ParseError("missing worlds: line")
    for i in range(1, h + 1):
        given = relations.get(i, set())
        closed = reflexive_transitive_closure(given, worlds)
        if closed != given:
            warnings.append(f"rel {i}: added {len(closed) - len(given)} pairs "
                            "for reflexive-transitive closure")
        relations[i] = closed
    model = AFModel(h, worlds, relations, valuation, evidence, cs, mode)
    report = validate_model(model)
    if not report.ok:
        raise InvalidInput("; ".join(report.problems))
    return model, tuple(warnings)


# ---------------------------------------------------------------------------
# scenario fixtures: two generals, unreliable messenger


def attack_four_world_model() -> AFModel:
    """Four-world countermodel: the last acknowledgment was delivered but its
    sender cannot know that.  Agent 1 is the original sender, agent 2 the
    receiver; `del` marks delivery of the first message.  Full evidence mode:
    every refutation here is purely relational."""
    worlds = {0, 1, 2, 3}
    return AFModel(
        h=2,
        worlds=worlds,
        relations={
            1: reflexive_transitive_closure({(1, 2)}, worlds),
            2: reflexive_transitive_closure({(0, 1), (2, 3)}, worlds),
        },
        valuation={"del": {0, 1, 2}},
        evidence_base=(),
        cs=ConstantSpecification.total_c(),
        mode="full",
    )


def attack_singleton_model() -> AFModel:
    """One-world model where knowledge fails for lack of evidence alone: the
    message evidences delivery to agent 2, the acknowledgment evidences that
    to agent 1, and nothing more is assumed."""
    m1 = Const("m1", agent(2))
    m2 = Const("m2", agent(1))
    delivered = Prop("del")
    return AFModel(
        h=2,
        worlds={0},
        relations={1: {(0, 0)}, 2: {(0, 0)}},
        valuation={"del": {0}},
        evidence_base=(
            EvidenceFact(0, m1, delivered),
            EvidenceFact(0, m2, Just(m1, agent(2), delivered)),
        ),
        cs=ConstantSpecification.total_c(),
        mode="base",
    )
