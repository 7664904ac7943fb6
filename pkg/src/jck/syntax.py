"""Sorted evidence terms and formulas.

Terms are sorted: each belongs either to a single agent `1..h`, to the
mutual-evidence sort `E`, or to the common-evidence sort `C`.  The binary
operations `+` and `*` exist only at agent sorts and at `C`; pooled evidence at
`E` is built with tupling instead.  Every node validates its own sorting
constraint at construction time, so a `Term` or `Formula` object that exists is
well sorted.

Concrete grammar (whitespace insensitive):

    term     :=  sum
    sum      :=  app ('+' app)*
    app      :=  atom ('*' atom)*
    atom     :=  x<k>@<sort> | c<k>@<sort> | <name>@<sort>
              |  !<i>(term) | pi_<i>(term) | head(term) | tail(term)
              |  ind(term, term) | '<' term (',' term)* '>' | '(' term ')'
    formula  :=  imp ;  imp := or ('->' imp)? ; or := and ('|' and)*
    and      :=  unary ('&' unary)* ;  unary := '~' unary | just | fatom
    just     :=  '[' term ']' '@' <sort> unary
    fatom    :=  P<k> | <name> | '(' formula ')'
    sort     :=  1..h | E | C

`->` is right associative; `&` and `|` associate to the left and bind tighter
than `|` and `->` respectively.  Indexed atoms (`x1@C`, `c2@1`, `P3`) are the
canonical spelling; bare lowercase names are also accepted as constants and
propositions so scenario fixtures can use speaking names like `m1@2` or `del`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import InvalidInput, ParseError, SortError

# ---------------------------------------------------------------------------
# sorts


@dataclass(frozen=True)
class Sort:
    """An evidence sort: one agent, the group sort E, or the common sort C."""

    kind: str  # "agent" | "E" | "C"
    index: int = 0

    def __post_init__(self):
        if self.kind == "agent":
            if not isinstance(self.index, int) or self.index < 1:
                raise SortError(f"agent index must be a positive int, got {self.index!r}")
        elif self.kind in ("E", "C"):
            if self.index != 0:
                raise SortError(f"sort {self.kind} carries no agent index")
        else:
            raise SortError(f"unknown sort kind {self.kind!r}")

    @property
    def is_agent(self) -> bool:
        return self.kind == "agent"

    @property
    def is_star(self) -> bool:
        """True for the sorts that admit the binary + and * operations."""
        return self.kind in ("agent", "C")

    def __str__(self) -> str:
        return str(self.index) if self.kind == "agent" else self.kind


E = Sort("E")
C = Sort("C")


def agent(i: int) -> Sort:
    return Sort("agent", i)


# ---------------------------------------------------------------------------
# atom naming

_NAME_RE = re.compile(r"[a-z][a-z0-9_]*\Z")
_RESERVED_NAMES = {"head", "tail", "ind"}
# shapes that would collide with indexed tokens when reparsed
_COLLIDING_RE = re.compile(r"(?:[xc]\d+|pi_\d+)\Z")


def _check_atom_index(index) -> None:
    if isinstance(index, int):
        if index < 1:
            raise InvalidInput(f"atom index must be >= 1, got {index}")
        return
    if isinstance(index, str):
        if not _NAME_RE.match(index) or index in _RESERVED_NAMES or _COLLIDING_RE.match(index):
            raise InvalidInput(f"bad atom name {index!r}")
        return
    raise InvalidInput(f"atom index must be int or str, got {type(index).__name__}")


# ---------------------------------------------------------------------------
# terms


class Term:
    """Base class for evidence terms.  Every term exposes a `.sort`."""

    sort: Sort


@dataclass(frozen=True)
class Const(Term):
    index: int | str
    sort: Sort

    def __post_init__(self):
        _check_atom_index(self.index)


@dataclass(frozen=True)
class Var(Term):
    index: int
    sort: Sort

    def __post_init__(self):
        if not isinstance(self.index, int) or self.index < 1:
            raise InvalidInput(f"variable index must be a positive int, got {self.index!r}")


@dataclass(frozen=True)
class Bang(Term):
    """Positive introspection operator of one agent, `!i(t)`."""

    t: Term
    agent: int

    def __post_init__(self):
        if self.t.sort != Sort("agent", self.agent):
            raise SortError(f"!{self.agent} needs an agent-{self.agent} operand, got sort {self.t.sort}")

    @property
    def sort(self) -> Sort:
        return Sort("agent", self.agent)


@dataclass(frozen=True)
class Sum(Term):
    """Evidence pooling `t + s`; defined at agent sorts and at C only."""

    t: Term
    s: Term
    sort: Sort

    def __post_init__(self):
        if not self.sort.is_star:
            raise SortError(f"+ is not a primitive at sort {self.sort}")
        if self.t.sort != self.sort or self.s.sort != self.sort:
            raise SortError(f"+ operands must both have sort {self.sort}, got {self.t.sort} and {self.s.sort}")


@dataclass(frozen=True)
class App(Term):
    """Evidence application `t * s`; defined at agent sorts and at C only."""

    t: Term
    s: Term
    sort: Sort

    def __post_init__(self):
        if not self.sort.is_star:
            raise SortError(f"* is not a primitive at sort {self.sort}")
        if self.t.sort != self.sort or self.s.sort != self.sort:
            raise SortError(f"* operands must both have sort {self.sort}, got {self.t.sort} and {self.s.sort}")


@dataclass(frozen=True)
class Tuple(Term):
    """One term per agent, pooled into sort E."""

    items: tuple[Term, ...]

    def __post_init__(self):
        items = tuple(self.items)
        object.__setattr__(self, "items", items)
        if not items:
            raise SortError("tuple needs at least one component")
        for k, item in enumerate(items, start=1):
            if item.sort != Sort("agent", k):
                raise SortError(f"tuple component {k} must have sort {k}, got {item.sort}")

    @property
    def sort(self) -> Sort:
        return E


@dataclass(frozen=True)
class Proj(Term):
    """Projection `pi_i(t)` extracting agent i's share of an E-term."""

    agent: int
    t: Term

    def __post_init__(self):
        if self.agent < 1:
            raise SortError(f"projection index must be >= 1, got {self.agent}")
        if self.t.sort != E:
            raise SortError(f"pi_{self.agent} needs an E-sorted operand, got sort {self.t.sort}")

    @property
    def sort(self) -> Sort:
        return Sort("agent", self.agent)


@dataclass(frozen=True)
class Head(Term):
    """First co-closure component of a C-term; sort E."""

    t: Term

    def __post_init__(self):
        if self.t.sort != C:
            raise SortError(f"head needs a C-sorted operand, got sort {self.t.sort}")

    @property
    def sort(self) -> Sort:
        return E


@dataclass(frozen=True)
class Tail(Term):
    """Second co-closure component of a C-term; sort E."""

    t: Term

    def __post_init__(self):
        if self.t.sort != C:
            raise SortError(f"tail needs a C-sorted operand, got sort {self.t.sort}")

    @property
    def sort(self) -> Sort:
        return E


@dataclass(frozen=True)
class Ind(Term):
    """Induction evidence `ind(t, s)` with t at C and s at E; sort C."""

    t: Term
    s: Term

    def __post_init__(self):
        if self.t.sort != C:
            raise SortError(f"ind needs a C-sorted first operand, got sort {self.t.sort}")
        if self.s.sort != E:
            raise SortError(f"ind needs an E-sorted second operand, got sort {self.s.sort}")

    @property
    def sort(self) -> Sort:
        return C


def sort_of(t: Term) -> Sort:
    """Recompute the sort of `t` bottom-up, re-validating every node."""
    if isinstance(t, (Const, Var)):
        return t.sort
    if isinstance(t, Bang):
        if sort_of(t.t) != Sort("agent", t.agent):
            raise SortError("ill-sorted ! node")
        return Sort("agent", t.agent)
    if isinstance(t, (Sum, App)):
        if not t.sort.is_star or sort_of(t.t) != t.sort or sort_of(t.s) != t.sort:
            raise SortError("ill-sorted +/* node")
        return t.sort
    if isinstance(t, Tuple):
        for k, item in enumerate(t.items, start=1):
            if sort_of(item) != Sort("agent", k):
                raise SortError("ill-sorted tuple node")
        return E
    if isinstance(t, Proj):
        if sort_of(t.t) != E:
            raise SortError("ill-sorted pi node")
        return Sort("agent", t.agent)
    if isinstance(t, (Head, Tail)):
        if sort_of(t.t) != C:
            raise SortError("ill-sorted head/tail node")
        return E
    if isinstance(t, Ind):
        if sort_of(t.t) != C or sort_of(t.s) != E:
            raise SortError("ill-sorted ind node")
        return C
    raise SortError(f"not a term: {t!r}")


# ---------------------------------------------------------------------------
# formulas


class Formula:
    """Base class for formulas."""


@dataclass(frozen=True)
class Prop(Formula):
    index: int | str

    def __post_init__(self):
        _check_atom_index(self.index)


@dataclass(frozen=True)
class Neg(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Imp(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Just(Formula):
    """Justified assertion `[term]@sort body`."""

    term: Term
    sort: Sort
    body: Formula

    def __post_init__(self):
        if self.term.sort != self.sort:
            raise SortError(f"term has sort {self.term.sort}, asserted at sort {self.sort}")


def just(term: Term, body: Formula) -> Just:
    """Box `body` with `term` at the term's own sort."""
    return Just(term, term.sort, body)


def conj(parts) -> Formula:
    """Left-associated conjunction of a non-empty list."""
    parts = list(parts)
    if not parts:
        raise InvalidInput("conjunction of nothing")
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


# ---------------------------------------------------------------------------
# traversal helpers


def subterms(t: Term) -> frozenset[Term]:
    """All subterms of `t`, including `t` itself."""
    out: set[Term] = set()
    stack = [t]
    while stack:
        cur = stack.pop()
        if cur in out:
            continue
        out.add(cur)
        if isinstance(cur, (Bang, Proj, Head, Tail)):
            stack.append(cur.t)
        elif isinstance(cur, (Sum, App, Ind)):
            stack.append(cur.t)
            stack.append(cur.s)
        elif isinstance(cur, Tuple):
            stack.extend(cur.items)
    return frozenset(out)


def subformulas(a: Formula) -> frozenset[Formula]:
    """All subformulas of `a`, including `a`; does not descend into terms."""
    out: set[Formula] = set()
    stack = [a]
    while stack:
        cur = stack.pop()
        if cur in out:
            continue
        out.add(cur)
        if isinstance(cur, Neg):
            stack.append(cur.body)
        elif isinstance(cur, (And, Or, Imp)):
            stack.append(cur.left)
            stack.append(cur.right)
        elif isinstance(cur, Just):
            stack.append(cur.body)
    return frozenset(out)


def formula_terms(a: Formula) -> frozenset[Term]:
    """The terms attached to justified assertions anywhere inside `a`."""
    return frozenset(f.term for f in subformulas(a) if isinstance(f, Just))


def variables_in(x: Term | Formula) -> frozenset[Var]:
    terms = subterms(x) if isinstance(x, Term) else frozenset().union(
        *[subterms(t) for t in formula_terms(x)] or [frozenset()]
    )
    return frozenset(t for t in terms if isinstance(t, Var))


def bound_problems(x: Term | Formula, h: int) -> list[str]:
    """Agent-bound and tuple-arity violations of `x` against agent count `h`."""
    problems = []
    if isinstance(x, Term):
        terms = subterms(x)
        formulas: frozenset[Formula] = frozenset()
    else:
        formulas = subformulas(x)
        terms = frozenset().union(*[subterms(t) for t in formula_terms(x)] or [frozenset()])
    for t in terms:
        s = t.sort
        if s.is_agent and s.index > h:
            problems.append(f"term {print_term(t)} uses agent {s.index} > h={h}")
        if isinstance(t, Tuple) and len(t.items) != h:
            problems.append(f"tuple {print_term(t)} has arity {len(t.items)}, expected {h}")
        if isinstance(t, Proj) and t.agent > h:
            problems.append(f"projection index {t.agent} > h={h}")
    for f in formulas:
        if isinstance(f, Just) and f.sort.is_agent and f.sort.index > h:
            problems.append(f"assertion sort {f.sort} > h={h}")
    return problems


def check_bounds(x: Term | Formula, h: int) -> None:
    problems = bound_problems(x, h)
    if problems:
        raise SortError("; ".join(problems))


# ---------------------------------------------------------------------------
# substitution


def substitute_in_term(u: Term, x: Var, t: Term) -> Term:
    if u == x:
        return t
    if isinstance(u, (Const, Var)):
        return u
    if isinstance(u, Bang):
        return Bang(substitute_in_term(u.t, x, t), u.agent)
    if isinstance(u, Sum):
        return Sum(substitute_in_term(u.t, x, t), substitute_in_term(u.s, x, t), u.sort)
    if isinstance(u, App):
        return App(substitute_in_term(u.t, x, t), substitute_in_term(u.s, x, t), u.sort)
    if isinstance(u, Tuple):
        return Tuple(tuple(substitute_in_term(i, x, t) for i in u.items))
    if isinstance(u, Proj):
        return Proj(u.agent, substitute_in_term(u.t, x, t))
    if isinstance(u, Head):
        return Head(substitute_in_term(u.t, x, t))
    if isinstance(u, Tail):
        return Tail(substitute_in_term(u.t, x, t))
    if isinstance(u, Ind):
        return Ind(substitute_in_term(u.t, x, t), substitute_in_term(u.s, x, t))
    raise SortError(f"not a term: {u!r}")


def substitute(a: Formula, x: Var | None = None, t: Term | None = None,
               prop: int | str | None = None, by: Formula | None = None) -> Formula:
    """Simultaneously replace variable `x` by `t` and proposition `prop` by `by`.

    Replacements are applied in a single pass over the original formula, so
    occurrences introduced by one replacement are not rewritten by the other.
    """
    if (x is None) != (t is None) or (prop is None) != (by is None):
        raise InvalidInput("substitute needs matched (x, t) and (prop, by) pairs")
    if x is not None:
        if not isinstance(x, Var):
            raise InvalidInput("substitution target must be a variable")
        if x.sort != sort_of(t):
            raise SortError(f"cannot substitute a {sort_of(t)}-sorted term for a {x.sort}-sorted variable")

    def go(f: Formula) -> Formula:
        if isinstance(f, Prop):
            return by if (prop is not None and f.index == prop) else f
        if isinstance(f, Neg):
            return Neg(go(f.body))
        if isinstance(f, And):
            return And(go(f.left), go(f.right))
        if isinstance(f, Or):
            return Or(go(f.left), go(f.right))
        if isinstance(f, Imp):
            return Imp(go(f.left), go(f.right))
        if isinstance(f, Just):
            term = substitute_in_term(f.term, x, t) if x is not None else f.term
            return Just(term, f.sort, go(f.body))
        raise InvalidInput(f"not a formula: {f!r}")

    return go(a)


# ---------------------------------------------------------------------------
# printing

# precedence levels: 1 any, 2 summand, 3 factor / closed
def print_term(t: Term) -> str:
    return _pt(t, 1)


def _pt(t: Term, need: int) -> str:
    if isinstance(t, Const):
        head = f"c{t.index}" if isinstance(t.index, int) else t.index
        return f"{head}@{t.sort}"
    if isinstance(t, Var):
        return f"x{t.index}@{t.sort}"
    if isinstance(t, Bang):
        return f"!{t.agent}({_pt(t.t, 1)})"
    if isinstance(t, Proj):
        return f"pi_{t.agent}({_pt(t.t, 1)})"
    if isinstance(t, Head):
        return f"head({_pt(t.t, 1)})"
    if isinstance(t, Tail):
        return f"tail({_pt(t.t, 1)})"
    if isinstance(t, Ind):
        return f"ind({_pt(t.t, 1)}, {_pt(t.s, 1)})"
    if isinstance(t, Tuple):
        return "<" + ", ".join(_pt(i, 1) for i in t.items) + ">"
    if isinstance(t, Sum):
        out = f"{_pt(t.t, 1)} + {_pt(t.s, 2)}"
        return f"({out})" if need > 1 else out
    if isinstance(t, App):
        out = f"{_pt(t.t, 2)} * {_pt(t.s, 3)}"
        return f"({out})" if need > 2 else out
    raise InvalidInput(f"not a term: {t!r}")


# precedence levels: 1 any, 2 implication operand, 3 disjunct, 4 unary
def print_formula(a: Formula) -> str:
    return _pf(a, 1)


def _pf(a: Formula, need: int) -> str:
    if isinstance(a, Prop):
        return f"P{a.index}" if isinstance(a.index, int) else a.index
    if isinstance(a, Neg):
        return f"~{_pf(a.body, 4)}"
    if isinstance(a, Just):
        return f"[{print_term(a.term)}]@{a.sort} {_pf(a.body, 4)}"
    if isinstance(a, And):
        out = f"{_pf(a.left, 3)} & {_pf(a.right, 4)}"
        return f"({out})" if need > 3 else out
    if isinstance(a, Or):
        out = f"{_pf(a.left, 2)} | {_pf(a.right, 3)}"
        return f"({out})" if need > 2 else out
    if isinstance(a, Imp):
        out = f"{_pf(a.left, 2)} -> {_pf(a.right, 1)}"
        return f"({out})" if need > 1 else out
    raise InvalidInput(f"not a formula: {a!r}")


# ---------------------------------------------------------------------------
# parsing

_TOKEN_RE = re.compile(
    r"""
      (?P<VAR>x(?P<vidx>\d+)@(?P<vsort>\d+|E|C))
    | (?P<CONST>c(?P<cidx>\d+)@(?P<csort>\d+|E|C))
    | (?P<NCONST>(?P<nname>[a-z][a-z0-9_]*)@(?P<nsort>\d+|E|C))
    | (?P<PROP>P(?P<pidx>\d+))
    | (?P<PI>pi_(?P<piidx>\d+))
    | (?P<BANG>!(?P<bidx>\d+))
    | (?P<ARROW>->)
    | (?P<INT>\d+)
    | (?P<IDENT>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<SYM>[~&|+*<>,()\[\]@\#])
    | (?P<WS>\s+)
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str, int, object]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"cannot read {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind == "NCONST":
            # NCONST swallows the inner groups; recover them explicitly
            kind = "NCONST"
        if kind != "WS":
            payload: object = None
            if kind == "VAR":
                payload = (int(m.group("vidx")), m.group("vsort"))
            elif kind == "CONST":
                payload = (int(m.group("cidx")), m.group("csort"))
            elif kind == "NCONST":
                payload = (m.group("nname"), m.group("nsort"))
            elif kind == "PROP":
                payload = int(m.group("pidx"))
            elif kind == "PI":
                payload = int(m.group("piidx"))
            elif kind == "BANG":
                payload = int(m.group("bidx"))
            elif kind == "SYM":
                kind = m.group("SYM")
            elif kind == "ARROW":
                kind = "->"
            tokens.append((kind, m.group(), m.start(), payload))
        pos = m.end()
    tokens.append(("EOF", "", len(text), None))
    return tokens


class _Parser:
    def __init__(self, text: str, h: int):
        if not isinstance(h, int) or h < 1:
            raise InvalidInput(f"agent count h must be a positive int, got {h!r}")
        self.text = text
        self.h = h
        self.tokens = _tokenize(text)
        self.i = 0

    # -- cursor utilities

    def peek(self) -> tuple[str, str, int, object]:
        return self.tokens[self.i]

    def take(self) -> tuple[str, str, int, object]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str) -> tuple[str, str, int, object]:
        tok = self.take()
        if tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[1] or 'end of input'!r}", tok[2])
        return tok

    def at_end(self) -> bool:
        return self.peek()[0] == "EOF"

    def expect_end(self) -> None:
        tok = self.peek()
        if tok[0] != "EOF":
            raise ParseError(f"unexpected trailing input {tok[1]!r}", tok[2])

    # -- shared pieces

    def _sort_from_text(self, text: str, pos: int) -> Sort:
        if text == "E":
            return E
        if text == "C":
            return C
        k = int(text)
        if not 1 <= k <= self.h:
            raise ParseError(f"agent index {k} outside 1..{self.h}", pos)
        return Sort("agent", k)

    def parse_sort_token(self) -> Sort:
        tok = self.take()
        if tok[0] == "INT" or (tok[0] == "IDENT" and tok[1] in ("E", "C")):
            return self._sort_from_text(tok[1], tok[2])
        raise ParseError(f"expected a sort, found {tok[1] or 'end of input'!r}", tok[2])

    # -- terms

    def parse_term(self) -> Term:
        left = self.parse_app()
        while self.peek()[0] == "+":
            op = self.take()
            right = self.parse_app()
            if left.sort != right.sort:
                raise SortError(f"+ operands have sorts {left.sort} and {right.sort}")
            if not left.sort.is_star:
                raise SortError(f"+ is not a primitive at sort {left.sort}")
            left = Sum(left, right, left.sort)
        return left

    def parse_app(self) -> Term:
        left = self.parse_term_atom()
        while self.peek()[0] == "*":
            self.take()
            right = self.parse_term_atom()
            if left.sort != right.sort:
                raise SortError(f"* operands have sorts {left.sort} and {right.sort}")
            if not left.sort.is_star:
                raise SortError(f"* is not a primitive at sort {left.sort}")
            left = App(left, right, left.sort)
        return left

    def parse_term_atom(self) -> Term:
        kind, text, pos, payload = self.take()
        if kind == "VAR":
            idx, sort_text = payload
            return Var(idx, self._sort_from_text(sort_text, pos))
        if kind == "CONST":
            idx, sort_text = payload
            return Const(idx, self._sort_from_text(sort_text, pos))
        if kind == "NCONST":
            name, sort_text = payload
            if name in _RESERVED_NAMES:
                raise ParseError(f"{name!r} is reserved", pos)
            return Const(name, self._sort_from_text(sort_text, pos))
        if kind == "BANG":
            if not 1 <= payload <= self.h:
                raise ParseError(f"agent index {payload} outside 1..{self.h}", pos)
            self.expect("(")
            inner = self.parse_term()
            self.expect(")")
            if inner.sort != Sort("agent", payload):
                raise SortError(f"!{payload} needs an agent-{payload} operand, got sort {inner.sort}")
            return Bang(inner, payload)
        if kind == "PI":
            if not 1 <= payload <= self.h:
                raise ParseError(f"agent index {payload} outside 1..{self.h}", pos)
            self.expect("(")
            inner = self.parse_term()
            self.expect(")")
            if inner.sort != E:
                raise SortError(f"pi_{payload} needs an E-sorted operand, got sort {inner.sort}")
            return Proj(payload, inner)
        if kind == "IDENT" and text in ("head", "tail"):
            self.expect("(")
            inner = self.parse_term()
            self.expect(")")
            if inner.sort != C:
                raise SortError(f"{text} needs a C-sorted operand, got sort {inner.sort}")
            return Head(inner) if text == "head" else Tail(inner)
        if kind == "IDENT" and text == "ind":
            self.expect("(")
            first = self.parse_term()
            self.expect(",")
            second = self.parse_term()
            self.expect(")")
            if first.sort != C:
                raise SortError(f"ind needs a C-sorted first operand, got sort {first.sort}")
            if second.sort != E:
                raise SortError(f"ind needs an E-sorted second operand, got sort {second.sort}")
            return Ind(first, second)
        if kind == "<":
            items = [self.parse_term()]
            while self.peek()[0] == ",":
                self.take()
                items.append(self.parse_term())
            self.expect(">")
            if len(items) != self.h:
                raise ParseError(f"tuple arity {len(items)} does not match agent count {self.h}", pos)
            for k, item in enumerate(items, start=1):
                if item.sort != Sort("agent", k):
                    raise SortError(f"tuple component {k} must have sort {k}, got {item.sort}")
            return Tuple(tuple(items))
        if kind == "(":
            inner = self.parse_term()
            self.expect(")")
            return inner
        raise ParseError(f"expected a term, found {text or 'end of input'!r}", pos)

    # -- formulas

    def parse_formula(self) -> Formula:
        left = self.parse_or()
        if self.peek()[0] == "->":
            self.take()
            right = self.parse_formula()
            return Imp(left, right)
        return left

    def parse_or(self) -> Formula:
        left = self.parse_and()
        while self.peek()[0] == "|":
            self.take()
            left = Or(left, self.parse_and())
        return left

    def parse_and(self) -> Formula:
        left = self.parse_unary()
        while self.peek()[0] == "&":
            self.take()
            left = And(left, self.parse_unary())
        return left

    def parse_unary(self) -> Formula:
        kind, text, pos, payload = self.peek()
        if kind == "~":
            self.take()
            return Neg(self.parse_unary())
        if kind == "[":
            self.take()
            term = self.parse_term()
            self.expect("]")
            self.expect("@")
            sort = self.parse_sort_token()
            body = self.parse_unary()
            if term.sort != sort:
                raise SortError(f"term has sort {term.sort}, asserted at sort {sort}")
            return Just(term, sort, body)
        return self.parse_formula_atom()

    def parse_formula_atom(self) -> Formula:
        kind, text, pos, payload = self.take()
        if kind == "PROP":
            return Prop(payload)
        if kind == "IDENT":
            if text in _RESERVED_NAMES or not _NAME_RE.match(text):
                raise ParseError(f"{text!r} cannot name a proposition", pos)
            return Prop(text)
        if kind == "(":
            inner = self.parse_formula()
            self.expect(")")
            return inner
        raise ParseError(f"expected a formula, found {text or 'end of input'!r}", pos)


def parse_term(text: str, h: int) -> Term:
    p = _Parser(text, h)
    t = p.parse_term()
    p.expect_end()
    return t


def parse_formula(text: str, h: int) -> Formula:
    p = _Parser(text, h)
    a = p.parse_formula()
    p.expect_end()
    return a
