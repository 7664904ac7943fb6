"""Command-line surface: every verb is a thin adapter over one library call.

Exit codes: 0 when the operation succeeds or accepts, 1 when it runs but
rejects (a derivation fails the kernel, a formula is false in the model, a
probe finds a countermodel), 2 on unusable input.  Reports are deterministic
for fixed inputs and seeds.
"""

from __future__ import annotations

import argparse
import os
import sys

from .errors import JckError
from .syntax import (
    C, E, Const, Prop, Just, Sort, agent, parse_formula, parse_term,
    print_formula, print_term,
)
from .deduction import (
    ConstantSpecification, check_derivation, parse_derivation,
    print_derivation,
)
from .synthesis import (
    ConstantAllocator, internalize_induction_1, internalize_induction_2,
    lift, necessitate,
)
from .semantics import (
    attack_four_world_model, attack_singleton_model, evidence_holds,
    parse_cs_table, parse_model_file, satisfies, validate_model,
)
from .modal import (
    KripkeModel, attack_kripke_model, forgetful, format_kripke_model,
    kripke_satisfies, parse_kripke_file, parse_modal_formula,
    probe_modal_formula, forgetful_soundness_probe, realizes,
    translate_derivation_x, validate_kripke_model, print_modal_formula,
)
from .acceptance import format_results, run_all
from .gen import enumerate_terms


def _read_text(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _parse_sort(text: str, h: int) -> Sort:
    if text == "E":
        return E
    if text == "C":
        return C
    if text.isdigit():
        i = int(text)
        if 1 <= i <= h:
            return agent(i)
    raise JckError(f"not a sort for {h} agents: {text!r} (expected 1..{h}, E, or C)")


def _parse_world(text: str) -> int:
    text = text.strip()
    if text.startswith("w"):
        text = text[1:]
    if not text.isdigit():
        raise JckError(f"not a world name: {text!r}")
    return int(text)


def _load_cs(spec: str, h: int) -> ConstantSpecification:
    if spec == "totalC":
        return ConstantSpecification.total_c()
    return parse_cs_table(_read_text(spec), h)


def _load_derivation(path: str, h: int):
    return parse_derivation(_read_text(path), h)


def _print_constants(alloc: ConstantAllocator) -> None:
    for body, index in sorted(alloc.memo.items(), key=lambda kv: kv[1]):
        print(f"constant c{index}@C := {print_formula(body)}")


def _report_check(report) -> int:
    if report.ok:
        print("accepted")
        return 0
    where = f" at step {report.step}" if report.step is not None else ""
    print(f"rejected{where}: {report.status} ({report.message})")
    return 1


# ---------------------------------------------------------------------------
# verbs


def cmd_parse(args) -> int:
    if args.kind == "term":
        print(print_term(parse_term(args.text, args.agents)))
    elif args.kind == "modal":
        print(print_modal_formula(parse_modal_formula(args.text, args.agents)))
    else:
        print(print_formula(parse_formula(args.text, args.agents)))
    return 0


def cmd_check(args) -> int:
    d = _load_derivation(args.file, args.agents)
    cs = _load_cs(args.cs, args.agents)
    report = check_derivation(d, cs, h=args.agents, fragment=args.fragment)
    code = _report_check(report)
    if report.ok:
        print(f"conclusion: {print_formula(d.conclusion)}")
    return code


def _lift_like(args, op_name: str) -> int:
    d = _load_derivation(args.file, args.agents)
    cs = _load_cs(args.cs, args.agents)
    report = check_derivation(d, cs, h=args.agents)
    if not report.ok:
        print("input derivation does not check; refusing to internalize")
        return _report_check(report)
    target = _parse_sort(args.target, args.agents)
    alloc = ConstantAllocator()
    if op_name == "necessitate":
        term, out = necessitate(d, target, alloc, h=args.agents)
    else:
        term, out = lift(d, target, None, alloc, h=args.agents)
    print(f"term: {print_term(term)}")
    _print_constants(alloc)
    print(print_derivation(out), end="")
    return 0


def cmd_lift(args) -> int:
    return _lift_like(args, "lift")


def cmd_necessitate(args) -> int:
    return _lift_like(args, "necessitate")


def cmd_induct1(args) -> int:
    a = parse_formula(args.formula, args.agents)
    s = parse_term(args.term, args.agents)
    d = _load_derivation(args.file, args.agents)
    cs = _load_cs(args.cs, args.agents)
    report = check_derivation(d, cs, h=args.agents)
    if not report.ok:
        print("input derivation does not check; refusing to internalize")
        return _report_check(report)
    alloc = ConstantAllocator()
    t, out = internalize_induction_1(a, s, d, alloc, h=args.agents)
    print(f"term: {print_term(t)}")
    _print_constants(alloc)
    print(print_derivation(out), end="")
    return 0


def cmd_induct2(args) -> int:
    a = parse_formula(args.formula, args.agents)
    bb = parse_formula(args.formula_b, args.agents)
    s = parse_term(args.term, args.agents)
    d = _load_derivation(args.file, args.agents)
    cs = _load_cs(args.cs, args.agents)
    report = check_derivation(d, cs, h=args.agents)
    if not report.ok:
        print("input derivation does not check; refusing to internalize")
        return _report_check(report)
    alloc = ConstantAllocator()
    t, c, out = internalize_induction_2(a, bb, s, d, alloc, h=args.agents)
    print(f"term: {print_term(t)}")
    print(f"projection constant: {print_term(c)}")
    _print_constants(alloc)
    print(print_derivation(out), end="")
    return 0


def cmd_eval(args) -> int:
    text = _read_text(args.model)
    if args.kripke:
        m, warnings = parse_kripke_file(text)
        a = parse_modal_formula(args.formula, m.h)
        value = kripke_satisfies(m, _parse_world(args.world), a)
    else:
        m, warnings = parse_model_file(text)
        a = parse_formula(args.formula, m.h)
        value = satisfies(m, _parse_world(args.world), a, depth_budget=args.depth)
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    print("true" if value else "false")
    return 0 if value else 1


def cmd_validate(args) -> int:
    text = _read_text(args.model)
    if args.kripke:
        m, warnings = parse_kripke_file(text)
        report = validate_kripke_model(m)
    else:
        m, warnings = parse_model_file(text)
        report = validate_model(m)
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    if report.ok:
        print("ok")
        return 0
    for p in report.problems:
        print(p)
    return 1


def cmd_translate_x(args) -> int:
    d = _load_derivation(args.file, args.agents)
    cs = _load_cs(args.cs, args.agents)
    x = translate_derivation_x(d, cs)
    print(print_derivation(x.derivation), end="")
    if x.cs.kind == "extensional":
        for index, sort, body in sorted(
                x.cs.members, key=lambda m: (m[0], str(m[1]), print_formula(m[2]))):
            print(f"cs member: c{index}@{sort} := {print_formula(body)}")
    for index, sort, image in x.flagged:
        print(f"flagged: c{index}@{sort} now justifies the non-axiom "
              f"{print_formula(image)}")
    report = check_derivation(x.derivation, x.cs, h=args.agents, fragment="agent")
    return _report_check(report)


def cmd_translate_o(args) -> int:
    a = parse_formula(args.formula, args.agents)
    print(print_modal_formula(forgetful(a)))
    return 0


def cmd_realize_check(args) -> int:
    r = parse_formula(args.justified, args.agents)
    a = parse_modal_formula(args.modal, args.agents)
    if realizes(r, a):
        print("realizes")
        return 0
    print("does not realize")
    return 1


def cmd_probe(args) -> int:
    if os.path.exists(args.target):
        d = _load_derivation(args.target, args.agents)
        cs = _load_cs(args.cs, args.agents)
        report = check_derivation(d, cs, h=args.agents)
        if not report.ok:
            print("input derivation does not check; probe needs a theorem")
            return _report_check(report)
        probe = forgetful_soundness_probe(d, args.agents, trials=args.trials,
                                          seed=args.seed)
    else:
        a = parse_modal_formula(args.target, args.agents)
        probe = probe_modal_formula(a, args.agents, trials=args.trials,
                                    seed=args.seed)
    print(f"formula: {print_modal_formula(probe.formula)}")
    if not probe.refuted:
        print(f"no countermodel in {probe.trials} trials")
        return 0
    m, w = probe.counterexample
    print(f"countermodel found, false at world w{w}:")
    print(format_kripke_model(m), end="")
    return 1


# ---------------------------------------------------------------------------
# the coordinated-attack demonstration


def demo_attack(depth_budget: int = 3) -> tuple[str, bool]:
    """Reproduce the two-general exchange in both semantics.

    Returns (report text, all claims hold).  The singleton-model sweep is a
    bounded check: every candidate term up to the given depth, saturated with
    the same budget, and no further.
    """
    del_ = Prop("del")
    m1 = Const("m1", agent(2))
    m2 = Const("m2", agent(1))
    got_msg = Just(m1, agent(2), del_)
    knows_msg = Just(m2, agent(1), got_msg)
    leaves = [m1, m2, Const(1, C)]
    fam2 = enumerate_terms(leaves, agent(2), depth_budget, h=2)
    fam_c = enumerate_terms(leaves, C, depth_budget, h=2)

    lines = []
    claims = []

    def claim(text: str, value: bool) -> None:
        claims.append(value)
        lines.append(f"  [{'ok' if value else 'FAIL'}] {text}")

    lines.append("four-world evidence model (unrestricted evidence):")
    m4 = attack_four_world_model()
    claim(f"world 0 satisfies {print_formula(got_msg)}",
          satisfies(m4, 0, got_msg))
    claim(f"world 0 satisfies {print_formula(knows_msg)}",
          satisfies(m4, 0, knows_msg))
    claim("world 3 falsifies del", not satisfies(m4, 3, del_))
    claim(f"no third-level evidence: all {len(fam2)} agent-2 terms s up to "
          f"depth {depth_budget} falsify [s]@2 {print_formula(knows_msg)} at world 0",
          not any(satisfies(m4, 0, Just(s, agent(2), knows_msg)) for s in fam2))
    claim(f"no common evidence: all {len(fam_c)} common-sort terms t up to "
          f"depth {depth_budget} falsify [t]@C del at world 0",
          not any(satisfies(m4, 0, Just(t, C, del_)) for t in fam_c))

    lines.append("relational counterpart:")
    mk = attack_kripke_model()
    phi = parse_modal_formula("#2 del & #1 #2 del -> #C del", 2)
    claim(f"world 0 falsifies {print_modal_formula(phi)}",
          not kripke_satisfies(mk, 0, phi))
    toggled = dict(mk.valuation)
    toggled["del"] = frozenset(mk.worlds)
    mk_all = KripkeModel(mk.h, mk.worlds, mk.relations, toggled)
    claim("sanity toggle: with del true everywhere the same formula holds",
          kripke_satisfies(mk_all, 0, phi))

    lines.append("singleton minimal-evidence model:")
    ms = attack_singleton_model()
    claim(f"world 0 satisfies {print_formula(got_msg)}",
          satisfies(ms, 0, got_msg, depth_budget=depth_budget))
    claim(f"world 0 satisfies {print_formula(knows_msg)}",
          satisfies(ms, 0, knows_msg, depth_budget=depth_budget))
    claim(f"no common evidence for del: all {len(fam_c)} common-sort terms "
          f"up to depth {depth_budget} refused (saturation budget {depth_budget})",
          not any(evidence_holds(ms, 0, t, del_, depth_budget=depth_budget)
                  for t in fam_c))
    lines.append(f"  note: the sweep above is a bounded check; it covers every "
                 f"candidate term up to depth {depth_budget}, not all terms of "
                 f"every depth")

    ok = all(claims)
    lines.append("all claims hold" if ok else "SOME CLAIMS FAILED")
    return "\n".join(lines) + "\n", ok


def cmd_demo_attack(args) -> int:
    text, ok = demo_attack(args.depth)
    print(text, end="")
    return 0 if ok else 1


def cmd_selftest(args) -> int:
    results = run_all(args.seed)
    print(format_results(results))
    return 0 if all(r.ok for r in results) else 1


# ---------------------------------------------------------------------------
# wiring


def _add_common(sub, agents=True, cs=False) -> None:
    if agents:
        sub.add_argument("--agents", type=int, default=2, metavar="H",
                         help="number of agents (default 2)")
    if cs:
        sub.add_argument("--cs", default="totalC", metavar="SPEC",
                         help="constant specification: totalC or a table file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jck",
        description="verification toolkit for a multi-agent justification "
                    "logic with common knowledge")
    subs = parser.add_subparsers(dest="verb", required=True)

    p = subs.add_parser("parse", help="parse and reprint a term or formula")
    p.add_argument("text")
    p.add_argument("--kind", choices=("formula", "term", "modal"),
                   default="formula")
    _add_common(p)
    p.set_defaults(func=cmd_parse)

    p = subs.add_parser("check", help="check a derivation file")
    p.add_argument("file")
    p.add_argument("--fragment", choices=("full", "agent"), default="full")
    _add_common(p, cs=True)
    p.set_defaults(func=cmd_check)

    p = subs.add_parser("lift", help="internalize a derivation as evidence")
    p.add_argument("file")
    p.add_argument("--target", required=True, metavar="SORT",
                   help="target sort: an agent index, E, or C")
    _add_common(p, cs=True)
    p.set_defaults(func=cmd_lift)

    p = subs.add_parser("necessitate",
                        help="internalize a hypothesis-free derivation")
    p.add_argument("file")
    p.add_argument("--target", required=True, metavar="SORT")
    _add_common(p, cs=True)
    p.set_defaults(func=cmd_necessitate)

    p = subs.add_parser("induct1",
                        help="from a proof of A -> [s]@E A, evidence that A "
                             "implies common knowledge of A")
    p.add_argument("file", help="derivation proving A -> [s]@E A")
    p.add_argument("--formula", required=True, metavar="A")
    p.add_argument("--term", required=True, metavar="S")
    _add_common(p, cs=True)
    p.set_defaults(func=cmd_induct1)

    p = subs.add_parser("induct2",
                        help="from a proof of B -> [s]@E (A & B), evidence "
                             "that B implies common knowledge of A")
    p.add_argument("file", help="derivation proving B -> [s]@E (A & B)")
    p.add_argument("--formula", required=True, metavar="A")
    p.add_argument("--formula-b", required=True, metavar="B")
    p.add_argument("--term", required=True, metavar="S")
    _add_common(p, cs=True)
    p.set_defaults(func=cmd_induct2)

    p = subs.add_parser("eval", help="evaluate a formula in a model file")
    p.add_argument("model")
    p.add_argument("formula")
    p.add_argument("--world", required=True)
    p.add_argument("--depth", type=int, default=3,
                   help="saturation budget for evidence checks (default 3)")
    p.add_argument("--kripke", action="store_true",
                   help="treat the file as a relational model and the "
                        "formula as modal")
    p.set_defaults(func=cmd_eval)

    p = subs.add_parser("validate", help="validate a model file")
    p.add_argument("model")
    p.add_argument("--kripke", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = subs.add_parser("translate-x",
                        help="project a derivation into the single-agent "
                             "fragment and re-check it")
    p.add_argument("file")
    _add_common(p, cs=True)
    p.set_defaults(func=cmd_translate_x)

    p = subs.add_parser("translate-o",
                        help="forget evidence terms, keeping the modal shape")
    p.add_argument("formula")
    _add_common(p)
    p.set_defaults(func=cmd_translate_o)

    p = subs.add_parser("realize-check",
                        help="does the evidence-carrying formula realize the "
                             "modal one?")
    p.add_argument("justified")
    p.add_argument("modal")
    _add_common(p)
    p.set_defaults(func=cmd_realize_check)

    p = subs.add_parser("probe",
                        help="search random relational models for a "
                             "countermodel")
    p.add_argument("target",
                   help="a modal formula, or a derivation file whose modal "
                        "image to probe")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    _add_common(p, cs=True)
    p.set_defaults(func=cmd_probe)

    p = subs.add_parser("demo-attack",
                        help="reproduce the coordinated-attack analysis")
    p.add_argument("--depth", type=int, default=3,
                   help="term family depth and saturation budget (default 3)")
    p.set_defaults(func=cmd_demo_attack)

    p = subs.add_parser("selftest", help="run the acceptance checks")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except JckError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
