"""Command-line interface.

Exit codes: 0 for Verified / true / Derivable, 1 for Refuted / false /
NotDerivable, 2 for Unknown, 64 for usage errors and 65 for malformed input.
``consistency`` exits 0 when bot is refuted, since that is the success case.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import arith, classical, rulebase, search, support
from .syntax import (
    BASE_SIGNATURE, Atom, ParseError, Signature, closed_terms_upto, formula_atoms,
    free_vars, numeral, parse_atom, parse_formula, parse_term, render, term_size,
)
from .toy import ToyFragmentError, ToyUniverse
from .weight import weight

EXIT_OK, EXIT_FALSE, EXIT_UNKNOWN = 0, 1, 2
EXIT_USAGE, EXIT_DATA = 64, 65
DEFAULT_SEED = 0

STATUS_EXIT = {
    "Verified": EXIT_OK, "Derivable": EXIT_OK, True: EXIT_OK,
    "Refuted": EXIT_FALSE, "NotDerivable": EXIT_FALSE, False: EXIT_FALSE,
    "Unknown": EXIT_UNKNOWN,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _positive(text: str) -> int:
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _natural(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return value


# -- configuration -----------------------------------------------------------------

def resolve_base(args) -> rulebase.Base:
    if getattr(args, "rules", None):
        return rulebase.load_rules(args.rules)
    words = args.base or ["A_PLUS"]
    name = words[0].upper()
    if len(words) == 2:
        if name != "A_EXT":
            raise UsageError("only A_EXT takes a constant count")
        return rulebase.builtin_base("A_EXT", int(words[1]))
    if len(words) > 2:
        raise UsageError("--base takes a name and, for A_EXT, a count")
    if Path(words[0]).is_file():
        return rulebase.load_rules(words[0])
    try:
        return arith.resolve_variant(name)
    except (KeyError, ValueError):
        raise UsageError(f"unknown base {words[0]!r}; expected EQ, A, A_PLUS, A_EXT k or a rule file")


def _budget(args) -> search.Budget:
    return search.Budget(max_depth=args.depth, max_nodes=args.nodes)


def _bounds(args) -> support.Bounds:
    return support.Bounds(term_size=args.term_size, numeral_range=args.n_max, budget=_budget(args))


def _write_cert(args, payload) -> None:
    if getattr(args, "cert", None) and payload is not None:
        Path(args.cert).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not valid JSON ({exc})") from None


# -- subcommands: each returns (exit code, json payload, text lines) --------------------

def cmd_parse(args):
    sig = Signature(args.constants)
    if args.term:
        t = parse_term(args.text, sig)
        out = {"input": args.text, "kind": "term", "rendered": render(t),
               "size": term_size(t), "free_vars": sorted(free_vars(t))}
    else:
        f = parse_formula(args.text, sig)
        out = {"input": args.text, "kind": "formula", "rendered": render(f),
               "free_vars": sorted(free_vars(f)), "props": sorted(formula_atoms(f))}
    return EXIT_OK, out, [out["rendered"]]


def _closed_term(text: str, sig=None):
    t = parse_term(text, sig or Signature(max(_consts_in(text), default=0)))
    if free_vars(t):
        raise ValueError(f"term {text!r} is not closed")
    return t


def _consts_in(text: str):
    import re
    return [int(c) for c in re.findall(r"\bc(\d+)\b", text)]


def cmd_weight(args):
    t = _closed_term(args.term)
    w = weight(t)
    return EXIT_OK, {"term": render(t), "weight": w}, [str(w)]


def cmd_eval(args):
    t = _closed_term(args.term)
    v = arith.eval_value(t)
    return EXIT_OK, {"term": render(t), "value": v}, [str(v)]


def cmd_derive(args):
    base = resolve_base(args)
    goal = parse_atom(args.goal, base.signature)
    premises = [parse_atom(p, base.signature) for p in args.premise]
    v = search.derive(base, premises, goal, _budget(args))
    out = {"base": base.name, "goal": render(goal), "premises": [render(p) for p in premises],
           "status": v.status}
    lines = [f"{v.status}: {render(goal)} in {base.name}"]
    if v.status == "Derivable":
        cert = rulebase.derivation_to_json(v.derivation)
        out["certificate"] = cert
        out["certificate_ref"] = support.cert_ref(v.derivation)
        lines.append(f"certificate: {v.derivation.size()} nodes, depth {v.derivation.depth()}")
        _write_cert(args, cert)
    elif v.status == "NotDerivable":
        out["evidence"] = dict(v.evidence)
        lines.append(f"evidence: {v.evidence.get('reason')}")
    else:
        out["budget"] = {k: val for k, val in v.budget.items()}
        lines.append(f"budget: {out['budget']}")
    return STATUS_EXIT[v.status], out, lines


def cmd_check_derivation(args):
    if not args.cert:
        raise UsageError("check-derivation needs --cert FILE")
    base = resolve_base(args)
    d = rulebase.derivation_from_json(_read_json(args.cert), base.signature)
    premises = [parse_atom(p, base.signature) for p in args.premise]
    try:
        rulebase.verify_derivation(base, d, premises)
    except rulebase.DerivationError as exc:
        out = {"base": base.name, "valid": False, "atom": render(d.atom),
               "error": {"path": list(exc.path), "rule": exc.rule, "reason": exc.reason}}
        return EXIT_FALSE, out, [f"invalid: {exc}"]
    out = {"base": base.name, "valid": True, "atom": render(d.atom), "size": d.size()}
    return EXIT_OK, out, [f"valid: {render(d.atom)} ({d.size()} nodes)"]


def cmd_decide_eq(args):
    base = resolve_base(args)
    t1 = parse_term(args.left, base.signature)
    t2 = parse_term(args.right, base.signature)
    res = arith.decide_equation(t1, t2, base)
    out = {"base": base.name, "equation": render(Atom(t1, t2)), "value": res.value,
           "weights": [weight(t1), weight(t2)]}
    if isinstance(res, arith.Proved):
        cert = rulebase.derivation_to_json(res.certificate)
        out["certificate_ref"] = support.cert_ref(res.certificate)
        out["certificate_valid"] = rulebase.check_derivation(base, res.certificate)
        _write_cert(args, cert)
        lines = [f"True: {render(Atom(t1, t2))} (certificate {out['certificate_ref']})"]
    else:
        lines = [f"False: weights {res.weights[0]} and {res.weights[1]} differ"]
    return STATUS_EXIT[res.value], out, lines


def cmd_normalize(args):
    base = resolve_base(args)
    t = parse_term(args.term, base.signature)
    n, d = arith.normalize_to_numeral(t, base)
    valid = rulebase.check_derivation(base, d)
    out = {"base": base.name, "term": render(t), "numeral": render(numeral(n)), "value": n,
           "certificate_ref": support.cert_ref(d), "certificate_valid": valid,
           "certificate_size": d.size()}
    _write_cert(args, rulebase.derivation_to_json(d))
    return (EXIT_OK if valid else EXIT_FALSE), out, [f"{render(t)} = {render(numeral(n))}"]


def _verdict_json(v) -> dict:
    body = getattr(v, "evidence", None) or getattr(v, "counterexample", None) or getattr(v, "budget", {})
    return {"status": v.status, "detail": _jsonable(body)}


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, rulebase.Derivation):
        return support.cert_ref(x)
    if isinstance(x, (str, int, float, bool)) or x is None:
        return x
    return str(x)


def cmd_support(args):
    base = resolve_base(args)
    f = parse_formula(args.formula, base.signature, require_closed=True)
    v = support.arith_support(base, f, _bounds(args))
    out = {"base": base.name, "formula": render(f), **_verdict_json(v)}
    return STATUS_EXIT[v.status], out, [f"{v.status}: {render(f)} in {base.name}"]


def _report_result(report: support.CheckReport):
    out = report.to_json()
    lines = [f"{report.name} over {report.base}: {'pass' if report.ok else 'FAIL'} "
             f"({len(report.entries)} instances)"]
    if report.failure:
        lines.append(f"failure: {json.dumps(report.failure, sort_keys=True)}")
    return (EXIT_OK if report.ok else EXIT_FALSE), out, lines


def cmd_omega_check(args):
    base = resolve_base(args)
    return _report_result(support.omega_check(base, parse_formula(args.phi, base.signature),
                                              args.n_max, args.term_size))


def cmd_induction_check(args):
    base = resolve_base(args)
    return _report_result(support.induction_check(base, parse_formula(args.phi, base.signature),
                                                  args.n_max, args.term_size))


def cmd_nd_check(args):
    if args.cert:
        entries = [classical.CorpusEntry.from_json(_read_json(args.cert))]
    else:
        entries = classical.load_corpus()
    rows, ok = [], True
    for e in entries:
        try:
            classical.verify_nd(e.proof, e.sequent)
            rows.append({"name": e.name, "sequent": str(e.sequent), "valid": True})
        except classical.NDError as exc:
            ok = False
            rows.append({"name": e.name, "sequent": str(e.sequent), "valid": False,
                         "error": {"path": list(exc.path), "rule": exc.rule, "reason": exc.reason}})
    lines = [f"{'valid' if r['valid'] else 'INVALID'}: {r['name']}: {r['sequent']}" for r in rows]
    return (EXIT_OK if ok else EXIT_FALSE), {"proofs": rows, "all_valid": ok}, lines


def cmd_consistency(args):
    base = resolve_base(args)
    report = arith.refute_bot(base, _budget(args))
    report["search_verdict"]["evidence"].pop("nodes", None)
    lines = [f"base {report['base']}: witness {report['witness']} has weights "
             f"{tuple(report['weights'])}",
             f"search: {report['search_verdict']['status']}",
             f"bot clause: {report['bot_clause_status']}"]
    return (EXIT_OK if report["bot_refuted"] else EXIT_UNKNOWN), report, lines


def _toy_universe(args, formulas, base_text):
    if args.atoms:
        atoms = tuple(a.strip() for a in args.atoms.split(",") if a.strip())
    else:
        names = set().union(*(formula_atoms(f) for f in formulas))
        import re
        names |= set(re.findall(r"\b([a-z][A-Za-z0-9_]*)\b", base_text)) - {"ANY"}
        atoms = tuple(sorted(names))
    return ToyUniverse(atoms)


def cmd_toy_support(args):
    text = Path(args.rules).read_text() if args.rules else ""
    base = rulebase.parse_rules(text, name=Path(args.rules).stem if args.rules else "empty",
                                signature=BASE_SIGNATURE)
    f = parse_formula(args.formula)
    delta = [parse_formula(p) for p in args.premise]
    u = _toy_universe(args, [f] + delta, "\n".join(l.split(":", 1)[-1] for l in text.splitlines()))
    v = support.toy_entails(u, base, delta, f) if delta else support.toy_support(u, base, f)
    out = {"universe": list(u.atoms), "base": [str(s) for s in base.schemas],
           "formula": render(f), "premises": [render(p) for p in delta], **_verdict_json(v),
           "counterexample_base": None, "rechecked": None}
    if v.status == "Refuted":
        out["counterexample_base"] = [str(s) for s in v.base.schemas]
        out["rechecked"] = support.recheck_refutation(u, base, delta, f, v)
    return STATUS_EXIT[v.status], out, [f"{v.status}: {render(f)}"]


def cmd_soundness_demo(args):
    universes = [("p",), ("p", "q"), ("p", "q", "r")][: args.max_atoms]
    rows = classical.soundness_harness(classical.load_corpus(), universes)
    bad = [r for r in rows if r.status in ("violated", "invalid proof")]
    out = {"rows": [r.to_json() for r in rows], "violations": len(bad)}
    lines = [f"{r.entry:24s} {','.join(r.universe):8s} {r.status} ({r.bases} bases)" for r in rows]
    return (EXIT_OK if not bad else EXIT_FALSE), out, lines


def probe_fidelity(base: rulebase.Base, term_size: int, budget: search.Budget) -> dict:
    """Normalization goals ``t = n`` (n the value of t) that the base cannot reach.

    Over A the answer is exact (root normal forms); over A_PLUS / A_EXT every
    goal gets a constructive certificate; other bases fall back to search.
    """
    kind = rulebase.base_kind(base)
    method = {"A": "root normal forms (exact)", "A_PLUS": "normalization certificates",
              "A_EXT": "normalization certificates"}.get(kind, "bounded search")
    failing, checked = [], 0
    for t in closed_terms_upto(base.signature, term_size):
        goal = Atom(t, numeral(weight(t)))
        checked += 1
        if kind == "A":
            res = arith.decide_in_verbatim_base(goal.lhs, goal.rhs)
            if isinstance(res, arith.Underivable):
                failing.append({"goal": render(goal), "status": "NotDerivable",
                                "root_normal_forms": [render(x) for x in res.normal_forms]})
        elif kind in ("A_PLUS", "A_EXT"):
            _, d = arith.normalize_to_numeral(t, base)
            if not rulebase.check_derivation(base, d):
                failing.append({"goal": render(goal), "status": "certificate rejected"})
        else:
            v = search.derive(base, [], goal, budget)
            if v.status != "Derivable":
                failing.append({"goal": render(goal), "status": v.status})
    return {"base": base.name, "term_size": term_size, "checked": checked, "method": method,
            "failing": failing, "gap": bool(failing)}


def cmd_probe_fidelity(args):
    base = resolve_base(args) if (args.base or args.rules) else rulebase.builtin_base("A")
    out = probe_fidelity(base, args.term_size, _budget(args))
    lines = [f"{out['checked']} normalization goals over {base.name} ({out['method']}); "
             f"{len(out['failing'])} not derivable"]
    lines += [f"  {x['goal']}  [{x['status']}]" for x in out["failing"]]
    return EXIT_OK, out, lines


# -- parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--base", nargs="+", metavar="NAME",
                        help="EQ, A, A_PLUS, 'A_EXT k' or a rule file (default A_PLUS)")
    common.add_argument("--rules", metavar="FILE", help="rule file defining the base")
    common.add_argument("--term-size", type=_positive, default=support.DEFAULT_TERM_SIZE)
    common.add_argument("--n-max", type=_natural, default=support.DEFAULT_N_MAX)
    common.add_argument("--depth", type=_positive, default=12)
    common.add_argument("--nodes", type=_positive, default=200_000)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--cert", metavar="FILE", help="certificate file to write or read")

    p = _Parser(prog="ptsarith", description="Base-extension semantics for arithmetic.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_text):
        sp = sub.add_parser(name, parents=[common], help=help_text)
        sp.set_defaults(func=func)
        return sp

    sp = add("parse", cmd_parse, "parse and pretty-print a formula or term")
    sp.add_argument("text")
    sp.add_argument("--term", action="store_true", help="parse a term instead of a formula")
    sp.add_argument("--constants", type=_natural, default=0, help="number of extra constants")
    add("weight", cmd_weight, "weight of a closed term").add_argument("term")
    add("eval", cmd_eval, "standard value of a closed term").add_argument("term")
    sp = add("derive", cmd_derive, "search for a derivation of an atom")
    sp.add_argument("goal")
    sp.add_argument("--premise", action="append", default=[])
    sp = add("check-derivation", cmd_check_derivation, "check a derivation certificate")
    sp.add_argument("--premise", action="append", default=[])
    sp = add("decide-eq", cmd_decide_eq, "decide a closed equation")
    sp.add_argument("left")
    sp.add_argument("right")
    add("normalize", cmd_normalize, "certify the numeral of a closed term").add_argument("term")
    add("support", cmd_support, "bounded support of a closed formula").add_argument("formula")
    add("omega-check", cmd_omega_check, "replay the omega-completeness argument").add_argument("phi")
    add("induction-check", cmd_induction_check, "replay the induction argument").add_argument("phi")
    add("nd-check", cmd_nd_check, "check natural deduction proofs (default: shipped corpus)")
    add("consistency", cmd_consistency, "refute bot in an arithmetic base")
    sp = add("toy-support", cmd_toy_support, "exact support in a toy universe")
    sp.add_argument("formula")
    sp.add_argument("--premise", action="append", default=[])
    sp.add_argument("--atoms", help="comma-separated universe atoms (default: those mentioned)")
    sp = add("soundness-demo", cmd_soundness_demo, "replay the corpus against toy semantics")
    sp.add_argument("--max-atoms", type=int, choices=(1, 2, 3), default=3)
    add("probe-fidelity", cmd_probe_fidelity,
        "list normalization goals the verbatim base cannot reach (default base A, size 5)")
    return p


PROBE_DEFAULTS = {"term_size": 5}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "probe-fidelity":
        # smaller defaults unless given explicitly
        for key, value in PROBE_DEFAULTS.items():
            if f"--{key.replace('_', '-')}" not in argv:
                setattr(args, key, value)
    try:
        code, payload, lines = args.func(args)
    except UsageError as exc:
        print(f"ptsarith: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, ToyFragmentError, arith.FidelityGapError, ValueError, OSError) as exc:
        print(f"ptsarith: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    if args.format == "json":
        print(json.dumps(_jsonable(payload), sort_keys=True, indent=2))
    else:
        print("\n".join(lines))
    return code


if __name__ == "__main__":
    sys.exit(main())
