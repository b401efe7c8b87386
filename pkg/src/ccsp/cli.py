"""Command-line entry point: ``ccsp <command> ...``.

Exit codes: 0 success or YES, 1 NO or empty, 2 usage/data/precondition
error, 3 resource guard, 4 internal invariant violation.  Results go to
stdout; diagnostics go to stderr.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import acceptance
from .classifier import DEFAULT_NODE_LIMIT, Verdict, classify
from .errors import ArgumentError, CCSPError, InvariantError, PreconditionError, ResourceLimitError
from .formats import (
    format_count_map,
    format_instance,
    format_language,
    format_operation,
    format_vectors,
    parse_vector,
    read_instance,
    read_language,
)
from .instance import Instance, check_total
from .oracle import DEFAULT_CAP, GeneratorConfig, brute_force_count, generate
from .reductions import (
    parse_graph,
    reduce_bis,
    reduce_constants,
    reduce_crossing,
    reduce_pp_conjunction,
    reduce_pp_exists,
    reduce_restriction,
)
from .relations import Partition
from .solver import solve_counts

EXIT_OK, EXIT_NO, EXIT_ERROR, EXIT_RESOURCE, EXIT_INVARIANT = 0, 1, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_ERROR)


def _emit(args, text: str, payload: dict) -> None:
    if args.format == "json":
        sys.stdout.write(json.dumps(payload, sort_keys=True) + "\n")
    else:
        sys.stdout.write(text)


def _vec(v) -> list[int]:
    return list(v)


def _counts_payload(rho) -> list[dict]:
    return [{"vector": _vec(v), "count": rho[v]} for v in sorted(rho)]


def _target(args, inst: Instance):
    if getattr(args, "pi", None):
        pi = parse_vector(args.pi, inst.language.domain)
        check_total(pi, inst.num_vars, inst.domain_size)
        return pi
    if inst.cardinality is None:
        raise ArgumentError("no cardinality line in the instance and no --pi given")
    return inst.cardinality


def _count_map(args, inst: Instance):
    """Exact count map: the polynomial engine, or brute force on request."""
    verdict = classify(inst.language).verdict
    if verdict is Verdict.TRACTABLE:
        return solve_counts(inst, jobs=args.jobs, check_language=False)
    if args.force_oracle:
        return brute_force_count(inst)
    if verdict is Verdict.INCONCLUSIVE:
        raise ResourceLimitError("classification hit its node limit; rerun with --force-oracle or use 'oracle'")
    raise PreconditionError("the language is NP-hard; use 'ccsp oracle' or pass --force-oracle")


# -- commands -------------------------------------------------------------------------

def cmd_classify(args) -> int:
    lang = read_language(args.language)
    res = classify(lang, node_limit=args.node_limit)
    if res.verdict is Verdict.TRACTABLE:
        d = lang.domain.size
        text = "TRACTABLE\n" + "\n".join(
            format_operation(name, None, d, lang.domain, op)
            for name, op in (("majority", res.majority), ("minority", res.minority))
        ) + "\n"
        tables = {
            name: [[x, y, z, int(op(x, y, z))] for x in range(d) for y in range(d) for z in range(d)]
            for name, op in (("majority", res.majority), ("minority", res.minority))
        }
    else:
        text = res.verdict.value + "\n"
        tables = {}
    _emit(args, text, {"command": "classify", "verdict": res.verdict.value,
                       "reason": res.hard_reason, "operations": tables})
    if res.verdict is Verdict.INCONCLUSIVE:
        print("classification hit its node limit", file=sys.stderr)
        return EXIT_RESOURCE
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = read_instance(args.instance)
    pi = _target(args, inst)
    feasible = _count_map(args, inst).get(pi, 0) > 0
    _emit(args, "YES\n" if feasible else "NO\n",
          {"command": "solve", "vector": _vec(pi), "feasible": feasible})
    return EXIT_OK if feasible else EXIT_NO


def cmd_count(args) -> int:
    inst = read_instance(args.instance)
    if args.all:
        rho = _count_map(args, inst)
        _emit(args, format_count_map(rho), {"command": "count", "counts": _counts_payload(rho)})
        return EXIT_OK
    pi = _target(args, inst)
    n = _count_map(args, inst).get(pi, 0)
    _emit(args, f"{n}\n", {"command": "count", "vector": _vec(pi), "count": n})
    return EXIT_OK


def cmd_enumerate(args) -> int:
    inst = read_instance(args.instance)
    vectors = sorted(_count_map(args, inst))
    _emit(args, format_vectors(vectors), {"command": "enumerate", "vectors": [_vec(v) for v in vectors]})
    return EXIT_OK if vectors else EXIT_NO


def cmd_oracle(args) -> int:
    inst = read_instance(args.instance)
    rho = brute_force_count(inst, cap=args.cap)
    if args.all:
        _emit(args, format_count_map(rho), {"command": "oracle", "counts": _counts_payload(rho)})
        return EXIT_OK
    pi = _target(args, inst)
    n = rho.get(pi, 0)
    _emit(args, f"{n}\n", {"command": "oracle", "vector": _vec(pi), "count": n})
    return EXIT_OK


def cmd_gen(args) -> int:
    cfg = GeneratorConfig(
        seed=args.seed,
        domain_size=args.domain_size,
        num_vars=args.num_vars,
        num_constraints=args.num_constraints,
        max_arity=args.max_arity,
        tractable_only=not args.any,
        num_relations=args.num_relations,
    )
    lang, inst = generate(cfg)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"gen{args.seed}"
    lang_path, inst_path = out / f"{stem}.cl", out / f"{stem}.ci"
    lang_path.write_text(format_language(lang), encoding="utf-8")
    inst_path.write_text(format_instance(inst, lang_path.name), encoding="utf-8")
    _emit(args, f"{lang_path}\n{inst_path}\n",
          {"command": "gen", "language": str(lang_path), "instance": str(inst_path)})
    return EXIT_OK


def _partition(text: str) -> Partition:
    """``0 2|1`` style: blocks separated by '|', elements by spaces or commas."""
    try:
        return Partition.from_blocks(
            [int(x) for x in block.replace(",", " ").split()] for block in text.split("|")
        )
    except ValueError:
        raise ArgumentError(f"bad partition {text!r}") from None


def _conjuncts(text: str, lang):
    parts = []
    for item in text.split():
        name, _, coords = item.partition(":")
        if name not in lang:
            raise ArgumentError(f"unknown relation {name!r} in --definition")
        try:
            idx = tuple(int(c) for c in coords.split(",")) if coords else None
        except ValueError:
            raise ArgumentError(f"bad coordinates in {item!r}") from None
        parts.append((lang[name], idx))
    if not parts:
        raise ArgumentError("--definition is empty")
    return parts


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise ArgumentError(f"--kind {args.kind} needs " + ", ".join("--" + m.replace("_", "-") for m in missing))


def cmd_reduce(args) -> int:
    kind = args.kind
    pi = None
    if kind == "bis":
        _need(args, "graph", "k1", "k2", "language", "relation", "case")
        graph = parse_graph(Path(args.graph).read_text(encoding="utf-8"))
        lang = read_language(args.language)
        out = reduce_bis(graph, args.k1, args.k2, lang[args.relation], args.case, lang.domain.size)
        pi = out.transform((args.k1, args.k2))
    else:
        _need(args, "instance")
        inst = read_instance(args.instance)
        if kind == "restriction":
            _need(args, "language", "subset")
            lang = read_language(args.language)
            subset = [lang.domain.element(t) for t in args.subset.replace(",", " ").split()]
            out = reduce_restriction(inst, lang, subset)
        elif kind == "pp-and":
            _need(args, "language", "relation", "definition")
            lang = read_language(args.language)
            out = reduce_pp_conjunction(inst, lang, args.relation, _conjuncts(args.definition, lang))
        elif kind == "pp-exists":
            _need(args, "language", "relation", "witness")
            lang = read_language(args.language)
            out = reduce_pp_exists(inst, lang, args.relation, lang[args.witness])
        elif kind == "constants":
            _need(args, "language")
            out = reduce_constants(inst, read_language(args.language))
        else:
            _need(args, "alpha", "beta", "domain_size")
            out = reduce_crossing(inst, _partition(args.alpha), _partition(args.beta), args.domain_size)
        if inst.cardinality is not None:
            pi = out.transform(inst.cardinality)
    reduced = out.instance.with_cardinality(pi)
    dest = Path(args.out_dir)
    dest.mkdir(parents=True, exist_ok=True)
    (dest / "reduced.cl").write_text(format_language(reduced.language), encoding="utf-8")
    (dest / "reduced.ci").write_text(format_instance(reduced, "reduced.cl"), encoding="utf-8")
    sidecar = {
        "kind": kind,
        "forward_map": out.forward_map.to_json(),
        "notes": out.notes,
        "variables": out.variable_names,
        "cardinality": _vec(pi) if pi is not None else None,
    }
    (dest / "reduced.map.json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    text = f"{dest / 'reduced.cl'}\n{dest / 'reduced.ci'}\n{dest / 'reduced.map.json'}\n"
    _emit(args, text, {"command": "reduce", "kind": kind, "out_dir": str(dest),
                       "num_vars": reduced.num_vars,
                       "cardinality": sidecar["cardinality"]})
    return EXIT_OK


def cmd_selftest(args) -> int:
    results = acceptance.run_all(quick=args.quick)
    text = "".join(r.line() + "\n" for r in results)
    _emit(args, text, {"command": "selftest", "criteria": [
        {"number": r.number, "name": r.name, "passed": r.passed, "detail": r.detail,
         "seconds": round(r.seconds, 3)} for r in results
    ]})
    return EXIT_OK if all(r.passed for r in results) else EXIT_INVARIANT


# -- parser ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ccsp", description="CSP with global cardinality constraints")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--jobs", type=int, default=1, help="worker threads for branch-parallel solving")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("classify", help="tractable or NP-hard")
    c.add_argument("language")
    c.add_argument("--node-limit", type=int, default=DEFAULT_NODE_LIMIT)
    c.set_defaults(func=cmd_classify)

    for name, fn, helptext in (
        ("solve", cmd_solve, "YES/NO for the cardinality vector"),
        ("count", cmd_count, "number of solutions meeting the cardinality vector"),
        ("enumerate", cmd_enumerate, "every feasible cardinality vector"),
    ):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("instance")
        if name != "enumerate":
            s.add_argument("--pi", help="cardinality vector, 'label:count ...' or 'c0,c1,...'")
        if name == "count":
            s.add_argument("--all", action="store_true", help="every nonzero (vector, count) pair")
        s.add_argument("--force-oracle", action="store_true", help="brute force for hard languages")
        s.set_defaults(func=fn)

    o = sub.add_parser("oracle", help="brute-force counts")
    o.add_argument("instance")
    o.add_argument("--all", action="store_true")
    o.add_argument("--pi")
    o.add_argument("--cap", type=int, default=DEFAULT_CAP, help="maximum number of assignments")
    o.set_defaults(func=cmd_oracle)

    g = sub.add_parser("gen", help="random instance files")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out-dir", default=".")
    g.add_argument("--domain-size", type=int, default=3)
    g.add_argument("--num-vars", type=int, default=5)
    g.add_argument("--num-constraints", type=int, default=4)
    g.add_argument("--max-arity", type=int, default=3)
    g.add_argument("--num-relations", type=int, default=2)
    g.add_argument("--any", action="store_true", help="uniform random relations, not necessarily tractable")
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("reduce", help="hardness reductions")
    r.add_argument("--kind", required=True,
                   choices=("restriction", "pp-and", "pp-exists", "constants", "bis", "crossing"))
    r.add_argument("--instance")
    r.add_argument("--language", help="target language (bis: file holding the relation)")
    r.add_argument("--subset", help="restriction: kept domain elements")
    r.add_argument("--relation", help="defined relation (pp-*) or the BIS relation")
    r.add_argument("--definition", help="pp-and: 'rel:i,j rel2:k,l' over 1-based coordinates")
    r.add_argument("--witness", help="pp-exists: relation whose last coordinate is quantified")
    r.add_argument("--graph")
    r.add_argument("--k1", type=int)
    r.add_argument("--k2", type=int)
    r.add_argument("--case", choices=("1", "3a", "3b"))
    r.add_argument("--alpha")
    r.add_argument("--beta")
    r.add_argument("--domain-size", type=int)
    r.add_argument("--out-dir", default=".")
    r.set_defaults(func=cmd_reduce)

    t = sub.add_parser("selftest", help="run the acceptance suite")
    t.add_argument("--quick", action="store_true", help="smaller suite and chain sizes")
    t.set_defaults(func=cmd_selftest)
    return p


def run(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.jobs < 1:
        print("ccsp: --jobs must be positive", file=sys.stderr)
        return EXIT_ERROR
    try:
        return args.func(args)
    except InvariantError as exc:
        print(f"ccsp: internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except ResourceLimitError as exc:
        print(f"ccsp: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (CCSPError, KeyError) as exc:
        print(f"ccsp: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"ccsp: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main() -> None:
    raise SystemExit(run())
