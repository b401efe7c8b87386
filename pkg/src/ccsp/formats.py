"""Line-oriented text formats for languages, instances, operations and vectors.

Language file::

    domain 3 r g b
    relation neq arity 2
    r g
    ...
    end

Instance file::

    use colors.cl
    vars 3
    constraint neq v0 v1
    cardinality r:1 g:1 b:1

Operation block (one ``x y z value`` line per entry of D^3)::

    op majority arity 3
    ...
    end

``#`` starts a comment everywhere.  Printing is canonical (sorted tuples);
parsing accepts tuples in any order.
"""
from __future__ import annotations

import itertools
from pathlib import Path
from typing import Iterable, Mapping

from .errors import FormatError
from .instance import Constraint, Instance
from .relations import CardinalityVector, ConstraintLanguage, Domain, Relation


def _lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def parse_language(text: str) -> ConstraintLanguage:
    lines = list(_lines(text))
    if not lines or lines[0][1][0] != "domain":
        raise FormatError("language file must start with a 'domain' line", lines[0][0] if lines else None)
    lineno, head = lines[0]
    try:
        size = int(head[1])
    except (IndexError, ValueError):
        raise FormatError("expected 'domain <size> [labels...]'", lineno) from None
    try:
        domain = Domain(size, tuple(head[2:]))
    except ValueError as exc:
        raise FormatError(str(exc), lineno) from None

    relations = []
    i = 1
    while i < len(lines):
        lineno, toks = lines[i]
        if len(toks) != 4 or toks[0] != "relation" or toks[2] != "arity":
            raise FormatError("expected 'relation <name> arity <k>'", lineno)
        name = toks[1]
        try:
            arity = int(toks[3])
        except ValueError:
            raise FormatError("arity must be an integer", lineno) from None
        tuples = []
        i += 1
        while True:
            if i >= len(lines):
                raise FormatError(f"relation {name!r} is missing 'end'", lineno)
            tl, row = lines[i]
            i += 1
            if row == ["end"]:
                break
            if len(row) != arity:
                raise FormatError(f"tuple of length {len(row)} in relation of arity {arity}", tl)
            try:
                tuples.append(tuple(domain.element(tok) for tok in row))
            except ValueError as exc:
                raise FormatError(str(exc), tl) from None
        try:
            relations.append(Relation(arity, tuples, name))
        except ValueError as exc:
            raise FormatError(str(exc), lineno) from None
    try:
        return ConstraintLanguage(domain, tuple(relations))
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def format_relation(rel: Relation, domain: Domain) -> str:
    out = [f"relation {rel.name} arity {rel.arity}"]
    out += [" ".join(domain.label(x) for x in t) for t in rel.tuples]
    out.append("end")
    return "\n".join(out)


def format_language(lang: ConstraintLanguage) -> str:
    dom = lang.domain
    out = [f"domain {dom.size} " + " ".join(dom.labels)]
    out += [format_relation(rel, dom) for rel in lang.relations]
    return "\n".join(out) + "\n"


def parse_vector(text: str, domain: Domain) -> CardinalityVector:
    """Either ``label:count`` pairs (missing labels count 0) or ``c0,c1,...``."""
    text = text.strip()
    if ":" in text:
        counts = [0] * domain.size
        for tok in text.split():
            label, _, count = tok.partition(":")
            try:
                counts[domain.element(label)] = int(count)
            except ValueError as exc:
                raise FormatError(f"bad cardinality entry {tok!r}: {exc}") from None
        return tuple(counts)
    try:
        counts = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise FormatError(f"bad cardinality vector {text!r}") from None
    if len(counts) != domain.size:
        raise FormatError(f"vector {text!r} has {len(counts)} entries, domain has {domain.size}")
    return counts


def format_vector(pi: CardinalityVector) -> str:
    return ",".join(str(x) for x in pi)


def format_labeled_vector(pi: CardinalityVector, domain: Domain) -> str:
    return " ".join(f"{domain.label(a)}:{c}" for a, c in enumerate(pi))


def parse_instance(
    text: str,
    language: ConstraintLanguage | None = None,
    base_dir: str | Path = ".",
) -> Instance:
    """Parse an instance; the ``use`` line is resolved relative to ``base_dir``
    unless ``language`` is supplied."""
    num_vars = None
    raw_constraints = []
    card_text = None
    for lineno, toks in _lines(text):
        kw = toks[0]
        if kw == "use":
            if len(toks) != 2:
                raise FormatError("expected 'use <language-file>'", lineno)
            if language is None:
                path = Path(base_dir) / toks[1]
                try:
                    language = parse_language(path.read_text(encoding="utf-8"))
                except OSError as exc:
                    raise FormatError(f"cannot read language file {path}: {exc}", lineno) from None
        elif kw == "vars":
            try:
                num_vars = int(toks[1])
            except (IndexError, ValueError):
                raise FormatError("expected 'vars <n>'", lineno) from None
        elif kw == "constraint":
            if len(toks) < 3:
                raise FormatError("expected 'constraint <relation> v<i> ...'", lineno)
            scope = []
            for tok in toks[2:]:
                if not tok.startswith("v") or not tok[1:].isdigit():
                    raise FormatError(f"bad variable token {tok!r}", lineno)
                scope.append(int(tok[1:]))
            raw_constraints.append((lineno, toks[1], scope))
        elif kw == "cardinality":
            card_text = (lineno, " ".join(toks[1:]))
        else:
            raise FormatError(f"unknown keyword {kw!r}", lineno)
    if language is None:
        raise FormatError("instance has no 'use' line and no language was given")
    if num_vars is None:
        raise FormatError("instance has no 'vars' line")
    constraints = []
    for lineno, name, scope in raw_constraints:
        if name not in language:
            raise FormatError(f"unknown relation {name!r}", lineno)
        try:
            constraints.append(Constraint(tuple(scope), language[name]))
        except ValueError as exc:
            raise FormatError(str(exc), lineno) from None
    pi = None
    if card_text is not None:
        pi = parse_vector(card_text[1], language.domain) if card_text[1] else None
    try:
        return Instance(num_vars, tuple(constraints), language, pi)
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def format_instance(inst: Instance, language_path: str) -> str:
    out = [f"use {language_path}", f"vars {inst.num_vars}"]
    for c in inst.constraints:
        name = c.relation.name
        if name is None or name not in inst.language or inst.language[name] != c.relation:
            raise FormatError("constraint relation is not a named member of the instance language")
        out.append(f"constraint {name} " + " ".join(f"v{v}" for v in c.scope))
    if inst.cardinality is not None:
        out.append("cardinality " + format_labeled_vector(inst.cardinality, inst.language.domain))
    return "\n".join(out) + "\n"


def read_language(path: str | Path) -> ConstraintLanguage:
    return parse_language(Path(path).read_text(encoding="utf-8"))


def read_instance(path: str | Path) -> Instance:
    path = Path(path)
    return parse_instance(path.read_text(encoding="utf-8"), base_dir=path.parent)


def format_operation(name: str, table: Mapping[tuple[int, int, int], int] | None, size: int,
                     domain: Domain | None = None, func=None) -> str:
    lab = domain.label if domain is not None else str
    out = [f"op {name} arity 3"]
    for x, y, z in itertools.product(range(size), repeat=3):
        value = func(x, y, z) if func is not None else table[x, y, z]
        out.append(f"{lab(x)} {lab(y)} {lab(z)} {lab(value)}")
    out.append("end")
    return "\n".join(out)


def parse_operations(text: str, domain: Domain) -> dict[str, dict[tuple[int, int, int], int]]:
    ops: dict[str, dict[tuple[int, int, int], int]] = {}
    current = None
    for lineno, toks in _lines(text):
        if current is None:
            if len(toks) == 4 and toks[0] == "op" and toks[2] == "arity" and toks[3] == "3":
                current = ops.setdefault(toks[1], {})
                continue
            if len(toks) == 1 and toks[0].isupper():
                continue  # verdict line preceding the blocks
            raise FormatError("expected 'op <name> arity 3'", lineno)
        if toks == ["end"]:
            current = None
            continue
        if len(toks) != 4:
            raise FormatError("operation rows are 'x y z value'", lineno)
        x, y, z, v = (domain.element(t) for t in toks)
        current[x, y, z] = v
    if current is not None:
        raise FormatError("operation block is missing 'end'")
    return ops


def format_count_map(rho: Mapping[CardinalityVector, int]) -> str:
    return "".join(f"{format_vector(v)} {rho[v]}\n" for v in sorted(rho))


def format_vectors(vectors: Iterable[CardinalityVector]) -> str:
    return "".join(format_vector(v) + "\n" for v in sorted(vectors))
