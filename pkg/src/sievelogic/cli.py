"""Batch commands over scenario and topology files.

Subcommands: validate | category | valuate | ks-search | heyting. Output
is a single report on stdout, either human-readable ("key: value" lines)
or machine-readable ("key value" lines, --format record); both carry the
same fields in the same order, so they agree on every numeric and
membership field and are byte-identical across runs for the same inputs.

Exit codes: 0 success, 1 validation failure, 2 parse failure, 3 size
guard. The search statistics reported are deterministic work counters
(backtracking nodes), never wall-clock times, to keep the determinism
contract.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import SieveLogicError, SizeLimitExceeded
from .fincat import FinCategory
from .heyting import (
    HeytingAlgebraTable,
    all_sieves,
    excluded_middle_violations,
    open_set_heyting,
    principal_sieve,
    sieve_algebra,
)
from .presheaf import DEFAULT_NODE_BUDGET, global_section_search
from .quantum import SpectralError, born_prob, dual_presheaf, nu_state
from .scenario import (
    ParseError,
    Scenario,
    build_scenario_category,
    format_delta,
    format_rational,
    looks_like_topology,
    parse_scenario,
    parse_topology,
    scenario_states,
    validate_scenario,
)

Pairs = list[tuple[str, str]]


def _render(pairs: Pairs, fmt: str, notes: tuple[str, ...] = ()) -> str:
    if fmt == "record":
        return "".join(f"{k} {v}\n" for k, v in pairs)
    out = [f"{k}: {v}" for k, v in pairs]
    out.extend(notes)
    return "".join(line + "\n" for line in out)


def _read(path: str) -> str:
    p = Path(path)
    if not p.exists():
        raise ParseError(f"no such file: {path}", 0, 0)
    return p.read_text(encoding="utf-8")


def _load_scenario(path: str) -> Scenario:
    scn = parse_scenario(_read(path), source=path)
    validate_scenario(scn)
    return scn


def _format_fn(fn: dict) -> str:
    return ",".join(
        f"{format_rational(a)}:{format_rational(b)}" for a, b in sorted(fn.items())
    )


def _format_member_set(members) -> str:
    return "{" + ",".join(sorted(members)) + "}"


def _cmd_validate(path: str, args) -> tuple[Pairs, tuple[str, ...]]:
    scn = _load_scenario(path)
    pairs: Pairs = [
        ("command", "validate"),
        ("scenario", path),
        ("dimension", str(scn.dimension)),
        ("close", "on" if scn.close_under_questions else "off"),
        ("operators", str(len(scn.operators))),
    ]
    for i, decl in enumerate(scn.operators):
        pairs.append((f"operator.{i}.name", decl.name))
        pairs.append(
            (f"operator.{i}.spectrum", format_delta(v for v, _ in decl.eigendata))
        )
    pairs.append(("states", str(len(scn.states))))
    for i, name in enumerate(scn.states):
        pairs.append((f"state.{i}.name", name))
    pairs.append(("queries", str(len(scn.queries))))
    pairs.append(("valid", "true"))
    return pairs, ()


def _category_counts(base: FinCategory) -> Pairs:
    return [
        ("objects", str(len(base.objects))),
        ("arrows", str(len(base.arrows))),
    ]


def _cmd_category(path: str, args) -> tuple[Pairs, tuple[str, ...]]:
    scn = _load_scenario(path)
    ocat = build_scenario_category(scn)
    base = ocat.base
    pairs: Pairs = [("command", "category"), ("scenario", path)]
    pairs.extend(_category_counts(base))
    for i, name in enumerate(base.objects):
        op = ocat.operators[name]
        pairs.append((f"object.{i}.name", name))
        pairs.append((f"object.{i}.spectrum", format_delta(op.spectrum)))
        pairs.append((f"object.{i}.sieves", str(len(all_sieves(base, name)))))
    for i, aid in enumerate(sorted(base.arrows)):
        a = base.arrows[aid]
        pairs.append((f"arrow.{i}.id", aid))
        pairs.append((f"arrow.{i}.dom", a.dom))
        pairs.append((f"arrow.{i}.cod", a.cod))
        pairs.append((f"arrow.{i}.fn", _format_fn(ocat.arrow_functions[aid])))
    return pairs, ()


def _cmd_valuate(path: str, args) -> tuple[Pairs, tuple[str, ...]]:
    scn = _load_scenario(path)
    if not scn.queries:
        raise SieveLogicError("valuate needs at least one QUERY")
    ocat = build_scenario_category(scn)
    states = scenario_states(scn)
    pairs: Pairs = [("command", "valuate"), ("scenario", path)]
    for i, q in enumerate(scn.queries):
        state = states[q.state]
        op = ocat.operator(q.operator)
        sieve = nu_state(ocat, state, q.operator, q.delta)
        prob = born_prob(state, op, q.delta)
        if sieve == principal_sieve(ocat.base, q.operator):
            kind = "principal"
        elif not sieve.members:
            kind = "empty"
        else:
            kind = "intermediate"
        pairs.append((f"query.{i}.state", q.state))
        pairs.append((f"query.{i}.operator", q.operator))
        pairs.append((f"query.{i}.delta", format_delta(q.delta)))
        pairs.append((f"query.{i}.probability", format_rational(prob)))
        pairs.append((f"query.{i}.sieve.kind", kind))
        pairs.append((f"query.{i}.sieve.size", str(len(sieve.members))))
        for j, aid in enumerate(sieve.sorted_members()):
            arrow = ocat.base.arrows[aid]
            pairs.append((f"query.{i}.sieve.member.{j}.arrow", aid))
            pairs.append((f"query.{i}.sieve.member.{j}.target", arrow.cod))
            pairs.append(
                (f"query.{i}.sieve.member.{j}.fn",
                 _format_fn(ocat.arrow_functions[aid]))
            )
    return pairs, ()


def _cmd_ks_search(path: str, args) -> tuple[Pairs, tuple[str, ...]]:
    scn = _load_scenario(path)
    ocat = build_scenario_category(scn)
    result = global_section_search(dual_presheaf(ocat), node_budget=args.guard)
    pairs: Pairs = [("command", "ks-search"), ("scenario", path)]
    pairs.extend(_category_counts(ocat.base))
    pairs.append(("sections", str(len(result.sections))))
    for i, section in enumerate(result.sections):
        for name in ocat.base.objects:
            pairs.append((f"section.{i}.{name}", format_rational(section.choice[name])))
    if not result.sections:
        pairs.append(("certificate", "KS-obstruction"))
    pairs.append(("work.nodes", str(result.nodes)))
    notes = ("KS obstruction certified",) if not result.sections else ()
    return pairs, notes


def _table_pairs(prefix: str, table: HeytingAlgebraTable, label) -> Pairs:
    pairs: Pairs = []
    index = {el: i for i, el in enumerate(table.elements)}
    pairs.append((f"{prefix}.elements", str(len(table.elements))))
    for i, el in enumerate(table.elements):
        pairs.append((f"{prefix}.element.{i}", label(el)))
    pairs.append((f"{prefix}.zero", str(index[table.zero])))
    pairs.append((f"{prefix}.one", str(index[table.one])))
    for op_name, op_table in (
        ("meet", table.meet), ("join", table.join), ("implies", table.implies)
    ):
        for i, e1 in enumerate(table.elements):
            row = ",".join(
                str(index[op_table[(e1, e2)]]) for e2 in table.elements
            )
            pairs.append((f"{prefix}.{op_name}.{i}", row))
    pairs.append(
        (f"{prefix}.not",
         ",".join(str(index[table.neg[e]]) for e in table.elements))
    )
    violations = excluded_middle_violations(table)
    pairs.append((f"{prefix}.excluded_middle_violations", str(len(violations))))
    for i, el in enumerate(violations):
        pairs.append((f"{prefix}.excluded_middle_violation.{i}", label(el)))
    return pairs


def _cmd_heyting(path: str, args) -> tuple[Pairs, tuple[str, ...]]:
    text = _read(path)
    pairs: Pairs = [("command", "heyting"), ("scenario", path)]
    if looks_like_topology(text):
        table = open_set_heyting(parse_topology(text, source=path))
        pairs.append(("kind", "topology"))
        pairs.extend(_table_pairs("topology", table, _format_member_set))
    else:
        scn = parse_scenario(text, source=path)
        validate_scenario(scn)
        ocat = build_scenario_category(scn)
        pairs.append(("kind", "scenario"))
        pairs.extend(_category_counts(ocat.base))
        for name in ocat.base.objects:
            table = sieve_algebra(ocat.base, name)
            pairs.extend(
                _table_pairs(
                    f"object.{name}", table,
                    lambda s: _format_member_set(s.members),
                )
            )
    return pairs, ()


_COMMANDS = {
    "validate": _cmd_validate,
    "category": _cmd_category,
    "valuate": _cmd_valuate,
    "ks-search": _cmd_ks_search,
    "heyting": _cmd_heyting,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sievelogic",
        description="Exact presheaf-topos reports over scenario and topology files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("path", help="scenario (.scn) or topology (.top) file")
        p.add_argument(
            "--format", choices=("human", "record"), default="human",
            help="report format (default: human)",
        )
        p.add_argument(
            "--no-parallel", action="store_true",
            help="force the sequential engine (the default; kept for "
                 "interface stability)",
        )
        p.add_argument(
            "--guard", type=int, default=DEFAULT_NODE_BUDGET,
            help="override the search size guard (backtracking node budget)",
        )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    fmt = args.format
    try:
        pairs, notes = _COMMANDS[args.command](args.path, args)
    except ParseError as exc:
        sys.stdout.write(_render(
            [("command", args.command), ("scenario", args.path),
             ("error", "ParseError"), ("detail", str(exc))], fmt,
        ))
        return 2
    except SizeLimitExceeded as exc:
        sys.stdout.write(_render(
            [("command", args.command), ("scenario", args.path),
             ("error", "SizeLimitExceeded"), ("detail", str(exc)),
             ("guard", str(args.guard))], fmt,
        ))
        return 3
    except SieveLogicError as exc:
        pairs = [("command", args.command), ("scenario", args.path)]
        if isinstance(exc, SpectralError):
            # Operator-law failures surface as invariant violations naming
            # the operator and the broken law.
            pairs.append(("error", "InvariantViolation"))
            pairs.append(("law", type(exc).__name__))
        else:
            pairs.append(("error", type(exc).__name__))
        pairs.append(("detail", str(exc)))
        sys.stdout.write(_render(pairs, fmt))
        return 1
    sys.stdout.write(_render(pairs, fmt, notes))
    return 0


if __name__ == "__main__":
    sys.exit(main())
