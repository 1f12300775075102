"""Command-line front end.

Exit codes: 0 success (or a Zero verdict), 1 NonZero verdict or failed
verification, 2 domain or file errors, 64 usage errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from .abp import abp_to_skew_circuit, parse_abp, serialize_abp, weakly_skew_to_abp
from .circuit import Circuit, classify, metrics, parse_circuit, serialize_circuit
from .errors import AlgCircError, BudgetExceeded, UnknownArtifactKind
from .field import QQ, field_from_spec
from .poly import DEFAULT_BUDGET, expand, format_polynomial

EXIT_OK, EXIT_NONZERO, EXIT_ERROR, EXIT_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text()


def _emit(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _kv(rows) -> str:
    return "".join(f"{k}: {v}\n" for k, v in rows)


def _load_circuit(path: str) -> Circuit:
    return parse_circuit(_read(path))


def _load_abp_or_circuit(path: str):
    text = _read(path)
    first = next((ln.split("#", 1)[0].strip() for ln in text.splitlines() if ln.split("#", 1)[0].strip()), "")
    if first == "abp":
        return parse_abp(text)
    return parse_circuit(text)


# ----------------------------------------------------------------------
# commands


def cmd_stats(args) -> int:
    c = _load_circuit(args.circuit)
    m = metrics(c)
    fl = classify(c)
    rows = [
        ("field", c.field.spec()),
        ("variables", len(c.variables)),
        ("outputs", len(c.outputs)),
        ("size", m.size),
        ("depth", m.depth),
        ("formal_degree", m.degree),
        ("formula", str(fl.is_formula).lower()),
        ("skew", str(fl.is_skew).lower()),
        ("weakly_skew", str(fl.is_weakly_skew).lower()),
        ("mult_disjoint", str(fl.is_mult_disjoint).lower()),
        ("constant_free", str(fl.is_constant_free).lower()),
    ]
    _emit(_kv(rows), args.output)
    return EXIT_OK


def cmd_expand(args) -> int:
    c = _load_circuit(args.circuit)
    p = expand(c, budget=args.budget_terms)
    _emit(format_polynomial(p) + "\n", args.output)
    return EXIT_OK


def cmd_transform(args) -> int:
    from .transforms import (
        balance_formula,
        check_equivalent,
        depth_constant,
        homogenize,
        make_mult_disjoint,
        make_report,
    )

    c = _load_circuit(args.circuit)
    if args.kind == "homogenize":
        d = args.degree if args.degree is not None else metrics(c).degree
        out = homogenize(c, d, budget=args.budget_terms)
        try:
            parts = expand_components(out, args.budget_terms)
            total = parts[0]
            for p in parts[1:]:
                total = total + p
            ok = total == expand(c, budget=args.budget_terms)
            verified = "oracle" if ok else "FAILED"
        except BudgetExceeded:
            verified = "skipped"
        constant = out.size / max(1, c.size * (d + 1) ** 2)
    elif args.kind == "md":
        out = make_mult_disjoint(c)
        verified = check_equivalent(c, out, budget=args.budget_terms, seed=args.seed)
        constant = out.size / max(1, c.size * max(1, metrics(c).degree))
    else:
        out = balance_formula(c)
        verified = check_equivalent(c, out, budget=args.budget_terms, seed=args.seed)
        constant = depth_constant(c, metrics(out).depth)
    report = make_report(args.kind, c, out, verified, constant)
    _emit(serialize_circuit(out), args.output)
    if args.report:
        Path(args.report).write_text(report.to_text())
    else:
        sys.stderr.write(report.to_text())
    return EXIT_OK


def expand_components(c: Circuit, budget: int):
    from .poly import expand_many

    return expand_many(c, list(c.outputs), budget)


def cmd_to_abp(args) -> int:
    c = _load_circuit(args.circuit)
    _emit(serialize_abp(weakly_skew_to_abp(c)), args.output)
    return EXIT_OK


def cmd_to_skew(args) -> int:
    a = parse_abp(_read(args.abp))
    _emit(serialize_circuit(abp_to_skew_circuit(a)), args.output)
    return EXIT_OK


def cmd_reduce(args) -> int:
    from .det_embed import abp_to_det_projection, reduce_det, serialize_projection

    if args.kind == "det":
        obj = _load_abp_or_circuit(args.input)
        pm = reduce_det(obj) if isinstance(obj, Circuit) else abp_to_det_projection(obj)
        _emit(serialize_projection(pm), args.output)
        return EXIT_OK
    from .perm_embed import valiant_sum_to_per

    c = _load_circuit(args.input)
    ys = [y for y in (args.sum or "").split(",") if y]
    rep = valiant_sum_to_per(c, ys, args.bound)
    _emit(serialize_projection(rep.matrix), args.output)
    return EXIT_OK


def _parse_assignment(text: str, field, variables) -> dict:
    point = {}
    for part in text.replace(";", ",").split(","):
        part = part.strip()
        if not part:
            continue
        name, sep, value = part.partition("=")
        if not sep:
            raise UsageError(f"bad assignment {part!r}; expected name=value")
        point[name.strip()] = field.parse_literal(value.strip())
    missing = [v for v in variables if v not in point]
    if missing:
        from .errors import MissingAssignment

        raise MissingAssignment(", ".join(missing))
    return point


def cmd_eval(args) -> int:
    c = _load_circuit(args.circuit)
    point = _parse_assignment(args.at, c.field, c.variables)
    vals = c.eval_raw(point)
    _emit("".join(f"{o}: {c.field.format(v)}\n" for o, v in zip(c.outputs, vals)), args.output)
    return EXIT_OK


def _verdict_exit(v) -> int:
    return EXIT_OK if v.verdict == "Zero" else EXIT_NONZERO


def cmd_pit(args) -> int:
    from .pit import pit_random

    c1, c2 = _load_circuit(args.c1), _load_circuit(args.c2)
    v = pit_random(c1, c2, args.trials, args.seed)
    _emit(v.to_text(c1.field), args.output)
    return _verdict_exit(v)


def cmd_grid(args) -> int:
    from .pit import grid_zero_test

    c = _load_circuit(args.circuit)
    v = grid_zero_test(c, args.D)
    _emit(v.to_text(c.field), args.output)
    return _verdict_exit(v)


def cmd_equslp(args) -> int:
    from .pit import equ_slp

    r = equ_slp(_load_circuit(args.circuit))
    rows = [
        ("verdict", r.verdict),
        ("bound_bits", r.bound_bits),
        ("primes", " ".join(map(str, r.primes))),
        ("residues", " ".join(map(str, r.residues))),
    ]
    _emit(_kv(rows), args.output)
    return EXIT_OK if r.verdict == "Zero" else EXIT_NONZERO


def cmd_sdit(args) -> int:
    from .pit import sdit_build, sdit_decide

    inst = sdit_build(_load_abp_or_circuit(args.input))
    v = sdit_decide(inst, args.trials, args.seed)
    text = v.to_text(inst.field) + _kv([("side", inst.side), ("relation", inst.relation)])
    _emit(text, args.output)
    return _verdict_exit(v)


def _family_params(name: str, values: Sequence[str]) -> dict:
    keys = {"imm": ["n", "d"], "esym": ["n", "d"], "cut": ["n", "q"]}.get(name, ["n"])
    params = {}
    positional = []
    for v in values:
        if "=" in v:
            k, _, x = v.partition("=")
            params[k] = x
        else:
            positional.append(v)
    if len(positional) > len(keys):
        raise UsageError(f"{name} takes parameters {' '.join(keys)}")
    params.update(zip(keys, positional))
    try:
        return {k: int(x) for k, x in params.items()}
    except ValueError as exc:
        raise UsageError(f"parameters must be integers: {exc}") from exc


def cmd_gen(args) -> int:
    from .families import family_oracle, gen_family

    params = _family_params(args.family, args.params)
    field = args.field_obj
    if args.family == "cut" and args.field is None:
        field = field_from_spec(f"Fp {params.get('q', 2)}")
    desc = gen_family(args.family, params, field)
    ok, mode = desc.verify(seed=args.seed, budget=args.budget_terms)
    if not ok:
        sys.stderr.write(f"construction does not match the {mode} check\n")
        return EXIT_ERROR
    meta = desc.sidecar(mode)
    try:
        oracle = family_oracle(desc.name, desc.params, desc.field)
        meta += "oracle\n" + format_polynomial(oracle) + "\nend\n"
    except BudgetExceeded:
        pass
    _emit(serialize_circuit(desc.construction), args.output)
    meta_path = args.meta or (args.output + ".meta" if args.output and args.output != "-" else None)
    if meta_path:
        Path(meta_path).write_text(meta)
    else:
        sys.stderr.write(meta)
    return EXIT_OK


def cmd_verify(args) -> int:
    text = _read(args.artifact)
    first = next((ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")), "")
    if first.startswith("projection"):
        from .verify import verify_projection

        ok, rows = verify_projection(text, args.seed, args.budget_terms)
    elif first.startswith("family"):
        from .verify import verify_family

        ok, rows = verify_family(text, args.artifact, args.seed, args.budget_terms)
    else:
        raise UnknownArtifactKind(f"cannot verify an artifact starting with {first!r}")
    _emit(_kv([("result", "pass" if ok else "fail")] + rows), args.output)
    return EXIT_OK if ok else EXIT_NONZERO


# ----------------------------------------------------------------------
# parser


def _global_options(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = argparse.SUPPRESS
    p.add_argument("--field", default=d if suppress else None, help="Q or Fp:<p> (default Q)")
    p.add_argument("--seed", type=int, default=d if suppress else 0, help="64-bit seed (default 0)")
    p.add_argument("--budget-terms", type=int, default=d if suppress else DEFAULT_BUDGET,
                   help="largest intermediate term count for symbolic expansion")
    p.add_argument("-o", "--output", default=d if suppress else None, help="output file (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="algcirc", description=__doc__.splitlines()[0])
    _global_options(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        _global_options(p, suppress=True)
        p.set_defaults(func=func)
        return p

    p = add("stats", cmd_stats, "size, depth, degree and structure flags")
    p.add_argument("circuit")
    p = add("expand", cmd_expand, "expand a circuit into its polynomial")
    p.add_argument("circuit")
    p = add("transform", cmd_transform, "homogenize, make multiplicatively disjoint, or balance")
    p.add_argument("kind", choices=["homogenize", "md", "balance"])
    p.add_argument("circuit")
    p.add_argument("--degree", type=int, help="degree bound for homogenize")
    p.add_argument("--report", help="write the transform report here (default stderr)")
    p = add("to-abp", cmd_to_abp, "weakly-skew circuit to branching program")
    p.add_argument("circuit")
    p = add("to-skew", cmd_to_skew, "branching program to skew circuit")
    p.add_argument("abp")
    p = add("reduce", cmd_reduce, "determinant or permanent projection")
    p.add_argument("kind", choices=["det", "per"])
    p.add_argument("input")
    p.add_argument("--sum", help="comma-separated variables summed over {0,1} (per)")
    p.add_argument("--bound", type=int, help="formula size bound s (per; default size + 1)")
    p = add("eval", cmd_eval, "evaluate a circuit at a point")
    p.add_argument("circuit")
    p.add_argument("--at", required=True, help="assignments like x=1,y=2/3")
    p = add("pit", cmd_pit, "randomized equivalence test of two circuits")
    p.add_argument("c1")
    p.add_argument("c2")
    p.add_argument("--trials", type=int, default=None, help="default: enough for error <= 2^-40")
    p = add("grid", cmd_grid, "deterministic zero test on a grid")
    p.add_argument("circuit")
    p.add_argument("-D", type=int, required=True, help="degree bound; the grid is {0..D}^k")
    p = add("equslp", cmd_equslp, "zero test for a variable-free integer circuit")
    p.add_argument("circuit")
    p = add("sdit", cmd_sdit, "zero test through a symbolic determinant pencil")
    p.add_argument("input")
    p.add_argument("--trials", type=int, default=None)
    p = add("gen", cmd_gen, "generate a polynomial family")
    p.add_argument("family")
    p.add_argument("params", nargs="*", help="n [d|q], positional or as k=v")
    p.add_argument("--meta", help="sidecar path (default <output>.meta, else stderr)")
    p = add("verify", cmd_verify, "re-check a projection matrix or family artifact")
    p.add_argument("artifact")
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        args.field_obj = field_from_spec(args.field.replace(":", " ")) if args.field else QQ
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_USAGE
    except AlgCircError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_ERROR
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ERROR


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
