"""Command-line front end.

Exit codes: 0 valid / success, 2 invalid process, 3 refused input (bad
flags, malformed files, search spaces over the bound), 4 the validators
disagree.  Region numbers on the command line and in reports start at 1.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from procfn.analysis import ConditionalSignallingTable, TwoWaySignallingError, signalling_table
from procfn.core import ProcessTable, ShapeMismatchError, binary_operation, check_operations, fixed_points, apply
from procfn.equivalence import ClassInventory, GroupTooLarge, classify
from procfn.pfn import PfnSyntaxError, format_inventory, parse_pfn, parse_pfn_stream, serialize_pfn
from procfn.search import SearchPlan, enumerate_codes, stderr_progress
from procfn.validate import METHODS, SearchSpaceTooLarge, Verdict, validate

EXIT_OK, EXIT_INVALID, EXIT_REFUSED, EXIT_DISAGREE = 0, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# -- rendering -----------------------------------------------------------------

def _fmt_tuple(values) -> str:
    return "(" + ", ".join(map(str, values)) + ")"


def restriction_text(values: Sequence[int], var: str) -> str:
    """Render a one-variable function as text for a signalling table cell."""
    if all(v == values[0] for v in values):
        return str(values[0])
    if tuple(values) == (0, 1):
        return var
    if tuple(values) == (1, 0):
        return f"{var} ⊕ 1"
    return "[" + " ".join(map(str, values)) + "]"


def direction_text(direction) -> str:
    if direction is None:
        return "No signalling"
    return f"{direction[0] + 1} signals to {direction[1] + 1}"


def render_signalling_table(table: ConditionalSignallingTable) -> str:
    l, j = table.pair
    header = [f"Output of region {k + 1} (x{k + 1})" for k in table.frozen]
    header += [f"Input of region {l + 1} (a{l + 1})", f"Input of region {j + 1} (a{j + 1})",
               "Direction of signalling"]
    rows = []
    for row in table.rows:
        rows.append([str(v) for v in row.freeze] + [
            restriction_text(row.first, f"x{j + 1}"),
            restriction_text(row.second, f"x{l + 1}"),
            direction_text(row.direction),
        ])
    widths = [max(len(r[c]) for r in [header] + rows) for c in range(len(header))]

    def line(cells):
        return " | ".join(cell.ljust(w) for cell, w in zip(cells, widths)).rstrip()

    return "\n".join([line(header)] + [line(r) for r in rows]) + "\n"


def render_verdict(v: Verdict) -> str:
    out = [f"{v.method}: {'valid' if v.valid else 'invalid'}"]
    wit = v.witness
    if wit is not None:
        ops = ", ".join(f"f{k + 1}=[{' '.join(map(str, op))}]" for k, op in enumerate(wit.operations))
        out.append(f"  operations: {ops}")
        fps = ", ".join(_fmt_tuple(a) for a in wit.fixed_points) or "none"
        out.append(f"  fixed points ({len(wit.fixed_points)}): {fps}")
        if wit.pair is not None:
            l, j = wit.pair
            frz = ", ".join(f"x{k + 1}={v}" for k, v in wit.freeze) or "nothing"
            out.append(f"  regions {l + 1} and {j + 1} signal both ways with {frz} frozen")
    return "\n".join(out) + "\n"


def write_inventory(inv: ClassInventory, path) -> None:
    text = format_inventory(inv.lines())
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write inventory to {path}: {exc.strerror}") from exc


# -- commands ------------------------------------------------------------------

def _read(path: str) -> ProcessTable:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return parse_pfn(text).process
    except PfnSyntaxError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _emit(text: str, path: str | None, out) -> None:
    if path is None or path == "-":
        out.write(text)
    else:
        Path(path).write_text(text)


def cmd_validate(args, out) -> int:
    w = _read(args.file)
    methods = METHODS if args.oracle == "all" else (args.oracle,)
    verdicts = [validate(w, m) for m in methods]
    for v in verdicts:
        out.write(render_verdict(v))
    results = {v.valid for v in verdicts}
    if len(results) > 1:
        out.write("internal oracle disagreement\n")
        return EXIT_DISAGREE
    return EXIT_OK if results.pop() else EXIT_INVALID


def _parse_pair(text: str, n: int) -> tuple[int, int]:
    try:
        l, j = (int(p) for p in text.split(","))
    except ValueError:
        raise UsageError(f"--vary expects two region numbers like 3,4, got {text!r}") from None
    if not (1 <= l <= n and 1 <= j <= n) or l == j:
        raise UsageError(f"--vary needs two distinct regions in 1..{n}")
    return l - 1, j - 1


def cmd_signal(args, out) -> int:
    w = _read(args.file)
    pair = _parse_pair(args.vary, w.n_regions)
    if w.n_regions < 3:
        raise UsageError("signal needs a process on at least 3 regions")
    try:
        table = signalling_table(w, pair)
    except TwoWaySignallingError as exc:
        out.write(f"invalid process: {exc}\n")
        return EXIT_INVALID
    out.write(render_signalling_table(table))
    return EXIT_OK


def parse_ops(text: str, w: ProcessTable):
    shape = w.shape
    ops: dict[int, tuple[int, ...]] = {}
    for item in text.split(","):
        region, sep, body = item.strip().partition(":")
        if not sep or not region.isdigit():
            raise UsageError(f"bad operation {item!r}; expected REGION:OP")
        k = int(region) - 1
        if not 0 <= k < shape.n_regions:
            raise UsageError(f"region {k + 1} not in 1..{shape.n_regions}")
        if k in ops:
            raise UsageError(f"duplicate operation for region {k + 1}")
        if body in ("const0", "const1", "id", "not"):
            if shape.in_sizes[k] != 2 or shape.out_sizes[k] != 2:
                raise UsageError(f"{body} is only defined for binary regions")
            ops[k] = binary_operation(body)
        else:
            parts = body.split(".") if "." in body else list(body)
            if not parts or not all(p.isdigit() for p in parts):
                raise UsageError(f"bad operation table {body!r}")
            ops[k] = tuple(int(p) for p in parts)
    missing = [k + 1 for k in range(shape.n_regions) if k not in ops]
    if missing:
        raise UsageError(f"no operation given for region {missing[0]}")
    try:
        return check_operations(shape, [ops[k] for k in range(shape.n_regions)])
    except ShapeMismatchError as exc:
        raise UsageError(str(exc)) from None


def cmd_simulate(args, out) -> int:
    w = _read(args.file)
    ops = parse_ops(args.ops, w)
    fps = fixed_points(w, ops)
    if len(fps) != 1:
        listed = ", ".join(_fmt_tuple(a) for a in fps) or "none"
        out.write(f"no unique consistent history: {len(fps)} fixed points: {listed}\n")
        return EXIT_INVALID
    a = fps[0]
    x = tuple(op[v] for op, v in zip(ops, a))
    out.write(f"a* = {_fmt_tuple(a)}\n")
    out.write(f"x* = f(a*) = {_fmt_tuple(x)}\n")
    out.write(f"w(x*) = {_fmt_tuple(apply(w, x))}\n")
    return EXIT_OK


def cmd_enumerate(args, out) -> int:
    if not args.binary:
        raise UsageError("only binary enumeration is supported; pass --binary")
    if args.shard is not None and not 0 <= args.shard < args.shards:
        raise UsageError(f"--shard must be in 0..{args.shards - 1}")
    shards = [args.shard] if args.shard is not None else range(args.shards)
    try:
        plans = [SearchPlan(args.n, args.shards, s, exact=not args.pairwise_only) for s in shards]
    except (ShapeMismatchError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    chunks = []
    for plan in plans:
        chunks.append(enumerate_codes(plan, None if args.quiet else stderr_progress()))
    shape = plans[0].shape
    codes = [int(c) for chunk in chunks for c in chunk]
    if args.emit == "count":
        _emit(f"processes {len(codes)}\n", args.output, out)
    elif args.emit == "pfn":
        text = "".join(serialize_pfn(ProcessTable.from_code(shape, c)) for c in codes)
        _emit(text, args.output, out)
    else:
        from procfn.equivalence import classify_codes
        _emit(format_inventory(classify_codes(shape, codes).lines()), args.output, out)
    return EXIT_OK


def cmd_classify(args, out) -> int:
    tables = []
    sources = [("<stdin>", sys.stdin.read())] if args.from_stream else []
    for path in args.files:
        try:
            sources.append((path, Path(path).read_text()))
        except OSError as exc:
            raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    if not sources:
        raise UsageError("classify needs FILES or --from-stream")
    for name, text in sources:
        try:
            tables.extend(doc.process for doc in parse_pfn_stream(text))
        except PfnSyntaxError as exc:
            raise UsageError(f"{name}: {exc}") from None
    try:
        inv = classify(tables)
    except ShapeMismatchError as exc:
        raise UsageError(str(exc)) from None
    if args.output and args.output != "-":
        write_inventory(inv, args.output)
    else:
        out.write(format_inventory(inv.lines()))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="procfn", description="Classical deterministic process functions.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("validate", help="check the unique-fixed-point law")
    v.add_argument("file")
    v.add_argument("--oracle", choices=METHODS + ("all",), default="brute")
    v.set_defaults(func=cmd_validate)

    s = sub.add_parser("signal", help="conditional signalling table for a pair of regions")
    s.add_argument("file")
    s.add_argument("--vary", required=True, metavar="L,J")
    s.set_defaults(func=cmd_signal)

    m = sub.add_parser("simulate", help="the consistent history for given local operations")
    m.add_argument("file")
    m.add_argument("--ops", required=True, metavar="OPS",
                   help="comma list of REGION:OP, OP one of const0, const1, id, not or a digit table")
    m.set_defaults(func=cmd_simulate)

    e = sub.add_parser("enumerate", help="all valid binary processes on N regions")
    e.add_argument("-n", type=int, required=True)
    e.add_argument("--binary", action="store_true")
    e.add_argument("--shards", type=int, default=1)
    e.add_argument("--shard", type=int)
    e.add_argument("--emit", choices=("count", "pfn", "classes"), default="count")
    e.add_argument("--pairwise-only", action="store_true",
                   help="skip the exact filter and emit every pairwise-compatible table")
    e.add_argument("-o", "--output")
    e.add_argument("-q", "--quiet", action="store_true")
    e.set_defaults(func=cmd_enumerate)

    c = sub.add_parser("classify", help="relabelling classes of .pfn files or a stream")
    c.add_argument("files", nargs="*")
    c.add_argument("--from-stream", action="store_true")
    c.add_argument("-o", "--output")
    c.set_defaults(func=cmd_classify)
    return p


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    try:
        args = build_parser().parse_args(argv)
        if args.command == "enumerate" and args.shards < 1:
            raise UsageError("--shards must be positive")
        return args.func(args, out)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except (SearchSpaceTooLarge, GroupTooLarge) as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED


if __name__ == "__main__":
    sys.exit(main())
