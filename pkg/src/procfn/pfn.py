"""The ``.pfn`` text format for process tables and the class inventory format.

A ``.pfn`` document looks like::

    pfn 1
    parties 4
    in 2 2 2 2
    out 2 2 2 2
    w 1 : 0 1 0 0 0 0 0 0
    w 2 : 0 0 0 0 1 0 0 0
    w 3 : 0 0 1 0 0 0 0 0
    w 4 : 0 1 0 0 0 0 0 0

Tokens are whitespace separated and ``#`` starts a comment running to the end
of the line.  Regions are numbered from 1 in the file.  The values of
``w i`` are the inputs of region i listed in rank order of the outputs of all
other regions.  A stream is several documents concatenated.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from procfn.core import ProcessShape, ProcessTable, ShapeMismatchError

FORMAT_VERSION = 1
INVENTORY_HEADER = "# pfn-inventory 1: key(hex) count flags"
FLAG_NAMES = ("causal-fixed", "causal-dynamic", "genuine-noncausal")


class PfnSyntaxError(ValueError):
    def __init__(self, line: int, col: int, message: str):
        self.line, self.col, self.message = line, col, message
        super().__init__(f"line {line}, col {col}: {message}")


@dataclass(frozen=True)
class PfnDocument:
    process: ProcessTable
    comments: tuple[str, ...] = ()
    version: int = FORMAT_VERSION

    @property
    def shape(self) -> ProcessShape:
        return self.process.shape


@dataclass
class _Line:
    number: int
    tokens: list[tuple[int, str]]  # (column, text)
    comment: str | None = None

    def error(self, index: int, message: str) -> PfnSyntaxError:
        if index < len(self.tokens):
            col = self.tokens[index][0]
        elif self.tokens:
            col = self.tokens[-1][0] + len(self.tokens[-1][1]) + 1
        else:
            col = 1
        return PfnSyntaxError(self.number, col, message)


def _lex(text: str, first_line: int = 1) -> list[_Line]:
    lines = []
    for number, raw in enumerate(text.splitlines(), start=first_line):
        body, hash_, comment = raw.partition("#")
        tokens = []
        col = 0
        for part in body.split():
            col = body.index(part, col)
            tokens.append((col + 1, part))
            col += len(part)
        lines.append(_Line(number, tokens, comment.strip() if hash_ else None))
    return lines


def _int(line: _Line, index: int, what: str) -> int:
    if index >= len(line.tokens):
        raise line.error(index, f"missing {what}")
    tok = line.tokens[index][1]
    if not tok.isdigit():
        raise line.error(index, f"expected {what}, got {tok!r}")
    return int(tok)


def _parse_lines(lines: list[_Line]) -> PfnDocument:
    comments = tuple(ln.comment for ln in lines if ln.comment is not None)
    stmts = [ln for ln in lines if ln.tokens]
    if not stmts:
        raise PfnSyntaxError(lines[-1].number if lines else 1, 1, "empty document")

    def keyword(line: _Line, word: str):
        if line.tokens[0][1] != word:
            raise line.error(0, f"bad header: expected {word!r}, got {line.tokens[0][1]!r}")

    it = iter(stmts)
    head = next(it)
    keyword(head, "pfn")
    version = _int(head, 1, "format version")
    if version != FORMAT_VERSION:
        raise head.error(1, f"unsupported format version {version}")
    if len(head.tokens) > 2:
        raise head.error(2, "unexpected token after version")

    try:
        parties = next(it)
    except StopIteration:
        raise PfnSyntaxError(head.number, 1, "bad header: missing 'parties' line") from None
    keyword(parties, "parties")
    n = _int(parties, 1, "party count")
    if n < 1:
        raise parties.error(1, "bad header: party count must be positive")

    sizes = {}
    prev = parties
    for word in ("in", "out"):
        try:
            line = next(it)
        except StopIteration:
            raise PfnSyntaxError(prev.number, 1, f"bad header: missing {word!r} line") from None
        keyword(line, word)
        if len(line.tokens) - 1 != n:
            raise line.error(n + 1 if len(line.tokens) > n + 1 else len(line.tokens),
                             f"bad header: expected {n} sizes, got {len(line.tokens) - 1}")
        vals = [_int(line, k, "alphabet size") for k in range(1, n + 1)]
        for k, v in enumerate(vals, start=1):
            if v < 1:
                raise line.error(k, "bad header: alphabet sizes must be positive")
        sizes[word] = vals
        prev = line
    try:
        shape = ProcessShape(sizes["in"], sizes["out"])
    except ShapeMismatchError as exc:
        raise PfnSyntaxError(prev.number, 1, f"bad header: {exc}") from None

    comps: dict[int, tuple[int, ...]] = {}
    for line in it:
        keyword(line, "w")
        region = _int(line, 1, "region number")
        if not 1 <= region <= n:
            raise line.error(1, f"region {region} not in 1..{n}")
        if region in comps:
            raise line.error(1, f"duplicate region {region}")
        if len(line.tokens) < 3 or line.tokens[2][1] != ":":
            raise line.error(2, "expected ':' after region number")
        expected = shape.component_length(region - 1)
        got = len(line.tokens) - 3
        if got != expected:
            raise line.error(3 + expected if got > expected else len(line.tokens),
                             f"w {region}: expected {expected} values, got {got}")
        values = []
        for k in range(3, len(line.tokens)):
            v = _int(line, k, "table value")
            if v >= shape.in_sizes[region - 1]:
                raise line.error(k, f"w {region}: value {v} out of range for input alphabet "
                                    f"of size {shape.in_sizes[region - 1]}")
            values.append(v)
        comps[region] = tuple(values)
    missing = [r for r in range(1, n + 1) if r not in comps]
    if missing:
        raise PfnSyntaxError(stmts[-1].number, 1, f"missing table for region {missing[0]}")
    process = ProcessTable(shape, tuple(comps[r] for r in range(1, n + 1)))
    return PfnDocument(process, comments, version)


def parse_pfn(text: str) -> PfnDocument:
    return _parse_lines(_lex(text))


def parse_pfn_stream(text: str) -> list[PfnDocument]:
    """Split concatenated documents at each ``pfn`` header line."""
    lines = _lex(text)
    starts = [k for k, ln in enumerate(lines) if ln.tokens and ln.tokens[0][1] == "pfn"]
    if not starts:
        if any(ln.tokens for ln in lines):
            first = next(ln for ln in lines if ln.tokens)
            raise first.error(0, f"bad header: expected 'pfn', got {first.tokens[0][1]!r}")
        return []
    if any(ln.tokens for ln in lines[:starts[0]]):
        first = next(ln for ln in lines[:starts[0]] if ln.tokens)
        raise first.error(0, f"bad header: expected 'pfn', got {first.tokens[0][1]!r}")
    bounds = starts[1:] + [len(lines)]
    docs = []
    for k, (a, b) in enumerate(zip(starts, bounds)):
        # comments preceding the first header belong to the first document
        docs.append(_parse_lines(lines[0 if k == 0 else a:b]))
    return docs


def serialize_pfn(doc: PfnDocument | ProcessTable) -> str:
    if isinstance(doc, ProcessTable):
        doc = PfnDocument(doc)
    shape = doc.shape
    out = [f"pfn {doc.version}"]
    out += [f"# {c}" if c else "#" for c in doc.comments]
    out.append(f"parties {shape.n_regions}")
    out.append("in " + " ".join(map(str, shape.in_sizes)))
    out.append("out " + " ".join(map(str, shape.out_sizes)))
    for i, comp in enumerate(doc.process.components, start=1):
        out.append(f"w {i} : " + " ".join(map(str, comp)))
    return "\n".join(out) + "\n"


def read_pfn(path) -> PfnDocument:
    return parse_pfn(Path(path).read_text())


def write_pfn(path, doc: PfnDocument | ProcessTable) -> None:
    Path(path).write_text(serialize_pfn(doc))


def write_pfn_stream(stream, processes: Iterable[ProcessTable]) -> int:
    count = 0
    for w in processes:
        stream.write(serialize_pfn(w))
        count += 1
    return count


# -- inventory ----------------------------------------------------------------

@dataclass(frozen=True)
class InventoryLine:
    key: bytes
    count: int
    flags: frozenset[str] = field(default_factory=frozenset)
    invalid: bool = False


def format_flags(line: InventoryLine) -> str:
    if line.invalid:
        return "invalid"
    names = [f for f in FLAG_NAMES if f in line.flags]
    return ",".join(names) if names else "-"


def format_inventory(lines: Iterable[InventoryLine]) -> str:
    body = [f"{ln.key.hex()} {ln.count} {format_flags(ln)}" for ln in sorted(lines, key=lambda l: l.key)]
    return "\n".join([INVENTORY_HEADER] + body) + "\n"


def parse_inventory(text: str) -> list[InventoryLine]:
    out = []
    for number, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip() or raw.startswith("#"):
            continue
        parts = raw.split()
        if len(parts) != 3:
            raise PfnSyntaxError(number, 1, "inventory line needs key, count and flags")
        key, count, flags = parts
        if flags == "invalid":
            out.append(InventoryLine(bytes.fromhex(key), int(count), frozenset(), True))
        else:
            names = frozenset() if flags == "-" else frozenset(flags.split(","))
            unknown = names - set(FLAG_NAMES)
            if unknown:
                raise PfnSyntaxError(number, 1, f"unknown flag {sorted(unknown)[0]!r}")
            out.append(InventoryLine(bytes.fromhex(key), int(count), names))
    return out
