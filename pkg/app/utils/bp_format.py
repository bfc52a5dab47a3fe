"""
Text and JSON formats for randomized branching programs.

Text format v1, one record per line, vertices in canonical id order:

    bp 1
    n <int> m <int>
    start <id>
    accept <id>
    v <id> term [out <bit>]
    v <id> i <int> j <int> e00 <id> e01 <id> e10 <id> e11 <id>

Blank lines and lines starting with '#' are ignored. The JSON mirror uses the
same field names.
"""

import json
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from app.errors import ProgramFormatError
from app.models.program import EDGE_LABELS, RandomizedBranchingProgram, Vertex

FORMAT_VERSION = 1


def _int(token: str, line: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise ProgramFormatError(f"Expected an integer, got {token!r}", line) from None


def _build(n: int, m: int, vertices: List[Vertex], start: Optional[int], accept: Optional[int],
           output_bits: Dict[int, int]) -> RandomizedBranchingProgram:
    try:
        return RandomizedBranchingProgram(
            n=n, m=m,
            vertices=tuple(sorted(vertices, key=lambda v: v.id)),
            start=start, accept=accept, output_bits=output_bits,
        )
    except ValidationError as exc:
        raise ProgramFormatError(str(exc)) from exc


def _parse_text(text: str) -> RandomizedBranchingProgram:
    header_seen = False
    n = m = None
    start = accept = None
    vertices: List[Vertex] = []
    output_bits: Dict[int, int] = {}

    for number, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split("#", 1)[0].split()
        if not tokens:
            continue
        keyword = tokens[0]
        if not header_seen:
            if tokens != ["bp", str(FORMAT_VERSION)]:
                raise ProgramFormatError(f"Expected header 'bp {FORMAT_VERSION}'", number)
            header_seen = True
        elif keyword == "n":
            if len(tokens) != 4 or tokens[2] != "m":
                raise ProgramFormatError("Expected 'n <int> m <int>'", number)
            n, m = _int(tokens[1], number), _int(tokens[3], number)
        elif keyword in ("start", "accept"):
            if len(tokens) != 2:
                raise ProgramFormatError(f"Expected '{keyword} <id>'", number)
            if keyword == "start":
                start = _int(tokens[1], number)
            else:
                accept = _int(tokens[1], number)
        elif keyword == "v":
            vertices.append(_parse_vertex(tokens, number, output_bits))
        else:
            raise ProgramFormatError(f"Unknown record {keyword!r}", number)

    if not header_seen:
        raise ProgramFormatError("Empty program text")
    if n is None:
        raise ProgramFormatError("Missing 'n <int> m <int>' record")
    return _build(n, m, vertices, start, accept, output_bits)


def _parse_vertex(tokens: List[str], line: int, output_bits: Dict[int, int]) -> Vertex:
    if len(tokens) < 3:
        raise ProgramFormatError("Truncated vertex record", line)
    vertex_id = _int(tokens[1], line)
    try:
        if tokens[2] == "term":
            if len(tokens) == 5 and tokens[3] == "out":
                output_bits[vertex_id] = _int(tokens[4], line)
            elif len(tokens) != 3:
                raise ProgramFormatError("Expected 'v <id> term [out <bit>]'", line)
            return Vertex.terminal(vertex_id)
        expected = ["i", None, "j", None] + [item for label in EDGE_LABELS for item in (f"e{label}", None)]
        body = tokens[2:]
        if len(body) != len(expected) or any(e is not None and e != t for e, t in zip(expected, body)):
            raise ProgramFormatError("Expected 'v <id> i <int> j <int> e00 <id> e01 <id> e10 <id> e11 <id>'", line)
        i, j = _int(body[1], line), _int(body[3], line)
        edges = tuple(_int(body[k], line) for k in (5, 7, 9, 11))
        return Vertex.nonterminal(vertex_id, i, j, edges)
    except ValidationError as exc:
        raise ProgramFormatError(str(exc), line) from exc


def _parse_json(text: str) -> RandomizedBranchingProgram:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProgramFormatError(f"Invalid JSON: {exc.msg}", exc.lineno) from exc
    if data.get("bp") != FORMAT_VERSION:
        raise ProgramFormatError(f"Expected \"bp\": {FORMAT_VERSION}")
    vertices: List[Vertex] = []
    output_bits: Dict[int, int] = {}
    try:
        for record in data["vertices"]:
            if record["kind"] == "terminal":
                vertices.append(Vertex.terminal(record["id"]))
                if "out" in record:
                    output_bits[record["id"]] = record["out"]
            else:
                edges = tuple(record["edges"][label] for label in EDGE_LABELS)
                vertices.append(Vertex.nonterminal(record["id"], record["i"], record["j"], edges))
        return _build(data["n"], data["m"], vertices, data.get("start"), data.get("accept"), output_bits)
    except KeyError as exc:
        raise ProgramFormatError(f"Missing field {exc.args[0]!r}") from None
    except ValidationError as exc:
        raise ProgramFormatError(str(exc)) from exc


def parse_bp(text: str) -> RandomizedBranchingProgram:
    """Parse the text format, or its JSON mirror when the text starts with '{'."""
    if text.lstrip().startswith("{"):
        return _parse_json(text)
    return _parse_text(text)


def serialize_bp(program: RandomizedBranchingProgram) -> str:
    """Canonical text form; parse_bp(serialize_bp(P)) == P."""
    lines = [f"bp {FORMAT_VERSION}", f"n {program.n} m {program.m}"]
    if program.start is not None:
        lines.append(f"start {program.start}")
    if program.accept is not None:
        lines.append(f"accept {program.accept}")
    for vertex in sorted(program.vertices, key=lambda v: v.id):
        if vertex.is_terminal:
            out = program.output_bits.get(vertex.id)
            lines.append(f"v {vertex.id} term" + (f" out {out}" if out is not None else ""))
        else:
            edges = " ".join(f"e{label} {target}" for label, target in zip(EDGE_LABELS, vertex.edges))
            lines.append(f"v {vertex.id} i {vertex.i} j {vertex.j} {edges}")
    return "\n".join(lines) + "\n"


def program_to_json(program: RandomizedBranchingProgram) -> Dict[str, Any]:
    records = []
    for vertex in sorted(program.vertices, key=lambda v: v.id):
        if vertex.is_terminal:
            record: Dict[str, Any] = {"id": vertex.id, "kind": "terminal"}
            if vertex.id in program.output_bits:
                record["out"] = program.output_bits[vertex.id]
        else:
            record = {
                "id": vertex.id, "kind": "nonterminal", "i": vertex.i, "j": vertex.j,
                "edges": dict(zip(EDGE_LABELS, vertex.edges)),
            }
        records.append(record)
    data: Dict[str, Any] = {"bp": FORMAT_VERSION, "n": program.n, "m": program.m, "vertices": records}
    if program.start is not None:
        data["start"] = program.start
    if program.accept is not None:
        data["accept"] = program.accept
    return data
