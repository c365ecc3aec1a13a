"""Mutant generation: every applicable single-operator transformation.

Nine operators, ordinal-numbered in this fixed order:

  CB     condition boundary       <  <-> <=,  >  <-> >=
  NC     negate conditional       <  -> >=,  <= -> >,  >  -> <=,
                                  >= -> <,   == -> !=, != -> ==
  MATH   arithmetic swap          +  <-> -,  *  <-> /,  %  -> *
  INCR   compound-assign swap     += <-> -=
  IN     drop unary minus
  VMC    drop a call statement whose target returns unit
  PRET   returned int expression  -> 0
  BTRET  returned bool expression -> true
  BFRET  returned bool expression -> false

Mutations that reproduce the original text (for example BTRET on
``return true;``) are suppressed, so every mutant differs from the
original in exactly the tokens its operator defines.
"""

import hashlib
from dataclasses import dataclass

from .errors import StaleMutant
from .minilang import SourceFile, parse
from .udiff import apply_diff, make_diff

OPERATORS = ("CB", "NC", "MATH", "INCR", "IN", "VMC", "PRET", "BTRET", "BFRET")
ORDINAL = {code: i for i, code in enumerate(OPERATORS)}

_CB_MAP = {"<": "<=", "<=": "<", ">": ">=", ">=": ">"}
_NC_MAP = {"<": ">=", "<=": ">", ">": "<=", ">=": "<", "==": "!=", "!=": "=="}
_MATH_MAP = {"+": "-", "-": "+", "*": "/", "/": "*", "%": "*"}
_INCR_MAP = {"+=": "-=", "-=": "+="}


@dataclass
class Mutant:
    mutant_id: str
    operator: str
    file: str
    node_id: int
    line: int
    description: str
    mutated_text: str
    orig_hash: str

    @property
    def ordinal(self):
        return ORDINAL[self.operator]


def text_hash(text):
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _line_offsets(text):
    offsets = [0]
    for i, c in enumerate(text):
        if c == "\n":
            offsets.append(i + 1)
    return offsets


def _token_offset(offsets, token):
    return offsets[token.line - 1] + token.col - 1


def _replace(text, start, end, replacement):
    return text[:start] + replacement + text[end:]


def _operator_token(program, node, left_child, right_child, wanted):
    """The operator token sitting between two child subtrees."""
    lo = program.node(left_child).last_token
    hi = program.node(right_child).first_token
    for idx in range(lo + 1, hi):
        if program.tokens[idx].text == wanted:
            return program.tokens[idx]
    raise AssertionError("operator token %r not found" % wanted)


def apply_operator(program, text, node_id, op):
    """Mutated file text for one operator at one node, or None if the
    operator does not apply there (including would-be no-ops)."""
    node = program.node(node_id)
    offsets = _line_offsets(text)
    mutated = None

    if op == "CB" and node.kind == "Binary" and node.label in _CB_MAP:
        tok = _operator_token(program, node, node.children[0], node.children[1],
                              node.label)
        start = _token_offset(offsets, tok)
        mutated = _replace(text, start, start + len(tok.text), _CB_MAP[node.label])

    elif op == "NC" and node.kind == "Binary" and node.label in _NC_MAP:
        tok = _operator_token(program, node, node.children[0], node.children[1],
                              node.label)
        start = _token_offset(offsets, tok)
        mutated = _replace(text, start, start + len(tok.text), _NC_MAP[node.label])

    elif op == "MATH" and node.kind == "Binary" and node.label in _MATH_MAP:
        tok = _operator_token(program, node, node.children[0], node.children[1],
                              node.label)
        start = _token_offset(offsets, tok)
        mutated = _replace(text, start, start + len(tok.text), _MATH_MAP[node.label])

    elif op == "INCR" and node.kind == "CompoundAssign":
        tok = _operator_token(program, node, node.children[0], node.children[1],
                              node.label)
        start = _token_offset(offsets, tok)
        mutated = _replace(text, start, start + len(tok.text), _INCR_MAP[node.label])

    elif op == "IN" and node.kind == "Unary" and node.label == "-":
        tok = program.tokens[node.first_token]
        start = _token_offset(offsets, tok)
        mutated = _replace(text, start, start + 1, "")

    elif op == "VMC" and node.kind == "ExprStmt":
        call = program.node(node.children[0])
        if call.kind == "Call":
            target = program.function(call.label)
            if target is not None and target.return_type == "unit":
                sl, sc, el, ec = node.span
                start = offsets[sl - 1] + sc - 1
                end = offsets[el - 1] + ec - 1
                mutated = _replace(text, start, end, "")

    elif op in ("PRET", "BTRET", "BFRET") and node.kind == "Return" and node.children:
        fn_id = program.enclosing(node_id, "FnDecl")
        fn = next(f for f in program.functions if f.node_id == fn_id)
        wanted_type = "int" if op == "PRET" else "bool"
        if fn.return_type == wanted_type:
            replacement = {"PRET": "0", "BTRET": "true", "BFRET": "false"}[op]
            child = program.node(node.children[0])
            sl, sc, el, ec = child.span
            start = offsets[sl - 1] + sc - 1
            end = offsets[el - 1] + ec - 1
            mutated = _replace(text, start, end, replacement)

    if mutated is None or mutated == text:
        return None
    return mutated


_DESCRIPTIONS = {
    "CB": "widened or narrowed the condition boundary",
    "NC": "negated the conditional",
    "MATH": "swapped the arithmetic operator",
    "INCR": "flipped the compound assignment",
    "IN": "removed the unary minus",
    "VMC": "removed a call to a unit function",
    "PRET": "replaced the returned expression with 0",
    "BTRET": "replaced the returned expression with true",
    "BFRET": "replaced the returned expression with false",
}


def generate_mutants(program, file, rev_index=0):
    """All applicable mutants of one file, ordered by (node_id, ordinal)."""
    original = file.text
    orig_hash = text_hash(original)
    mutants = []
    for node in program.nodes:
        for op in OPERATORS:
            mutated = apply_operator(program, original, node.id, op)
            if mutated is None:
                continue
            mutant_id = "rev%d:%s:%d:%s" % (rev_index, file.path, node.id, op)
            mutants.append(Mutant(
                mutant_id=mutant_id,
                operator=op,
                file=file.path,
                node_id=node.id,
                line=node.span[0],
                description="%s: %s" % (op, _DESCRIPTIONS[op]),
                mutated_text=mutated,
                orig_hash=orig_hash,
            ))
    return mutants


def apply(mutant, original):
    """Materialize a mutant against the file it was generated from."""
    if text_hash(original.text) != mutant.orig_hash:
        raise StaleMutant(mutant.mutant_id)
    return SourceFile(original.path, mutant.mutated_text)


def mutants_to_json(mutants, original_texts):
    """JSON records with the mutated text stored as a unified diff."""
    records = []
    for m in mutants:
        records.append({
            "mutant_id": m.mutant_id,
            "operator": m.operator,
            "ordinal": m.ordinal,
            "file": m.file,
            "node_id": m.node_id,
            "line": m.line,
            "description": m.description,
            "diff": make_diff(original_texts[m.file], m.mutated_text, m.file),
            "orig_hash": m.orig_hash,
        })
    return records


def mutants_from_json(records, original_texts):
    mutants = []
    for r in records:
        original = original_texts[r["file"]]
        mutants.append(Mutant(
            mutant_id=r["mutant_id"],
            operator=r["operator"],
            file=r["file"],
            node_id=r["node_id"],
            line=r["line"],
            description=r["description"],
            mutated_text=apply_diff(original, r["diff"]),
            orig_hash=r["orig_hash"],
        ))
    return mutants


def single_subtree_diff(old_program, new_program):
    """Number of maximal differing subtrees between two parses.

    Used to check the single-edit property: compare trees top-down and
    count the positions where they stop agreeing.
    """

    def differs(a_id, b_id):
        a, b = old_program.node(a_id), new_program.node(b_id)
        return a.kind != b.kind or a.label != b.label

    count = 0
    stack = [(0, 0)]
    while stack:
        a_id, b_id = stack.pop()
        a, b = old_program.node(a_id), new_program.node(b_id)
        if differs(a_id, b_id) or len(a.children) != len(b.children):
            count += 1
            continue
        stack.extend(zip(a.children, b.children))
    return count
