"""Canonical source renderer.

The layout is fixed: two-space indentation, one space around binary
operators and ``->``, statements one per line, a blank line between
functions. Re-parsing the output yields a structurally identical Program.
"""

from .ast import Program

# Higher binds tighter; mirrors the parser's precedence ladder.
_PRECEDENCE = {
    "||": 1, "&&": 2, "==": 3, "!=": 3,
    "<": 4, "<=": 4, ">": 4, ">=": 4,
    "+": 5, "-": 5, "*": 6, "/": 6, "%": 6,
}
_UNARY_PREC = 7


def print_program(program: Program) -> str:
    """Render a Program in canonical layout; empty program renders as ''."""
    root = program.nodes[0] if program.nodes else None
    if root is None or not root.children:
        return ""
    chunks = [_fn(program, fid) for fid in root.children]
    return "\n".join(chunks)


def _fn(program, fn_id):
    node = program.node(fn_id)
    fn = next(f for f in program.functions if f.node_id == fn_id)
    params = ", ".join("%s: %s" % (name, ty) for name, ty in fn.params)
    header = "fn %s(%s) -> %s " % (fn.name, params, fn.return_type)
    body = node.children[-1]
    return header + _block(program, body, 0) + "\n"


def _block(program, block_id, indent):
    node = program.node(block_id)
    if not node.children:
        return "{\n" + "  " * indent + "}"
    lines = ["{"]
    for stmt in node.children:
        lines.append("  " * (indent + 1) + _stmt(program, stmt, indent + 1))
    lines.append("  " * indent + "}")
    return "\n".join(lines)


def _stmt(program, node_id, indent):
    n = program.node(node_id)
    k = n.kind
    if k == "Let":
        return "let %s = %s;" % (n.label, _expr(program, n.children[0], 0))
    if k == "Assign":
        target = program.node(n.children[0]).label
        return "%s = %s;" % (target, _expr(program, n.children[1], 0))
    if k == "CompoundAssign":
        target = program.node(n.children[0]).label
        return "%s %s %s;" % (target, n.label, _expr(program, n.children[1], 0))
    if k == "If":
        out = "if (%s) %s" % (
            _expr(program, n.children[0], 0),
            _block(program, n.children[1], indent),
        )
        if len(n.children) == 3:
            out += " else " + _block(program, n.children[2], indent)
        return out
    if k == "While":
        return "while (%s) %s" % (
            _expr(program, n.children[0], 0),
            _block(program, n.children[1], indent),
        )
    if k == "Return":
        if n.children:
            return "return %s;" % _expr(program, n.children[0], 0)
        return "return;"
    if k == "ExprStmt":
        return "%s;" % _expr(program, n.children[0], 0)
    raise AssertionError("not a statement kind: %s" % k)


def _expr(program, node_id, parent_prec):
    n = program.node(node_id)
    k = n.kind
    if k in ("IntLit", "BoolLit", "Ident"):
        return n.label
    if k == "Call":
        args = ", ".join(_expr(program, c, 0) for c in n.children)
        return "%s(%s)" % (n.label, args)
    if k == "Unary":
        inner = _expr(program, n.children[0], _UNARY_PREC)
        text = n.label + inner
        return "(%s)" % text if parent_prec > _UNARY_PREC else text
    if k == "Binary":
        prec = _PRECEDENCE[n.label]
        left = _expr(program, n.children[0], prec)
        # Left-associative: the right operand needs parens at equal precedence.
        right = _expr(program, n.children[1], prec + 1)
        text = "%s %s %s" % (left, n.label, right)
        return "(%s)" % text if parent_prec > prec else text
    raise AssertionError("not an expression kind: %s" % k)
