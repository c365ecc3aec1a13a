"""Flat AST representation.

Nodes live in a single per-file table indexed by id; ids are assigned in
preorder starting at 0, so structural algorithms can treat a program as
parallel arrays instead of chasing object graphs. Spans are 1-based
(start_line, start_col, end_line, end_col) with the end column exclusive.
"""

from dataclasses import dataclass, field

KINDS = (
    "Program", "FnDecl", "Param", "Block", "Let", "Assign", "CompoundAssign",
    "If", "While", "Return", "ExprStmt", "Call", "Binary", "Unary",
    "IntLit", "BoolLit", "Ident",
)
KIND_CODE = {k: i for i, k in enumerate(KINDS)}

STATEMENT_KINDS = frozenset(
    ["Let", "Assign", "CompoundAssign", "If", "While", "Return", "ExprStmt"]
)

RETURN_TYPES = ("unit", "int", "bool")


@dataclass
class AstNode:
    id: int
    kind: str
    label: str  # operator symbol, identifier, literal text; "" for structure
    children: list
    span: tuple  # (start_line, start_col, end_line, end_col)
    first_token: int = -1  # token-array index range covered by this node
    last_token: int = -1


@dataclass
class FnInfo:
    name: str
    node_id: int
    params: list  # (name, type) in order
    return_type: str


@dataclass
class Program:
    nodes: list  # AstNode, indexed by id
    functions: list  # FnInfo in declaration order
    tokens: list = field(default_factory=list, repr=False)

    def node(self, node_id):
        return self.nodes[node_id]

    @property
    def function_names(self):
        return [f.name for f in self.functions]

    def function(self, name):
        for f in self.functions:
            if f.name == name:
                return f
        return None

    def parent_map(self):
        parents = {0: None} if self.nodes else {}
        for n in self.nodes:
            for c in n.children:
                parents[c] = n.id
        return parents

    def enclosing(self, node_id, kind):
        """Innermost ancestor-or-self of the given kind, or None."""
        parents = self.parent_map()
        cur = node_id
        while cur is not None:
            if self.nodes[cur].kind == kind:
                return cur
            cur = parents[cur]
        return None


def span_text(text, span):
    """Extract the source slice a span covers."""
    sl, sc, el, ec = span
    lines = text.split("\n")
    if sl == el:
        return lines[sl - 1][sc - 1:ec - 1]
    parts = [lines[sl - 1][sc - 1:]]
    parts.extend(lines[i] for i in range(sl, el - 1))
    parts.append(lines[el - 1][:ec - 1])
    return "\n".join(parts)


def subtree_ids(program, root_id):
    """Preorder list of ids in the subtree rooted at root_id."""
    out = []
    stack = [root_id]
    while stack:
        nid = stack.pop()
        out.append(nid)
        stack.extend(reversed(program.nodes[nid].children))
    return out


def structurally_equal(a, b):
    """Same kinds, labels, and child order; ids and spans ignored."""
    if len(a.nodes) != len(b.nodes):
        return False

    def shape(p, nid):
        n = p.nodes[nid]
        return (n.kind, n.label, tuple(shape(p, c) for c in n.children))

    if not a.nodes:
        return not b.nodes
    return shape(a, 0) == shape(b, 0)
