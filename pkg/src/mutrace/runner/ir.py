"""Lowering from the AST to the flat form both evaluator backends execute.

The evaluation contract lives here so the compiled and pure backends stay
interchangeable:

* every node visit costs one step and marks the node covered, in this
  order: statement/expression nodes when execution reaches them, FnDecl
  and Param nodes when a call binds its arguments;
* hitting the step budget aborts with a timeout, so an outcome timed out
  exactly when its step count equals the budget;
* integers are 64-bit two's complement with wraparound; division and
  modulo truncate toward zero and trap on a zero divisor;
* ``&&`` and ``||`` short-circuit (the right operand of a decided
  operator is neither stepped nor covered);
* values are tagged int/bool/unit; operand tag mismatches, reads of
  undeclared names, falling off a non-unit function, and call recursion
  past MAX_CALL_DEPTH are runtime errors, never crashes.
"""

from dataclasses import dataclass, field

from ..minilang.ast import KIND_CODE

MAX_CALL_DEPTH = 200

BINOPS = ("||", "&&", "==", "!=", "<", "<=", ">", ">=", "+", "-", "*", "/", "%")
BINOP_CODE = {op: i for i, op in enumerate(BINOPS)}

TAG_INT, TAG_BOOL, TAG_UNIT = 0, 1, 2
TYPE_TAG = {"int": TAG_INT, "bool": TAG_BOOL, "unit": TAG_UNIT}

# Core exit statuses.
RUN_OK, RUN_ERROR, RUN_TIMEOUT = 0, 1, 2

# Runtime error tags, shared with test expectations in tests.json.
ERROR_TAGS = (
    "div_by_zero",
    "type_error",
    "missing_return",
    "undefined_variable",
    "stack_overflow",
    "arity_mismatch",
)
ERR_DIV, ERR_TYPE, ERR_MISSING_RETURN, ERR_UNDEF, ERR_STACK, ERR_ARITY = range(1, 7)
ERROR_TAG_BY_CODE = {i + 1: tag for i, tag in enumerate(ERROR_TAGS)}


@dataclass
class ProgramIR:
    n_nodes: int
    kind: list  # kind code per node
    arg_a: list  # per-kind payload (op code, slot, fn index, literal flag)
    val: list  # int64 payload (IntLit value)
    child_start: list
    child_count: list
    children: list  # flattened child ids
    fn_by_name: dict  # name -> function index
    fn_decl_node: list  # FnDecl node id per function
    fn_block: list  # body Block node id per function
    fn_param_nodes: list  # list of Param node id lists
    fn_param_tags: list  # list of tag lists
    fn_ret_tag: list
    fn_n_slots: list
    max_slots: int = 0
    arrays: dict = field(default_factory=dict, repr=False)

    def as_arrays(self):
        """numpy views for the compiled backend, built once."""
        if not self.arrays:
            import numpy as np

            self.arrays = {
                "kind": np.asarray(self.kind, dtype=np.int32),
                "arg_a": np.asarray(self.arg_a, dtype=np.int64),
                "val": np.asarray(self.val, dtype=np.int64),
                "child_start": np.asarray(self.child_start, dtype=np.int32),
                "child_count": np.asarray(self.child_count, dtype=np.int32),
                "children": np.asarray(self.children or [0], dtype=np.int32),
                "fn_decl_node": np.asarray(self.fn_decl_node or [0], dtype=np.int32),
                "fn_block": np.asarray(self.fn_block or [0], dtype=np.int32),
                "fn_ret_tag": np.asarray(self.fn_ret_tag or [0], dtype=np.int32),
                "fn_n_slots": np.asarray(self.fn_n_slots or [0], dtype=np.int32),
            }
            flat_params = []
            param_start = []
            for nodes in self.fn_param_nodes:
                param_start.append(len(flat_params))
                flat_params.extend(nodes)
            param_start.append(len(flat_params))
            flat_tags = [t for tags in self.fn_param_tags for t in tags]
            self.arrays["fn_param_start"] = np.asarray(param_start, dtype=np.int32)
            self.arrays["param_nodes"] = np.asarray(flat_params or [0], dtype=np.int32)
            self.arrays["param_tags"] = np.asarray(flat_tags or [0], dtype=np.int32)
        return self.arrays


class _Scope:
    def __init__(self):
        self.stack = [{}]
        self.n_slots = 0

    def push(self):
        self.stack.append({})

    def pop(self):
        self.stack.pop()

    def declare(self, name):
        slot = self.n_slots
        self.n_slots += 1
        self.stack[-1][name] = slot
        return slot

    def resolve(self, name):
        for frame in reversed(self.stack):
            if name in frame:
                return frame[name]
        return -1


def lower(program):
    """Lower a parsed Program to ProgramIR (cached on the program)."""
    cached = getattr(program, "_ir", None)
    if cached is not None:
        return cached

    n = len(program.nodes)
    ir = ProgramIR(
        n_nodes=n,
        kind=[0] * n,
        arg_a=[0] * n,
        val=[0] * n,
        child_start=[0] * n,
        child_count=[0] * n,
        children=[],
        fn_by_name={},
        fn_decl_node=[],
        fn_block=[],
        fn_param_nodes=[],
        fn_param_tags=[],
        fn_ret_tag=[],
        fn_n_slots=[],
    )
    for node in program.nodes:
        ir.kind[node.id] = KIND_CODE[node.kind]
        ir.child_start[node.id] = len(ir.children)
        ir.child_count[node.id] = len(node.children)
        ir.children.extend(node.children)

    for f_idx, fn in enumerate(program.functions):
        ir.fn_by_name[fn.name] = f_idx
        decl = program.node(fn.node_id)
        ir.arg_a[decl.id] = f_idx
        param_ids = [c for c in decl.children if program.node(c).kind == "Param"]
        block_id = decl.children[-1]
        ir.fn_decl_node.append(decl.id)
        ir.fn_block.append(block_id)
        ir.fn_param_nodes.append(param_ids)
        ir.fn_param_tags.append([TYPE_TAG[ty] for _, ty in fn.params])
        ir.fn_ret_tag.append(TYPE_TAG[fn.return_type])

        scope = _Scope()
        for pid, (pname, _) in zip(param_ids, fn.params):
            slot = scope.declare(pname)
            ir.arg_a[pid] = slot
        _resolve_block(program, ir, block_id, scope)
        ir.fn_n_slots.append(scope.n_slots)

        # Return statements check against the enclosing function's type.
        ret_tag = TYPE_TAG[fn.return_type]
        stack = [block_id]
        while stack:
            nid = stack.pop()
            if program.node(nid).kind == "Return":
                ir.arg_a[nid] = ret_tag
            stack.extend(program.node(nid).children)

    for node in program.nodes:
        if node.kind == "IntLit":
            ir.val[node.id] = int(node.label)
        elif node.kind == "BoolLit":
            ir.arg_a[node.id] = 1 if node.label == "true" else 0
        elif node.kind == "Binary":
            ir.arg_a[node.id] = BINOP_CODE[node.label]
        elif node.kind == "Unary":
            ir.arg_a[node.id] = 0 if node.label == "-" else 1
        elif node.kind == "Call":
            ir.arg_a[node.id] = ir.fn_by_name[node.label]

    ir.max_slots = max(ir.fn_n_slots, default=0)
    program._ir = ir
    return ir


def _resolve_block(program, ir, block_id, scope):
    scope.push()
    for stmt in program.node(block_id).children:
        _resolve_stmt(program, ir, stmt, scope)
    scope.pop()


def _resolve_stmt(program, ir, node_id, scope):
    node = program.node(node_id)
    k = node.kind
    if k == "Let":
        _resolve_expr(program, ir, node.children[0], scope)
        ir.arg_a[node_id] = scope.declare(node.label)
    elif k in ("Assign", "CompoundAssign"):
        target, value = node.children
        _resolve_expr(program, ir, value, scope)
        ir.arg_a[target] = scope.resolve(program.node(target).label)
    elif k == "If":
        _resolve_expr(program, ir, node.children[0], scope)
        _resolve_block(program, ir, node.children[1], scope)
        if len(node.children) == 3:
            _resolve_block(program, ir, node.children[2], scope)
    elif k == "While":
        _resolve_expr(program, ir, node.children[0], scope)
        _resolve_block(program, ir, node.children[1], scope)
    elif k in ("Return", "ExprStmt"):
        for c in node.children:
            _resolve_expr(program, ir, c, scope)
    else:
        raise AssertionError("unexpected statement kind %s" % k)


def _resolve_expr(program, ir, node_id, scope):
    node = program.node(node_id)
    if node.kind == "Ident":
        ir.arg_a[node_id] = scope.resolve(node.label)
        return
    for c in node.children:
        _resolve_expr(program, ir, c, scope)
