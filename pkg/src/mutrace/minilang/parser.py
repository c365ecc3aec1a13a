"""Recursive-descent parser producing flat preorder-numbered Programs."""

from dataclasses import dataclass

from ..errors import ParseError
from .ast import AstNode, FnInfo, Program
from .tokens import tokenize

# Hard cap on syntactic nesting so pathological inputs fail with a
# ParseError instead of exhausting the interpreter stack downstream.
MAX_NESTING = 200

_CMP_OPS = ("<", "<=", ">", ">=")
_EQ_OPS = ("==", "!=")
_ADD_OPS = ("+", "-")
_MUL_OPS = ("*", "/", "%")


@dataclass(frozen=True)
class SourceFile:
    path: str
    text: str


class _T:
    """Parse-time tree node, flattened into a Program afterwards."""

    __slots__ = ("kind", "label", "children", "first", "last",
                 "ret_type", "param_type", "target")

    def __init__(self, kind, label, children, first, last):
        self.kind = kind
        self.label = label
        self.children = children
        self.first = first
        self.last = last


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0
        self.depth = 0

    # --- token helpers ---

    def peek(self):
        return self.tokens[self.pos]

    def at(self, kind, text=None):
        t = self.peek()
        return t.kind == kind and (text is None or t.text == text)

    def take(self):
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def expect(self, kind, text=None):
        t = self.peek()
        if not self.at(kind, text):
            want = text if text is not None else kind
            raise ParseError(
                "expected %r, found %r" % (want, t.text or t.kind), t.line, t.col
            )
        return self.take()

    def _enter(self):
        self.depth += 1
        if self.depth > MAX_NESTING:
            t = self.peek()
            raise ParseError("nesting too deep", t.line, t.col)

    def _leave(self):
        self.depth -= 1

    # --- grammar ---

    def program(self):
        fns = []
        while not self.at("eof"):
            fns.append(self.fn_decl())
        first = 0
        last = max(0, len(self.tokens) - 2)
        return _T("Program", "", fns, first, last)

    def fn_decl(self):
        first = self.pos
        self.expect("kw", "fn")
        name = self.expect("ident").text
        self.expect("op", "(")
        params = []
        if not self.at("op", ")"):
            params.append(self.param())
            while self.at("op", ","):
                self.take()
                params.append(self.param())
        self.expect("op", ")")
        self.expect("op", "->")
        ret = self.type_name()
        body = self.block()
        node = _T("FnDecl", name, params + [body], first, body.last)
        node.ret_type = ret
        return node

    def param(self):
        first = self.pos
        name = self.expect("ident").text
        self.expect("op", ":")
        ty = self.type_name()
        node = _T("Param", name, [], first, self.pos - 1)
        node.param_type = ty
        return node

    def type_name(self):
        t = self.peek()
        if t.kind == "kw" and t.text in ("int", "bool", "unit"):
            return self.take().text
        raise ParseError("expected a type (int, bool, unit)", t.line, t.col)

    def block(self):
        self._enter()
        first = self.pos
        self.expect("op", "{")
        stmts = []
        while not self.at("op", "}"):
            if self.at("eof"):
                t = self.peek()
                raise ParseError("expected '}'", t.line, t.col)
            stmts.append(self.statement())
        last = self.pos
        self.take()
        self._leave()
        return _T("Block", "", stmts, first, last)

    def statement(self):
        self._enter()
        try:
            t = self.peek()
            if t.kind == "kw" and t.text == "let":
                return self.let_stmt()
            if t.kind == "kw" and t.text == "if":
                return self.if_stmt()
            if t.kind == "kw" and t.text == "while":
                return self.while_stmt()
            if t.kind == "kw" and t.text == "return":
                return self.return_stmt()
            if t.kind == "ident":
                nxt = self.tokens[self.pos + 1]
                if nxt.kind == "op" and nxt.text in ("=", "+=", "-="):
                    return self.assign_stmt()
            return self.expr_stmt()
        finally:
            self._leave()

    def let_stmt(self):
        first = self.pos
        self.take()  # let
        name = self.expect("ident").text
        self.expect("op", "=")
        value = self.expression()
        last = self.pos
        self.expect("op", ";")
        return _T("Let", name, [value], first, last)

    def assign_stmt(self):
        first = self.pos
        name = self.take().text
        target = _T("Ident", name, [], first, first)
        op = self.take().text  # "=", "+=", or "-="
        value = self.expression()
        last = self.pos
        self.expect("op", ";")
        if op == "=":
            return _T("Assign", "", [target, value], first, last)
        return _T("CompoundAssign", op, [target, value], first, last)

    def if_stmt(self):
        first = self.pos
        self.take()  # if
        self.expect("op", "(")
        cond = self.expression()
        self.expect("op", ")")
        then = self.block()
        children = [cond, then]
        last = then.last
        if self.at("kw", "else"):
            self.take()
            other = self.block()
            children.append(other)
            last = other.last
        return _T("If", "", children, first, last)

    def while_stmt(self):
        first = self.pos
        self.take()  # while
        self.expect("op", "(")
        cond = self.expression()
        self.expect("op", ")")
        body = self.block()
        return _T("While", "", [cond, body], first, body.last)

    def return_stmt(self):
        first = self.pos
        self.take()  # return
        children = []
        if not self.at("op", ";"):
            children.append(self.expression())
        last = self.pos
        self.expect("op", ";")
        return _T("Return", "", children, first, last)

    def expr_stmt(self):
        first = self.pos
        value = self.expression()
        last = self.pos
        self.expect("op", ";")
        return _T("ExprStmt", "", [value], first, last)

    def expression(self):
        self._enter()
        try:
            return self.or_expr()
        finally:
            self._leave()

    def _binary_level(self, ops, next_level):
        first = self.pos
        node = next_level()
        while self.at("op") and self.peek().text in ops:
            op = self.take().text
            rhs = next_level()
            node = _T("Binary", op, [node, rhs], first, rhs.last)
        return node

    def or_expr(self):
        return self._binary_level(("||",), self.and_expr)

    def and_expr(self):
        return self._binary_level(("&&",), self.equality)

    def equality(self):
        return self._binary_level(_EQ_OPS, self.comparison)

    def comparison(self):
        return self._binary_level(_CMP_OPS, self.additive)

    def additive(self):
        return self._binary_level(_ADD_OPS, self.multiplicative)

    def multiplicative(self):
        return self._binary_level(_MUL_OPS, self.unary)

    def unary(self):
        t = self.peek()
        if t.kind == "op" and t.text in ("-", "!"):
            self._enter()
            first = self.pos
            self.take()
            operand = self.unary()
            self._leave()
            return _T("Unary", t.text, [operand], first, operand.last)
        return self.primary()

    def primary(self):
        t = self.peek()
        if t.kind == "int":
            self.take()
            return _T("IntLit", t.text, [], self.pos - 1, self.pos - 1)
        if t.kind == "kw" and t.text in ("true", "false"):
            self.take()
            return _T("BoolLit", t.text, [], self.pos - 1, self.pos - 1)
        if t.kind == "ident":
            first = self.pos
            name = self.take().text
            if self.at("op", "("):
                self.take()
                args = []
                if not self.at("op", ")"):
                    args.append(self.expression())
                    while self.at("op", ","):
                        self.take()
                        args.append(self.expression())
                last = self.pos
                self.expect("op", ")")
                return _T("Call", name, args, first, last)
            return _T("Ident", name, [], first, first)
        if t.kind == "op" and t.text == "(":
            self._enter()
            first = self.pos
            self.take()
            inner = self.expression()
            last = self.pos
            self.expect("op", ")")
            self._leave()
            # Parens only group: widen the span, keep the inner node.
            inner.first = first
            inner.last = last
            return inner
        raise ParseError(
            "expected an expression, found %r" % (t.text or t.kind), t.line, t.col
        )


def _flatten(root, tokens):
    nodes = []

    def walk(t):
        node_id = len(nodes)
        ft, lt = tokens[t.first], tokens[t.last]
        span = (ft.line, ft.col, lt.line, lt.end_col)
        node = AstNode(node_id, t.kind, t.label, [], span, t.first, t.last)
        nodes.append(node)
        for child in t.children:
            node.children.append(walk(child))
        return node_id

    walk(root)
    return nodes


def _validate(program, tokens):
    seen = {}
    for fn in program.functions:
        if fn.name in seen:
            tok = tokens[program.nodes[fn.node_id].first_token]
            raise ParseError("duplicate function %r" % fn.name, tok.line, tok.col)
        seen[fn.name] = fn
    for node in program.nodes:
        if node.kind != "Call":
            continue
        target = seen.get(node.label)
        tok = tokens[node.first_token]
        if target is None:
            raise ParseError("call to undeclared function %r" % node.label,
                             tok.line, tok.col)
        if len(target.params) != len(node.children):
            raise ParseError(
                "%r takes %d argument(s), got %d"
                % (node.label, len(target.params), len(node.children)),
                tok.line, tok.col,
            )


def parse(file):
    """Parse a SourceFile into a validated Program.

    Raises ParseError (with line/column) on any lexical, syntactic, or
    call-resolution problem; total over arbitrary input text.
    """
    tokens = tokenize(file.text)
    parser = _Parser(tokens)
    root = parser.program()

    nodes = _flatten(root, tokens)
    functions = []
    fn_trees = root.children
    # Recover per-function metadata from the parse-time tree; node ids for
    # FnDecls are recomputed by matching preorder positions.
    program = Program(nodes, functions, tokens)
    for node in nodes:
        if node.kind != "FnDecl":
            continue
        params = [
            (nodes[c].label, None) for c in node.children if nodes[c].kind == "Param"
        ]
        functions.append(FnInfo(node.label, node.id, params, None))
    # Attach the declared types, which only the parse-time tree knows.
    idx = 0
    for t in fn_trees:
        functions[idx].return_type = t.ret_type
        ptypes = [c.param_type for c in t.children if c.kind == "Param"]
        functions[idx].params = [
            (name, ptypes[i]) for i, (name, _) in enumerate(functions[idx].params)
        ]
        idx += 1

    _validate(program, tokens)
    return program


def parse_text(text, path="<memory>"):
    return parse(SourceFile(path, text))
