"""Pure-Python evaluator backend.

Mirrors _interp_cy statement for statement; any behavior change here must
be ported there (the backend-equality tests hold both to the contract in
runner.ir).
"""

from .ir import (
    ERR_DIV,
    ERR_MISSING_RETURN,
    ERR_STACK,
    ERR_TYPE,
    ERR_UNDEF,
    MAX_CALL_DEPTH,
    RUN_ERROR,
    RUN_OK,
    RUN_TIMEOUT,
    TAG_BOOL,
    TAG_INT,
    TAG_UNIT,
)

BACKEND_NAME = "pure"

# Kind codes, frozen to match minilang.ast.KINDS order.
_K_PROGRAM, _K_FNDECL, _K_PARAM, _K_BLOCK, _K_LET, _K_ASSIGN, _K_COMPOUND, \
    _K_IF, _K_WHILE, _K_RETURN, _K_EXPRSTMT, _K_CALL, _K_BINARY, _K_UNARY, \
    _K_INTLIT, _K_BOOLLIT, _K_IDENT = range(17)

_FLOW_OK, _FLOW_RETURN, _FLOW_ERR, _FLOW_TIMEOUT = 0, 1, 2, 3

_I64_MASK = 0xFFFFFFFFFFFFFFFF
_I64_SIGN = 0x8000000000000000


def _wrap(x):
    return ((x + _I64_SIGN) & _I64_MASK) - _I64_SIGN


class _Run:
    __slots__ = ("ir", "budget", "steps", "covered", "err", "depth",
                 "frames", "rval", "rtag")

    def __init__(self, ir, budget):
        self.ir = ir
        self.budget = budget
        self.steps = 0
        self.covered = bytearray(ir.n_nodes)
        self.err = 0
        self.depth = 0
        self.frames = []
        self.rval = 0
        self.rtag = TAG_UNIT

    def step(self, nid):
        if self.steps >= self.budget:
            return False
        self.steps += 1
        self.covered[nid] = 1
        return True

    def fail(self, code):
        self.err = code
        return _FLOW_ERR

    def call_fn(self, f_idx, arg_vals, arg_tags):
        ir = self.ir
        if self.depth >= MAX_CALL_DEPTH:
            return self.fail(ERR_STACK)
        self.depth += 1
        if not self.step(ir.fn_decl_node[f_idx]):
            self.depth -= 1
            return _FLOW_TIMEOUT
        vals = [0] * ir.fn_n_slots[f_idx]
        tags = [TAG_INT] * ir.fn_n_slots[f_idx]
        param_nodes = ir.fn_param_nodes[f_idx]
        param_tags = ir.fn_param_tags[f_idx]
        for i, pid in enumerate(param_nodes):
            if not self.step(pid):
                self.depth -= 1
                return _FLOW_TIMEOUT
            if arg_tags[i] != param_tags[i]:
                self.depth -= 1
                return self.fail(ERR_TYPE)
            vals[i] = arg_vals[i]
            tags[i] = arg_tags[i]
        self.frames.append((vals, tags))
        flow = self.exec_stmt(ir.fn_block[f_idx])
        self.frames.pop()
        self.depth -= 1
        if flow == _FLOW_RETURN:
            return _FLOW_OK
        if flow == _FLOW_OK:
            if ir.fn_ret_tag[f_idx] == TAG_UNIT:
                self.rval = 0
                self.rtag = TAG_UNIT
                return _FLOW_OK
            return self.fail(ERR_MISSING_RETURN)
        return flow

    def exec_stmt(self, nid):
        ir = self.ir
        k = ir.kind[nid]
        if not self.step(nid):
            return _FLOW_TIMEOUT
        cs = ir.child_start[nid]
        cc = ir.child_count[nid]

        if k == _K_BLOCK:
            for i in range(cc):
                flow = self.exec_stmt(ir.children[cs + i])
                if flow != _FLOW_OK:
                    return flow
            return _FLOW_OK

        if k == _K_LET:
            flow = self.eval_expr(ir.children[cs])
            if flow != _FLOW_OK:
                return flow
            vals, tags = self.frames[-1]
            slot = ir.arg_a[nid]
            vals[slot] = self.rval
            tags[slot] = self.rtag
            return _FLOW_OK

        if k == _K_ASSIGN or k == _K_COMPOUND:
            target = ir.children[cs]
            flow = self.eval_expr(ir.children[cs + 1])
            if flow != _FLOW_OK:
                return flow
            if not self.step(target):
                return _FLOW_TIMEOUT
            slot = ir.arg_a[target]
            if slot < 0:
                return self.fail(ERR_UNDEF)
            vals, tags = self.frames[-1]
            if k == _K_ASSIGN:
                vals[slot] = self.rval
                tags[slot] = self.rtag
                return _FLOW_OK
            if tags[slot] != TAG_INT or self.rtag != TAG_INT:
                return self.fail(ERR_TYPE)
            if ir.arg_a[nid] == 0:  # "+="
                vals[slot] = _wrap(vals[slot] + self.rval)
            else:  # "-="
                vals[slot] = _wrap(vals[slot] - self.rval)
            return _FLOW_OK

        if k == _K_IF:
            flow = self.eval_expr(ir.children[cs])
            if flow != _FLOW_OK:
                return flow
            if self.rtag != TAG_BOOL:
                return self.fail(ERR_TYPE)
            if self.rval:
                return self.exec_stmt(ir.children[cs + 1])
            if cc == 3:
                return self.exec_stmt(ir.children[cs + 2])
            return _FLOW_OK

        if k == _K_WHILE:
            while True:
                flow = self.eval_expr(ir.children[cs])
                if flow != _FLOW_OK:
                    return flow
                if self.rtag != TAG_BOOL:
                    return self.fail(ERR_TYPE)
                if not self.rval:
                    return _FLOW_OK
                flow = self.exec_stmt(ir.children[cs + 1])
                if flow != _FLOW_OK:
                    return flow

        if k == _K_RETURN:
            if cc:
                flow = self.eval_expr(ir.children[cs])
                if flow != _FLOW_OK:
                    return flow
            else:
                self.rval = 0
                self.rtag = TAG_UNIT
            want = ir.arg_a[nid]
            if self.rtag != want:
                return self.fail(ERR_TYPE)
            return _FLOW_RETURN

        if k == _K_EXPRSTMT:
            flow = self.eval_expr(ir.children[cs])
            if flow != _FLOW_OK:
                return flow
            return _FLOW_OK

        raise AssertionError("bad statement kind %d" % k)

    def eval_expr(self, nid):
        ir = self.ir
        k = ir.kind[nid]
        if not self.step(nid):
            return _FLOW_TIMEOUT
        cs = ir.child_start[nid]

        if k == _K_INTLIT:
            self.rval = ir.val[nid]
            self.rtag = TAG_INT
            return _FLOW_OK

        if k == _K_BOOLLIT:
            self.rval = ir.arg_a[nid]
            self.rtag = TAG_BOOL
            return _FLOW_OK

        if k == _K_IDENT:
            slot = ir.arg_a[nid]
            if slot < 0:
                return self.fail(ERR_UNDEF)
            vals, tags = self.frames[-1]
            self.rval = vals[slot]
            self.rtag = tags[slot]
            return _FLOW_OK

        if k == _K_UNARY:
            flow = self.eval_expr(ir.children[cs])
            if flow != _FLOW_OK:
                return flow
            if ir.arg_a[nid] == 0:  # "-"
                if self.rtag != TAG_INT:
                    return self.fail(ERR_TYPE)
                self.rval = _wrap(-self.rval)
            else:  # "!"
                if self.rtag != TAG_BOOL:
                    return self.fail(ERR_TYPE)
                self.rval = 0 if self.rval else 1
            return _FLOW_OK

        if k == _K_BINARY:
            op = ir.arg_a[nid]
            flow = self.eval_expr(ir.children[cs])
            if flow != _FLOW_OK:
                return flow
            if op == 0 or op == 1:  # "||" / "&&"
                if self.rtag != TAG_BOOL:
                    return self.fail(ERR_TYPE)
                if op == 0 and self.rval:
                    return _FLOW_OK  # true || _
                if op == 1 and not self.rval:
                    return _FLOW_OK  # false && _
                flow = self.eval_expr(ir.children[cs + 1])
                if flow != _FLOW_OK:
                    return flow
                if self.rtag != TAG_BOOL:
                    return self.fail(ERR_TYPE)
                return _FLOW_OK
            lval, ltag = self.rval, self.rtag
            flow = self.eval_expr(ir.children[cs + 1])
            if flow != _FLOW_OK:
                return flow
            rval, rtag = self.rval, self.rtag
            if op == 2 or op == 3:  # "==" / "!="
                if ltag != rtag or ltag == TAG_UNIT:
                    return self.fail(ERR_TYPE)
                same = 1 if lval == rval else 0
                self.rval = same if op == 2 else 1 - same
                self.rtag = TAG_BOOL
                return _FLOW_OK
            if ltag != TAG_INT or rtag != TAG_INT:
                return self.fail(ERR_TYPE)
            if op == 4:
                self.rval = 1 if lval < rval else 0
                self.rtag = TAG_BOOL
            elif op == 5:
                self.rval = 1 if lval <= rval else 0
                self.rtag = TAG_BOOL
            elif op == 6:
                self.rval = 1 if lval > rval else 0
                self.rtag = TAG_BOOL
            elif op == 7:
                self.rval = 1 if lval >= rval else 0
                self.rtag = TAG_BOOL
            elif op == 8:
                self.rval = _wrap(lval + rval)
                self.rtag = TAG_INT
            elif op == 9:
                self.rval = _wrap(lval - rval)
                self.rtag = TAG_INT
            elif op == 10:
                self.rval = _wrap(lval * rval)
                self.rtag = TAG_INT
            else:  # "/" or "%"
                if rval == 0:
                    return self.fail(ERR_DIV)
                if rval == -1:
                    q = _wrap(-lval)
                    r = 0
                else:
                    q = abs(lval) // abs(rval)
                    if (lval < 0) != (rval < 0):
                        q = -q
                    r = lval - q * rval
                self.rval = q if op == 11 else r
                self.rtag = TAG_INT
            return _FLOW_OK

        if k == _K_CALL:
            cc = ir.child_count[nid]
            arg_vals = []
            arg_tags = []
            for i in range(cc):
                flow = self.eval_expr(ir.children[cs + i])
                if flow != _FLOW_OK:
                    return flow
                arg_vals.append(self.rval)
                arg_tags.append(self.rtag)
            return self.call_fn(ir.arg_a[nid], arg_vals, arg_tags)

        raise AssertionError("bad expression kind %d" % k)


def execute(ir, entry_index, arg_vals, arg_tags, budget):
    """Run one entry call; returns (status, err_code, value, tag, steps, covered).

    ``covered`` is a bytes object with one flag per node id.
    """
    run = _Run(ir, budget)
    flow = run.call_fn(entry_index, list(arg_vals), list(arg_tags))
    if flow == _FLOW_TIMEOUT:
        status = RUN_TIMEOUT
    elif flow == _FLOW_ERR:
        status = RUN_ERROR
    else:
        status = RUN_OK
    return status, run.err, run.rval, run.rtag, run.steps, bytes(run.covered)
