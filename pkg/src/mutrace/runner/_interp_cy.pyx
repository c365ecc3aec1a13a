# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled evaluator backend.

Mirrors _interp_py statement for statement; any behavior change there must
be ported here (the backend-equality tests hold both to the contract in
runner.ir).
"""

import numpy as np

from .ir import MAX_CALL_DEPTH as _PY_MAX_CALL_DEPTH
from .ir import RUN_ERROR, RUN_OK, RUN_TIMEOUT

from libc.stdint cimport int32_t, int64_t, uint8_t, uint64_t

BACKEND_NAME = "compiled"

cdef enum:
    K_PROGRAM, K_FNDECL, K_PARAM, K_BLOCK, K_LET, K_ASSIGN, K_COMPOUND, \
    K_IF, K_WHILE, K_RETURN, K_EXPRSTMT, K_CALL, K_BINARY, K_UNARY, \
    K_INTLIT, K_BOOLLIT, K_IDENT

cdef enum:
    FLOW_OK, FLOW_RETURN, FLOW_ERR, FLOW_TIMEOUT

cdef enum:
    TAG_INT, TAG_BOOL, TAG_UNIT

cdef enum:
    ERR_NONE, ERR_DIV, ERR_TYPE, ERR_MISSING_RETURN, ERR_UNDEF, ERR_STACK

cdef int MAX_DEPTH = _PY_MAX_CALL_DEPTH


cdef inline int64_t wrap_add(int64_t a, int64_t b) nogil:
    return <int64_t> (<uint64_t> a + <uint64_t> b)


cdef inline int64_t wrap_sub(int64_t a, int64_t b) nogil:
    return <int64_t> (<uint64_t> a - <uint64_t> b)


cdef inline int64_t wrap_mul(int64_t a, int64_t b) nogil:
    return <int64_t> (<uint64_t> a * <uint64_t> b)


cdef inline int64_t wrap_neg(int64_t a) nogil:
    return <int64_t> (0 - <uint64_t> a)


cdef class _Run:
    cdef:
        int32_t[::1] kind, child_start, child_count, children
        int64_t[::1] arg_a, val
        int32_t[::1] fn_decl_node, fn_block, fn_ret_tag, fn_n_slots
        int32_t[::1] fn_param_start, param_nodes, param_tags
        uint8_t[::1] covered
        int64_t[::1] slot_vals, arg_vals
        int32_t[::1] slot_tags, arg_tags
        int64_t steps, budget, rval
        int max_slots, depth, frame, err, rtag, arg_top

    def __init__(self, ir, int64_t budget):
        arrays = ir.as_arrays()
        self.kind = arrays["kind"]
        self.arg_a = arrays["arg_a"]
        self.val = arrays["val"]
        self.child_start = arrays["child_start"]
        self.child_count = arrays["child_count"]
        self.children = arrays["children"]
        self.fn_decl_node = arrays["fn_decl_node"]
        self.fn_block = arrays["fn_block"]
        self.fn_ret_tag = arrays["fn_ret_tag"]
        self.fn_n_slots = arrays["fn_n_slots"]
        self.fn_param_start = arrays["fn_param_start"]
        self.param_nodes = arrays["param_nodes"]
        self.param_tags = arrays["param_tags"]
        self.covered = np.zeros(ir.n_nodes, dtype=np.uint8)
        self.max_slots = max(ir.max_slots, 1)
        self.slot_vals = np.zeros((MAX_DEPTH + 1) * self.max_slots, dtype=np.int64)
        self.slot_tags = np.zeros((MAX_DEPTH + 1) * self.max_slots, dtype=np.int32)
        cdef int max_arity = 1
        for nodes in ir.fn_param_nodes:
            if len(nodes) > max_arity:
                max_arity = len(nodes)
        self.arg_vals = np.zeros((MAX_DEPTH + 2) * max_arity, dtype=np.int64)
        self.arg_tags = np.zeros((MAX_DEPTH + 2) * max_arity, dtype=np.int32)
        self.budget = budget
        self.steps = 0
        self.err = ERR_NONE
        self.depth = 0
        self.frame = 0
        self.arg_top = 0
        self.rval = 0
        self.rtag = TAG_UNIT

    cdef inline bint step(self, int nid):
        if self.steps >= self.budget:
            return False
        self.steps += 1
        self.covered[nid] = 1
        return True

    cdef void grow_args(self, int need):
        cdef int new_size = max(need, 2 * self.arg_vals.shape[0])
        new_vals = np.zeros(new_size, dtype=np.int64)
        new_tags = np.zeros(new_size, dtype=np.int32)
        new_vals[: self.arg_vals.shape[0]] = np.asarray(self.arg_vals)
        new_tags[: self.arg_tags.shape[0]] = np.asarray(self.arg_tags)
        self.arg_vals = new_vals
        self.arg_tags = new_tags

    cdef inline int fail(self, int code):
        self.err = code
        return FLOW_ERR

    cdef int call_fn(self, int f_idx, int arg_base):
        cdef int i, pid, base, old_frame, flow
        cdef int n_params = self.fn_param_start[f_idx + 1] - self.fn_param_start[f_idx]
        cdef int pstart = self.fn_param_start[f_idx]
        if self.depth >= MAX_DEPTH:
            return self.fail(ERR_STACK)
        self.depth += 1
        if not self.step(self.fn_decl_node[f_idx]):
            self.depth -= 1
            return FLOW_TIMEOUT
        old_frame = self.frame
        base = (self.depth - 1) * self.max_slots
        for i in range(self.fn_n_slots[f_idx]):
            self.slot_vals[base + i] = 0
            self.slot_tags[base + i] = TAG_INT
        for i in range(n_params):
            pid = self.param_nodes[pstart + i]
            if not self.step(pid):
                self.depth -= 1
                return FLOW_TIMEOUT
            if self.arg_tags[arg_base + i] != self.param_tags[pstart + i]:
                self.depth -= 1
                return self.fail(ERR_TYPE)
            self.slot_vals[base + i] = self.arg_vals[arg_base + i]
            self.slot_tags[base + i] = self.arg_tags[arg_base + i]
        self.frame = base
        flow = self.exec_stmt(self.fn_block[f_idx])
        self.frame = old_frame
        self.depth -= 1
        if flow == FLOW_RETURN:
            return FLOW_OK
        if flow == FLOW_OK:
            if self.fn_ret_tag[f_idx] == TAG_UNIT:
                self.rval = 0
                self.rtag = TAG_UNIT
                return FLOW_OK
            return self.fail(ERR_MISSING_RETURN)
        return flow

    cdef int exec_stmt(self, int nid):
        cdef int k = self.kind[nid]
        cdef int cs, cc, i, flow, slot, target
        if not self.step(nid):
            return FLOW_TIMEOUT
        cs = self.child_start[nid]
        cc = self.child_count[nid]

        if k == K_BLOCK:
            for i in range(cc):
                flow = self.exec_stmt(self.children[cs + i])
                if flow != FLOW_OK:
                    return flow
            return FLOW_OK

        if k == K_LET:
            flow = self.eval_expr(self.children[cs])
            if flow != FLOW_OK:
                return flow
            slot = <int> self.arg_a[nid]
            self.slot_vals[self.frame + slot] = self.rval
            self.slot_tags[self.frame + slot] = self.rtag
            return FLOW_OK

        if k == K_ASSIGN or k == K_COMPOUND:
            target = self.children[cs]
            flow = self.eval_expr(self.children[cs + 1])
            if flow != FLOW_OK:
                return flow
            if not self.step(target):
                return FLOW_TIMEOUT
            slot = <int> self.arg_a[target]
            if slot < 0:
                return self.fail(ERR_UNDEF)
            if k == K_ASSIGN:
                self.slot_vals[self.frame + slot] = self.rval
                self.slot_tags[self.frame + slot] = self.rtag
                return FLOW_OK
            if self.slot_tags[self.frame + slot] != TAG_INT or self.rtag != TAG_INT:
                return self.fail(ERR_TYPE)
            if self.arg_a[nid] == 0:  # "+="
                self.slot_vals[self.frame + slot] = wrap_add(
                    self.slot_vals[self.frame + slot], self.rval)
            else:  # "-="
                self.slot_vals[self.frame + slot] = wrap_sub(
                    self.slot_vals[self.frame + slot], self.rval)
            return FLOW_OK

        if k == K_IF:
            flow = self.eval_expr(self.children[cs])
            if flow != FLOW_OK:
                return flow
            if self.rtag != TAG_BOOL:
                return self.fail(ERR_TYPE)
            if self.rval:
                return self.exec_stmt(self.children[cs + 1])
            if cc == 3:
                return self.exec_stmt(self.children[cs + 2])
            return FLOW_OK

        if k == K_WHILE:
            while True:
                flow = self.eval_expr(self.children[cs])
                if flow != FLOW_OK:
                    return flow
                if self.rtag != TAG_BOOL:
                    return self.fail(ERR_TYPE)
                if not self.rval:
                    return FLOW_OK
                flow = self.exec_stmt(self.children[cs + 1])
                if flow != FLOW_OK:
                    return flow

        if k == K_RETURN:
            if cc:
                flow = self.eval_expr(self.children[cs])
                if flow != FLOW_OK:
                    return flow
            else:
                self.rval = 0
                self.rtag = TAG_UNIT
            if self.rtag != self.arg_a[nid]:
                return self.fail(ERR_TYPE)
            return FLOW_RETURN

        if k == K_EXPRSTMT:
            flow = self.eval_expr(self.children[cs])
            if flow != FLOW_OK:
                return flow
            return FLOW_OK

        return self.fail(ERR_TYPE)  # unreachable for lowered programs

    cdef int eval_expr(self, int nid):
        cdef int k = self.kind[nid]
        cdef int cs, cc, i, flow, slot, op, arg_base
        cdef int64_t lval, rv, q, r
        cdef int ltag
        if not self.step(nid):
            return FLOW_TIMEOUT
        cs = self.child_start[nid]

        if k == K_INTLIT:
            self.rval = self.val[nid]
            self.rtag = TAG_INT
            return FLOW_OK

        if k == K_BOOLLIT:
            self.rval = self.arg_a[nid]
            self.rtag = TAG_BOOL
            return FLOW_OK

        if k == K_IDENT:
            slot = <int> self.arg_a[nid]
            if slot < 0:
                return self.fail(ERR_UNDEF)
            self.rval = self.slot_vals[self.frame + slot]
            self.rtag = self.slot_tags[self.frame + slot]
            return FLOW_OK

        if k == K_UNARY:
            flow = self.eval_expr(self.children[cs])
            if flow != FLOW_OK:
                return flow
            if self.arg_a[nid] == 0:  # "-"
                if self.rtag != TAG_INT:
                    return self.fail(ERR_TYPE)
                self.rval = wrap_neg(self.rval)
            else:  # "!"
                if self.rtag != TAG_BOOL:
                    return self.fail(ERR_TYPE)
                self.rval = 0 if self.rval else 1
            return FLOW_OK

        if k == K_BINARY:
            op = <int> self.arg_a[nid]
            flow = self.eval_expr(self.children[cs])
            if flow != FLOW_OK:
                return flow
            if op == 0 or op == 1:  # "||" / "&&"
                if self.rtag != TAG_BOOL:
                    return self.fail(ERR_TYPE)
                if op == 0 and self.rval:
                    return FLOW_OK
                if op == 1 and not self.rval:
                    return FLOW_OK
                flow = self.eval_expr(self.children[cs + 1])
                if flow != FLOW_OK:
                    return flow
                if self.rtag != TAG_BOOL:
                    return self.fail(ERR_TYPE)
                return FLOW_OK
            lval = self.rval
            ltag = self.rtag
            flow = self.eval_expr(self.children[cs + 1])
            if flow != FLOW_OK:
                return flow
            rv = self.rval
            if op == 2 or op == 3:  # "==" / "!="
                if ltag != self.rtag or ltag == TAG_UNIT:
                    return self.fail(ERR_TYPE)
                if op == 2:
                    self.rval = 1 if lval == rv else 0
                else:
                    self.rval = 0 if lval == rv else 1
                self.rtag = TAG_BOOL
                return FLOW_OK
            if ltag != TAG_INT or self.rtag != TAG_INT:
                return self.fail(ERR_TYPE)
            if op == 4:
                self.rval = 1 if lval < rv else 0
                self.rtag = TAG_BOOL
            elif op == 5:
                self.rval = 1 if lval <= rv else 0
                self.rtag = TAG_BOOL
            elif op == 6:
                self.rval = 1 if lval > rv else 0
                self.rtag = TAG_BOOL
            elif op == 7:
                self.rval = 1 if lval >= rv else 0
                self.rtag = TAG_BOOL
            elif op == 8:
                self.rval = wrap_add(lval, rv)
                self.rtag = TAG_INT
            elif op == 9:
                self.rval = wrap_sub(lval, rv)
                self.rtag = TAG_INT
            elif op == 10:
                self.rval = wrap_mul(lval, rv)
                self.rtag = TAG_INT
            else:  # "/" or "%"
                if rv == 0:
                    return self.fail(ERR_DIV)
                if rv == -1:
                    q = wrap_neg(lval)
                    r = 0
                else:
                    q = lval / rv  # cdivision: truncates toward zero
                    r = lval - q * rv
                self.rval = q if op == 11 else r
                self.rtag = TAG_INT
            return FLOW_OK

        if k == K_CALL:
            cc = self.child_count[nid]
            arg_base = self.arg_top
            if arg_base + cc > self.arg_vals.shape[0]:
                self.grow_args(arg_base + cc)
            self.arg_top += cc
            for i in range(cc):
                flow = self.eval_expr(self.children[cs + i])
                if flow != FLOW_OK:
                    self.arg_top = arg_base
                    return flow
                self.arg_vals[arg_base + i] = self.rval
                self.arg_tags[arg_base + i] = self.rtag
            flow = self.call_fn(<int> self.arg_a[nid], arg_base)
            self.arg_top = arg_base
            return flow

        return self.fail(ERR_TYPE)  # unreachable for lowered programs


def execute(ir, int entry_index, arg_vals, arg_tags, budget):
    """Run one entry call; returns (status, err_code, value, tag, steps, covered).

    Same contract as _interp_py.execute.
    """
    cdef _Run run = _Run(ir, budget)
    cdef int i
    for i in range(len(arg_vals)):
        run.arg_vals[i] = arg_vals[i]
        run.arg_tags[i] = arg_tags[i]
    run.arg_top = len(arg_vals)
    cdef int flow = run.call_fn(entry_index, 0)
    if flow == FLOW_TIMEOUT:
        status = RUN_TIMEOUT
    elif flow == FLOW_ERR:
        status = RUN_ERROR
    else:
        status = RUN_OK
    return status, run.err, run.rval, run.rtag, run.steps, bytes(bytearray(run.covered))
