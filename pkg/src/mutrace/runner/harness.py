"""Test execution harness: single runs, suite runs, and the kill matrix."""

from dataclasses import dataclass, field

from ..errors import BrokenSuite
from ..minilang import SourceFile, parse
from . import backend as default_backend
from .ir import ERROR_TAG_BY_CODE, RUN_ERROR, RUN_OK, RUN_TIMEOUT, TAG_BOOL, TAG_INT, lower

DEFAULT_STEP_BUDGET = 1_000_000

# ExecOutcome statuses.
PASS = "pass"
FAIL = "fail"
TIMEOUT = "timeout"
RUN_ERROR_STATUS = "run_error"
NO_COVERAGE = "no_coverage"

# Initial mutant statuses.
KILLED = "killed"
LIVE = "live"
OTHER = "other"

_I64_MASK = 0xFFFFFFFFFFFFFFFF
_I64_SIGN = 0x8000000000000000


@dataclass(frozen=True)
class TestCase:
    name: str
    entry: str
    args: tuple  # ints and bools
    expect: tuple  # ("value", int-or-bool) or ("error", tag)

    @classmethod
    def from_json(cls, obj):
        expect = obj["expect"]
        if "value" in expect:
            want = ("value", expect["value"])
        else:
            want = ("error", expect["error"])
        return cls(obj["name"], obj["entry"], tuple(obj["args"]), want)

    def to_json(self):
        if self.expect[0] == "value":
            expect = {"value": self.expect[1]}
        else:
            expect = {"error": self.expect[1]}
        return {
            "name": self.name,
            "entry": self.entry,
            "args": list(self.args),
            "expect": expect,
        }


@dataclass(frozen=True)
class ExecOutcome:
    status: str
    steps: int
    covered_nodes: frozenset
    # What actually happened, independent of the expectation: ("value",
    # tag, v), ("error", tag), or ("timeout",). Two runs behaved the same
    # iff their signatures are equal.
    signature: tuple


@dataclass
class InitialStatus:
    status: str  # killed / live / other
    reason: str = None  # for OTHER: no_coverage or timeout
    killed_by: list = field(default_factory=list)

    def to_json(self):
        return {"status": self.status, "reason": self.reason,
                "killed_by": list(self.killed_by)}


def _wrap64(x):
    return ((x + _I64_SIGN) & _I64_MASK) - _I64_SIGN


def run_test(program, test, step_budget=DEFAULT_STEP_BUDGET, backend=None):
    """Execute one test; deterministic for fixed inputs and budget."""
    if backend is None:
        backend = default_backend()
    fn = program.function(test.entry)
    if fn is None or len(fn.params) != len(test.args):
        return ExecOutcome(RUN_ERROR_STATUS, 0, frozenset(),
                           ("error", "arity_mismatch"))
    arg_vals = []
    arg_tags = []
    for a in test.args:
        if isinstance(a, bool):
            arg_vals.append(1 if a else 0)
            arg_tags.append(TAG_BOOL)
        else:
            arg_vals.append(_wrap64(int(a)))
            arg_tags.append(TAG_INT)

    ir = lower(program)
    entry_index = ir.fn_by_name[test.entry]
    status, err, value, tag, steps, covered = backend.execute(
        ir, entry_index, arg_vals, arg_tags, step_budget
    )
    covered_set = frozenset(i for i, c in enumerate(covered) if c)

    if status == RUN_TIMEOUT:
        return ExecOutcome(TIMEOUT, steps, covered_set, ("timeout",))
    if status == RUN_ERROR:
        tag_name = ERROR_TAG_BY_CODE[err]
        signature = ("error", tag_name)
        outcome_status = PASS if test.expect == signature else RUN_ERROR_STATUS
        return ExecOutcome(outcome_status, steps, covered_set, signature)

    signature = ("value", tag, int(value))
    outcome_status = FAIL
    if test.expect[0] == "value":
        want = test.expect[1]
        if isinstance(want, bool):
            ok = tag == TAG_BOOL and value == (1 if want else 0)
        else:
            ok = tag == TAG_INT and value == want
        if ok:
            outcome_status = PASS
    return ExecOutcome(outcome_status, steps, covered_set, signature)


def run_suite(program, suite, step_budget=DEFAULT_STEP_BUDGET, backend=None):
    return [run_test(program, t, step_budget, backend) for t in suite]


def kill_matrix(original, mutants, suite, step_budget=DEFAULT_STEP_BUDGET,
                backend=None):
    """Initial status for every mutant against the suite.

    The suite must be green on the original program (BrokenSuite
    otherwise). A mutant is killed when a covering test behaves
    differently on it; with no covering test it is other/no_coverage, and
    when every covering test times out it is other/timeout.
    """
    orig = run_suite(original, suite, step_budget, backend)
    for test, outcome in zip(suite, orig):
        if outcome.status != PASS:
            raise BrokenSuite(-1, "test %r has status %s on the original"
                              % (test.name, outcome.status))

    statuses = {}
    mutant_programs = {}
    for mutant in mutants:
        covering = [i for i in range(len(suite))
                    if mutant.node_id in orig[i].covered_nodes]
        if not covering:
            statuses[mutant.mutant_id] = InitialStatus(OTHER, "no_coverage")
            continue
        program = mutant_programs.get(mutant.mutant_id)
        if program is None:
            program = parse(SourceFile(mutant.file, mutant.mutated_text))
            mutant_programs[mutant.mutant_id] = program
        outcomes = {
            i: run_test(program, suite[i], step_budget, backend) for i in covering
        }
        if all(outcomes[i].status == TIMEOUT for i in covering):
            statuses[mutant.mutant_id] = InitialStatus(OTHER, "timeout")
            continue
        killed_by = [suite[i].name for i in covering
                     if outcomes[i].signature != orig[i].signature]
        if killed_by:
            statuses[mutant.mutant_id] = InitialStatus(KILLED, killed_by=killed_by)
        else:
            statuses[mutant.mutant_id] = InitialStatus(LIVE)
    return statuses
