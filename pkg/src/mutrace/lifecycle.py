"""Mutant propagation through a bundle's history.

Each live mutant walks the revisions after injection. At every step the
mutated file's node mapping decides its fate: an unmapped or edited node
discards the mutant; otherwise the operator is re-applied at the mapped
node, and whenever the file or the test suite changed the new revision's
suite runs against the re-applied mutant. A test that passes on that
revision's original but not on the mutant is a kill. Final statuses are
assigned against the day threshold: kills within n_thr_days are latent,
unkilled mutants observed at least n_thr_days are non-latent, and
anything whose window is too short (or whose kill came too late) is
ambiguous. Discards stick regardless of the threshold.
"""

from dataclasses import dataclass, field
from fractions import Fraction

from .astmatch import REFACTORING, SEMANTIC, UNCHANGED, classify_change, node_edited
from .errors import NotLatent
from .histstore import elapsed_days
from .minilang import SourceFile, parse
from .mutgen import apply_operator, generate_mutants
from .runner import (
    DEFAULT_STEP_BUDGET,
    KILLED,
    LIVE,
    PASS,
    kill_matrix,
    run_test,
)

LATENT = "latent"
NON_LATENT = "non_latent"
DISCARDED = "discarded"
AMBIGUOUS = "ambiguous"

DEFAULT_N_THR_DAYS = 365

REVEAL_CATEGORIES = ("SC_C", "SC_NC", "RC_C", "RC_NC", "NC_NC")


@dataclass
class TraceEntry:
    revision: int
    revision_id: str
    node_id: int  # None once the mutant is absent
    file_class: str  # change class of the mutated file vs the previous rev
    suite_rerun: bool
    new_failing_tests: list
    line: int = 0  # mutated line in previous-revision coordinates
    touched: bool = False
    sem_event: bool = False
    ref_event: bool = False

    def to_json(self):
        return {
            "revision": self.revision,
            "revision_id": self.revision_id,
            "node_id": self.node_id,
            "file_class": self.file_class,
            "suite_rerun": self.suite_rerun,
            "new_failing_tests": list(self.new_failing_tests),
            "line": self.line,
            "touched": self.touched,
            "sem_event": self.sem_event,
            "ref_event": self.ref_event,
        }


@dataclass
class PropagationTrace:
    mutant_id: str
    operator: str
    file: str
    initial_status: str
    entries: list
    final: str = None
    killed_at: int = None
    discarded_at: int = None
    reveal_category: str = None
    lifespan_days: Fraction = Fraction(0)
    lifespan_revisions: int = 0
    reapplication_failed: bool = False

    def to_json(self):
        return {
            "mutant_id": self.mutant_id,
            "operator": self.operator,
            "file": self.file,
            "initial_status": self.initial_status,
            "entries": [e.to_json() for e in self.entries],
            "final": self.final,
            "killed_at": self.killed_at,
            "discarded_at": self.discarded_at,
            "reveal_category": self.reveal_category,
            "lifespan_days": [self.lifespan_days.numerator,
                              self.lifespan_days.denominator],
            "lifespan_revisions": self.lifespan_revisions,
            "reapplication_failed": self.reapplication_failed,
        }


class _BundleCache:
    """Per-revision-pair change classes and per-revision suite outcomes,
    computed once and shared by every mutant's walk."""

    def __init__(self, bundle, step_budget):
        self.bundle = bundle
        self.step_budget = step_budget
        self.changes = {}
        self.original_outcomes = {}
        self.suite_changed = {}

    def change(self, rev_index, path):
        key = (rev_index, path)
        if key not in self.changes:
            old = self.bundle.revisions[rev_index - 1].files.get(path)
            new = self.bundle.revisions[rev_index].files.get(path)
            if old is None or new is None:
                self.changes[key] = None
            else:
                self.changes[key] = classify_change(old, new)
        return self.changes[key]

    def suite_delta(self, rev_index):
        if rev_index not in self.suite_changed:
            prev = [t.to_json() for t in self.bundle.revisions[rev_index - 1].tests]
            cur = [t.to_json() for t in self.bundle.revisions[rev_index].tests]
            self.suite_changed[rev_index] = prev != cur
        return self.suite_changed[rev_index]

    def original_outcome(self, rev_index, test_pos):
        key = (rev_index, test_pos)
        if key not in self.original_outcomes:
            revision = self.bundle.revisions[rev_index]
            test = revision.tests[test_pos]
            path = revision.entry_file(test.entry)
            outcome = run_test(revision.program(path), test, self.step_budget)
            self.original_outcomes[key] = outcome
        return self.original_outcomes[key]


def generate_all(bundle):
    """Every mutant of every file at the injection revision."""
    injection = bundle.injection
    mutants = []
    for path in sorted(injection.files):
        program = injection.program(path)
        mutants.extend(generate_mutants(program, injection.files[path],
                                        bundle.injection_index))
    return mutants


def injection_kill_matrix(bundle, mutants, step_budget=DEFAULT_STEP_BUDGET):
    """Initial statuses at the injection revision, file by file."""
    injection = bundle.injection
    statuses = {}
    by_file = {}
    for m in mutants:
        by_file.setdefault(m.file, []).append(m)
    for path in sorted(by_file):
        program = injection.program(path)
        suite = [t for t in injection.tests if injection.entry_file(t.entry) == path]
        statuses.update(kill_matrix(program, by_file[path], suite, step_budget))
    return statuses


def _suite_positions_for_file(revision, path):
    return [i for i, t in enumerate(revision.tests)
            if revision.entry_file(t.entry) == path]


def propagate(bundle, mutants, live_only=True, n_thr_days=DEFAULT_N_THR_DAYS,
              step_budget=DEFAULT_STEP_BUDGET, initial_statuses=None, jobs=1):
    """PropagationTrace for each (live) mutant, deterministically.

    ``jobs`` caps worker threads; results are identical for any value.
    """
    if initial_statuses is None:
        initial_statuses = injection_kill_matrix(bundle, mutants, step_budget)
    cache = _BundleCache(bundle, step_budget)

    selected = []
    for m in mutants:
        status = initial_statuses[m.mutant_id]
        if live_only and status.status != LIVE:
            continue
        selected.append((m, status.status))

    if jobs > 1 and len(selected) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            # Shared caches are filled before the parallel walk so worker
            # order cannot influence anything.
            _prewarm(bundle, cache, selected)
            traces = list(pool.map(
                lambda pair: _walk(bundle, cache, pair[0], pair[1],
                                   n_thr_days, step_budget),
                selected,
            ))
    else:
        traces = [_walk(bundle, cache, m, s, n_thr_days, step_budget)
                  for m, s in selected]
    return traces


def _prewarm(bundle, cache, selected):
    paths = {m.file for m, _ in selected}
    for rev_index in range(bundle.injection_index + 1, len(bundle.revisions)):
        cache.suite_delta(rev_index)
        for path in paths:
            cache.change(rev_index, path)
        revision = bundle.revisions[rev_index]
        for pos in range(len(revision.tests)):
            cache.original_outcome(rev_index, pos)


def _walk(bundle, cache, mutant, initial_status, n_thr_days, step_budget):
    inj = bundle.injection_index
    trace = PropagationTrace(
        mutant_id=mutant.mutant_id,
        operator=mutant.operator,
        file=mutant.file,
        initial_status=initial_status,
        entries=[TraceEntry(inj, bundle.revisions[inj].id, mutant.node_id,
                            None, False, [],
                            line=mutant.line)],
    )
    node_id = mutant.node_id
    path = mutant.file
    killed_at = None
    discarded_at = None

    for rev_index in range(inj + 1, len(bundle.revisions)):
        prev_rev = bundle.revisions[rev_index - 1]
        revision = bundle.revisions[rev_index]
        old_prog = prev_rev.program(path)
        line = old_prog.node(node_id).span[0]

        if path not in revision.files:
            trace.entries.append(TraceEntry(
                rev_index, revision.id, None, SEMANTIC, False, [], line=line,
                touched=True, sem_event=True,
            ))
            discarded_at = rev_index
            break

        change = cache.change(rev_index, path)
        if change is None or change.file_class == UNCHANGED:
            file_class = UNCHANGED
            new_node = node_id
            touched = sem_event = ref_event = False
        else:
            new_prog = revision.program(path)
            mapping = change.mapping
            flag = change.line_flags.get(line, (False, False))
            touched = flag[0]
            sem_event = flag[1]
            ref_event = change.file_class == REFACTORING and touched
            if node_edited(old_prog, new_prog, mapping, node_id):
                trace.entries.append(TraceEntry(
                    rev_index, revision.id, None, change.file_class, False, [],
                    line=line, touched=touched, sem_event=sem_event,
                    ref_event=ref_event,
                ))
                discarded_at = rev_index
                break
            file_class = change.file_class
            new_node = mapping.pairs[node_id]

        rerun = file_class != UNCHANGED or cache.suite_delta(rev_index)
        new_failing = []
        if rerun:
            new_prog = revision.program(path)
            mutated_text = apply_operator(new_prog, revision.files[path].text,
                                          new_node, mutant.operator)
            if mutated_text is None:
                trace.entries.append(TraceEntry(
                    rev_index, revision.id, None, file_class, True, [],
                    line=line, touched=touched, sem_event=sem_event,
                    ref_event=ref_event,
                ))
                trace.reapplication_failed = True
                discarded_at = rev_index
                break
            mutant_prog = parse(SourceFile(path, mutated_text))
            for pos in _suite_positions_for_file(revision, path):
                original = cache.original_outcome(rev_index, pos)
                if original.status != PASS:
                    continue
                outcome = run_test(mutant_prog, revision.tests[pos], step_budget)
                if outcome.signature != original.signature:
                    new_failing.append(revision.tests[pos].name)

        trace.entries.append(TraceEntry(
            rev_index, revision.id, new_node, file_class, rerun, new_failing,
            line=line, touched=touched, sem_event=sem_event, ref_event=ref_event,
        ))
        if new_failing:
            killed_at = rev_index
            break
        node_id = new_node

    last = trace.entries[-1].revision
    if killed_at is not None:
        days = elapsed_days(bundle, inj, killed_at)
        trace.killed_at = killed_at
        trace.final = LATENT if days <= n_thr_days else AMBIGUOUS
        trace.lifespan_days = days
        trace.lifespan_revisions = killed_at - inj
        if trace.final == LATENT:
            trace.reveal_category = categorize_reveal(trace)
    elif discarded_at is not None:
        trace.discarded_at = discarded_at
        trace.final = DISCARDED
        trace.lifespan_days = elapsed_days(bundle, inj, discarded_at)
        trace.lifespan_revisions = discarded_at - inj
    else:
        days = elapsed_days(bundle, inj, last)
        trace.final = NON_LATENT if days >= n_thr_days else AMBIGUOUS
        trace.lifespan_days = days
        trace.lifespan_revisions = last - inj
    return trace


def categorize_reveal(trace):
    """Reveal category of a latent trace.

    The prefix reflects the mutated line's cumulative history up to the
    kill: SC if it was ever semantically changed, else RC if it only went
    through refactorings, else NC. The subscript is C when the kill
    revision itself changed the line (semantically or by refactoring,
    style touches do not count) while the mutated node survived.
    """
    if trace.final != LATENT or trace.killed_at is None:
        raise NotLatent(trace.mutant_id)
    sem_ever = False
    ref_ever = False
    kill_entry = None
    for entry in trace.entries[1:]:
        if entry.revision > trace.killed_at:
            break
        sem_ever = sem_ever or entry.sem_event
        ref_ever = ref_ever or entry.ref_event
        if entry.revision == trace.killed_at:
            kill_entry = entry
    prefix = "SC" if sem_ever else ("RC" if ref_ever else "NC")
    on_line = kill_entry is not None and (kill_entry.sem_event or kill_entry.ref_event)
    suffix = "C" if on_line else "NC"
    return "%s_%s" % (prefix, suffix)


def lifespan_stats(traces):
    """Per-status quartiles (linear interpolation) and means of lifespan
    days and revision counts; ambiguous traces are summarized separately."""
    import numpy as np

    groups = {LATENT: [], NON_LATENT: [], DISCARDED: [], AMBIGUOUS: []}
    for t in traces:
        groups[t.final].append(t)

    def summary(values):
        arr = np.asarray([float(v) for v in values], dtype=float)
        q25, q50, q75 = np.percentile(arr, [25, 50, 75])
        return {"q25": float(q25), "q50": float(q50), "q75": float(q75),
                "mean": float(arr.mean())}

    out = {}
    for status, members in groups.items():
        if not members:
            out[status] = {"count": 0}
            continue
        out[status] = {
            "count": len(members),
            "days": summary([t.lifespan_days for t in members]),
            "revisions": summary([t.lifespan_revisions for t in members]),
        }
    return out
