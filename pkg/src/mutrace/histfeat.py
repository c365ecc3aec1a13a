"""Historical change features for mutants at their injection revision.

Age, churn, and author counts are measured twice: over the mutated line
and over the enclosing function. Lines are traced backward through the
node mappings of their statement node (so reformatting does not break the
chain), and any text change to the traced line or function span counts as
a change event, renames included, mirroring what a blame tool would
report. Ages are exact rational day counts.
"""

from dataclasses import dataclass
from fractions import Fraction

from .astmatch import match_trees
from .errors import UntraceableLine
from .histstore import SECONDS_PER_DAY
from .minilang import STATEMENT_KINDS, span_text
from .mutgen import ORDINAL

FEATURE_NAMES = (
    "mutOp",
    "l_churn", "l_min_age", "l_max_age", "l_n_authors",
    "e_churn", "e_min_age", "e_max_age", "e_n_authors",
)


@dataclass
class LineEvent:
    revision: int
    author: str
    changed: bool  # False for the introduction record


@dataclass
class FeatureVector:
    mutant_id: str
    mut_op: int
    l_churn: int
    l_min_age: Fraction
    l_max_age: Fraction
    l_n_authors: int
    e_churn: int
    e_min_age: Fraction
    e_max_age: Fraction
    e_n_authors: int
    flagged: bool = False  # history truncated (untraceable line)

    def values(self):
        """The nine model inputs, in report-header order."""
        return (
            float(self.mut_op),
            float(self.l_churn), float(self.l_min_age), float(self.l_max_age),
            float(self.l_n_authors),
            float(self.e_churn), float(self.e_min_age), float(self.e_max_age),
            float(self.e_n_authors),
        )


class FeatureExtractor:
    """Shared mapping/parse caches over one bundle."""

    def __init__(self, bundle):
        self.bundle = bundle
        self._mappings = {}

    def _mapping(self, rev_index, path):
        """Node mapping for (rev_index-1 -> rev_index); None means the file
        is byte-identical (identity mapping)."""
        key = (rev_index, path)
        if key not in self._mappings:
            old = self.bundle.revisions[rev_index - 1].files.get(path)
            new = self.bundle.revisions[rev_index].files.get(path)
            if old is None or new is None:
                self._mappings[key] = False  # file absent on one side
            elif old.text == new.text:
                self._mappings[key] = None
            else:
                self._mappings[key] = match_trees(
                    self.bundle.revisions[rev_index - 1].program(path),
                    self.bundle.revisions[rev_index].program(path),
                )
        return self._mappings[key]

    def _trace_node(self, path, node_id, at):
        """(revision, node_id) chain walking backward from ``at`` to the
        node's first appearance."""
        chain = [(at, node_id)]
        cur = node_id
        for rev_index in range(at, 0, -1):
            mapping = self._mapping(rev_index, path)
            if mapping is False:
                break
            if mapping is None:
                prev = cur
            else:
                prev = mapping.inverse.get(cur)
                if prev is None:
                    break
            chain.append((rev_index - 1, prev))
            cur = prev
        chain.reverse()
        return chain

    def _statement_for_line(self, program, line):
        best = None
        for node in program.nodes:
            if node.kind not in STATEMENT_KINDS:
                continue
            if node.span[0] <= line <= node.span[2]:
                best = node.id  # preorder: inner statements come later
        return best

    def trace_line_history(self, path, line, at):
        """Introduction plus change events for a line, oldest first.

        Raises UntraceableLine when no statement covers the line at the
        injection revision.
        """
        program = self.bundle.revisions[at].program(path)
        stmt = self._statement_for_line(program, line)
        if stmt is None:
            raise UntraceableLine("%s:%d" % (path, line))
        offset = line - program.node(stmt).span[0]
        chain = self._trace_node(path, stmt, at)

        def line_text(rev_index, node_id):
            rev = self.bundle.revisions[rev_index]
            prog = rev.program(path)
            span = prog.node(node_id).span
            line_no = min(span[0] + offset, span[2])
            return rev.files[path].text.split("\n")[line_no - 1]

        return self._events(chain, line_text)

    def trace_method_history(self, path, fn_node, at):
        """Introduction plus change events for a function's full span."""
        chain = self._trace_node(path, fn_node, at)

        def method_text(rev_index, node_id):
            rev = self.bundle.revisions[rev_index]
            prog = rev.program(path)
            return span_text(rev.files[path].text, prog.node(node_id).span)

        return self._events(chain, method_text)

    def _events(self, chain, text_of):
        intro_rev = chain[0][0]
        events = [LineEvent(intro_rev, self.bundle.revisions[intro_rev].author,
                            False)]
        for (prev_rev, prev_node), (rev, node) in zip(chain, chain[1:]):
            if text_of(prev_rev, prev_node) != text_of(rev, node):
                events.append(LineEvent(rev, self.bundle.revisions[rev].author,
                                        True))
        return events

    def _ages(self, events, at):
        ts_at = self.bundle.revisions[at].timestamp
        intro_ts = self.bundle.revisions[events[0].revision].timestamp
        last_ts = self.bundle.revisions[events[-1].revision].timestamp
        max_age = Fraction(ts_at - intro_ts, SECONDS_PER_DAY)
        min_age = Fraction(ts_at - last_ts, SECONDS_PER_DAY)
        churn = sum(1 for e in events if e.changed)
        authors = len({e.author for e in events})
        return churn, min_age, max_age, authors

    def features_for(self, mutant):
        at = self.bundle.injection_index
        program = self.bundle.revisions[at].program(mutant.file)
        flagged = False
        try:
            line_events = self.trace_line_history(mutant.file, mutant.line, at)
        except UntraceableLine:
            flagged = True
            line_events = [LineEvent(at, self.bundle.revisions[at].author, False)]
        l_churn, l_min, l_max, l_auth = self._ages(line_events, at)

        fn_node = program.enclosing(mutant.node_id, "FnDecl")
        if fn_node is None:
            flagged = True
            method_events = [LineEvent(at, self.bundle.revisions[at].author, False)]
        else:
            method_events = self.trace_method_history(mutant.file, fn_node, at)
        e_churn, e_min, e_max, e_auth = self._ages(method_events, at)

        return FeatureVector(
            mutant_id=mutant.mutant_id,
            mut_op=ORDINAL[mutant.operator],
            l_churn=l_churn, l_min_age=l_min, l_max_age=l_max,
            l_n_authors=l_auth,
            e_churn=e_churn, e_min_age=e_min, e_max_age=e_max,
            e_n_authors=e_auth,
            flagged=flagged,
        )


def features_for(mutant, bundle):
    return FeatureExtractor(bundle).features_for(mutant)


def trace_line_history(bundle, path, line, at):
    return FeatureExtractor(bundle).trace_line_history(path, line, at)


LABELS = {"latent": "L", "non_latent": "NL", "discarded": "D"}


def features_csv(vectors_with_labels):
    """CSV text: mutant_id, label, then the nine feature columns."""
    header = ("mutant_id", "label") + FEATURE_NAMES
    lines = [",".join(header)]
    for vec, label in vectors_with_labels:
        values = vec.values()
        cells = [vec.mutant_id, label]
        cells.append("%d" % int(values[0]))
        for v in values[1:]:
            cells.append(repr(float(v)))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def parse_features_csv(text):
    """Rows of (mutant_id, label, value tuple) from features_csv output."""
    lines = [l for l in text.split("\n") if l]
    header = tuple(lines[0].split(","))
    assert header == ("mutant_id", "label") + FEATURE_NAMES, header
    rows = []
    for line in lines[1:]:
        cells = line.split(",")
        rows.append((cells[0], cells[1], tuple(float(c) for c in cells[2:])))
    return rows
