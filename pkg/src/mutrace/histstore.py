"""History bundles: validated snapshots of a project's evolution.

A bundle directory holds ``bundle.json`` plus one directory per revision
with ``src/*.ml`` sources and a ``tests.json`` suite:

    bundle.json   {"name", "injection_index",
                   "revisions": [{"id", "timestamp", "author", "dir"}, ...]}
    <rev>/src/*.ml
    <rev>/tests.json   [{"name", "entry", "args", "expect"}, ...]

Timestamps are seconds since the epoch (UTC) and must be non-decreasing;
every file must parse; the suite must be green at the injection revision.
All of this is checked eagerly by load_bundle.
"""

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .errors import (
    BrokenSuite,
    IndexOrder,
    InvalidManifest,
    MissingManifest,
    NonMonotonicTimestamps,
    ParseFailure,
    ParseError,
)
from .minilang import SourceFile, parse
from .runner import PASS, TestCase, run_test

SECONDS_PER_DAY = 86400


@dataclass
class Revision:
    index: int
    id: str
    timestamp: int
    author: str
    files: dict  # path -> SourceFile
    tests: list  # TestCase
    programs: dict = field(default_factory=dict, repr=False)

    def program(self, path):
        if path not in self.programs:
            self.programs[path] = parse(self.files[path])
        return self.programs[path]

    def entry_file(self, entry_name):
        """The unique file declaring a test's entry function, or None."""
        owners = [p for p in sorted(self.files)
                  if self.program(p).function(entry_name) is not None]
        return owners[0] if len(owners) == 1 else None


@dataclass
class HistoryBundle:
    name: str
    revisions: list
    injection_index: int

    @property
    def injection(self):
        return self.revisions[self.injection_index]


def elapsed_days(bundle, i, j):
    """Exact day count between two revisions as a Fraction."""
    if i > j:
        raise IndexOrder("i=%d > j=%d" % (i, j))
    delta = bundle.revisions[j].timestamp - bundle.revisions[i].timestamp
    return Fraction(delta, SECONDS_PER_DAY)


def _check_suite_entries(revision):
    for test in revision.tests:
        path = revision.entry_file(test.entry)
        if path is None:
            raise BrokenSuite(
                revision.index,
                "test %r names entry %r which is not declared in exactly "
                "one file" % (test.name, test.entry),
            )
        fn = revision.program(path).function(test.entry)
        if len(fn.params) != len(test.args):
            raise BrokenSuite(
                revision.index,
                "test %r calls %r with %d argument(s), expected %d"
                % (test.name, test.entry, len(test.args), len(fn.params)),
            )


def load_bundle(directory, step_budget=1_000_000):
    directory = Path(directory)
    manifest_path = directory / "bundle.json"
    if not manifest_path.is_file():
        raise MissingManifest(str(manifest_path))
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except ValueError as exc:
        raise InvalidManifest("bundle.json: %s" % exc)

    for key in ("name", "injection_index", "revisions"):
        if key not in manifest:
            raise InvalidManifest("bundle.json missing %r" % key)
    rev_entries = manifest["revisions"]
    if not rev_entries:
        raise InvalidManifest("bundle.json has no revisions")
    injection_index = manifest["injection_index"]
    if not 0 <= injection_index < len(rev_entries):
        raise InvalidManifest("injection_index %r out of range" % injection_index)

    revisions = []
    last_ts = None
    for idx, entry in enumerate(rev_entries):
        for key in ("id", "timestamp", "author", "dir"):
            if key not in entry:
                raise InvalidManifest("revision %d missing %r" % (idx, key))
        ts = entry["timestamp"]
        if last_ts is not None and ts < last_ts:
            raise NonMonotonicTimestamps(
                "revision %d timestamp %d < %d" % (idx, ts, last_ts)
            )
        last_ts = ts

        rev_dir = directory / entry["dir"]
        src_dir = rev_dir / "src"
        files = {}
        for path in sorted(src_dir.glob("*.ml")) if src_dir.is_dir() else []:
            rel = "src/" + path.name
            files[rel] = SourceFile(rel, path.read_text(encoding="utf-8"))
        tests_path = rev_dir / "tests.json"
        tests = []
        if tests_path.is_file():
            tests = [TestCase.from_json(t)
                     for t in json.loads(tests_path.read_text(encoding="utf-8"))]
        revision = Revision(idx, entry["id"], ts, entry["author"], files, tests)
        for rel in sorted(files):
            try:
                revision.program(rel)
            except ParseError as exc:
                raise ParseFailure("%s/%s" % (entry["dir"], rel), exc.line,
                                   exc.message)
        _check_suite_entries(revision)
        revisions.append(revision)

    bundle = HistoryBundle(manifest["name"], revisions, injection_index)

    injection = bundle.injection
    for test in injection.tests:
        program = injection.program(injection.entry_file(test.entry))
        outcome = run_test(program, test, step_budget)
        if outcome.status != PASS:
            raise BrokenSuite(
                injection_index,
                "test %r has status %s at the injection revision"
                % (test.name, outcome.status),
            )
    return bundle


def save_bundle(directory, name, injection_index, revisions):
    """Write a bundle directory; revisions are (id, timestamp, author,
    files dict, tests list) tuples. Returns the directory path."""
    directory = Path(directory)
    entries = []
    for idx, (rev_id, ts, author, files, tests) in enumerate(revisions):
        rev_dir = "r%02d" % idx
        entries.append({"id": rev_id, "timestamp": ts, "author": author,
                        "dir": rev_dir})
        src = directory / rev_dir / "src"
        src.mkdir(parents=True, exist_ok=True)
        for rel, text in sorted(files.items()):
            assert rel.startswith("src/"), rel
            (directory / rev_dir / rel).write_text(text, encoding="utf-8")
        tests_json = [t.to_json() for t in tests]
        (directory / rev_dir / "tests.json").write_text(
            json.dumps(tests_json, indent=2) + "\n", encoding="utf-8"
        )
    manifest = {"name": name, "injection_index": injection_index,
                "revisions": entries}
    (directory / "bundle.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )
    return directory
