"""Export a linear git history into the snapshot bundle layout.

The repository is expected to keep MiniLang sources under ``src/*.ml``
and the suite in ``tests.json`` at the top level; each first-parent
commit becomes one revision directory.
"""

import json
import subprocess
from pathlib import Path


def _git(repo, *args):
    out = subprocess.run(["git", "-C", str(repo)] + list(args),
                         capture_output=True, text=True, check=True)
    return out.stdout


def export_repository(repo, out_dir, name=None, injection_index=0, rev="HEAD"):
    repo = Path(repo)
    out_dir = Path(out_dir)
    name = name or repo.resolve().name

    log = _git(repo, "log", "--first-parent", "--reverse",
               "--format=%H|%at|%an", rev)
    commits = [line.split("|", 2) for line in log.splitlines() if line]
    if not commits:
        raise ValueError("no commits found in %s" % repo)

    entries = []
    for idx, (sha, timestamp, author) in enumerate(commits):
        rev_dir = "r%02d" % idx
        entries.append({"id": sha[:12], "timestamp": int(timestamp),
                        "author": author, "dir": rev_dir})
        src_dir = out_dir / rev_dir / "src"
        src_dir.mkdir(parents=True, exist_ok=True)
        tracked = _git(repo, "ls-tree", "-r", "--name-only", sha).splitlines()
        for path in tracked:
            if path.startswith("src/") and path.endswith(".ml") \
                    and "/" not in path[len("src/"):]:
                content = _git(repo, "show", "%s:%s" % (sha, path))
                (out_dir / rev_dir / path).write_text(content, encoding="utf-8")
        if "tests.json" in tracked:
            content = _git(repo, "show", "%s:tests.json" % sha)
        else:
            content = "[]\n"
        (out_dir / rev_dir / "tests.json").write_text(content, encoding="utf-8")

    manifest = {"name": name, "injection_index": injection_index,
                "revisions": entries}
    (out_dir / "bundle.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )
    return out_dir
