"""Unified-diff helpers for compact mutant storage."""

import difflib


def make_diff(old_text, new_text, path):
    lines = difflib.unified_diff(
        old_text.splitlines(keepends=True),
        new_text.splitlines(keepends=True),
        fromfile="a/" + path,
        tofile="b/" + path,
        n=3,
    )
    return "".join(lines)


def apply_diff(old_text, diff_text):
    """Strictly apply a unified diff produced by make_diff."""
    if not diff_text:
        return old_text
    old = old_text.splitlines(keepends=True)
    out = []
    pos = 0  # index into old
    lines = diff_text.splitlines(keepends=True)
    i = 0
    while i < len(lines):
        line = lines[i]
        if line.startswith(("---", "+++")):
            i += 1
            continue
        if line.startswith("@@"):
            header = line.split()
            old_start = int(header[1].split(",")[0].lstrip("-"))
            # Hunk positions are 1-based; 0 means an insertion at the top.
            hunk_pos = max(old_start - 1, 0)
            out.extend(old[pos:hunk_pos])
            pos = hunk_pos
            i += 1
            while i < len(lines) and lines[i][:1] in (" ", "-", "+", "\\"):
                tag = lines[i][:1]
                body = lines[i][1:]
                if tag == " ":
                    if pos >= len(old) or old[pos] != body:
                        raise ValueError("diff context mismatch at old line %d" % (pos + 1))
                    out.append(body)
                    pos += 1
                elif tag == "-":
                    if pos >= len(old) or old[pos] != body:
                        raise ValueError("diff deletion mismatch at old line %d" % (pos + 1))
                    pos += 1
                elif tag == "+":
                    out.append(body)
                # "\\ No newline at end of file" markers carry no content.
                i += 1
            continue
        raise ValueError("unrecognized diff line: %r" % line)
    out.extend(old[pos:])
    return "".join(out)
