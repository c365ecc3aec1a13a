"""AST matching between revisions and change classification.

match_trees pairs nodes of two parses in three deterministic phases:

1. greedy top-down matching of maximal identical subtrees (structural
   digest over kind, label, and children), processed in decreasing
   height, minimum height 2; equal-digest groups pair occurrences in
   ascending node-id order;
2. matching of containers (nodes with children, plus the root) whose
   mapped-descendant Dice coefficient reaches 0.5; candidate pairs are
   taken greedily by higher dice, then smaller combined span distance,
   then smaller old id, then smaller new id;
3. recursive child matching inside matched pairs, first by (kind, label),
   then by kind alone, in order; newly matched pairs are descended into.

Every mapped pair shares its node kind. classify_change layers the
style / refactoring / semantic verdict and per-line change flags on top.
"""

from dataclasses import dataclass, field
from hashlib import sha1

from .minilang import STATEMENT_KINDS, normalize, parse

MIN_HEIGHT = 2
DICE_THRESHOLD = 0.5

UNCHANGED = "unchanged"
STYLE = "style"
REFACTORING = "refactoring"
SEMANTIC = "semantic"


@dataclass
class NodeMapping:
    pairs: dict  # old id -> new id
    unmapped_old: set
    unmapped_new: set
    inverse: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.inverse:
            self.inverse = {n: o for o, n in self.pairs.items()}


@dataclass
class ChangeClass:
    file_class: str
    line_flags: dict  # old line number -> (touched, semantic)
    mapped_pairs: int
    mapping: NodeMapping = None


def _heights(program):
    heights = [1] * len(program.nodes)
    for node in reversed(program.nodes):  # children have larger ids
        if node.children:
            heights[node.id] = 1 + max(heights[c] for c in node.children)
    return heights


def _digests(program):
    digests = [None] * len(program.nodes)
    for node in reversed(program.nodes):
        payload = "%s|%s|%s" % (
            node.kind, node.label, "+".join(digests[c] for c in node.children)
        )
        digests[node.id] = sha1(payload.encode("utf-8")).hexdigest()
    return digests


def _descendants(program):
    desc = [None] * len(program.nodes)
    for node in reversed(program.nodes):
        ids = set()
        for c in node.children:
            ids.add(c)
            ids.update(desc[c])
        desc[node.id] = ids
    return desc


def _map_isomorphic(old, new, o_id, n_id, mapping):
    stack = [(o_id, n_id)]
    while stack:
        o, n = stack.pop()
        mapping[o] = n
        stack.extend(zip(old.node(o).children, new.node(n).children))


def match_trees(old, new):
    if not old.nodes or not new.nodes:
        return NodeMapping({}, set(n.id for n in old.nodes),
                           set(n.id for n in new.nodes))

    h_old, h_new = _heights(old), _heights(new)
    d_old, d_new = _digests(old), _digests(new)
    mapping = {}

    # Phase 1: top-down identical subtrees, tallest first.
    from collections import defaultdict

    open_old = defaultdict(list)
    open_new = defaultdict(list)
    open_old[h_old[0]].append(0)
    open_new[h_new[0]].append(0)

    def expand(table, program, heights, ids):
        for nid in ids:
            for c in program.node(nid).children:
                table[heights[c]].append(c)

    while open_old and open_new:
        ho = max(open_old)
        hn = max(open_new)
        if max(ho, hn) < MIN_HEIGHT:
            break
        if ho > hn:
            expand(open_old, old, h_old, open_old.pop(ho))
            continue
        if hn > ho:
            expand(open_new, new, h_new, open_new.pop(hn))
            continue
        olds = sorted(open_old.pop(ho))
        news = sorted(open_new.pop(hn))
        by_digest_old = defaultdict(list)
        by_digest_new = defaultdict(list)
        for nid in olds:
            by_digest_old[d_old[nid]].append(nid)
        for nid in news:
            by_digest_new[d_new[nid]].append(nid)
        leftover_old = []
        leftover_new = []
        for digest, group_old in sorted(by_digest_old.items()):
            group_new = by_digest_new.get(digest, [])
            for o, n in zip(group_old, group_new):
                _map_isomorphic(old, new, o, n, mapping)
            leftover_old.extend(group_old[len(group_new):])
            leftover_new.extend(group_new[len(group_old):])
        for digest, group_new in sorted(by_digest_new.items()):
            if digest not in by_digest_old:
                leftover_new.extend(group_new)
        expand(open_old, old, h_old, leftover_old)
        expand(open_new, new, h_new, leftover_new)

    # Phase 2: Dice matching over containers. A candidate needs a mapped
    # descendant in common (dice > 0), so candidates for an old container
    # are the ancestors of its descendants' images; the lone exception is
    # a pair of childless roots, whose dice is defined as 1.
    desc_old, desc_new = _descendants(old), _descendants(new)
    parent_new = new.parent_map()
    mapped_new = set(mapping.values())

    def is_container(program, nid):
        return bool(program.node(nid).children) or nid == 0

    pairs = []
    for o_node in old.nodes:
        o = o_node.id
        if o in mapping or not is_container(old, o):
            continue
        o_desc = desc_old[o]
        images = {mapping[d] for d in o_desc if d in mapping}
        candidates = set()
        visited = set()
        for img in images:
            cur = parent_new[img]
            while cur is not None and cur not in visited:
                visited.add(cur)
                if cur not in mapped_new and new.node(cur).kind == o_node.kind:
                    candidates.add(cur)
                cur = parent_new[cur]
        if not images and o == 0 and not o_node.children:
            if 0 not in mapped_new and new.node(0).kind == o_node.kind \
                    and not new.node(0).children:
                candidates.add(0)
        for n in sorted(candidates):
            n_desc = desc_new[n]
            total = len(o_desc) + len(n_desc)
            if total == 0:
                dice = 1.0
            else:
                common = sum(1 for d in o_desc if mapping.get(d) in n_desc)
                dice = 2.0 * common / total
            if dice >= DICE_THRESHOLD:
                o_span, n_span = o_node.span, new.node(n).span
                distance = abs(o_span[0] - n_span[0]) + abs(o_span[2] - n_span[2])
                pairs.append((-dice, distance, o, n))
    pairs.sort()
    used_old = set()
    used_new = set()
    matched_pairs = [(o, n) for o, n in sorted(mapping.items())]
    for _, _, o, n in pairs:
        if o in used_old or n in used_new:
            continue
        used_old.add(o)
        used_new.add(n)
        mapping[o] = n
        matched_pairs.append((o, n))

    # Phase 3: recovery inside matched containers.
    mapped_new = set(mapping.values())
    queue = list(matched_pairs)
    qi = 0
    while qi < len(queue):
        o, n = queue[qi]
        qi += 1
        o_kids = [c for c in old.node(o).children if c not in mapping]
        n_kids = [c for c in new.node(n).children if c not in mapped_new]
        for pass_labels in (True, False):
            for oc in list(o_kids):
                o_child = old.node(oc)
                for nc in list(n_kids):
                    n_child = new.node(nc)
                    if n_child.kind != o_child.kind:
                        continue
                    if pass_labels and n_child.label != o_child.label:
                        continue
                    mapping[oc] = nc
                    mapped_new.add(nc)
                    o_kids.remove(oc)
                    n_kids.remove(nc)
                    queue.append((oc, nc))
                    break

    unmapped_old = set(n.id for n in old.nodes) - set(mapping)
    unmapped_new = set(n.id for n in new.nodes) - set(mapping.values())
    return NodeMapping(mapping, unmapped_old, unmapped_new)


def subtree_changed(old, new, mapping, root_id):
    """True when the subtree at root_id does not map isomorphically, with
    identical labels, onto its image's subtree."""
    image = mapping.pairs.get(root_id)
    if image is None:
        return True
    from .minilang import subtree_ids

    old_ids = subtree_ids(old, root_id)
    new_ids = set(subtree_ids(new, image))
    if len(old_ids) != len(new_ids):
        return True
    for o in old_ids:
        n = mapping.pairs.get(o)
        if n is None or n not in new_ids:
            return True
        if old.node(o).label != new.node(n).label:
            return True
    return False


def node_edited(old, new, mapping, node_id):
    """The discard test: the node is unmapped, or its label, kind, or
    child count changed under the mapping."""
    image = mapping.pairs.get(node_id)
    if image is None:
        return True
    o, n = old.node(node_id), new.node(image)
    return o.kind != n.kind or o.label != n.label or len(o.children) != len(n.children)


# --- refactoring detection ---


def _canonical_function(program, fn, call_class):
    """Body shape with local identifiers replaced by declaration-order
    indices and call targets replaced by their refinement class."""
    counter = [0]
    scopes = [{}]

    def declare(name):
        tag = "v%d" % counter[0]
        counter[0] += 1
        scopes[-1][name] = tag
        return tag

    def resolve(name):
        for frame in reversed(scopes):
            if name in frame:
                return frame[name]
        return "free:" + name

    def walk(nid):
        node = program.node(nid)
        k = node.kind
        if k == "Ident":
            return "(Ident %s)" % resolve(node.label)
        if k == "Let":
            init = walk(node.children[0])
            return "(Let %s %s)" % (declare(node.label), init)
        if k == "Block":
            scopes.append({})
            body = " ".join(walk(c) for c in node.children)
            scopes.pop()
            return "(Block %s)" % body
        if k == "Call":
            args = " ".join(walk(c) for c in node.children)
            return "(Call %s %s)" % (call_class(node.label), args)
        if k == "Param":
            return "(Param %s)" % declare(node.label)
        body = " ".join(walk(c) for c in node.children)
        label = node.label if k in ("Binary", "Unary", "IntLit", "BoolLit",
                                    "CompoundAssign") else ""
        return "(%s %s %s)" % (k, label, body)

    decl = program.node(fn.node_id)
    parts = [walk(c) for c in decl.children]
    types = ",".join(ty for _, ty in fn.params)
    return "(Fn ret=%s params=%s %s)" % (fn.return_type, types, " ".join(parts))


def _canonical_program(program):
    classes = {fn.name: "?" for fn in program.functions}
    sigs = {}
    for _ in range(3):
        sigs = {
            fn.name: _canonical_function(
                program, fn, lambda name: classes.get(name, "?")
            )
            for fn in program.functions
        }
        classes = {
            name: sha1(("%d|%s" % (len(program.function(name).params), sig))
                       .encode("utf-8")).hexdigest()
            for name, sig in sigs.items()
        }
        # Re-embed the refined callee classes on the next round.
    final = [
        _canonical_function(program, fn, lambda name: classes.get(name, "?"))
        for fn in program.functions
    ]
    return tuple(sorted(final))


def refactoring_equivalent(old, new):
    """Exact detector for consistent identifier renames and reordering of
    top-level function declarations; anything else is not a refactoring."""
    return _canonical_program(old) == _canonical_program(new)


# --- change classification ---


def _lcs_pairs(a, b):
    """Longest common subsequence over two string lists, as index pairs."""
    n, m = len(a), len(b)
    # DP table of LCS lengths; fine at source-file scale.
    table = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        row = table[i]
        nxt = table[i + 1]
        for j in range(m - 1, -1, -1):
            if a[i] == b[j]:
                row[j] = nxt[j + 1] + 1
            else:
                row[j] = nxt[j] if nxt[j] >= row[j + 1] else row[j + 1]
    pairs = []
    i = j = 0
    while i < n and j < m:
        if a[i] == b[j]:
            pairs.append((i, j))
            i += 1
            j += 1
        elif table[i + 1][j] >= table[i][j + 1]:
            i += 1
        else:
            j += 1
    return pairs


def _statement_of_line(program):
    """Innermost statement covering each 1-based line."""
    stmt_of = {}
    for node in program.nodes:  # preorder: inner statements overwrite outer
        if node.kind not in STATEMENT_KINDS:
            continue
        for line in range(node.span[0], node.span[2] + 1):
            stmt_of[line] = node.id
    return stmt_of


def _norm_line(line):
    return " ".join(line.split())


def classify_change(old_file, new_file):
    """File-level change class plus per-line touched/semantic flags, in
    old-file line coordinates."""
    if old_file.text == new_file.text:
        return ChangeClass(UNCHANGED, {}, 0, None)

    old_prog, new_prog = parse(old_file), parse(new_file)
    mapping = match_trees(old_prog, new_prog)

    if normalize(old_file) == normalize(new_file):
        file_class = STYLE
    elif refactoring_equivalent(old_prog, new_prog):
        file_class = REFACTORING
    else:
        file_class = SEMANTIC

    old_lines = old_file.text.split("\n")
    new_lines = new_file.text.split("\n")
    stmt_of = _statement_of_line(old_prog)
    lcs = dict(_lcs_pairs([_norm_line(l) for l in old_lines],
                          [_norm_line(l) for l in new_lines]))

    flags = {}
    for idx in range(len(old_lines)):
        line_no = idx + 1
        stmt = stmt_of.get(line_no)
        if stmt is not None:
            image = mapping.pairs.get(stmt)
            if image is None:
                touched = True
            else:
                o_span = old_prog.node(stmt).span
                n_span = new_prog.node(image).span
                new_line_no = n_span[0] + (line_no - o_span[0])
                if new_line_no > n_span[2] or new_line_no - 1 >= len(new_lines):
                    touched = True
                else:
                    touched = old_lines[idx] != new_lines[new_line_no - 1]
            semantic = (
                touched
                and file_class == SEMANTIC
                and subtree_changed(old_prog, new_prog, mapping, stmt)
            )
        else:
            j = lcs.get(idx)
            touched = j is None or old_lines[idx] != new_lines[j]
            semantic = touched and file_class == SEMANTIC
        if touched:
            flags[line_no] = (touched, semantic)

    return ChangeClass(file_class, flags, len(mapping.pairs), mapping)
