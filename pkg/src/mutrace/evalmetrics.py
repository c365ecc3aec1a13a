"""Classification and ranking metrics, plus the report tables.

Per-class accuracy is one-vs-rest ("is it this class or not"), balanced
accuracy is the macro average of per-class recall (for two classes this
collapses to the mean of sensitivity and specificity), and mean average
precision scores how well latent mutants rank when each revision's
mutants are sorted by predicted latency likelihood. Revisions whose
mutants are all latent or none latent are skipped and reported as the
literal string "--".
"""

from dataclasses import dataclass

from .prng import Xoshiro256, mix

CLASSES = ("L", "NL", "D")
SKIPPED = "--"


def kahan_mean(values):
    """Compensated mean so aggregation order cannot change the result."""
    total = 0.0
    comp = 0.0
    count = 0
    for v in values:
        count += 1
        y = v - comp
        t = total + y
        comp = (t - total) - y
        total = t
    if count == 0:
        raise ValueError("mean of no values")
    return total / count


def accuracy_suite(predictions, labels):
    """{"acc", "per_class", "balanced_acc"} for one prediction run."""
    if not labels or len(predictions) != len(labels):
        raise ValueError("empty or mismatched prediction/label lists")
    n = len(labels)
    acc = sum(1 for p, l in zip(predictions, labels) if p == l) / n
    per_class = {}
    for c in CLASSES:
        agree = sum(1 for p, l in zip(predictions, labels)
                    if (p == c) == (l == c))
        per_class[c] = agree / n
    recalls = []
    for c in CLASSES:
        members = [i for i, l in enumerate(labels) if l == c]
        if not members:
            continue
        recalls.append(sum(1 for i in members if predictions[i] == c)
                       / len(members))
    return {"acc": acc, "per_class": per_class,
            "balanced_acc": kahan_mean(recalls)}


@dataclass
class RankedRevision:
    revision_id: str
    mutants: list  # (mutant_id, p_latent, is_latent), best first


def ranked_revisions(items):
    """Group (revision_id, mutant_id, p_latent, is_latent) tuples into
    RankedRevisions sorted by descending likelihood, ties by mutant_id."""
    groups = {}
    for revision_id, mutant_id, p, is_latent in items:
        groups.setdefault(revision_id, []).append((mutant_id, p, is_latent))
    out = []
    for revision_id in sorted(groups):
        mutants = sorted(groups[revision_id], key=lambda m: (-m[1], m[0]))
        out.append(RankedRevision(revision_id, mutants))
    return out


def average_precision(flags):
    """AP of a ranked 0/1 relevance list; None when undefined (no
    positives or all positives)."""
    n_latent = sum(1 for f in flags if f)
    if n_latent == 0 or n_latent == len(flags):
        return None
    total = 0.0
    seen = 0
    for i, flag in enumerate(flags, start=1):
        if flag:
            seen += 1
            total += seen / i
    return total / n_latent


def mean_average_precision(revisions):
    """Mean AP over revisions; all-skipped input yields "--"."""
    aps = []
    for rev in revisions:
        ap = average_precision([m[2] for m in rev.mutants])
        if ap is not None:
            aps.append(ap)
    if not aps:
        return SKIPPED
    return kahan_mean(aps)


def random_baseline(labels, seed, trials=1000, revision_groups=None):
    """Metrics of uniform-random predictions and rankings, averaged over
    trials. ``revision_groups`` ((revision_id, [(mutant_id, is_latent)]))
    enables the MAP column."""
    if not labels:
        raise ValueError("empty label list")
    accs = []
    bals = []
    per_class = {c: [] for c in CLASSES}
    maps = []
    for trial in range(trials):
        rng = Xoshiro256(mix(seed, trial))
        preds = [CLASSES[rng.randbelow(len(CLASSES))] for _ in labels]
        bundle = accuracy_suite(preds, labels)
        accs.append(bundle["acc"])
        bals.append(bundle["balanced_acc"])
        for c in CLASSES:
            per_class[c].append(bundle["per_class"][c])
        if revision_groups:
            aps = []
            for _, mutants in revision_groups:
                order = list(mutants)
                rng.shuffle(order)
                ap = average_precision([is_latent for _, is_latent in order])
                if ap is not None:
                    aps.append(ap)
            if aps:
                maps.append(kahan_mean(aps))
    out = {
        "acc": kahan_mean(accs),
        "per_class": {c: kahan_mean(per_class[c]) for c in CLASSES},
        "balanced_acc": kahan_mean(bals),
    }
    out["map"] = kahan_mean(maps) if maps else SKIPPED
    return out


def average_metric_bundles(bundles):
    """Mean of metric bundles (for example one per CV repeat); "--" maps
    are dropped from the average and returned only if nothing is left."""
    if not bundles:
        raise ValueError("no metric bundles")
    out = {
        "acc": kahan_mean([b["acc"] for b in bundles]),
        "per_class": {
            c: kahan_mean([b["per_class"][c] for b in bundles]) for c in CLASSES
        },
        "balanced_acc": kahan_mean([b["balanced_acc"] for b in bundles]),
    }
    maps = [b["map"] for b in bundles if b.get("map", SKIPPED) != SKIPPED]
    out["map"] = kahan_mean(maps) if maps else SKIPPED
    return out


# --- report tables ---

_COLUMNS = ("bundle", "n_rows", "acc", "acc_L", "acc_NL", "acc_D",
            "bal_acc", "map", "rand_acc", "rand_bal_acc", "rand_map")


def _fmt(value):
    if value == SKIPPED:
        return SKIPPED
    if isinstance(value, float):
        return "%.4f" % value
    return str(value)


def _row_cells(row):
    m = row["metrics"]
    r = row["random"]
    return [
        row["bundle"], str(row["n_rows"]),
        _fmt(m["acc"]), _fmt(m["per_class"]["L"]), _fmt(m["per_class"]["NL"]),
        _fmt(m["per_class"]["D"]), _fmt(m["balanced_acc"]), _fmt(m["map"]),
        _fmt(r["acc"]), _fmt(r["balanced_acc"]), _fmt(r["map"]),
    ]


def render_report_csv(rows):
    lines = [",".join(_COLUMNS)]
    for row in rows:
        lines.append(",".join(_row_cells(row)))
    return "\n".join(lines) + "\n"


def render_report_md(rows):
    lines = [
        "| " + " | ".join(_COLUMNS) + " |",
        "|" + "|".join(["---"] * len(_COLUMNS)) + "|",
    ]
    for row in rows:
        lines.append("| " + " | ".join(_row_cells(row)) + " |")
    return "\n".join(lines) + "\n"
