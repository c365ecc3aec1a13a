"""Batch pipeline driver.

Stages talk only through files under the output directory:

    <out>/<bundle>/mutants.json      mutate
    <out>/<bundle>/killmatrix.json   mutate
    <out>/<bundle>/traces.json       propagate
    <out>/<bundle>/changes.json      propagate
    <out>/<bundle>/summary.json      propagate
    <out>/<bundle>/features.csv      features
    <out>/model.json, cv.json        train (pooled over bundles)
    <out>/report.csv, report.md      report

Exit codes: 0 ok, 2 bundle error, 3 broken suite, 4 propagation error,
5 feature error, 6 training error.
"""

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import evalmetrics, forest, gitexport, histfeat, lifecycle, mutgen
from .errors import BrokenSuite, BundleError, MutraceError
from .histstore import load_bundle
from .prng import mix
from .runner import InitialStatus

EXIT_BUNDLE = 2
EXIT_BROKEN_SUITE = 3
EXIT_PROPAGATION = 4
EXIT_FEATURES = 5
EXIT_TRAINING = 6


@dataclass
class RunConfig:
    bundles: list = field(default_factory=list)
    out: str = "out"
    n_thr_days: int = 365
    step_budget: int = 1_000_000
    seed: int = 0
    k_folds: int = 5
    repeats: int = 10
    ablate_mut_op: bool = False
    jobs: int = 1

    def to_json(self):
        return asdict(self)

    @classmethod
    def from_json(cls, obj):
        return cls(**obj)


def _write_json(path, payload):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def _read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _bundle_out(config, bundle):
    return Path(config.out) / bundle.name


def stage_mutate(config, bundle):
    out = _bundle_out(config, bundle)
    mutants = lifecycle.generate_all(bundle)
    statuses = lifecycle.injection_kill_matrix(bundle, mutants,
                                               config.step_budget)
    texts = {path: f.text for path, f in bundle.injection.files.items()}
    _write_json(out / "mutants.json", mutgen.mutants_to_json(mutants, texts))
    _write_json(out / "killmatrix.json",
                {mid: statuses[mid].to_json() for mid in sorted(statuses)})
    return mutants, statuses


def _load_stage_mutants(config, bundle):
    out = _bundle_out(config, bundle)
    texts = {path: f.text for path, f in bundle.injection.files.items()}
    mutants = mutgen.mutants_from_json(_read_json(out / "mutants.json"), texts)
    raw = _read_json(out / "killmatrix.json")
    statuses = {
        mid: InitialStatus(rec["status"], rec["reason"], rec["killed_by"])
        for mid, rec in raw.items()
    }
    return mutants, statuses


def stage_propagate(config, bundle):
    out = _bundle_out(config, bundle)
    mutants, statuses = _load_stage_mutants(config, bundle)
    traces = lifecycle.propagate(
        bundle, mutants, live_only=True, n_thr_days=config.n_thr_days,
        step_budget=config.step_budget, initial_statuses=statuses,
        jobs=config.jobs,
    )
    _write_json(out / "traces.json", [t.to_json() for t in traces])

    counts = {}
    for t in traces:
        counts[t.final] = counts.get(t.final, 0) + 1
    _write_json(out / "summary.json", {
        "bundle": bundle.name,
        "counts": counts,
        "lifespan": lifecycle.lifespan_stats(traces),
    })
    _write_json(out / "changes.json", _change_log(bundle))
    return traces


def _change_log(bundle):
    from .astmatch import classify_change

    pairs = []
    for rev_index in range(1, len(bundle.revisions)):
        old = bundle.revisions[rev_index - 1]
        new = bundle.revisions[rev_index]
        files = {}
        for path in sorted(set(old.files) | set(new.files)):
            if path not in old.files or path not in new.files:
                files[path] = {"class": "semantic", "mapped_pairs": 0,
                               "lines": {}}
                continue
            change = classify_change(old.files[path], new.files[path])
            files[path] = {
                "class": change.file_class,
                "mapped_pairs": change.mapped_pairs,
                "lines": {str(line): {"touched": t, "semantic": s}
                          for line, (t, s) in sorted(change.line_flags.items())},
            }
        pairs.append({"from": old.id, "to": new.id, "files": files})
    return pairs


def stage_features(config, bundle):
    out = _bundle_out(config, bundle)
    mutants, _ = _load_stage_mutants(config, bundle)
    traces = _read_json(out / "traces.json")
    label_of = {}
    for t in traces:
        if t["final"] in histfeat.LABELS:
            label_of[t["mutant_id"]] = histfeat.LABELS[t["final"]]
    extractor = histfeat.FeatureExtractor(bundle)
    rows = []
    for m in mutants:
        if m.mutant_id not in label_of:
            continue
        rows.append((extractor.features_for(m), label_of[m.mutant_id]))
    (out / "features.csv").write_text(histfeat.features_csv(rows),
                                      encoding="utf-8")
    return rows


def _pooled_rows(config, bundles):
    rows = []
    for bundle in bundles:
        out = _bundle_out(config, bundle)
        group = "%s:%s" % (bundle.name, bundle.injection.id)
        for mutant_id, label, values in histfeat.parse_features_csv(
                (out / "features.csv").read_text(encoding="utf-8")):
            rows.append(forest.Row(mutant_id, values, label, group))
    return rows


def stage_train(config, bundles):
    rows = _pooled_rows(config, bundles)
    train_config = forest.TrainConfig(ablate_mut_op=config.ablate_mut_op)
    cv = forest.cross_validate(rows, config.seed, k=config.k_folds,
                               repeats=config.repeats, config=train_config)
    model = forest.train(rows, config.seed, train_config)
    out = Path(config.out)
    _write_json(out / "model.json", model.to_json())
    payload = cv.to_json()
    payload["rows"] = [
        {"mutant_id": r.mutant_id, "label": r.label,
         "revision_id": r.revision_id,
         "bundle": r.revision_id.split(":", 1)[0]}
        for r in sorted(rows, key=lambda r: r.mutant_id)
    ]
    payload["feature_importance"] = forest.feature_importance(model)
    _write_json(out / "cv.json", payload)
    return cv, model


def _metrics_for_rows(rows, predictions):
    """Per-repeat metrics restricted to a row subset, averaged."""
    bundles = []
    for proba in predictions:
        preds = [forest.CLASSES[max(range(3), key=lambda i: (proba[r["mutant_id"]][i], -i))]
                 for r in rows]
        labels = [r["label"] for r in rows]
        bundle = evalmetrics.accuracy_suite(preds, labels)
        ranked = evalmetrics.ranked_revisions(
            [(r["revision_id"], r["mutant_id"], proba[r["mutant_id"]][0],
              r["label"] == "L") for r in rows]
        )
        bundle["map"] = evalmetrics.mean_average_precision(ranked)
        bundles.append(bundle)
    return evalmetrics.average_metric_bundles(bundles)


def stage_report(config, bundles):
    out = Path(config.out)
    cv = _read_json(out / "cv.json")
    all_rows = cv["rows"]
    predictions = cv["predictions"]

    table = []
    names = sorted({r["bundle"] for r in all_rows})
    for index, name in enumerate(names + ["Total"]):
        rows = all_rows if name == "Total" else \
            [r for r in all_rows if r["bundle"] == name]
        if not rows:
            continue
        labels = [r["label"] for r in rows]
        groups = {}
        for r in rows:
            groups.setdefault(r["revision_id"], []).append(
                (r["mutant_id"], r["label"] == "L"))
        table.append({
            "bundle": name,
            "n_rows": len(rows),
            "metrics": _metrics_for_rows(rows, predictions),
            "random": evalmetrics.random_baseline(
                labels, mix(config.seed, 0x7A11D + index), trials=1000,
                revision_groups=sorted(groups.items()),
            ),
        })
    (out / "report.csv").write_text(evalmetrics.render_report_csv(table),
                                    encoding="utf-8")
    (out / "report.md").write_text(evalmetrics.render_report_md(table),
                                   encoding="utf-8")
    return table


def _load_bundles(config):
    bundles = []
    for path in config.bundles:
        bundles.append(load_bundle(path, config.step_budget))
    if not bundles:
        raise BundleError("no bundles given (--bundle or run.json)")
    return bundles


def _build_config(args):
    if args.config:
        config = RunConfig.from_json(_read_json(args.config))
    else:
        config = RunConfig()
    if args.bundle:
        config.bundles = args.bundle
    if args.out:
        config.out = args.out
    for attr, value in [
        ("n_thr_days", args.n_thr), ("seed", args.seed),
        ("k_folds", args.k_folds), ("repeats", args.repeats),
        ("step_budget", args.step_budget), ("jobs", args.jobs),
    ]:
        if value is not None:
            setattr(config, attr, value)
    if args.ablate_mut_op:
        config.ablate_mut_op = True
    return config


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="mutrace",
        description="Mutation testing across recorded revision histories.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--bundle", action="append", default=None,
                       help="bundle directory (repeatable)")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--config", default=None, help="run.json config file")
        p.add_argument("--n-thr", type=int, default=None, dest="n_thr",
                       help="day threshold for latent status (default 365)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--k-folds", type=int, default=None, dest="k_folds")
        p.add_argument("--repeats", type=int, default=None)
        p.add_argument("--step-budget", type=int, default=None,
                       dest="step_budget")
        p.add_argument("--ablate-mut-op", action="store_true",
                       dest="ablate_mut_op",
                       help="train without the operator feature")
        p.add_argument("--jobs", type=int, default=None,
                       help="worker cap; outputs do not depend on it")

    for name in ("mutate", "propagate", "features", "train", "report", "all"):
        p = sub.add_parser(name)
        add_common(p)

    p = sub.add_parser("git-export",
                       help="export a git repository into bundle layout")
    p.add_argument("--repo", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--name", default=None)
    p.add_argument("--injection-index", type=int, default=0)

    args = parser.parse_args(argv)

    if args.command == "git-export":
        gitexport.export_repository(args.repo, args.out, args.name,
                                    args.injection_index)
        return 0

    config = _build_config(args)

    try:
        bundles = _load_bundles(config)
    except BrokenSuite as exc:
        print("broken suite: %s" % exc, file=sys.stderr)
        return EXIT_BROKEN_SUITE
    except (BundleError, OSError) as exc:
        print("bundle error: %s" % exc, file=sys.stderr)
        return EXIT_BUNDLE

    try:
        if args.command in ("mutate", "all"):
            for bundle in bundles:
                stage_mutate(config, bundle)
        if args.command in ("propagate", "all"):
            for bundle in bundles:
                try:
                    stage_propagate(config, bundle)
                except MutraceError as exc:
                    print("propagation error: %s" % exc, file=sys.stderr)
                    return EXIT_PROPAGATION
        if args.command in ("features", "all"):
            for bundle in bundles:
                try:
                    stage_features(config, bundle)
                except MutraceError as exc:
                    print("feature error: %s" % exc, file=sys.stderr)
                    return EXIT_FEATURES
        if args.command in ("train", "all"):
            try:
                stage_train(config, bundles)
            except MutraceError as exc:
                print("training error: %s" % exc, file=sys.stderr)
                return EXIT_TRAINING
        if args.command in ("report", "all"):
            stage_report(config, bundles)
    except BrokenSuite as exc:
        print("broken suite: %s" % exc, file=sys.stderr)
        return EXIT_BROKEN_SUITE
    except BundleError as exc:
        print("bundle error: %s" % exc, file=sys.stderr)
        return EXIT_BUNDLE
    return 0


if __name__ == "__main__":
    sys.exit(main())
