"""Command-line entry points: augment, train, eval, predict, serve, report.

Report-producing subcommands write delimited outputs (CSV, JSON) and render
matplotlib figures next to them. Exit codes: 0 success, 1 runtime failure,
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .augment import run_balance
from .config import (
    read_config,
    service_config_from_file,
    train_settings_from_config,
)
from .errors import DataError, IdentifaceError
from .manifest import DatasetManifest, ImageSample, load_manifest, save_manifest
from .metrics import EvalReport, confusion_csv, render_report
from .model import build_model, validate_label_map
from .modelio import load_model, save_model
from .pipeline import evaluate_on_manifest, load_arrays, load_feature_matrix, predict_file
from .splits import split as split_entries
from .svm import SvmClassifier, SvmModel, svm_train
from .train import history_csv, train


def _absolute_entries(manifest: DatasetManifest, entries):
    """Rewrite entry paths as absolute so split manifests stay resolvable."""
    out = []
    for s in entries:
        lm = manifest.resolve_landmarks(s)
        out.append(ImageSample(str(manifest.resolve_path(s)), s.label, s.subject_id,
                               str(lm) if lm else None))
    return out


def _write_split_manifest(manifest, entries, path):
    side = DatasetManifest(
        task=manifest.task,
        classes=list(manifest.classes),
        entries=_absolute_entries(manifest, entries),
        split_seed=manifest.split_seed,
        base_dir=Path(path).parent,
    )
    save_manifest(side, path)


def _write_eval_outputs(report: EvalReport, out_dir: Path):
    from .figures import save_confusion_figure, save_metrics_figure

    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n",
                                         encoding="utf-8")
    (out_dir / "report.txt").write_text(render_report(report), encoding="utf-8")
    (out_dir / "confusion.csv").write_text(confusion_csv(report), encoding="utf-8")
    save_confusion_figure(report, out_dir / "confusion.png")
    save_metrics_figure(report, out_dir / "metrics.png")


def cmd_augment(args) -> int:
    manifest = load_manifest(args.manifest)
    seed = args.seed if args.seed is not None else manifest.split_seed
    _, report = run_balance(manifest, args.target, args.out, seed=seed)
    table = report.render_table()
    sys.stdout.write(table)
    out_dir = Path(args.out)
    (out_dir / "report.txt").write_text(table, encoding="utf-8")
    (out_dir / "report.csv").write_text(report.to_csv(), encoding="utf-8")
    from .figures import save_balance_figure

    save_balance_figure(report.rows, out_dir / "balance.png")
    return 0


def cmd_train(args) -> int:
    settings = train_settings_from_config(read_config(args.config), seed_override=args.seed)
    manifest = load_manifest(args.manifest)
    if manifest.task != settings.task:
        raise DataError(f"manifest task {manifest.task!r} != config task {settings.task!r}")
    split_seed = args.seed if args.seed is not None else manifest.split_seed
    train_entries, test_entries = split_entries(
        manifest.entries, settings.split_policy, settings.train.test_size, split_seed
    )
    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    validate_label_map(settings.task, manifest.classes)

    if settings.model_kind == "vgg":
        spec = settings.model_spec(list(manifest.classes))
        model = build_model(spec, settings.preprocess_spec(), seed=settings.train.seed)
        print(f"built {settings.task} model: {model.parameter_count} parameters")
        x_train, y_train = load_arrays(manifest, train_entries, model.preprocess)
        x_val = y_val = None
        if test_entries:
            x_val, y_val = load_arrays(manifest, test_entries, model.preprocess)
        history = train(model, x_train, y_train, settings.train, x_val, y_val)
        out_path.with_suffix(".history.csv").write_text(history_csv(history),
                                                        encoding="utf-8")
        from .figures import save_history_figure

        save_history_figure(history, out_path.with_suffix(".curves.png"))
        last = history[-1]
        print(f"epochs run: {len(history)}  train_acc: {last['train_acc']:.3f}"
              + (f"  val_acc: {last['val_acc']:.3f}" if last["val_acc"] is not None else ""))
    else:
        model = _train_svm(settings, manifest, train_entries)
        if test_entries:
            report = evaluate_on_manifest(
                model,
                manifest,
                entries=test_entries,
            )
            print(f"svm test accuracy: {report.accuracy:.3f}")

    save_model(model, out_path)
    _write_split_manifest(manifest, train_entries,
                          out_path.with_suffix(".train.manifest"))
    if test_entries:
        _write_split_manifest(manifest, test_entries,
                              out_path.with_suffix(".test.manifest"))
    print(f"saved model to {out_path}")
    return 0


def _train_svm(settings, manifest, train_entries) -> SvmClassifier:
    # an untrained shell drives feature extraction, then gets its weights
    shell = SvmClassifier(
        model=SvmModel(
            weights=np.zeros((len(manifest.classes), 1)),
            biases=np.zeros(len(manifest.classes)),
            classes=list(manifest.classes),
            feature_family=settings.feature_family,
            lam=settings.svm_lambda,
        ),
        task=settings.task,
        preprocess=settings.preprocess_spec(),
    )
    x, y = load_feature_matrix(manifest, train_entries, shell)
    shell.model = svm_train(
        x,
        y,
        classes=list(manifest.classes),
        lam=settings.svm_lambda,
        epochs=settings.train.epochs,
        seed=settings.train.seed,
        feature_family=settings.feature_family,
    )
    shell.provenance = dict(shell.model.provenance)
    return shell


def _check_task(model, requested):
    if requested is not None and model.task != requested:
        raise DataError(f"model is for task {model.task!r}, not {requested!r}")


def cmd_eval(args) -> int:
    model = load_model(args.model)
    _check_task(model, args.task)
    manifest = load_manifest(args.manifest)
    report = evaluate_on_manifest(model, manifest)
    sys.stdout.write(render_report(report))
    if args.out:
        _write_eval_outputs(report, Path(args.out))
    return 0


def cmd_predict(args) -> int:
    model = load_model(args.model)
    _check_task(model, args.task)
    result = predict_file(model, args.image, landmarks_path=args.landmarks)
    payload = {
        "task": model.task,
        "label": result.label,
        "probabilities": {
            model.label_map[i]: float(result.probabilities[i])
            for i in range(len(model.label_map))
        },
        "top2": [[label, pct] for label, pct in result.top2],
    }
    json.dump(payload, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def cmd_report(args) -> int:
    try:
        data = json.loads(Path(args.input).read_text(encoding="utf-8"))
        report = EvalReport.from_dict(data)
    except (OSError, KeyError, ValueError) as exc:
        raise DataError(f"{args.input}: not a valid report document: {exc}") from exc
    sys.stdout.write(render_report(report))
    if args.out:
        _write_eval_outputs(report, Path(args.out))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    config = service_config_from_file(args.config, port_override=args.port)
    ui_dir = args.ui_dir if args.ui_dir and Path(args.ui_dir).is_dir() else None
    app = create_app(config, ui_dir=ui_dir)
    uvicorn.run(app, host=args.host, port=config.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="identiface",
        description="Facial biometric engine: balance datasets, train and "
                    "evaluate the four task models, serve predictions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("augment", help="balance a dataset by flip/rotate augmentation")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="output dataset directory")
    p.add_argument("--target", required=True, type=int, help="target count per class")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("train", help="train a model from a manifest and config")
    p.add_argument("--manifest", required=True)
    p.add_argument("--config", required=True, help="key=value training config file")
    p.add_argument("--out", required=True, help="output model path (.idfc)")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a model over a manifest")
    p.add_argument("--model", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--task", default=None, help="assert the model serves this task")
    p.add_argument("--out", default=None, help="directory for report files + figures")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("predict", help="classify one image file")
    p.add_argument("--model", required=True)
    p.add_argument("--image", required=True)
    p.add_argument("--task", default=None, help="assert the model serves this task")
    p.add_argument("--landmarks", default=None, help="68-point landmark file")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("serve", help="run the HTTP inference service")
    p.add_argument("--config", required=True, help="key=value service config file")
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--ui-dir", default=None, help="static web UI directory to mount at /")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("report", help="render a saved report.json to table + figures")
    p.add_argument("--input", required=True, help="report.json produced by eval")
    p.add_argument("--out", default=None, help="directory for report files + figures")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except IdentifaceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # unexpected: still a clean nonzero exit
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
