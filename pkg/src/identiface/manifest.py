"""Dataset manifests: labeled face images with subject ids and class names.

A manifest is a pair of files: a small key=value header and a CSV entries
file, e.g.::

    # faces.manifest
    task=face_shape
    classes=oblong,square,round,heart,oval
    split_seed=1234
    entries=faces.csv

    # faces.csv  (one line per sample)
    path,label,subject_id[,landmarks_path]

Entry paths are resolved relative to the header file's directory. Labels in
the CSV are class *names*; ``ImageSample.label`` holds the resolved index.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ParseError

TASKS = ("recognition", "gender", "face_shape", "emotion")
OTHER_CLASS = "Other"


@dataclass
class ImageSample:
    path: str
    label: int
    subject_id: str
    landmarks_path: str | None = None


@dataclass
class DatasetManifest:
    task: str
    classes: list[str]
    entries: list[ImageSample]
    split_seed: int = 0
    base_dir: Path = field(default_factory=Path)

    def __post_init__(self):
        if self.task not in TASKS:
            raise ParseError(f"unknown task {self.task!r}, expected one of {TASKS}")
        if len(set(self.classes)) != len(self.classes):
            raise ParseError(f"duplicate class names in {self.classes}")
        if self.task == "recognition" and OTHER_CLASS not in self.classes:
            raise ParseError(f"recognition manifests must include an {OTHER_CLASS!r} class")
        for sample in self.entries:
            if not 0 <= sample.label < len(self.classes):
                raise ParseError(f"entry {sample.path}: label index {sample.label} out of range")

    def resolve_path(self, sample: ImageSample) -> Path:
        return self.base_dir / sample.path

    def resolve_landmarks(self, sample: ImageSample) -> Path | None:
        if sample.landmarks_path is None:
            return None
        return self.base_dir / sample.landmarks_path

    def class_counts(self) -> dict[str, int]:
        """Per-class sample counts, keyed by class name in label order."""
        counts = {name: 0 for name in self.classes}
        for sample in self.entries:
            counts[self.classes[sample.label]] += 1
        return counts


def _parse_header(path: Path) -> dict[str, str]:
    values: dict[str, str] = {}
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: cannot read manifest: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def load_manifest(path) -> DatasetManifest:
    """Load and validate a manifest header + entries pair."""
    path = Path(path)
    header = _parse_header(path)
    for key in ("task", "classes", "entries"):
        if key not in header:
            raise ParseError(f"{path}: missing required header key {key!r}")
    classes = [c.strip() for c in header["classes"].split(",") if c.strip()]
    if not classes:
        raise ParseError(f"{path}: empty class list")
    try:
        split_seed = int(header.get("split_seed", "0"))
    except ValueError:
        raise ParseError(f"{path}: split_seed must be an integer") from None

    base_dir = path.parent
    entries_path = base_dir / header["entries"]
    index = {name: i for i, name in enumerate(classes)}
    entries: list[ImageSample] = []
    seen_paths: set[str] = set()
    try:
        rows = list(csv.reader(entries_path.read_text(encoding="utf-8").splitlines()))
    except OSError as exc:
        raise ParseError(f"{entries_path}: cannot read entries file: {exc}") from exc
    for rowno, row in enumerate(rows, start=1):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) not in (3, 4):
            raise ParseError(
                f"{entries_path}:{rowno}: expected path,label,subject_id[,landmarks_path], "
                f"got {len(row)} fields"
            )
        sample_path, label_name, subject_id = (f.strip() for f in row[:3])
        if not sample_path:
            raise ParseError(f"{entries_path}:{rowno}: empty path")
        if sample_path in seen_paths:
            raise ParseError(f"{entries_path}:{rowno}: duplicate path {sample_path!r}")
        seen_paths.add(sample_path)
        if label_name not in index:
            raise ParseError(
                f"{entries_path}:{rowno}: label {label_name!r} not in classes {classes}"
            )
        landmarks = row[3].strip() if len(row) == 4 and row[3].strip() else None
        entries.append(ImageSample(sample_path, index[label_name], subject_id, landmarks))

    return DatasetManifest(
        task=header["task"],
        classes=classes,
        entries=entries,
        split_seed=split_seed,
        base_dir=base_dir,
    )


def save_manifest(manifest: DatasetManifest, header_path) -> Path:
    """Write a manifest as a header + CSV pair; entry paths are kept as-is."""
    header_path = Path(header_path)
    entries_name = header_path.with_suffix(".csv").name
    lines = [
        f"task={manifest.task}",
        "classes=" + ",".join(manifest.classes),
        f"split_seed={manifest.split_seed}",
        f"entries={entries_name}",
        "",
    ]
    header_path.write_text("\n".join(lines), encoding="utf-8")
    rows = []
    for sample in manifest.entries:
        fields = [sample.path, manifest.classes[sample.label], sample.subject_id]
        if sample.landmarks_path is not None:
            fields.append(sample.landmarks_path)
        rows.append(",".join(fields))
    (header_path.parent / entries_name).write_text("\n".join(rows) + "\n", encoding="utf-8")
    return header_path
