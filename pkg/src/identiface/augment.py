"""Class balancing by flip/rotate augmentation and seeded downsampling.

The per-task rotation inventories:

* gender: ±15°, ±30° (+ horizontal flip)
* face_shape: ±5°, ±10° (+ flip)
* recognition: ±10° (+ flip)
* emotion: ±5°, ±10° (+ flip) — same small-angle set as face_shape

Balancing rule: ``factor = floor(target / before_count)``; each original is
kept and gets ``factor - 1`` generated variants. Variants enumerate
deterministically — flip first, then rotations ascending by |angle| with
left (+) before right (−), then flipped rotations — and once that set is
exhausted, further variants reuse the inventory with seeded jitter within
±2° of the base angle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, PlanError, RangeError
from .manifest import DatasetManifest, ImageSample, save_manifest
from .imageio import decode_image, write_image

TASK_ANGLES: dict[str, tuple[float, ...]] = {
    "gender": (15.0, 30.0),
    "face_shape": (5.0, 10.0),
    "recognition": (10.0,),
    "emotion": (5.0, 10.0),
}

MAX_ROTATION_DEG = 45.0
JITTER_DEG = 2.0


def hflip(image):
    """Reverse columns; channels untouched."""
    arr = np.asarray(image)
    if arr.ndim not in (2, 3):
        raise DimensionError(f"expected 2-D or 3-D image, got shape {arr.shape}")
    return arr[:, ::-1].copy()


def rotate(image, degrees: float):
    """Rotate about the image center with bilinear sampling.

    Positive angles rotate content to the left (counterclockwise on
    screen); out-of-bounds samples replicate the nearest edge pixel.
    Output dims match the input; uint8 inputs come back uint8.
    """
    if abs(degrees) > MAX_ROTATION_DEG:
        raise RangeError(f"rotation limited to ±{MAX_ROTATION_DEG}°, got {degrees}")
    arr = np.asarray(image)
    if arr.ndim not in (2, 3):
        raise DimensionError(f"expected 2-D or 3-D image, got shape {arr.shape}")
    h, w = arr.shape[:2]
    theta = math.radians(degrees)
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0

    yy, xx = np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64),
                         indexing="ij")
    dx = xx - cx
    dy = yy - cy
    # inverse map: sample source at the point that lands on (xx, yy)
    sx = cos_t * dx - sin_t * dy + cx
    sy = sin_t * dx + cos_t * dy + cy
    sx = np.clip(sx, 0.0, w - 1.0)
    sy = np.clip(sy, 0.0, h - 1.0)

    x0 = np.floor(sx).astype(int)
    y0 = np.floor(sy).astype(int)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = sx - x0
    fy = sy - y0

    work = arr.astype(np.float64)
    if arr.ndim == 3:
        fx = fx[..., None]
        fy = fy[..., None]
    top = work[y0, x0] * (1 - fx) + work[y0, x1] * fx
    bot = work[y1, x0] * (1 - fx) + work[y1, x1] * fx
    out = top * (1 - fy) + bot * fy
    if arr.dtype == np.uint8:
        return np.clip(np.rint(out), 0, 255).astype(np.uint8)
    return out.astype(arr.dtype)


@dataclass(frozen=True)
class Variant:
    """One generated copy: optional flip composed with a rotation."""

    flip: bool
    angle: float

    def apply(self, image):
        out = hflip(image) if self.flip else np.asarray(image).copy()
        if self.angle != 0.0:
            out = rotate(out, self.angle)
        return out

    def tag(self) -> str:
        side = "f1" if self.flip else "f0"
        return f"{side}_r{self.angle:+08.3f}".replace("+", "p").replace("-", "m")


@dataclass
class ClassPlan:
    target: int
    before: int
    factor: int
    variants: list[Variant]

    @property
    def after(self) -> int:
        return self.before * self.factor


@dataclass
class AugmentationPlan:
    per_class: dict[str, ClassPlan]
    rng_seed: int


@dataclass
class AugmentationReport:
    rows: list[tuple[str, int, int, int]]  # (class, before, after, factor)

    def render_table(self) -> str:
        header = ("class", "before", "after", "factor")
        widths = [max(len(header[i]), *(len(str(r[i])) for r in self.rows)) if self.rows
                  else len(header[i]) for i in range(4)]
        lines = [
            "  ".join(h.ljust(widths[i]) for i, h in enumerate(header)),
            "  ".join("-" * widths[i] for i in range(4)),
        ]
        for row in self.rows:
            lines.append("  ".join(str(v).ljust(widths[i]) for i, v in enumerate(row)))
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        lines = ["class,before,after,factor"]
        lines += [f"{c},{b},{a},{f}" for c, b, a, f in self.rows]
        return "\n".join(lines) + "\n"


def variant_sequence(angles: tuple[float, ...], count: int, seed: int) -> list[Variant]:
    """The first ``count`` variants for a class with the given inventory."""
    ordered = sorted(angles)
    deterministic = [Variant(True, 0.0)]
    deterministic += [Variant(False, s * a) for a in ordered for s in (1.0, -1.0)]
    deterministic += [Variant(True, s * a) for a in ordered for s in (1.0, -1.0)]
    if count <= len(deterministic):
        return deterministic[:count]

    seq = list(deterministic)
    rng = np.random.default_rng(seed)
    pool = [(flip, s * a) for flip in (False, True) for a in ordered for s in (1.0, -1.0)]
    pos = 0
    while len(seq) < count:
        flip, base = pool[pos % len(pool)]
        pos += 1
        seq.append(Variant(flip, base + rng.uniform(-JITTER_DEG, JITTER_DEG)))
    return seq


def plan_balance(before_counts: dict[str, int], targets: dict[str, int] | int,
                 task: str, seed: int = 0) -> tuple[AugmentationPlan, AugmentationReport]:
    """Build a deterministic balancing plan.

    ``targets`` is either one target count for every class or a per-class
    map. Classes already above target are a PlanError — downsample those
    instead.
    """
    if task not in TASK_ANGLES:
        raise PlanError(f"no augmentation inventory for task {task!r}")
    angles = TASK_ANGLES[task]
    per_class: dict[str, ClassPlan] = {}
    rows = []
    for i, (name, before) in enumerate(before_counts.items()):
        target = targets if isinstance(targets, int) else targets[name]
        if before <= 0:
            raise PlanError(f"class {name!r} has no samples")
        if target < before:
            raise PlanError(
                f"class {name!r}: target {target} below current count {before}; "
                "use downsample instead"
            )
        factor = target // before
        variants = variant_sequence(angles, factor - 1, seed + i)
        per_class[name] = ClassPlan(target=target, before=before, factor=factor,
                                    variants=variants)
        rows.append((name, before, before * factor, factor))
    return AugmentationPlan(per_class=per_class, rng_seed=seed), AugmentationReport(rows)


def downsample(entries: list[ImageSample], target: int, seed: int) -> list[ImageSample]:
    """Uniform random subset of exactly ``target`` entries, original order kept."""
    if target > len(entries):
        raise RangeError(f"downsample target {target} exceeds count {len(entries)}")
    if target == len(entries):
        return list(entries)
    order = sorted(range(len(entries)), key=lambda i: entries[i].path)
    rng = np.random.default_rng(seed)
    chosen = rng.permutation(len(order))[:target]
    keep = {order[i] for i in chosen}
    return [s for i, s in enumerate(entries) if i in keep]


def run_balance(manifest: DatasetManifest, target: int, out_dir, seed: int = 0):
    """Balance a dataset to ``target`` per class: downsample oversized classes,
    augment undersized ones, write images + regenerated manifest to ``out_dir``.

    Returns (new manifest, AugmentationReport). Images are re-encoded as PGM
    (grayscale) or PNG (RGB) beside the new manifest.
    """
    from pathlib import Path

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    by_class: dict[str, list[ImageSample]] = {name: [] for name in manifest.classes}
    for sample in manifest.entries:
        by_class[manifest.classes[sample.label]].append(sample)

    kept: dict[str, list[ImageSample]] = {}
    augment_counts: dict[str, int] = {}
    report_rows: list[tuple[str, int, int, int]] = []
    for name, samples in by_class.items():
        if len(samples) > target:
            kept[name] = downsample(samples, target, seed)
            report_rows.append((name, len(samples), target, 1))
        else:
            kept[name] = list(samples)
            augment_counts[name] = len(samples)

    plan = None
    if augment_counts:
        plan, aug_report = plan_balance(augment_counts, target, manifest.task, seed)
        report_rows.extend(aug_report.rows)

    new_entries: list[ImageSample] = []
    for name in manifest.classes:
        class_plan = plan.per_class.get(name) if plan else None
        for idx, sample in enumerate(kept[name]):
            pixels = decode_image(manifest.resolve_path(sample))
            suffix = ".pgm" if pixels.ndim == 2 else ".png"
            # index prefix keeps names unique when source stems collide
            stem = f"{idx:05d}_{Path(sample.path).stem}"
            base_name = f"{name}__{stem}{suffix}"
            write_image(out_dir / base_name, pixels)
            new_entries.append(ImageSample(base_name, sample.label, sample.subject_id,
                                           sample.landmarks_path))
            if class_plan is None:
                continue
            for variant in class_plan.variants:
                out_name = f"{name}__{stem}__{variant.tag()}{suffix}"
                write_image(out_dir / out_name, variant.apply(pixels))
                new_entries.append(ImageSample(out_name, sample.label, sample.subject_id,
                                               sample.landmarks_path))

    new_manifest = DatasetManifest(
        task=manifest.task,
        classes=list(manifest.classes),
        entries=new_entries,
        split_seed=manifest.split_seed,
        base_dir=out_dir,
    )
    save_manifest(new_manifest, out_dir / f"{manifest.task}.manifest")
    report_rows.sort(key=lambda r: manifest.classes.index(r[0]))
    return new_manifest, AugmentationReport(report_rows)
