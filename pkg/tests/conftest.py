import numpy as np
import pytest

from identiface.imageio import write_image
from identiface.manifest import DatasetManifest, ImageSample, save_manifest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def distinct_tensor(rng, shape, low=-1.0, high=1.0, min_gap=None):
    """Random tensor whose values are pairwise distinct with a guaranteed gap
    and bounded away from zero (safe for relu/maxpool finite differences)."""
    n = int(np.prod(shape))
    gap = (high - low) / (2 * n)
    values = low + gap * (2 * np.arange(n) + 1)
    values = values[np.abs(values) > max(min_gap or gap, 1e-2)]
    while values.size < n:
        values = np.concatenate([values, values[-1:] + gap])
    rng.shuffle(values)
    return values[:n].reshape(shape)


def texture_image(rng, kind, size=16, period=4):
    """Synthetic texture classes: 0 vertical stripes, 1 horizontal, 2 checks."""
    phase = int(rng.integers(0, period))
    rr, cc = np.mgrid[0:size, 0:size]
    if kind == 0:
        base = ((cc + phase) // (period // 2)) % 2
    elif kind == 1:
        base = ((rr + phase) // (period // 2)) % 2
    else:
        base = (((rr + phase) // (period // 2)) + ((cc + phase) // (period // 2))) % 2
    img = base * 180.0 + 40.0 + rng.normal(0, 8.0, size=(size, size))
    return np.clip(img, 0, 255).astype(np.uint8)


def write_texture_dataset(tmp_path, classes, per_class, size=16, seed=0,
                          task="face_shape", name="textures"):
    """On-disk dataset of distinct geometric textures ('shapes as faces')."""
    tmp_path.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    entries = []
    for label, cname in enumerate(classes):
        for i in range(per_class):
            img = texture_image(rng, label, size=size)
            fname = f"{cname}_{i:03d}.pgm"
            write_image(tmp_path / fname, img)
            entries.append(ImageSample(fname, label, f"{cname}_s{i}"))
    manifest = DatasetManifest(task=task, classes=list(classes), entries=entries,
                               split_seed=seed, base_dir=tmp_path)
    header = tmp_path / f"{name}.manifest"
    save_manifest(manifest, header)
    return header


def write_dataset(tmp_path, task, classes, class_sizes, image_shape=(12, 12),
                  subjects_per_class=2, seed=0, name="data"):
    """Create a small on-disk dataset: PGM images + manifest pair.

    Images are seeded random grayscale; returns the manifest header path.
    """
    tmp_path.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    entries = []
    for label, cname in enumerate(classes):
        for i in range(class_sizes[label]):
            img = rng.integers(0, 256, size=image_shape, dtype=np.uint8)
            fname = f"{cname}_{i:03d}.pgm"
            write_image(tmp_path / fname, img)
            subject = f"{cname}_s{i % subjects_per_class}"
            entries.append(ImageSample(fname, label, subject))
    manifest = DatasetManifest(task=task, classes=list(classes), entries=entries,
                               split_seed=seed, base_dir=tmp_path)
    header = tmp_path / f"{name}.manifest"
    save_manifest(manifest, header)
    return header
