"""Dataset ingestion: bundled Iris, 8-feature CSV files, PCA, stratified splits.

The expected CSV schema for external feature files is ``f0,...,f7,label``
with integer class labels.  Class triplets are filtered and remapped densely
to {0,1,2} preserving the requested order.  All sampling and splitting is
seeded and recorded in the dataset's provenance string.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from importlib import resources as importlib_resources

import numpy as np


@dataclass
class Dataset:
    features: np.ndarray        # (M, F)
    labels: np.ndarray          # (M,) ints in {0,1,2}
    train_idx: np.ndarray
    val_idx: np.ndarray
    provenance: str

    @property
    def train_features(self):
        return self.features[self.train_idx]

    @property
    def train_labels(self):
        return self.labels[self.train_idx]

    @property
    def val_features(self):
        return self.features[self.val_idx]

    @property
    def val_labels(self):
        return self.labels[self.val_idx]


def stratified_split(labels, val_fraction: float, seed: int):
    """Disjoint train/val index arrays, stratified per class, seeded."""
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    train, val = [], []
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        idx = idx[rng.permutation(idx.size)]
        n_val = int(round(val_fraction * idx.size))
        val.extend(idx[:n_val])
        train.extend(idx[n_val:])
    return np.sort(np.asarray(train, int)), np.sort(np.asarray(val, int))


def _read_csv(path_or_file, expect_features: int | None = None):
    if hasattr(path_or_file, "read"):
        reader = csv.reader(path_or_file)
        rows = list(reader)
    else:
        with open(path_or_file, newline="") as fh:
            rows = list(csv.reader(fh))
    if not rows:
        raise ValueError("empty CSV file")
    header = [h.strip() for h in rows[0]]
    n_feat = len(header) - 1
    if header[-1] != "label" or any(h != f"f{i}" for i, h in enumerate(header[:-1])):
        raise ValueError(
            f"bad CSV header {header}; expected f0..f{n_feat - 1},label")
    if expect_features is not None and n_feat != expect_features:
        raise ValueError(f"expected {expect_features} feature columns, got {n_feat}")
    feats, labels = [], []
    for lineno, row in enumerate(rows[1:], 2):
        if not row:
            continue
        try:
            feats.append([float(v) for v in row[:-1]])
            labels.append(int(row[-1]))
        except ValueError as exc:
            raise ValueError(f"CSV line {lineno}: {exc}") from exc
    return np.asarray(feats, float), np.asarray(labels, int)


def load_iris(seed: int = 0) -> Dataset:
    """Bundled Iris: 150x4, 3 classes, stratified 120/30 split."""
    ref = importlib_resources.files("qdistill.resources").joinpath("iris.csv")
    with ref.open() as fh:
        feats, labels = _read_csv(fh, expect_features=4)
    if feats.shape != (150, 4):
        raise ValueError(f"corrupt bundled iris.csv: shape {feats.shape}")
    train, val = stratified_split(labels, 0.2, seed)
    return Dataset(feats, labels, train, val,
                   provenance=f"iris(bundled,seed={seed},split=120/30)")


def load_features_csv(path, class_triplet, seed: int = 0,
                      per_class: int = 250, val_fraction: float = 0.2) -> Dataset:
    """Load an 8-feature CSV, filter to three classes, subsample and split.

    Each class is capped at ``per_class`` rows (seeded subsample when larger).
    With full 250/class files this yields the standard 600/150 split.
    """
    class_triplet = tuple(int(c) for c in class_triplet)
    if len(class_triplet) != 3:
        raise ValueError("class_triplet must name exactly 3 classes")
    feats, labels = _read_csv(path, expect_features=8)
    rng = np.random.default_rng(seed)
    keep_feats, keep_labels, notes = [], [], []
    for new_label, cls in enumerate(class_triplet):
        idx = np.flatnonzero(labels == cls)
        if idx.size == 0:
            warnings.warn(f"class {cls} missing from {path}", stacklevel=2)
            notes.append(f"class{cls}:missing")
            continue
        if idx.size < per_class:
            warnings.warn(
                f"class {cls} has only {idx.size} rows (< {per_class})",
                stacklevel=2)
            notes.append(f"class{cls}:{idx.size}")
        elif idx.size > per_class:
            idx = np.sort(rng.choice(idx, size=per_class, replace=False))
        keep_feats.append(feats[idx])
        keep_labels.append(np.full(idx.size, new_label, int))
    if not keep_feats:
        raise ValueError(f"none of the classes {class_triplet} present in {path}")
    f = np.concatenate(keep_feats)
    y = np.concatenate(keep_labels)
    train, val = stratified_split(y, val_fraction, seed)
    prov = (f"csv({path},classes={class_triplet},seed={seed},"
            f"rows={len(y)},split={len(train)}/{len(val)}")
    prov += "," + ";".join(notes) + ")" if notes else ")"
    return Dataset(f, y, train, val, provenance=prov)


@dataclass
class PcaModel:
    mean: np.ndarray          # (F,)
    components: np.ndarray    # (k, F), orthonormal rows

    def transform(self, features) -> np.ndarray:
        x = np.asarray(features, float)
        return (x - self.mean) @ self.components.T


def pca_reduce(features, k: int, train_rows=None):
    """Project onto the top-k principal directions fitted on training rows.

    Component signs are fixed so each component's largest-magnitude loading
    is positive.  Returns the projection of all rows plus the fitted model.
    """
    x = np.asarray(features, float)
    fit = x if train_rows is None else x[np.asarray(train_rows, int)]
    if k > min(fit.shape):
        raise ValueError(f"k={k} exceeds data rank bound {min(fit.shape)}")
    mean = fit.mean(axis=0)
    _, s, vt = np.linalg.svd(fit - mean, full_matrices=False)
    if k > np.sum(s > 1e-12 * s[0]) and s[0] > 0:
        raise ValueError(f"k={k} exceeds numerical rank {np.sum(s > 1e-12 * s[0])}")
    comps = vt[:k]
    for i in range(k):
        j = np.argmax(np.abs(comps[i]))
        if comps[i, j] < 0:
            comps[i] = -comps[i]
    model = PcaModel(mean, comps)
    return model.transform(x), model
