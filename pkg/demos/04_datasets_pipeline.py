"""
From raw table to circuit-ready features
========================================

The circuit takes exactly four features in [0, 1].  The pipeline that
gets any tabular dataset there: stratified 80/20 split, PCA down to 4
components (fit on train only), then min-max scaling (train extremes,
test clamped).
"""

import numpy as np

from flqdsnn.datasets import (
    apply_scale,
    fit_pca_reduce,
    fit_scale,
    load_builtin,
    preprocess_split,
    train_test_split,
)

# Three tables ship with the package.
for name in ("iris", "digits", "breast_cancer"):
    ds = load_builtin(name)
    print(f"{name:14s} {ds.features.shape[0]:4d} samples x {ds.features.shape[1]:2d} "
          f"features, {ds.n_classes} classes")

# --- the stages, one by one on the 64-wide digits table -----------------
digits = load_builtin("digits")
train, test = train_test_split(digits, test_fraction=0.2, seed=0)
print("\nsplit:", train.features.shape, "train,", test.features.shape, "test")

reducer = fit_pca_reduce(train.features, k=4)
projected = reducer.transform(train.features)
kept = projected.var(axis=0, ddof=1)
total = train.features.var(axis=0, ddof=1).sum()
print("variance along the kept components:", np.round(kept, 2))
print("fraction of total variance kept:", round(float(kept.sum() / total), 3))

scaler = fit_scale(projected)
scaled = apply_scale(scaler, projected)
print("train ranges after scaling:", scaled.min(axis=0), "to", scaled.max(axis=0))

# --- or all at once ------------------------------------------------------
# preprocess_split applies the same stages and keeps test strictly out of
# every fit, so nothing about the test rows leaks into the transform.
train_ready, test_ready = preprocess_split(digits, seed=0)
print("\npipeline output:", train_ready.features.shape, test_ready.features.shape)
print("test values stay inside [0, 1] by clamping:",
      float(test_ready.features.min()), float(test_ready.features.max()))
