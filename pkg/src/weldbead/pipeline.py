"""Feature and target preparation shared by the regression and network models.

Two feature-scaling conventions are supported:

* scale-then-expand (default): min-max scale the four raw inputs on training
  extrema, then form the polynomial basis from the scaled values.
* expand-then-scale: form the polynomial basis from the raw inputs, then
  min-max scale every basis column on its own training extrema. This is the
  convention the reproduction study needs to match the published statistics.

Targets stay in mm by default; scaled-target mode trains and predicts in
[0, 1] target space and inverse-transforms predictions back to mm.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import dataset
from .features import FeatureScheme, expand_matrix


class FeatureScaling(Enum):
    SCALE_THEN_EXPAND = "scale-then-expand"
    EXPAND_THEN_SCALE = "expand-then-scale"


@dataclass(frozen=True)
class Design:
    """Fitted preprocessing: everything needed to featurize new records."""

    scheme: FeatureScheme
    feature_scaling: FeatureScaling
    input_scaler: dataset.ScalerParams
    feature_scaler: dataset.ScalerParams | None
    target_scaler: dataset.ScalerParams | None

    @property
    def scale_targets(self) -> bool:
        return self.target_scaler is not None


def fit_design(
    train_records,
    scheme: FeatureScheme,
    feature_scaling: FeatureScaling = FeatureScaling.SCALE_THEN_EXPAND,
    scale_targets: bool = False,
) -> Design:
    """Fit all scalers on the training records only."""
    input_scaler = dataset.fit_scaler(train_records, dataset.INPUT_COLUMNS)
    feature_scaler = None
    if feature_scaling is FeatureScaling.EXPAND_THEN_SCALE:
        raw = expand_matrix(dataset.inputs_matrix(train_records), scheme)
        feature_scaler = dataset.fit_scaler(raw, scheme.feature_names)
    target_scaler = None
    if scale_targets:
        target_scaler = dataset.fit_scaler(train_records, dataset.OUTPUT_COLUMNS)
    return Design(scheme, feature_scaling, input_scaler, feature_scaler, target_scaler)


def design_features(design: Design, records) -> np.ndarray:
    """Featurize records under the design's convention: (n, n_features)."""
    X = dataset.inputs_matrix(records)
    if design.feature_scaling is FeatureScaling.SCALE_THEN_EXPAND:
        return expand_matrix(design.input_scaler.transform(X), design.scheme)
    return design.feature_scaler.transform(expand_matrix(X, design.scheme))


def design_targets(design: Design, records) -> np.ndarray:
    """Target matrix (n, 4) in the space the models train in (mm or scaled)."""
    Y = dataset.targets_matrix(records)
    if design.target_scaler is not None:
        return design.target_scaler.transform(Y)
    return Y


def predictions_to_mm(design: Design, predictions: np.ndarray) -> np.ndarray:
    """Map model outputs back to mm (identity unless targets are scaled)."""
    if design.target_scaler is None:
        return np.asarray(predictions, dtype=float)
    return design.target_scaler.inverse_transform(predictions)


def response_to_mm(design: Design, predictions: np.ndarray, response_index: int) -> np.ndarray:
    """Like predictions_to_mm for a single response column."""
    preds = np.asarray(predictions, dtype=float)
    if design.target_scaler is None:
        return preds
    mn = design.target_scaler.x_min[response_index]
    mx = design.target_scaler.x_max[response_index]
    lo, hi = design.target_scaler.feature_range
    return (preds - lo) / (hi - lo) * (mx - mn) + mn
