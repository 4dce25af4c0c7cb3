"""Polynomial feature bases over the four process inputs."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np


class FeatureScheme(Enum):
    LINEAR = "linear"
    INTERACTIVE = "interactive"
    FULL = "full"

    @property
    def feature_names(self) -> tuple[str, ...]:
        return _FEATURE_NAMES[self]

    @property
    def n_features(self) -> int:
        return len(_FEATURE_NAMES[self])


# Term order is fixed so coefficient vectors align positionally across the
# whole toolkit (model files, importance reports, published coefficient sets).
_FEATURE_NAMES = {
    FeatureScheme.LINEAR: ("T", "I", "V", "S"),
    FeatureScheme.INTERACTIVE: ("T", "I", "V", "S", "TI", "TV", "TS", "IV", "IS", "VS"),
    FeatureScheme.FULL: (
        "T", "I", "V", "S",
        "T^2", "TI", "TV", "TS",
        "I^2", "IV", "IS",
        "V^2", "VS", "S^2",
    ),
}


@dataclass(frozen=True)
class FeatureVector:
    scheme: FeatureScheme
    values: np.ndarray

    def __len__(self) -> int:
        return len(self.values)


def expand_matrix(inputs, scheme: FeatureScheme) -> np.ndarray:
    """Expand (n, 4) input rows into the scheme's basis, in canonical order."""
    X = np.atleast_2d(np.asarray(inputs, dtype=float))
    if X.shape[1] != 4:
        raise ValueError(f"expected 4 input columns (t, i, v, s), got {X.shape[1]}")
    if not np.isfinite(X).all():
        raise ValueError("inputs must be finite")
    t, i, v, s = X.T
    if scheme is FeatureScheme.LINEAR:
        cols = (t, i, v, s)
    elif scheme is FeatureScheme.INTERACTIVE:
        cols = (t, i, v, s, t * i, t * v, t * s, i * v, i * s, v * s)
    else:
        cols = (t, i, v, s, t * t, t * i, t * v, t * s, i * i, i * v, i * s, v * v, v * s, s * s)
    return np.stack(cols, axis=1)


def expand(inputs, scheme: FeatureScheme) -> FeatureVector:
    """Expand a single (t, i, v, s) input into a FeatureVector."""
    inputs = np.asarray(inputs, dtype=float)
    if inputs.shape != (4,):
        raise ValueError(f"expected a 4-vector (t, i, v, s), got shape {inputs.shape}")
    return FeatureVector(scheme, expand_matrix(inputs[None, :], scheme)[0])
