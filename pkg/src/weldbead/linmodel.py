"""Linear regression of bead geometry on polynomial feature bases.

Provides ordinary-least-squares refits and, for the reproduction study, the
twelve published coefficient sets (three bases x four responses) as frozen
reference models.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
import scipy.linalg

from .features import FeatureScheme, FeatureVector


class Response(Enum):
    WIDTH = "width"
    PENETRATION = "penetration"
    THROAT = "throat"
    LEG = "leg"

    @property
    def column(self) -> str:
        return _RESPONSE_COLUMNS[self]

    @property
    def index(self) -> int:
        """Position in the canonical (W, P, TH, L) target order."""
        return list(Response).index(self)


_RESPONSE_COLUMNS = {
    Response.WIDTH: "width_mm",
    Response.PENETRATION: "penetration_mm",
    Response.THROAT: "throat_mm",
    Response.LEG: "leg_mm",
}


class Provenance(Enum):
    REFIT = "refit"
    PUBLISHED = "published"


@dataclass(frozen=True)
class LinearModel:
    """Intercept plus one coefficient per basis term, for one response."""

    scheme: FeatureScheme
    response: Response
    intercept: float
    coefficients: np.ndarray
    provenance: Provenance

    def __post_init__(self):
        if len(self.coefficients) != self.scheme.n_features:
            raise ValueError(
                f"{self.scheme.value} scheme needs {self.scheme.n_features} coefficients, "
                f"got {len(self.coefficients)}"
            )

    def predict(self, features: FeatureVector) -> float:
        if features.scheme is not self.scheme:
            raise ValueError(
                f"model expects {self.scheme.value} features, got {features.scheme.value}"
            )
        return float(self.intercept + features.values @ self.coefficients)

    def predict_matrix(self, features: np.ndarray) -> np.ndarray:
        F = np.atleast_2d(np.asarray(features, dtype=float))
        if F.shape[1] != self.scheme.n_features:
            raise ValueError(
                f"model expects {self.scheme.n_features} feature columns, got {F.shape[1]}"
            )
        return self.intercept + F @ self.coefficients


def fit_ols(features, targets, scheme: FeatureScheme, response: Response) -> LinearModel:
    """Least-squares fit of one response against a feature basis.

    Solved through a column-pivoted QR factorization of the intercept-augmented
    design; the pivoted diagonal gives rank detection without squaring the
    condition number the way normal equations would. Rank deficiency raises
    with the name of the dependent column.
    """
    F = np.asarray(features, dtype=float)
    y = np.asarray(targets, dtype=float)
    if F.ndim != 2:
        raise ValueError(f"feature matrix must be 2-d, got shape {F.shape}")
    n, k = F.shape
    if k != scheme.n_features:
        raise ValueError(f"{scheme.value} scheme expects {scheme.n_features} columns, got {k}")
    if y.shape != (n,):
        raise ValueError(f"targets must be a length-{n} vector, got shape {y.shape}")
    if n < k + 1:
        raise ValueError(f"need at least {k + 1} rows to fit {k} coefficients, got {n}")

    A = np.column_stack([np.ones(n), F])
    Q, R, perm = scipy.linalg.qr(A, mode="economic", pivoting=True)
    tol = 1e-10 * np.linalg.norm(A, 2)
    diag = np.abs(np.diag(R))
    deficient = np.flatnonzero(diag <= tol)
    if deficient.size:
        names = ("intercept",) + scheme.feature_names
        raise ValueError(
            f"rank-deficient design: column {names[perm[deficient[0]]]!r} is "
            "linearly dependent on the others"
        )
    beta_pivoted = scipy.linalg.solve_triangular(R, Q.T @ y)
    beta = np.empty_like(beta_pivoted)
    beta[perm] = beta_pivoted
    return LinearModel(scheme, response, float(beta[0]), beta[1:].copy(), Provenance.REFIT)


def predict(model: LinearModel, features) -> float | np.ndarray:
    """Evaluate intercept + coefficients . features."""
    if isinstance(features, FeatureVector):
        return model.predict(features)
    return model.predict_matrix(features)


# Published coefficient sets, transcribed at full reported precision.
# Order matches FeatureScheme.feature_names; first entry is the intercept.
_PUBLISHED = {
    (FeatureScheme.LINEAR, Response.WIDTH): (
        5.70231832, -0.51518823, 1.28819674, -1.20653336, -0.81732366),
    (FeatureScheme.LINEAR, Response.PENETRATION): (
        1.09927399, 0.13730178, 0.95692073, 0.78884736, -0.80878598),
    (FeatureScheme.LINEAR, Response.THROAT): (
        4.57137386, -0.75246881, 1.46922465, 0.69473209, -1.49694922),
    (FeatureScheme.LINEAR, Response.LEG): (
        4.48675941, 0.11731523, 1.23693704, 0.27055171, -1.0234384),
    (FeatureScheme.INTERACTIVE, Response.WIDTH): (
        4.61893649, 0.651438, 9.478483, -1.06198, -3.518106,
        0.203403, -0.77942, -0.79978, -8.114237, -5.8241332, 9.415024),
    (FeatureScheme.INTERACTIVE, Response.PENETRATION): (
        1.04575802, 0.308362, 1.717664, 1.260269, -2.082993,
        -0.13729, 0.147812, -0.37407, -2.024897, 1.227235, 1.06853),
    (FeatureScheme.INTERACTIVE, Response.THROAT): (
        5.96133052, 0.316904, 1.370493, -0.96561, -8.58598,
        -1.73132, -0.00281, 0.070876, -2.55739, 4.62787, 6.142991),
    (FeatureScheme.INTERACTIVE, Response.LEG): (
        3.23814441, -0.0967, 1.97785, 2.338584, 3.2733419,
        -0.44175, 0.593751, -0.14184, 0.1332088, -1.080466, -4.98726),
    (FeatureScheme.FULL, Response.WIDTH): (
        4.4932921, 0.4135383, 9.08740111, -0.56480994, -1.94290995,
        0.49076616, -0.42880857, -0.68836508, -0.6462735,
        0.09007508, -8.07186027, -4.6289759,
        -0.52120768, 9.35456595, -2.21299079),
    (FeatureScheme.FULL, Response.PENETRATION): (
        1.04560761, 0.57014597, 2.50137859, 1.466591, -2.2697287,
        -0.76389532, 0.79393758, 0.43326392, -0.88051647,
        -1.19742114, -2.61559246, 2.19579487,
        -0.28596557, 1.60877736, -0.53011746),
    (FeatureScheme.FULL, Response.THROAT): (
        6.09520908, 0.42603142, 2.30330926, -1.32239399, -10.01496405,
        -0.54508665, -0.86131793, 0.0634657, -0.20033023,
        -1.0122627, -2.84637547, 4.417332977,
        0.2734138, 6.54473054, 1.34339086),
    (FeatureScheme.FULL, Response.LEG): (
        3.2290114, 0.13111397, 2.32618553, 2.59597395, 2.98450153,
        -0.49374791, 0.08748134, 0.72048353, -0.42511743,
        -0.43227202, -0.15924306, -0.9190801,
        -0.27437132, -4.74497102, 0.12879011),
}


def load_paper_models() -> dict[tuple[FeatureScheme, Response], LinearModel]:
    """The twelve published reference models (three bases x four responses)."""
    models = {}
    for (scheme, response), values in _PUBLISHED.items():
        models[(scheme, response)] = LinearModel(
            scheme=scheme,
            response=response,
            intercept=values[0],
            coefficients=np.array(values[1:], dtype=float),
            provenance=Provenance.PUBLISHED,
        )
    return models


def save_model(model: LinearModel, path) -> None:
    """Write a model as flat key = value text, coefficients at 17 significant digits."""
    lines = [
        f"scheme = {model.scheme.value}",
        f"response = {model.response.value}",
        f"provenance = {model.provenance.value}",
        f"alpha_0 = {model.intercept:.17g}",
    ]
    lines += [
        f"alpha_{i + 1} = {c:.17g}" for i, c in enumerate(model.coefficients)
    ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_model(path) -> LinearModel:
    entries = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        entries[key.strip()] = value.strip()
    scheme = FeatureScheme(entries["scheme"])
    n = scheme.n_features
    coeffs = np.array([float(entries[f"alpha_{i + 1}"]) for i in range(n)])
    return LinearModel(
        scheme=scheme,
        response=Response(entries["response"]),
        intercept=float(entries["alpha_0"]),
        coefficients=coeffs,
        provenance=Provenance(entries["provenance"]),
    )
