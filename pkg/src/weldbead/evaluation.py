"""Metrics, repeated k-fold cross-validation and the reproduction study."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import dataset, linmodel, pipeline
from .features import FeatureScheme
from .linmodel import Provenance, Response


def _paired(y_true, y_pred) -> tuple[np.ndarray, np.ndarray]:
    y = np.asarray(y_true, dtype=float)
    yh = np.asarray(y_pred, dtype=float)
    if y.shape != yh.shape or y.ndim != 1:
        raise ValueError(f"expected equal-length vectors, got {y.shape} and {yh.shape}")
    return y, yh


def r_squared(y_true, y_pred) -> float:
    """Coefficient of determination, 1 - SS_res / SS_tot."""
    y, yh = _paired(y_true, y_pred)
    if len(y) < 2:
        raise ValueError("r_squared needs at least 2 samples")
    ss_tot = float(((y - y.mean()) ** 2).sum())
    if ss_tot == 0.0:
        raise ValueError("r_squared undefined for constant y_true")
    return 1.0 - float(((y - yh) ** 2).sum()) / ss_tot


def rmse(y_true, y_pred) -> float:
    """Root mean square of the residuals."""
    y, yh = _paired(y_true, y_pred)
    if len(y) == 0:
        raise ValueError("rmse needs at least 1 sample")
    return float(np.sqrt(((y - yh) ** 2).mean()))


def mae(y_true, y_pred) -> float:
    y, yh = _paired(y_true, y_pred)
    if len(y) == 0:
        raise ValueError("mae needs at least 1 sample")
    return float(np.abs(y - yh).mean())


def std_dev(values, ddof: int = 0) -> float:
    """Standard deviation, population divisor (N) by default."""
    arr = np.asarray(values, dtype=float)
    if arr.size < 2:
        raise ValueError("std_dev needs at least 2 values")
    return float(arr.std(ddof=ddof))


def pearson_r(y_true, y_pred) -> float:
    """Pearson correlation between actual and predicted values."""
    y, yh = _paired(y_true, y_pred)
    if len(y) < 2:
        raise ValueError("pearson_r needs at least 2 samples")
    return float(np.corrcoef(y, yh)[0, 1])


def residual_std(y_true, y_pred, ddof: int = 0) -> float:
    """Standard deviation of the residuals (population divisor by default)."""
    y, yh = _paired(y_true, y_pred)
    return std_dev(y - yh, ddof=ddof) if len(y) > 1 else 0.0


def percent_errors(y_true, y_pred) -> np.ndarray:
    """Per-sample signed percentage error, 100 * (pred - actual) / actual."""
    y, yh = _paired(y_true, y_pred)
    if np.any(y == 0):
        raise ValueError("percent error undefined for zero actual values")
    return 100.0 * (yh - y) / y


@dataclass(frozen=True)
class MetricsRow:
    """One line of a statistics table: a response evaluated on the test set."""

    response: Response
    r2: float
    rmse: float
    std_test: float
    std_model: float

    def __post_init__(self):
        if self.rmse < 0 or self.std_test < 0 or self.std_model < 0:
            raise ValueError("rmse and std values must be non-negative")
        if self.r2 > 1:
            raise ValueError(f"r2 cannot exceed 1, got {self.r2}")


def metrics_row(response: Response, y_true, y_pred) -> MetricsRow:
    return MetricsRow(
        response=response,
        r2=r_squared(y_true, y_pred),
        rmse=rmse(y_true, y_pred),
        std_test=std_dev(y_true),
        std_model=std_dev(y_pred),
    )


# ---------------------------------------------------------------------------
# Repeated k-fold cross-validation


@dataclass(frozen=True)
class CvPlan:
    n_splits: int = 10
    n_repeats: int = 5
    seed: int = 0


def fold_indices(n: int, n_splits: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Shuffle 0..n-1 and partition into n_splits folds; first n % k folds get the extra sample."""
    if n_splits > n:
        raise ValueError(f"n_splits={n_splits} exceeds sample count {n}")
    perm = rng.permutation(n)
    base, extra = divmod(n, n_splits)
    folds, start = [], 0
    for i in range(n_splits):
        size = base + (1 if i < extra else 0)
        folds.append(np.sort(perm[start:start + size]))
        start += size
    return folds


@dataclass(frozen=True)
class FoldScore:
    repeat: int
    fold: int
    test_indices: tuple[int, ...]
    rmse: dict[Response, float]
    mae: dict[Response, float]


@dataclass
class CvResult:
    plan: CvPlan
    folds: list[FoldScore] = field(default_factory=list)

    def aggregate(self) -> dict[Response, dict[str, float]]:
        out = {}
        for resp in Response:
            r = np.array([f.rmse[resp] for f in self.folds])
            m = np.array([f.mae[resp] for f in self.folds])
            out[resp] = {
                "rmse_mean": float(r.mean()), "rmse_std": float(r.std()),
                "mae_mean": float(m.mean()), "mae_std": float(m.std()),
            }
        return out


def repeated_kfold(records, plan: CvPlan, fit_predict) -> CvResult:
    """Repeated k-fold evaluation of a model factory.

    fit_predict(train_records, test_records) must return an (n_test, 4)
    prediction matrix in mm, canonical (W, P, TH, L) column order. Shuffling
    is reseeded per repeat from the plan seed, so folds partition the data
    exactly within each repeat and every sample is tested n_repeats times.
    """
    records = list(records)
    result = CvResult(plan=plan)
    for repeat in range(plan.n_repeats):
        rng = np.random.default_rng(np.random.SeedSequence([plan.seed, repeat]))
        for fold_no, test_idx in enumerate(fold_indices(len(records), plan.n_splits, rng)):
            test_mask = np.zeros(len(records), dtype=bool)
            test_mask[test_idx] = True
            train_recs = [r for r, m in zip(records, test_mask) if not m]
            test_recs = [r for r, m in zip(records, test_mask) if m]
            preds = np.asarray(fit_predict(train_recs, test_recs), dtype=float)
            actual = dataset.targets_matrix(test_recs)
            if preds.shape != actual.shape:
                raise ValueError(
                    f"fit_predict returned shape {preds.shape}, expected {actual.shape}"
                )
            result.folds.append(FoldScore(
                repeat=repeat,
                fold=fold_no,
                test_indices=tuple(int(i) for i in test_idx),
                rmse={r: rmse(actual[:, r.index], preds[:, r.index]) for r in Response},
                mae={r: mae(actual[:, r.index], preds[:, r.index]) for r in Response},
            ))
    return result


# ---------------------------------------------------------------------------
# Reproduction study against the published statistics

# Published test statistics per (scheme, response): R2, RMSE, STD(test), STD(model).
PUBLISHED_MLR_STATS = {
    (FeatureScheme.LINEAR, Response.WIDTH): (0.825, 0.182, 0.484, 0.379),
    (FeatureScheme.LINEAR, Response.PENETRATION): (0.969, 0.062, 0.248, 0.255),
    (FeatureScheme.LINEAR, Response.THROAT): (0.432, 0.251, 0.254, 0.210),
    (FeatureScheme.LINEAR, Response.LEG): (0.724, 0.182, 0.249, 0.238),
    (FeatureScheme.INTERACTIVE, Response.WIDTH): (0.9905, 0.0673, 0.484, 0.4703),
    (FeatureScheme.INTERACTIVE, Response.PENETRATION): (0.9199, 0.1006, 0.248, 0.2029),
    (FeatureScheme.INTERACTIVE, Response.THROAT): (0.9585, 0.0746, 0.254, 0.2274),
    (FeatureScheme.INTERACTIVE, Response.LEG): (0.9793, 0.0542, 0.249, 0.2640),
    (FeatureScheme.FULL, Response.WIDTH): (0.9884, 0.0770, 0.484, 0.5014),
    (FeatureScheme.FULL, Response.PENETRATION): (0.9697, 0.0673, 0.248, 0.2114),
    (FeatureScheme.FULL, Response.THROAT): (0.9483, 0.0822, 0.254, 0.2268),
    (FeatureScheme.FULL, Response.LEG): (0.9823, 0.0524, 0.249, 0.2689),
}

PUBLISHED_ANN_STATS = {
    (FeatureScheme.LINEAR, Response.WIDTH): (0.979, 0.099, 0.484, 0.451),
    (FeatureScheme.LINEAR, Response.PENETRATION): (0.923, 0.100, 0.248, 0.198),
    (FeatureScheme.LINEAR, Response.THROAT): (0.908, 0.106, 0.254, 0.229),
    (FeatureScheme.LINEAR, Response.LEG): (0.942, 0.087, 0.249, 0.257),
    (FeatureScheme.INTERACTIVE, Response.WIDTH): (0.9562, 0.1427, 0.484, 0.4466),
    (FeatureScheme.INTERACTIVE, Response.PENETRATION): (0.8295, 0.1388, 0.248, 0.2132),
    (FeatureScheme.INTERACTIVE, Response.THROAT): (0.8849, 0.1191, 0.254, 0.2357),
    (FeatureScheme.INTERACTIVE, Response.LEG): (0.9222, 0.0989, 0.249, 0.2092),
    (FeatureScheme.FULL, Response.WIDTH): (0.9510, 0.1715, 0.484, 0.544),
    (FeatureScheme.FULL, Response.PENETRATION): (0.9079, 0.1043, 0.248, 0.2177),
    (FeatureScheme.FULL, Response.THROAT): (0.9001, 0.1208, 0.254, 0.2771),
    (FeatureScheme.FULL, Response.LEG): (0.9535, 0.1059, 0.249, 0.3126),
}

# Published maximum |percentage error| across the regression width predictions.
PUBLISHED_MAX_WIDTH_PCT_ERROR = 14.2

R2_TOLERANCE = 0.05
RMSE_TOLERANCE = 0.02


@dataclass(frozen=True)
class ModelStats:
    scheme: FeatureScheme
    response: Response
    r2: float
    rmse: float
    std_test: float
    std_model: float
    # Alternative readings of the published table columns: correlation between
    # actual and predicted, and the standard deviation of the residuals.
    pearson: float
    err_std: float


def evaluate_published_models(
    train_records,
    test_records,
    feature_scaling: pipeline.FeatureScaling = pipeline.FeatureScaling.SCALE_THEN_EXPAND,
    scale_targets: bool = False,
) -> list[ModelStats]:
    """Evaluate the twelve published coefficient sets on the held-out records."""
    models = linmodel.load_paper_models()
    rows = []
    for scheme in FeatureScheme:
        design = pipeline.fit_design(train_records, scheme, feature_scaling, scale_targets)
        F = pipeline.design_features(design, test_records)
        actual = dataset.targets_matrix(test_records)
        for response in Response:
            model = models[(scheme, response)]
            preds = model.predict_matrix(F)
            preds = pipeline.response_to_mm(design, preds, response.index)
            y = actual[:, response.index]
            rows.append(ModelStats(
                scheme=scheme,
                response=response,
                r2=r_squared(y, preds),
                rmse=rmse(y, preds),
                std_test=std_dev(y),
                std_model=std_dev(preds),
                pearson=pearson_r(y, preds),
                err_std=residual_std(y, preds),
            ))
    return rows


@dataclass(frozen=True)
class Discrepancy:
    scheme: FeatureScheme
    response: Response
    metric: str
    ours: float
    published: float
    tolerance: float

    def describe(self) -> str:
        return (
            f"{self.scheme.value}/{self.response.value} {self.metric}: "
            f"computed {self.ours:.4f} vs published {self.published:.4f} "
            f"(tolerance {self.tolerance})"
        )


def compare_with_published(rows: list[ModelStats]) -> list[Discrepancy]:
    """Flag cells of the computed table outside the reproduction tolerances."""
    out = []
    for row in rows:
        pub_r2, pub_rmse, _, _ = PUBLISHED_MLR_STATS[(row.scheme, row.response)]
        if abs(row.r2 - pub_r2) > R2_TOLERANCE:
            out.append(Discrepancy(row.scheme, row.response, "r2", row.r2, pub_r2, R2_TOLERANCE))
        if abs(row.rmse - pub_rmse) > RMSE_TOLERANCE:
            out.append(Discrepancy(
                row.scheme, row.response, "rmse", row.rmse, pub_rmse, RMSE_TOLERANCE))
    return out


@dataclass
class ReproductionStudy:
    """Default-convention comparison plus every alternate reading auto-tried."""

    default_rows: list[ModelStats]
    discrepancies: list[Discrepancy]
    alternates: dict[str, list[ModelStats]]
    notes: list[str]


def run_reproduction_study(train_records, test_records) -> ReproductionStudy:
    """Compare published equations to the published statistics table.

    The default convention (scale inputs, expand, targets in mm, standard
    R2/RMSE) is evaluated first; every out-of-tolerance cell becomes a note.
    Alternate conventions are then auto-tried: scaled targets, and
    expand-then-scale feature preparation. Under expand-then-scale the
    published table is recovered almost exactly once its R2 column is read
    as the correlation between actual and predicted values and its RMSE
    column as the standard deviation of the residuals; the notes record
    how close each reading gets.
    """
    default_rows = evaluate_published_models(train_records, test_records)
    discrepancies = compare_with_published(default_rows)
    notes = [
        "Reproduction of the published regression statistics table",
        "",
        "Default convention: min-max scale the four inputs on training extrema,",
        "expand to the polynomial basis, targets in mm; R2 = 1 - SSres/SStot,",
        "RMSE = sqrt(mean squared residual), both on the 10 held-out records.",
        f"Out-of-tolerance cells (R2 +/- {R2_TOLERANCE}, RMSE +/- {RMSE_TOLERANCE} mm): "
        f"{len(discrepancies)} of {2 * len(default_rows)}.",
    ]
    notes += ["  " + d.describe() for d in discrepancies]

    alternates = {
        "scaled-targets": evaluate_published_models(
            train_records, test_records, scale_targets=True),
        "expand-then-scale": evaluate_published_models(
            train_records, test_records,
            feature_scaling=pipeline.FeatureScaling.EXPAND_THEN_SCALE),
    }

    notes += ["", "Alternate conventions auto-tried:"]
    for name, rows in alternates.items():
        worst_r2 = max(
            abs(r.r2 - PUBLISHED_MLR_STATS[(r.scheme, r.response)][0]) for r in rows)
        worst_rmse = max(
            abs(r.rmse - PUBLISHED_MLR_STATS[(r.scheme, r.response)][1]) for r in rows)
        notes.append(
            f"  {name}: worst |R2 delta| {worst_r2:.4f}, worst |RMSE delta| {worst_rmse:.4f}"
        )

    exp_rows = alternates["expand-then-scale"]
    worst_pearson = max(
        abs(r.pearson - PUBLISHED_MLR_STATS[(r.scheme, r.response)][0]) for r in exp_rows)
    errstd_deltas = {
        (r.scheme, r.response): abs(r.err_std - PUBLISHED_MLR_STATS[(r.scheme, r.response)][1])
        for r in exp_rows
    }
    within = sum(1 for d in errstd_deltas.values() if d <= 0.001)
    notes += [
        "",
        "Best reading found: expand-then-scale features, published R2 column read",
        "as the actual-vs-predicted correlation, published RMSE column read as the",
        "standard deviation of the residuals.",
        f"  correlation matches all 12 published R2 cells within {worst_pearson:.4f}",
        f"  residual std matches {within} of 12 published RMSE cells within 0.001",
    ]
    for (scheme, response), delta in errstd_deltas.items():
        if delta > 0.001:
            row = next(r for r in exp_rows if r.scheme is scheme and r.response is response)
            notes.append(
                f"  unresolved: {scheme.value}/{response.value} residual std "
                f"{row.err_std:.4f} vs published {PUBLISHED_MLR_STATS[(scheme, response)][1]:.4f}"
                " (published value duplicates another cell; likely a table typo)"
            )
    return ReproductionStudy(default_rows, discrepancies, alternates, notes)


def max_abs_width_percent_error(train_records, test_records) -> float:
    """Largest |percentage error| over the three width regressions on the test set."""
    models = linmodel.load_paper_models()
    actual = dataset.targets_matrix(test_records)[:, Response.WIDTH.index]
    worst = 0.0
    for scheme in FeatureScheme:
        design = pipeline.fit_design(train_records, scheme)
        F = pipeline.design_features(design, test_records)
        preds = models[(scheme, Response.WIDTH)].predict_matrix(F)
        worst = max(worst, float(np.abs(percent_errors(actual, preds)).max()))
    return worst
