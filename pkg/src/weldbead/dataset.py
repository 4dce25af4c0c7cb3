"""Canonical weld experiment data: records, CSV ingestion, splits and min-max scaling."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

# Canonical CSV column order: four process inputs, four bead responses.
CSV_HEADER = ("T", "I", "V", "S", "W", "P", "TH", "L")

INPUT_COLUMNS = ("thickness_mm", "current_a", "voltage_v", "speed_mm_s")
OUTPUT_COLUMNS = ("width_mm", "penetration_mm", "throat_mm", "leg_mm")
ALL_COLUMNS = INPUT_COLUMNS + OUTPUT_COLUMNS


@dataclass(frozen=True)
class WeldRecord:
    """One fillet-weld experiment.

    Inputs: plate thickness (mm), welding current (A), arc voltage (V) and
    torch travel speed (mm/s). Responses: bead width, depth of penetration,
    throat length and leg length, all in mm.
    """

    thickness_mm: float
    current_a: float
    voltage_v: float
    speed_mm_s: float
    width_mm: float
    penetration_mm: float
    throat_mm: float
    leg_mm: float

    def __post_init__(self):
        for name in ALL_COLUMNS:
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ValueError(f"{name} must be strictly positive, got {value!r}")

    def inputs(self) -> np.ndarray:
        return np.array([getattr(self, c) for c in INPUT_COLUMNS])

    def outputs(self) -> np.ndarray:
        return np.array([getattr(self, c) for c in OUTPUT_COLUMNS])


def to_matrix(records, columns=ALL_COLUMNS) -> np.ndarray:
    """Stack selected record fields into an (n, len(columns)) float array."""
    return np.array([[getattr(r, c) for c in columns] for r in records], dtype=float)


def inputs_matrix(records) -> np.ndarray:
    return to_matrix(records, INPUT_COLUMNS)


def targets_matrix(records) -> np.ndarray:
    return to_matrix(records, OUTPUT_COLUMNS)


def load_csv(path) -> list[WeldRecord]:
    """Read weld records from a CSV file with the canonical T,I,V,S,W,P,TH,L header.

    Raises ValueError naming the offending row for malformed or non-positive
    cells, and for files with a valid header but no data rows.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: no data rows") from None
        if tuple(cell.strip() for cell in header) != CSV_HEADER:
            raise ValueError(
                f"{path}: expected header {','.join(CSV_HEADER)}, got {','.join(header)}"
            )
        records = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(CSV_HEADER):
                raise ValueError(
                    f"{path}, row {lineno}: expected {len(CSV_HEADER)} cells, got {len(row)}"
                )
            try:
                values = [float(cell) for cell in row]
            except ValueError:
                raise ValueError(f"{path}, row {lineno}: non-numeric cell in {row!r}") from None
            try:
                records.append(WeldRecord(*values))
            except ValueError as exc:
                raise ValueError(f"{path}, row {lineno}: {exc}") from None
    if not records:
        raise ValueError(f"{path}: no data rows")
    return records


def _packaged(name: str) -> Path:
    return Path(str(resources.files(__package__).joinpath("data", name)))


def load_train_records() -> list[WeldRecord]:
    """The 53 canonical training experiments shipped with the package."""
    return load_csv(_packaged("train.csv"))


def load_test_records() -> list[WeldRecord]:
    """The 10 canonical held-out experiments shipped with the package."""
    return load_csv(_packaged("test.csv"))


@dataclass(frozen=True)
class ScalerParams:
    """Per-column affine rescaling fitted on training data.

    Maps x to (x - x_min) / (x_max - x_min), stretched onto feature_range
    (fixed to (0, 1) by default). Values outside the fitted extrema map
    outside the range; extrapolation is the caller's responsibility, there
    is no clipping. transform/inverse_transform round-trip exactly.
    """

    columns: tuple[str, ...]
    x_min: np.ndarray
    x_max: np.ndarray
    feature_range: tuple[float, float] = (0.0, 1.0)

    def _coerce(self, values) -> np.ndarray:
        if isinstance(values, WeldRecord):
            return np.array([getattr(values, c) for c in self.columns], dtype=float)
        if isinstance(values, (list, tuple)) and values and isinstance(values[0], WeldRecord):
            return to_matrix(values, self.columns)
        arr = np.asarray(values, dtype=float)
        if arr.ndim == 0 and len(self.columns) == 1:
            return arr.reshape(1)
        if arr.shape[-1] != len(self.columns):
            raise ValueError(
                f"expected {len(self.columns)} columns {self.columns}, got shape {arr.shape}"
            )
        return arr

    def transform(self, values) -> np.ndarray:
        lo, hi = self.feature_range
        arr = self._coerce(values)
        std = (arr - self.x_min) / (self.x_max - self.x_min)
        return std * (hi - lo) + lo

    def inverse_transform(self, values) -> np.ndarray:
        lo, hi = self.feature_range
        arr = np.asarray(values, dtype=float)
        if arr.shape[-1] != len(self.columns):
            raise ValueError(
                f"expected {len(self.columns)} columns {self.columns}, got shape {arr.shape}"
            )
        std = (arr - lo) / (hi - lo)
        return std * (self.x_max - self.x_min) + self.x_min


def fit_scaler(data, columns=INPUT_COLUMNS, feature_range=(0.0, 1.0)) -> ScalerParams:
    """Fit per-column extrema from records or an (n, k) matrix.

    Fit on training data only; the fitted params never see the test split.
    Constant columns are rejected (the affine map would be degenerate).
    """
    lo, hi = feature_range
    if not hi > lo:
        raise ValueError(f"feature_range must be increasing, got {feature_range}")
    if isinstance(data, np.ndarray):
        matrix = np.asarray(data, dtype=float)
        if matrix.ndim != 2:
            raise ValueError(f"expected a 2-d matrix, got shape {matrix.shape}")
        if matrix.shape[1] != len(columns):
            raise ValueError(
                f"matrix has {matrix.shape[1]} columns but {len(columns)} names given"
            )
    else:
        data = list(data)
        if not data:
            raise ValueError("cannot fit a scaler on empty data")
        matrix = to_matrix(data, columns)
    if matrix.shape[0] == 0:
        raise ValueError("cannot fit a scaler on empty data")
    x_min = matrix.min(axis=0)
    x_max = matrix.max(axis=0)
    for name, mn, mx in zip(columns, x_min, x_max):
        if not mx > mn:
            raise ValueError(f"column {name} is constant ({mn}); cannot scale")
    return ScalerParams(tuple(columns), x_min, x_max, feature_range)


@dataclass(frozen=True)
class DataSplit:
    train: tuple[WeldRecord, ...]
    test: tuple[WeldRecord, ...]
    seed: int


def split_records(records, test_fraction=0.10, seed=0) -> DataSplit:
    """Random train/test split for new data.

    The canonical dataset ships pre-split (see canonical_split) and is never
    re-randomized; this exists for ingesting fresh experiments.
    """
    records = list(records)
    n = len(records)
    if not 0 < test_fraction < 1:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    n_test = max(1, int(round(n * test_fraction)))
    if n_test >= n:
        raise ValueError(f"test fraction {test_fraction} leaves no training data for n={n}")
    perm = np.random.default_rng(seed).permutation(n)
    test = tuple(records[i] for i in perm[:n_test])
    train = tuple(records[i] for i in perm[n_test:])
    return DataSplit(train=train, test=test, seed=seed)


def canonical_split() -> DataSplit:
    """The published split: 53 training records, 10 test records."""
    return DataSplit(
        train=tuple(load_train_records()),
        test=tuple(load_test_records()),
        seed=0,
    )
