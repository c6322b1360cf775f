"""Ordinary least squares with pivoted-QR rank handling and classical standard errors."""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy import stats

from .data import Dataset
from .design import DesignMatrix, Specification, build_design_matrix

RANK_TOL = 1e-10


class InsufficientDataError(ValueError):
    pass


@dataclass
class OlsFit:
    names: list[str]
    coefficients: np.ndarray  # dropped columns hold 0.0
    standard_errors: np.ndarray  # dropped columns hold nan
    r2: float
    r2_adjusted: float
    n_obs: int
    n_params: int
    residual_sum_squares: float
    dropped: list[str] = field(default_factory=list)

    @property
    def coef(self) -> dict[str, float]:
        return dict(zip(self.names, self.coefficients.tolist()))

    @property
    def stderr(self) -> dict[str, float]:
        return dict(zip(self.names, self.standard_errors.tolist()))

    def __getitem__(self, name: str) -> float:
        return float(self.coefficients[self.names.index(name)])

    def confint(self, name: str, level: float = 0.95) -> tuple[float, float]:
        i = self.names.index(name)
        dof = max(self.n_obs - self.n_params, 1)
        q = stats.t.ppf(0.5 + level / 2, dof)
        b, se = self.coefficients[i], self.standard_errors[i]
        return float(b - q * se), float(b + q * se)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X, dtype=float) @ self.coefficients

    def to_dict(self) -> dict:
        return {
            "coefficients": {n: {"estimate": float(b), "stderr": None if np.isnan(s) else float(s)}
                             for n, b, s in zip(self.names, self.coefficients, self.standard_errors)},
            "r2": self.r2, "r2_adjusted": self.r2_adjusted, "n_obs": self.n_obs, "n_params": self.n_params,
            "residual_sum_squares": self.residual_sum_squares, "dropped": list(self.dropped),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def ols(X: np.ndarray, y: np.ndarray, names: list[str] | None = None, tol: float = RANK_TOL) -> OlsFit:
    """Least squares of ``y`` on the columns of ``X``.

    Columns that are linearly dependent (pivoted QR, |R_kk| <= tol * |R_00|)
    are dropped and reported in ``OlsFit.dropped``.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, k = X.shape
    if names is None:
        names = [f"x{i}" for i in range(k)]
    if len(y) != n:
        raise ValueError(f"design has {n} rows but response has {len(y)}")
    if n == 0 or k == 0:
        raise InsufficientDataError("empty design")
    Q, R, piv = scipy.linalg.qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    rank = int(np.sum(diag > tol * diag[0])) if diag[0] > 0 else 0
    if rank == 0:
        raise InsufficientDataError("design matrix has rank 0")
    if n <= rank:
        raise InsufficientDataError(f"n_obs={n} does not exceed n_params={rank}")
    keep = piv[:rank]
    R1 = R[:rank, :rank]
    qty = Q[:, :rank].T @ y
    b_kept = scipy.linalg.solve_triangular(R1, qty)
    beta = np.zeros(k)
    beta[keep] = b_kept
    resid = y - X[:, keep] @ b_kept
    rss = float(resid @ resid)
    tss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - rss / tss if tss > 0 else (1.0 if rss == 0 else 0.0)
    r2_adj = 1.0 - (1.0 - r2) * (n - 1) / (n - rank)
    s2 = rss / (n - rank)
    Rinv = scipy.linalg.solve_triangular(R1, np.eye(rank))
    se = np.full(k, np.nan)
    se[keep] = np.sqrt(s2 * np.sum(Rinv ** 2, axis=1))
    dropped = [names[i] for i in sorted(piv[rank:])]
    return OlsFit(list(names), beta, se, float(r2), float(r2_adj), n, rank, rss, dropped)


def fit_ols(design: DesignMatrix, response) -> OlsFit:
    return ols(design.values, np.asarray(response, dtype=float), list(design.column_names))


def fit_by_fare_category(dataset: Dataset, specification: Specification | str) -> dict[str, OlsFit]:
    """One independent fit per fare category; under-populated categories are skipped with a warning."""
    fits: dict[str, OlsFit] = {}
    cats = dataset.records["fare_category"].to_numpy()
    for cat in sorted(set(cats.tolist())):
        sub = dataset.subset(cats == cat)
        design = build_design_matrix(sub, specification)
        if len(sub) <= design.values.shape[1]:
            warnings.warn(f"fare category {cat}: not estimated, insufficient observations "
                          f"({len(sub)} obs for {design.values.shape[1]} params)", stacklevel=2)
            continue
        try:
            fits[cat] = fit_ols(design, sub.records["log_tickets"].to_numpy())
        except InsufficientDataError as exc:
            warnings.warn(f"fare category {cat}: not estimated ({exc})", stacklevel=2)
    if not fits:
        raise InsufficientDataError("no fare category has enough observations to estimate")
    return fits
