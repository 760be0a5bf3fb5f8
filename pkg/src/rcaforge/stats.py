"""Statistical primitives shared by discovery, scoring and detection.

Everything here is a pure function of (data, seed).  The partial
correlation / Fisher-z pair is the conditional-independence backbone of
constraint-based discovery; the energy distance and permutation test back
the two-sample scorer; the chi-square test backs the discrete
indicator-variable scorer; the median/MAD detector turns raw frames into
anomaly spans.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
from scipy import stats as sps

from .errors import InsufficientData, SingularData

RIDGE = 1e-8  # damping added to a covariance diagonal before giving up
MAD_SCALE = 1.4826  # MAD -> sigma for Gaussian data


@dataclass(frozen=True, eq=False)
class MetricFrame:
    """Timestamp-indexed table of named real-valued metric columns."""

    timestamps: np.ndarray
    columns: dict[str, np.ndarray]

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype=np.int64)
        if ts.ndim != 1 or ts.size < 1:
            raise ValueError("timestamps must be a non-empty 1-d array")
        if ts.size > 1 and not np.all(np.diff(ts) > 0):
            raise ValueError("timestamps must be strictly increasing")
        cols = {}
        for name, values in self.columns.items():
            v = np.asarray(values, dtype=np.float64)
            if v.shape != ts.shape:
                raise ValueError(f"column {name!r} length {v.size} != frame length {ts.size}")
            cols[str(name)] = v
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "columns", cols)

    def __len__(self):
        return int(self.timestamps.size)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self.columns)

    def values(self, name: str) -> np.ndarray:
        return self.columns[name]

    def matrix(self, names: Sequence[str] | None = None) -> np.ndarray:
        """Columns stacked as an (n_rows, n_cols) array."""
        names = self.names if names is None else tuple(names)
        return np.column_stack([self.columns[n] for n in names])

    def __eq__(self, other):
        if not isinstance(other, MetricFrame):
            return NotImplemented
        return (
            np.array_equal(self.timestamps, other.timestamps)
            and self.names == other.names
            and all(np.array_equal(self.columns[n], other.columns[n]) for n in self.names)
        )

    def __repr__(self):
        return f"MetricFrame({len(self)} rows, {len(self.columns)} metrics)"


def concat_frames(first: MetricFrame, second: MetricFrame) -> MetricFrame:
    """Stack two frames over the same columns; timestamps must keep increasing."""
    if first.names != second.names:
        raise ValueError("frames have different column sets")
    ts = np.concatenate([first.timestamps, second.timestamps])
    cols = {n: np.concatenate([first.columns[n], second.columns[n]]) for n in first.names}
    return MetricFrame(ts, cols)


@dataclass(frozen=True)
class CiTestResult:
    statistic: float
    p_value: float
    conditioning_size: int

    def __post_init__(self):
        if not 0.0 <= self.p_value <= 1.0:
            raise ValueError(f"p_value {self.p_value} outside [0, 1]")


@dataclass(frozen=True)
class AnomalySpan:
    """Inclusive row-index range of consecutive flagged rows."""

    start_index: int
    end_index: int
    peak_score: float

    def __post_init__(self):
        if self.start_index > self.end_index:
            raise ValueError("span start after end")


# ---------------------------------------------------------------------------
# correlation machinery
# ---------------------------------------------------------------------------


def _partial_corr_from_cov(cov: np.ndarray) -> float:
    """Partial correlation of variables 0 and 1 given the rest, via precision."""
    try:
        prec = np.linalg.inv(cov)
        if not np.all(np.isfinite(prec)):
            raise np.linalg.LinAlgError
    except np.linalg.LinAlgError:
        try:
            prec = np.linalg.inv(cov + RIDGE * np.eye(cov.shape[0]))
        except np.linalg.LinAlgError as exc:
            raise SingularData("covariance submatrix not invertible") from exc
        if not np.all(np.isfinite(prec)):
            raise SingularData("covariance submatrix not invertible")
    denom = prec[0, 0] * prec[1, 1]
    if denom <= 0:
        raise SingularData("degenerate precision diagonal")
    r = -prec[0, 1] / np.sqrt(denom)
    return float(min(1.0, max(-1.0, r)))


def partial_correlation(f: MetricFrame, x: str, y: str, z: Iterable[str] = ()) -> float:
    """Correlation of x and y after linearly regressing both on z.

    With empty z this is the plain Pearson correlation.  Near-singular
    covariance submatrices are ridge-damped (1e-8 on the diagonal) before
    SingularData is raised.
    """
    z = tuple(z)
    if x == y:
        raise ValueError("x and y must differ")
    if x in z or y in z:
        raise ValueError("x and y must not appear in the conditioning set")
    n = len(f)
    if n <= len(z) + 3:
        raise ValueError(f"need n > |z| + 3 samples, got n={n}, |z|={len(z)}")
    data = f.matrix((x, y) + z)
    if not z:
        sx = data[:, 0].std()
        sy = data[:, 1].std()
        if sx == 0.0 or sy == 0.0:
            raise SingularData("constant column in correlation")
        r = float(np.corrcoef(data[:, 0], data[:, 1])[0, 1])
        return min(1.0, max(-1.0, r))
    cov = np.cov(data, rowvar=False)
    return _partial_corr_from_cov(cov)


def fisher_z_test(r: float, n: int, cond_size: int = 0) -> CiTestResult:
    """Fisher-z transform test of a (partial) correlation.

    statistic = 0.5 * sqrt(n - cond_size - 3) * ln((1+r)/(1-r)); two-sided
    normal p-value.  |r| >= 1 (duplicate metrics) yields p = 0 by convention
    rather than an error.
    """
    if n <= cond_size + 3:
        raise ValueError(f"need n > cond_size + 3, got n={n}, cond_size={cond_size}")
    if abs(r) >= 1.0:
        return CiTestResult(statistic=float("inf"), p_value=0.0, conditioning_size=cond_size)
    stat = 0.5 * np.sqrt(n - cond_size - 3) * np.log((1.0 + r) / (1.0 - r))
    p = float(2.0 * sps.norm.sf(abs(stat)))
    return CiTestResult(statistic=float(stat), p_value=min(1.0, p), conditioning_size=cond_size)


def local_bic(f: MetricFrame, node: str, parents: Iterable[str] = ()) -> float:
    """BIC of the least-squares regression of node on parents (with intercept).

    n * ln(RSS / n) + (|parents| + 1) * ln(n); lower fits better.
    """
    parents = tuple(parents)
    if node in parents:
        raise ValueError("node cannot be its own parent")
    n = len(f)
    if n <= len(parents) + 1:
        raise ValueError(f"need n > |parents| + 1, got n={n}")
    y = f.values(node)
    design = np.column_stack([np.ones(n)] + [f.values(p) for p in parents])
    if np.linalg.matrix_rank(design) < design.shape[1]:
        raise SingularData(f"collinear parents for {node!r}: {parents}")
    coef, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
    rss = float(np.sum((y - design @ coef) ** 2))
    rss = max(rss, np.finfo(float).tiny)  # guard log(0) on perfect fits
    return float(n * np.log(rss / n) + (len(parents) + 1) * np.log(n))


# ---------------------------------------------------------------------------
# discrete CI test
# ---------------------------------------------------------------------------


def chi_square_ci(
    f: MetricFrame, x: str, y: str, z: Iterable[str] = (), min_stratum: int = 5
) -> CiTestResult:
    """Stratified Pearson chi-square test of x independent of y given z.

    Columns must hold small-integer category codes.  The statistic and the
    degrees of freedom are summed over the strata of z; strata with fewer
    than ``min_stratum`` samples are skipped.  Raises InsufficientData when
    every stratum is skipped.
    """
    z = tuple(z)
    xv = f.values(x).astype(np.int64)
    yv = f.values(y).astype(np.int64)
    if z:
        zm = np.column_stack([f.values(c).astype(np.int64) for c in z])
        _, strata = np.unique(zm, axis=0, return_inverse=True)
    else:
        strata = np.zeros(len(f), dtype=np.int64)

    stat = 0.0
    dof = 0
    used = 0
    for s in np.unique(strata):
        mask = strata == s
        if int(mask.sum()) < min_stratum:
            continue
        used += 1
        xs = xv[mask]
        ys = yv[mask]
        x_codes, xi = np.unique(xs, return_inverse=True)
        y_codes, yi = np.unique(ys, return_inverse=True)
        if len(x_codes) < 2 or len(y_codes) < 2:
            continue
        table = np.zeros((len(x_codes), len(y_codes)))
        np.add.at(table, (xi, yi), 1.0)
        total = table.sum()
        expected = np.outer(table.sum(axis=1), table.sum(axis=0)) / total
        nonzero = expected > 0
        stat += float(((table - expected) ** 2 / np.where(nonzero, expected, 1.0))[nonzero].sum())
        dof += (len(x_codes) - 1) * (len(y_codes) - 1)
    if used == 0:
        raise InsufficientData(f"all strata below {min_stratum} samples")
    p = float(sps.chi2.sf(stat, dof)) if dof > 0 else 1.0
    return CiTestResult(statistic=stat, p_value=min(1.0, p), conditioning_size=len(z))


def discretize(
    values: np.ndarray, reference: np.ndarray, bins: int = 3
) -> np.ndarray:
    """Equal-frequency bin codes with edges computed on the reference sample.

    The reference is meant to be normal-period data so that abnormal values
    cannot shift the bin edges.
    """
    if bins < 2:
        raise ValueError("need at least 2 bins")
    qs = np.quantile(reference, np.linspace(0, 1, bins + 1)[1:-1])
    return np.searchsorted(qs, values, side="right").astype(np.int64)


# ---------------------------------------------------------------------------
# two-sample machinery
# ---------------------------------------------------------------------------


def _mean_abs_cross(a_sorted: np.ndarray, b_sorted: np.ndarray) -> float:
    """Mean |a_i - b_j| over all pairs, both inputs sorted; O((n+m) log(n+m))."""
    # For each b_j: sum_i |a_i - b_j| = b_j * k - prefix(k) + (total - prefix(k)) - b_j * (n - k)
    n = a_sorted.size
    prefix = np.concatenate([[0.0], np.cumsum(a_sorted)])
    k = np.searchsorted(a_sorted, b_sorted, side="right")
    total = prefix[-1]
    sums = b_sorted * k - prefix[k] + (total - prefix[k]) - b_sorted * (n - k)
    return float(sums.sum() / (n * b_sorted.size))


def energy_distance(a: np.ndarray, b: np.ndarray) -> float:
    """One-dimensional energy distance 2 E|a-b| - E|a-a'| - E|b-b'|.

    All-pairs (V-statistic) means, so identical samples give exactly 0.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise ValueError("need at least 2 samples per side")
    a_sorted = np.sort(a)
    b_sorted = np.sort(b)
    return (
        2.0 * _mean_abs_cross(a_sorted, b_sorted)
        - _mean_abs_cross(a_sorted, a_sorted)
        - _mean_abs_cross(b_sorted, b_sorted)
    )


def permutation_pvalue(
    a: np.ndarray,
    b: np.ndarray,
    stat: Callable[[np.ndarray, np.ndarray], float],
    permutations: int = 199,
    seed: int = 0,
) -> float:
    """Add-one permutation p-value: (1 + #{perm stat >= observed}) / (permutations + 1).

    Ties count toward the numerator, so the result is never below
    1 / (permutations + 1).  The pooled sample is sorted and always split at
    the smaller group size, which makes the p-value invariant to relabeling
    the two samples when the statistic is symmetric.
    """
    if permutations < 1:
        raise ValueError("need at least one permutation")
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    observed = stat(a, b)
    pooled = np.sort(np.concatenate([a, b]))
    split = min(a.size, b.size)
    rng = np.random.default_rng(seed)
    hits = 0
    for _ in range(permutations):
        shuffled = rng.permutation(pooled)
        if stat(shuffled[:split], shuffled[split:]) >= observed:
            hits += 1
    return (1 + hits) / (permutations + 1)


# ---------------------------------------------------------------------------
# stats-threshold anomaly detector
# ---------------------------------------------------------------------------


def detect_anomalies(
    f: MetricFrame, train_fraction: float = 0.5, k_sigma: float = 3.0
) -> dict[str, list[AnomalySpan]]:
    """Median/MAD threshold detector.

    Location and scale are estimated on the leading ``train_fraction`` rows
    (MAD scaled by 1.4826; zero MAD falls back to the standard deviation).
    Rows in the remainder whose normalized deviation exceeds ``k_sigma`` are
    flagged and merged into spans.  A column whose MAD and std are both zero
    yields no anomalies.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be in (0, 1)")
    n = len(f)
    if n < 10:
        raise ValueError("need at least 10 rows")
    split = int(n * train_fraction)
    split = min(max(split, 1), n - 1)
    out: dict[str, list[AnomalySpan]] = {}
    for name in f.names:
        col = f.values(name)
        train = col[:split]
        med = float(np.median(train))
        scale = float(np.median(np.abs(train - med))) * MAD_SCALE
        if scale == 0.0:
            scale = float(train.std())
        spans: list[AnomalySpan] = []
        if scale > 0.0:
            dev = np.abs(col[split:] - med) / scale
            mask = dev > k_sigma
            if k_sigma == 0.0:
                mask = np.ones_like(mask)
            idx = np.flatnonzero(mask)
            if idx.size:
                breaks = np.flatnonzero(np.diff(idx) > 1)
                starts = np.concatenate([[0], breaks + 1])
                ends = np.concatenate([breaks, [idx.size - 1]])
                for s, e in zip(starts, ends):
                    lo, hi = int(idx[s]), int(idx[e])
                    spans.append(
                        AnomalySpan(
                            start_index=lo + split,
                            end_index=hi + split,
                            peak_score=float(dev[lo : hi + 1].max()),
                        )
                    )
        out[name] = spans
    return out


def peak_scores(spans_by_metric: Mapping[str, list[AnomalySpan]]) -> dict[str, float]:
    """Largest per-metric peak over all spans (0.0 for metrics with none)."""
    return {
        name: max((s.peak_score for s in spans), default=0.0)
        for name, spans in spans_by_metric.items()
    }
