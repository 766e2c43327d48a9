"""Drug-laboratory effect statistics and the predictivity error.

The predictivity error of a synthetic set against a real set matches every
real series with the synthetic series closest to it before exposure, and
averages the during-exposure error of those matches.
"""

import logging
from collections.abc import Callable, Sequence

import numpy as np
from scipy.special import betainc

from .exceptions import ShapeError, ValidationError, ZeroVarianceError
from .gan import GanModel, generate_matrix
from .models.records import RawSegment
from .models.reports import ComparisonReport, DleReport, PredictivityReport
from .models.series import AlignedSeries, NormBounds
from .preprocess import denormalize
from .utils.seeding import derive_seed, rng_for

logger = logging.getLogger(__name__)

MATCH_CHUNK = 64
DEFAULT_OVERSAMPLE = 10

SeriesLike = Sequence[AlignedSeries] | np.ndarray
Trainer = Callable[[np.ndarray, int], GanModel]


def _segment_mse(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Mean squared difference over the last axis, summed column by column.

    Scalar and broadcast calls add the columns in the same order and so
    return bit-identical values for the same pair.
    """
    diff = a - b
    acc = diff[..., 0] * diff[..., 0]
    for c in range(1, diff.shape[-1]):
        acc = acc + diff[..., c] * diff[..., c]
    return acc / diff.shape[-1]


def _check_layout(x: AlignedSeries, y: AlignedSeries) -> None:
    if (x.n_pre, x.n_during) != (y.n_pre, y.n_during):
        raise ShapeError(
            f"layouts differ: {x.n_pre}+{x.n_during} vs {y.n_pre}+{y.n_during}"
        )


def mse_pre(x: AlignedSeries, y: AlignedSeries) -> float:
    """Mean squared difference over the pre-exposure points."""
    _check_layout(x, y)
    return float(_segment_mse(x.pre, y.pre))


def mse_exp(x: AlignedSeries, y: AlignedSeries) -> float:
    """Mean squared difference over the during-exposure points."""
    _check_layout(x, y)
    return float(_segment_mse(x.during, y.during))


def as_matrix(series: SeriesLike) -> np.ndarray:
    """N x L float matrix of a list of series (matrices pass through)."""
    if isinstance(series, np.ndarray):
        return np.asarray(series, dtype=np.float64)
    if not series:
        return np.zeros((0, 0))
    return np.array([s.values for s in series], dtype=np.float64)


def _n_pre_of(*sets: SeriesLike) -> int | None:
    for s in sets:
        if not isinstance(s, np.ndarray) and len(s):
            return s[0].n_pre
    return None


def match_series(real: np.ndarray, synth: np.ndarray, n_pre: int) -> tuple[np.ndarray, np.ndarray]:
    """Closest-pre synthetic match of every real row and its during-exposure error.

    Ties go to the lowest synthetic index.

    Returns:
        (matched indices, per-series errors)
    """
    synth_pre = synth[:, :n_pre]
    matched = np.empty(len(real), dtype=np.intp)
    for start in range(0, len(real), MATCH_CHUNK):
        chunk = real[start : start + MATCH_CHUNK, :n_pre]
        distances = _segment_mse(chunk[:, None, :], synth_pre[None, :, :])
        matched[start : start + len(chunk)] = np.argmin(distances, axis=1)
    errors = _segment_mse(real[:, n_pre:], synth[matched, n_pre:])
    return matched, errors


def predictivity_error(real: SeriesLike, synth: SeriesLike, n_pre: int | None = None) -> PredictivityReport:
    """P_err of a synthetic set against a real set.

    Args:
        real: Real series S_N (or an N x L matrix)
        synth: Synthetic series S_V (or a V x L matrix)
        n_pre: Pre-exposure length, read from the series when omitted

    Returns:
        PredictivityReport; sd is the population standard deviation

    Raises:
        ValidationError: On an empty real or synthetic set
        ShapeError: If the two sets have different series lengths
    """
    if len(real) == 0 or len(synth) == 0:
        raise ValidationError(f"P_err needs non-empty sets, got N={len(real)}, V={len(synth)}")
    if not isinstance(real, np.ndarray) and not isinstance(synth, np.ndarray):
        _check_layout(real[0], synth[0])
    r, s = as_matrix(real), as_matrix(synth)
    if r.shape[1] != s.shape[1]:
        raise ShapeError(f"series lengths differ: {r.shape[1]} vs {s.shape[1]}")
    pre = n_pre if n_pre is not None else (_n_pre_of(real, synth) or r.shape[1] // 2)
    matched, errors = match_series(r, s, pre)
    return PredictivityReport(
        per_series_errors=[float(e) for e in errors],
        matched_index=[int(j) for j in matched],
        p_err=float(np.mean(errors)),
        sd=float(np.std(errors)),
        n_real=len(r),
        n_synth=len(s),
    )


def student_t_p_value(t: float, df: float) -> float:
    """Two-sided p-value of a Student-t statistic via the regularized incomplete beta."""
    return float(np.clip(betainc(df / 2.0, 0.5, df / (df + t * t)), 0.0, 1.0))


def paired_t_test(differences: np.ndarray) -> tuple[float, float, float, float]:
    """One-sample t-test of paired differences against zero.

    Returns:
        (mean difference, standard error, t statistic, two-sided p-value)

    Raises:
        ValidationError: With fewer than two differences
        ZeroVarianceError: If all differences are equal
    """
    d = np.asarray(differences, dtype=np.float64)
    n = d.size
    if n < 2:
        raise ValidationError(f"a paired t-test needs at least 2 pairs, got {n}")
    mean = float(np.mean(d))
    sd = float(np.std(d, ddof=1))
    if sd == 0.0:
        raise ZeroVarianceError(f"all {n} paired differences equal {mean}")
    se = sd / np.sqrt(n)
    t = mean / se
    return mean, float(se), float(t), student_t_p_value(t, n - 1)


def _side_means(series: Sequence[AlignedSeries] | Sequence[RawSegment], bounds: NormBounds | None) -> tuple[np.ndarray, np.ndarray]:
    pre, during = [], []
    for s in series:
        if isinstance(s, RawSegment):
            pre.append(np.mean([v for _, v in s.pre]))
            during.append(np.mean([v for _, v in s.during]))
        else:
            p, d = s.pre, s.during
            if bounds is not None:
                p, d = denormalize(p, bounds), denormalize(d, bounds)
            pre.append(np.mean(p))
            during.append(np.mean(d))
    return np.asarray(pre), np.asarray(during)


def dle_test(
    series: Sequence[AlignedSeries] | Sequence[RawSegment],
    bounds: NormBounds | None = None,
) -> DleReport:
    """Paired t-test of during-exposure vs pre-exposure means.

    Args:
        series: Aligned series or raw segments
        bounds: When given, aligned series are denormalized and the report
            is in mg/dL. Raw segments are always in mg/dL.

    Returns:
        DleReport with effect_size = mean(during mean - pre mean)

    Raises:
        ValidationError: Fewer than two series
        ZeroVarianceError: All differences identical
    """
    pre, during = _side_means(series, bounds)
    mean, se, t, p = paired_t_test(during - pre)
    raw = bool(series) and isinstance(series[0], RawSegment)
    return DleReport(
        n=len(pre),
        mean_pre=float(np.mean(pre)),
        mean_during=float(np.mean(during)),
        effect_size=mean,
        standard_error=se,
        t_stat=t,
        p_value=p,
        units="mg/dL" if raw or bounds is not None else "normalized",
    )


def protocol_sample_indices(pool_size: int, n_real: int, seed: int) -> np.ndarray:
    """Sorted uniform draw of n_real distinct pool indices."""
    if not 0 <= n_real <= pool_size:
        raise ValidationError(f"cannot draw {n_real} distinct indices from a pool of {pool_size}")
    picked = rng_for(seed, "protocol-subsample").choice(pool_size, size=n_real, replace=False)
    return np.sort(picked)


def protocol_generate(
    model: GanModel,
    largest_cluster_size: int,
    n_real: int,
    seed: int,
    oversample_factor: int = DEFAULT_OVERSAMPLE,
) -> np.ndarray:
    """Generate oversample_factor x the largest cluster, keep n_real of them.

    Returns:
        n_real x L matrix, pool order preserved

    Raises:
        ValidationError: If n_real exceeds the pool
    """
    pool_size = oversample_factor * largest_cluster_size
    if n_real > pool_size:
        raise ValidationError(f"n_real={n_real} exceeds the synthetic pool of {pool_size}")
    pool = generate_matrix(model, pool_size, derive_seed(seed, "protocol-pool"))
    return pool[protocol_sample_indices(pool_size, n_real, seed)]


def compare_models_with_sets(
    real: SeriesLike,
    sub_model: GanModel,
    total_model: GanModel,
    largest_cluster_size: int,
    seed: int,
    cluster_id: int = 0,
    oversample_factor: int = DEFAULT_OVERSAMPLE,
) -> tuple[ComparisonReport, np.ndarray, np.ndarray]:
    """compare_models that also returns the (sub, total) synthetic sets it scored."""
    r = as_matrix(real)
    n_pre = sub_model.n_pre
    sub_synth = protocol_generate(sub_model, largest_cluster_size, len(r), seed, oversample_factor)
    total_synth = protocol_generate(total_model, largest_cluster_size, len(r), seed, oversample_factor)
    sub = predictivity_error(r, sub_synth, n_pre)
    total = predictivity_error(r, total_synth, n_pre)

    p_value: float | None = None
    zero_variance = False
    if len(r) >= 2:
        diffs = np.asarray(sub.per_series_errors) - np.asarray(total.per_series_errors)
        try:
            _, _, _, p_value = paired_t_test(diffs)
        except ZeroVarianceError:
            logger.warning("cluster %d: identical per-series errors, p-value set to 1", cluster_id)
            p_value, zero_variance = 1.0, True
    report = ComparisonReport(
        cluster_id=cluster_id, sub=sub, total=total, p_value=p_value, zero_variance=zero_variance
    )
    return report, sub_synth, total_synth


def compare_models(
    real: SeriesLike,
    sub_model: GanModel,
    total_model: GanModel,
    largest_cluster_size: int,
    seed: int,
    cluster_id: int = 0,
    oversample_factor: int = DEFAULT_OVERSAMPLE,
) -> ComparisonReport:
    """Score a subGAN and the totalGAN on the same real series.

    Both synthetic sets come from protocol_generate with the same seed.
    The p-value is a paired two-sided t-test on sub - total per-series
    errors; it is None for fewer than two real series, and 1 with
    zero_variance set when all differences are equal.
    """
    report, _, _ = compare_models_with_sets(
        real, sub_model, total_model, largest_cluster_size, seed, cluster_id, oversample_factor
    )
    return report


def random_cluster_indices(n: int, cluster_sizes: Sequence[int], seed: int) -> list[np.ndarray]:
    """One sorted uniform subset per size, drawn independently."""
    subsets = []
    for i, size in enumerate(cluster_sizes):
        if not 0 < size <= n:
            raise ValidationError(f"random cluster of size {size} from a cohort of {n}")
        subsets.append(np.sort(rng_for(seed, "random-cluster", i).choice(n, size=size, replace=False)))
    return subsets


def random_cluster_baseline(
    series: SeriesLike,
    cluster_sizes: Sequence[int],
    trainer: Trainer,
    total_model: GanModel,
    largest_cluster_size: int,
    seed: int,
    oversample_factor: int = DEFAULT_OVERSAMPLE,
) -> list[ComparisonReport]:
    """Random clusters of the clinical sizes, each with its own subGAN.

    Args:
        series: Whole cohort
        cluster_sizes: One random cluster per size
        trainer: Trains a subGAN on a matrix of series; receives the cluster index
        total_model: GAN trained on the whole cohort
        largest_cluster_size: Pool sizing for protocol_generate
        seed: Seed of the subset draws and the comparisons

    Returns:
        One ComparisonReport per size, cluster_id = position in cluster_sizes
    """
    x = as_matrix(series)
    reports = []
    for i, idx in enumerate(random_cluster_indices(len(x), cluster_sizes, seed)):
        subset = x[idx]
        sub_model = trainer(subset, i)
        reports.append(
            compare_models(
                subset,
                sub_model,
                total_model,
                largest_cluster_size,
                derive_seed(seed, "random-compare", i),
                cluster_id=i,
                oversample_factor=oversample_factor,
            )
        )
    return reports
