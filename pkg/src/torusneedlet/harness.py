"""Monte Carlo drivers: CLT reproduction, aliasing-rate experiments, power checks.

Replications are independent work units.  Replication ``i`` always draws from
the stream seeded by (root_seed, i), and results are gathered by index, so the
pooled output is bitwise identical whatever the number of worker processes.
"""

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as spstats

from .coeffs import coeff_variance, needlet_coeffs, needlet_coeffs_from_samples
from .errors import ValidationError
from .field import GridSample, evaluate_grid, replication_rng, synthesize
from .frame import NeedletScale
from .spectrum import PowerSpectrum
from .stats import (
    VarianceSet,
    coeff_stats,
    report_from_field,
    report_from_samples,
    studentize,
    theoretical_variances,
)

_MODES = ("exact", "studentized", "grid")
_Z_CRIT_5PCT = 1.959963984540054  # two-sided 5% normal quantile
_HIST_RANGE = (-4.0, 4.0)


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of one Monte Carlo run."""

    replications: int
    j: int
    spectrum: PowerSpectrum
    mode: str = "exact"
    grid_m: int | None = None
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.replications < 1:
            raise ValidationError(f"need at least one replication, got {self.replications}")
        if self.mode not in _MODES:
            raise ValidationError(f"unknown mode {self.mode!r}; expected one of {_MODES}")
        if self.mode == "grid":
            n = NeedletScale(self.j).n
            if self.grid_m is None or self.grid_m < n:
                raise ValidationError(
                    f"grid mode needs grid_m >= n = {n}, got {self.grid_m}"
                )
        if self.workers < 1:
            raise ValidationError(f"worker count must be positive, got {self.workers}")


@dataclass(frozen=True)
class NormalityDiagnostics:
    """Summary of a z-score sample against the standard normal law."""

    count: int
    mean: float
    variance: float
    skewness: float
    excess_kurtosis: float
    ks_stat: float
    ks_pvalue: float
    clipped: int
    bin_edges: np.ndarray = field(repr=False, default=None)
    bin_counts: np.ndarray = field(repr=False, default=None)

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "mean": self.mean,
            "variance": self.variance,
            "skewness": self.skewness,
            "excess_kurtosis": self.excess_kurtosis,
            "ks_stat": self.ks_stat,
            "ks_pvalue": self.ks_pvalue,
            "clipped": self.clipped,
        }


def normality_diagnostics(values, bins: int = 30) -> NormalityDiagnostics:
    """Moments, Kolmogorov-Smirnov test vs N(0,1) and histogram counts.

    Histogram bins are equal-width over [-4, 4]; outliers are clipped into the
    end bins and their number recorded, so counts always sum to the sample
    size.
    """
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValidationError("cannot diagnose an empty sample")
    if bins < 2:
        raise ValidationError(f"need at least 2 histogram bins, got {bins}")
    lo, hi = _HIST_RANGE
    clipped = int(np.sum((values < lo) | (values > hi)))
    counts, edges = np.histogram(np.clip(values, lo, hi), bins=bins, range=(lo, hi))
    ks = spstats.kstest(values, "norm")
    return NormalityDiagnostics(
        count=values.size,
        mean=float(np.mean(values)),
        variance=float(np.var(values, ddof=1)) if values.size > 1 else 0.0,
        skewness=float(spstats.skew(values)) if values.size > 2 else 0.0,
        excess_kurtosis=float(spstats.kurtosis(values)) if values.size > 3 else 0.0,
        ks_stat=float(ks.statistic),
        ks_pvalue=float(ks.pvalue),
        clipped=clipped,
        bin_edges=edges,
        bin_counts=counts,
    )


def _mc_replication(payload):
    """One replication: synthesize, extract coefficients, test.  Pure in the payload."""
    spec, j, mode, grid_m, root_seed, rep, sigma2, varset = payload
    scale = NeedletScale(j)
    rng = replication_rng(root_seed, rep)
    if mode == "grid":
        fld = synthesize(spec, 4 * grid_m, rng)
        report = report_from_samples(evaluate_grid(fld, grid_m), scale, spectrum=spec)
    elif mode == "studentized":
        fld = synthesize(spec, scale.n // 2, rng)
        report = report_from_field(fld, scale, "studentized")
    else:
        fld = synthesize(spec, scale.n // 2, rng)
        wc = needlet_coeffs(fld, scale)
        report = studentize(coeff_stats(wc, sigma2), varset)
    return rep, report.mean, report.skewness, report.kurtosis, report.z_skew, report.z_kurt


@dataclass(frozen=True)
class McResult:
    """Per-replication statistics plus pooled normality diagnostics."""

    config: ExperimentConfig
    mean: np.ndarray = field(repr=False, default=None)
    skewness: np.ndarray = field(repr=False, default=None)
    kurtosis: np.ndarray = field(repr=False, default=None)
    z_skew: np.ndarray = field(repr=False, default=None)
    z_kurt: np.ndarray = field(repr=False, default=None)
    diagnostics_skew: NormalityDiagnostics = None
    diagnostics_kurt: NormalityDiagnostics = None


def run_mc(config: ExperimentConfig) -> McResult:
    """Run the replications (optionally across processes) and pool the z-scores.

    Theoretical variances for exact mode are computed once here and shipped
    to the workers read-only.
    """
    sigma2 = None
    varset = None
    if config.mode == "exact":
        sigma2 = coeff_variance(config.spectrum, NeedletScale(config.j))
        varset = theoretical_variances(config.spectrum, NeedletScale(config.j))
    payloads = [
        (config.spectrum, config.j, config.mode, config.grid_m, config.seed, rep, sigma2, varset)
        for rep in range(config.replications)
    ]
    rows = _execute(payloads, config.workers)
    rows.sort(key=lambda row: row[0])
    table = np.array([row[1:] for row in rows], dtype=float)
    return McResult(
        config=config,
        mean=table[:, 0].copy(),
        skewness=table[:, 1].copy(),
        kurtosis=table[:, 2].copy(),
        z_skew=table[:, 3].copy(),
        z_kurt=table[:, 4].copy(),
        diagnostics_skew=normality_diagnostics(table[:, 3]),
        diagnostics_kurt=normality_diagnostics(table[:, 4]),
    )


def _execute(payloads, workers: int):
    if workers == 1:
        return [_mc_replication(p) for p in payloads]
    chunk = max(1, len(payloads) // (8 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_mc_replication, payloads, chunksize=chunk))


@dataclass(frozen=True)
class AliasingResult:
    """Relative coefficient error per grid size and its fitted decay exponent."""

    grid_sizes: tuple
    rel_errors: np.ndarray = field(repr=False, default=None)
    fitted_exponent: float = 0.0


def run_aliasing(config: ExperimentConfig, grid_sizes) -> AliasingResult:
    """Estimate E|beta - beta~|^2 / E|beta|^2 for each grid size and fit its decay.

    Fields are synthesized with bandwidth 4 * max(grid size) so the alias tail
    in the folded spectrum is genuinely populated; the fitted exponent of the
    error against M/n should sit near -alpha.
    """
    scale = NeedletScale(config.j)
    grid_sizes = sorted(int(m) for m in grid_sizes)
    if not grid_sizes:
        raise ValidationError("need at least one grid size")
    if grid_sizes[0] < scale.n:
        raise ValidationError(
            f"grid sizes must be at least n = {scale.n}, got {grid_sizes[0]}"
        )
    l_max = 4 * grid_sizes[-1]
    num = np.zeros(len(grid_sizes))
    den = 0.0
    for rep in range(config.replications):
        rng = replication_rng(config.seed, rep)
        fld = synthesize(config.spectrum, l_max, rng)
        exact = needlet_coeffs(fld, scale).beta
        den += float(np.sum(exact**2))
        for i, m in enumerate(grid_sizes):
            approx = needlet_coeffs_from_samples(evaluate_grid(fld, m), scale).beta
            num[i] += float(np.sum((exact - approx) ** 2))
    rel = num / den
    ratios = np.array(grid_sizes, dtype=float) / scale.n
    exponent = float(np.polyfit(np.log(ratios), np.log(rel), 1)[0])
    return AliasingResult(grid_sizes=tuple(grid_sizes), rel_errors=rel, fitted_exponent=exponent)


def _transform_samples(values, variance, nonlinearity):
    """Pointwise non-Gaussian transform of grid samples.

    ``nonlinearity=None`` gives the standardized square (X^2 - EX^2)/sd(X^2);
    a float lam gives X + lam*(X^2 - EX^2), restandardized; lam = 0 returns
    the samples untouched (the Gaussian null).
    """
    if nonlinearity is not None and nonlinearity == 0.0:
        return values
    centered_sq = values**2 - variance
    if nonlinearity is None:
        return centered_sq / (math.sqrt(2.0) * variance)
    mixed = values + nonlinearity * centered_sq
    return mixed / math.sqrt(variance + 2.0 * nonlinearity**2 * variance**2)


@dataclass(frozen=True)
class AlternativeResult:
    """z-scores under an alternative generator and rejection rates at the 5% level."""

    nonlinearity: object
    z_skew: np.ndarray = field(repr=False, default=None)
    z_kurt: np.ndarray = field(repr=False, default=None)
    reject_skew: float = 0.0
    reject_kurt: float = 0.0
    reject_joint: float = 0.0


def run_alternative(config: ExperimentConfig, nonlinearity=None) -> AlternativeResult:
    """Studentized tests on transformed fields; reports empirical rejection rates.

    Each Gaussian replication is evaluated on a grid (band-limited, so the
    discrete coefficients are exact), transformed pointwise, and pushed
    through the sample-side studentized pipeline.
    """
    scale = NeedletScale(config.j)
    m = config.grid_m if config.grid_m is not None else 2 * scale.n
    # the squared field has bandwidth n, so m >= 2n keeps the pipeline alias-free
    if m < 2 * scale.n:
        raise ValidationError(f"grid must resolve the transformed band, need m >= {2 * scale.n}")
    l_max = scale.n // 2
    cs = config.spectrum.cl(np.arange(1, l_max + 1))
    variance = float(2.0 * np.sum(cs))
    z_s = np.empty(config.replications)
    z_u = np.empty(config.replications)
    p_joint = np.empty(config.replications)
    for rep in range(config.replications):
        rng = replication_rng(config.seed, rep)
        fld = synthesize(config.spectrum, l_max, rng)
        samples = evaluate_grid(fld, m)
        transformed = _transform_samples(samples.values, variance, nonlinearity)
        report = report_from_samples(GridSample(values=transformed), scale)
        z_s[rep] = report.z_skew
        z_u[rep] = report.z_kurt
        p_joint[rep] = report.p_joint
    return AlternativeResult(
        nonlinearity=nonlinearity,
        z_skew=z_s,
        z_kurt=z_u,
        reject_skew=float(np.mean(np.abs(z_s) > _Z_CRIT_5PCT)),
        reject_kurt=float(np.mean(np.abs(z_u) > _Z_CRIT_5PCT)),
        reject_joint=float(np.mean(p_joint < 0.05)),
    )


def emit_histogram(values, bins: int, path) -> None:
    """Write plot-ready histogram rows: bin_left,bin_right,count,normal_density_at_midpoint."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValidationError("refusing to write a histogram of an empty sample")
    diag = normality_diagnostics(values, bins=bins)
    mids = 0.5 * (diag.bin_edges[:-1] + diag.bin_edges[1:])
    densities = spstats.norm.pdf(mids)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["bin_left", "bin_right", "count", "normal_density_at_midpoint"])
        for left, right, count, dens in zip(
            diag.bin_edges[:-1], diag.bin_edges[1:], diag.bin_counts, densities
        ):
            writer.writerow([f"{left:.17g}", f"{right:.17g}", int(count), f"{dens:.17g}"])


def write_zscores(result: McResult, path) -> None:
    """Per-replication table (S, U, z_S, z_U); formatting is bitwise-stable."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["rep", "S_N", "U_N", "z_S", "z_U"])
        for rep in range(result.config.replications):
            writer.writerow(
                [
                    rep,
                    f"{result.skewness[rep]:.17g}",
                    f"{result.kurtosis[rep]:.17g}",
                    f"{result.z_skew[rep]:.17g}",
                    f"{result.z_kurt[rep]:.17g}",
                ]
            )
