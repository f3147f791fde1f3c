"""Skewness/kurtosis statistics of needlet coefficients and their variances.

With beta^ = beta / sigma the normalized coefficients, the test statistics are

    S = n^(-1/2) * sum_k beta^_k^3,      U = n^(-1/2) * sum_k (beta^_k^4 - 3),

both centered under Gaussianity.  Their exact variances are triple/fourfold
sums of C_l a(4l/n)^2 products against the Fejer kernel.  Because the kernel
vanishes at Fourier frequencies except at multiples of n, only index tuples
with l_1 + ... + l_p in {0, +-n, +-2n} survive, so the sums reduce to a few
values of iterated self-convolutions of the windowed spectrum.  Three
independent routes are provided for each variance:

  * the convolution fast path (used everywhere),
  * the literal brute-force kernel sum (small n only),
  * the Gaussian moment expansion through the coefficient covariances.

Plug-in variance estimators replace C_l by |w_l|^2 with multiplicity
corrections 1/delta, where delta is the product of factorials of group sizes
among equal |l| (the moments of the unit exponentials |w_l|^2 / C_l).  The
corrections are applied through sums over coincidence patterns so the
convolution fast path survives; brute-force counterparts validate them.
"""

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np
from scipy import signal
from scipy import stats as spstats

from .coeffs import (
    WaveletCoefficients,
    coeff_covariance_lags,
    coeff_variance,
    coeff_variance_estimate,
    empirical_spectrum,
    needlet_coeffs,
    needlet_coeffs_from_samples,
)
from .errors import ValidationError
from .frame import NeedletScale
from .spectrum import PowerSpectrum

_TWO_PI = 2.0 * np.pi

# np.convolve is exact-order arithmetic and cheap for short profiles; FFT
# convolution takes over for the per-replication estimator path at large n.
_DIRECT_CONV_LIMIT = 600


def fejer_kernel(n: int, t):
    """K_n(t) = sin(n t / 2)^2 / (2 pi n sin(t/2)^2), with K_n = n/2pi at t = 0 mod 2pi.

    Vanishes at the Fourier frequencies 2 pi l / n unless l is a multiple
    of n.
    """
    t = np.asarray(t, dtype=float)
    s2 = np.sin(0.5 * t) ** 2
    num = np.sin(0.5 * n * t) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        out = num / (_TWO_PI * n * s2)
    out = np.where(s2 == 0.0, n / _TWO_PI, out)
    if np.ndim(t) == 0:
        return float(out)
    return out


def delta_multiplicity(values) -> int:
    """Product over groups of equal |l| of (group size)!.

    Equals E prod |w_l|^2 / C_l for independent unit exponentials sharing a
    factor whenever |l| coincides; 1 for all-distinct, 2 for one pair, 6 for
    a triple, 24 for a quadruple.
    """
    values = list(values)
    if not values:
        raise ValidationError("delta_multiplicity needs a nonempty multiset")
    counts = Counter(abs(int(v)) for v in values)
    out = 1
    for c in counts.values():
        out *= math.factorial(c)
    return out


# ---------------------------------------------------------------------------
# profile and convolution machinery


def _convolve(a, b):
    if min(a.size, b.size) <= _DIRECT_CONV_LIMIT:
        return np.convolve(a, b)
    return signal.fftconvolve(a, b)


def _coincidence_weight(u_pos, band, block_size: int, n: int):
    """Sum over l-blocks of common magnitude: W_b(x) = sum_q u_q^b #{signs s: q*sum(s) = x}.

    Returned as an array of length 2*b*(n//2)+1 with offset b*(n//2); the
    b = 1 case is the signed profile itself.
    """
    half = block_size * (n // 2)
    out = np.zeros(2 * half + 1)
    powers = u_pos**block_size
    for heads in range(block_size + 1):
        s = 2 * heads - block_size
        np.add.at(out, half + s * band, math.comb(block_size, heads) * powers)
    return out


def _read_targets(arr, offset: int, targets) -> float:
    total = 0.0
    for t in targets:
        i = offset + t
        if 0 <= i < arr.size:
            total += float(arr[i])
    return total


def _model_profile(spec: PowerSpectrum, scale: NeedletScale):
    band = scale.band()
    return spec.cl(band) * scale.band_weights() ** 2, band


def _empirical_profile(w, scale: NeedletScale):
    w = np.asarray(w)
    band = scale.band()
    if w.size - 1 < band[-1]:
        raise ValidationError(f"need spectral coefficients up to l = {band[-1]}, got {w.size - 1}")
    return np.abs(w[band]) ** 2 * scale.band_weights() ** 2, band


def _signed_values(u_pos, band):
    """Windowed spectrum on the signed band (for literal kernel sums)."""
    return np.concatenate([u_pos[::-1], u_pos]), np.concatenate([-band[::-1], band])


# ---------------------------------------------------------------------------
# theoretical variances: convolution fast path


def skewness_variance(spec: PowerSpectrum, scale: NeedletScale) -> float:
    """Variance of S via the surviving residues l1+l2+l3 in {0, +-n}."""
    n = scale.n
    half = n // 2
    u_pos, band = _model_profile(spec, scale)
    sigma2 = coeff_variance(spec, scale)
    p = _coincidence_weight(u_pos, band, 1, n)
    c3 = _convolve(_convolve(p, p), p)
    total = _read_targets(c3, 3 * half, (0, n, -n))
    return 6.0 * total / (sigma2**3 * n**2)


def kurtosis_variance(spec: PowerSpectrum, scale: NeedletScale) -> tuple[float, float]:
    """The two variance components of U.

    The first is the single sum 72/(sigma^4 n) * sum_l C_l^2 a(4l/n)^4 (the
    only pairs surviving the kernel are l2 = -l1); the second reduces the
    fourfold kernel sum to residues l1+..+l4 in {0, +-n, +-2n}.
    """
    n = scale.n
    half = n // 2
    u_pos, band = _model_profile(spec, scale)
    sigma2 = coeff_variance(spec, scale)
    p = _coincidence_weight(u_pos, band, 1, n)
    var1 = 72.0 / (sigma2**2 * n) * float(np.sum(p**2))
    c2 = _convolve(p, p)
    c4 = _convolve(c2, c2)
    total = _read_targets(c4, 4 * half, (0, n, -n, 2 * n, -2 * n))
    var2 = 24.0 * total / (sigma2**4 * n**3)
    return var1, var2


# ---------------------------------------------------------------------------
# theoretical variances: independent oracles


def skewness_variance_bruteforce(spec: PowerSpectrum, scale: NeedletScale) -> float:
    """Literal triple kernel sum over the signed band; O(n^3), n <= 64."""
    n = scale.n
    if n > 64:
        raise ValidationError(f"brute-force skewness variance is limited to n <= 64, got {n}")
    u_pos, band = _model_profile(spec, scale)
    vals, ls = _signed_values(u_pos, band)
    sums = (
        ls[:, None, None] + ls[None, :, None] + ls[None, None, :]
    ) * scale.tau
    prods = vals[:, None, None] * vals[None, :, None] * vals[None, None, :]
    total = float(np.sum(prods * fejer_kernel(n, sums)))
    sigma2 = coeff_variance(spec, scale)
    return 12.0 * np.pi * total / (sigma2**3 * n**3)


def kurtosis_variance_bruteforce(spec: PowerSpectrum, scale: NeedletScale) -> tuple[float, float]:
    """Literal double and fourfold kernel sums; O(n^4), n <= 32."""
    n = scale.n
    if n > 32:
        raise ValidationError(f"brute-force kurtosis variance is limited to n <= 32, got {n}")
    u_pos, band = _model_profile(spec, scale)
    vals, ls = _signed_values(u_pos, band)
    sigma2 = coeff_variance(spec, scale)
    pair_sums = (ls[:, None] + ls[None, :]) * scale.tau
    pair_prods = vals[:, None] * vals[None, :]
    var1 = (
        72.0 / sigma2**2 * _TWO_PI / n**2 * float(np.sum(pair_prods * fejer_kernel(n, pair_sums)))
    )
    quad_sums = (
        ls[:, None, None, None]
        + ls[None, :, None, None]
        + ls[None, None, :, None]
        + ls[None, None, None, :]
    ) * scale.tau
    quad_prods = (
        vals[:, None, None, None]
        * vals[None, :, None, None]
        * vals[None, None, :, None]
        * vals[None, None, None, :]
    )
    var2 = (
        24.0 / sigma2**4 * _TWO_PI / n**4 * float(np.sum(quad_prods * fejer_kernel(n, quad_sums)))
    )
    return var1, var2


def skewness_variance_via_covariance(spec: PowerSpectrum, scale: NeedletScale) -> float:
    """E S^2 from the Gaussian moment expansion: 6/sigma^6 * sum_dk r(dk)^3."""
    r = coeff_covariance_lags(spec, scale)
    sigma2 = r[0]
    return float(6.0 * np.sum(r**3) / sigma2**3)


def kurtosis_variance_via_covariance(spec: PowerSpectrum, scale: NeedletScale) -> tuple[float, float]:
    """E U^2 components from the moment expansion: 72/sigma^4 sum r^2 and 24/sigma^8 sum r^4."""
    r = coeff_covariance_lags(spec, scale)
    sigma2 = r[0]
    return (
        float(72.0 * np.sum(r**2) / sigma2**2),
        float(24.0 * np.sum(r**4) / sigma2**4),
    )


# ---------------------------------------------------------------------------
# estimated (plug-in) variances with multiplicity corrections


def _estimated_skew_from_profile(u_pos, band, scale: NeedletScale, sigma2_hat: float) -> float:
    n = scale.n
    half = n // 2
    p = _coincidence_weight(u_pos, band, 1, n)
    w2 = _coincidence_weight(u_pos, band, 2, n)
    w3 = _coincidence_weight(u_pos, band, 3, n)
    t3 = _convolve(_convolve(p, p), p) - 1.5 * _convolve(w2, p) + (2.0 / 3.0) * w3
    total = _read_targets(t3, 3 * half, (0, n, -n))
    return 6.0 * total / (sigma2_hat**3 * n**2)


def _estimated_kurt_from_profile(u_pos, band, scale: NeedletScale, sigma2_hat: float):
    n = scale.n
    half = n // 2
    var1 = 72.0 / (sigma2_hat**2 * n) * float(np.sum(u_pos**2))
    p = _coincidence_weight(u_pos, band, 1, n)
    w2 = _coincidence_weight(u_pos, band, 2, n)
    w3 = _coincidence_weight(u_pos, band, 3, n)
    w4 = _coincidence_weight(u_pos, band, 4, n)
    c2 = _convolve(p, p)
    t4 = (
        _convolve(c2, c2)
        - 3.0 * _convolve(w2, c2)
        + 0.75 * _convolve(w2, w2)
        + (8.0 / 3.0) * _convolve(w3, p)
        - 1.375 * w4
    )
    total = _read_targets(t4, 4 * half, (0, n, -n, 2 * n, -2 * n))
    var2 = 24.0 * total / (sigma2_hat**4 * n**3)
    return var1, var2


def skewness_variance_estimate(w, scale: NeedletScale, sigma2_hat=None) -> float:
    """Plug-in variance of S from spectral coefficients w, with 1/delta weights.

    The all-distinct bulk keeps the convolution structure; tuples with
    coinciding |l| enter through the coincidence-pattern sums, each pattern
    weighted so every tuple carries exactly 1/delta.
    """
    u_pos, band = _empirical_profile(w, scale)
    if sigma2_hat is None:
        sigma2_hat = coeff_variance_estimate(w, scale)
    if sigma2_hat <= 0:
        raise ValidationError("estimated coefficient variance must be positive")
    return _estimated_skew_from_profile(u_pos, band, scale, sigma2_hat)


def kurtosis_variance_estimate(w, scale: NeedletScale, sigma2_hat=None) -> tuple[float, float]:
    """Plug-in variance components of U with 1/delta weights (see skewness version)."""
    u_pos, band = _empirical_profile(w, scale)
    if sigma2_hat is None:
        sigma2_hat = coeff_variance_estimate(w, scale)
    if sigma2_hat <= 0:
        raise ValidationError("estimated coefficient variance must be positive")
    return _estimated_kurt_from_profile(u_pos, band, scale, sigma2_hat)


def _delta_from_sorted_magnitudes(mags):
    """Vectorized delta over tuples; ``mags`` has shape (tuples, p), rows sorted."""
    p = mags.shape[-1]
    if p == 2:
        return np.where(mags[:, 0] == mags[:, 1], 2.0, 1.0)
    eq = mags[:, 1:] == mags[:, :-1]
    if p == 3:
        e1, e2 = eq[:, 0], eq[:, 1]
        return 1.0 + e1 + e2 + 3.0 * (e1 & e2)
    if p == 4:
        table = np.array([1.0, 2.0, 2.0, 6.0, 2.0, 4.0, 6.0, 24.0])
        idx = eq[:, 0] * 4 + eq[:, 1] * 2 + eq[:, 2]
        return table[idx]
    raise ValidationError(f"unsupported tuple length {p}")


def skewness_variance_estimate_bruteforce(w, scale: NeedletScale, sigma2_hat=None) -> float:
    """Literal delta-weighted triple kernel sum; O(n^3), n <= 32."""
    n = scale.n
    if n > 32:
        raise ValidationError(f"brute-force estimator is limited to n <= 32, got {n}")
    u_pos, band = _empirical_profile(w, scale)
    if sigma2_hat is None:
        sigma2_hat = coeff_variance_estimate(w, scale)
    vals, ls = _signed_values(u_pos, band)
    grids = np.meshgrid(ls, ls, ls, indexing="ij")
    flat = np.stack([g.ravel() for g in grids], axis=-1)
    deltas = _delta_from_sorted_magnitudes(np.sort(np.abs(flat), axis=-1))
    prods = (vals[:, None, None] * vals[None, :, None] * vals[None, None, :]).ravel()
    kern = fejer_kernel(n, flat.sum(axis=-1) * scale.tau)
    total = float(np.sum(prods * kern / deltas))
    return 12.0 * np.pi * total / (sigma2_hat**3 * n**3)


def kurtosis_variance_estimate_bruteforce(w, scale: NeedletScale, sigma2_hat=None):
    """Literal delta-weighted double and fourfold kernel sums; O(n^4), n <= 32."""
    n = scale.n
    if n > 32:
        raise ValidationError(f"brute-force estimator is limited to n <= 32, got {n}")
    u_pos, band = _empirical_profile(w, scale)
    if sigma2_hat is None:
        sigma2_hat = coeff_variance_estimate(w, scale)
    vals, ls = _signed_values(u_pos, band)

    pair_grids = np.meshgrid(ls, ls, indexing="ij")
    pair_flat = np.stack([g.ravel() for g in pair_grids], axis=-1)
    pair_delta = _delta_from_sorted_magnitudes(np.sort(np.abs(pair_flat), axis=-1))
    pair_prods = (vals[:, None] * vals[None, :]).ravel()
    pair_kern = fejer_kernel(n, pair_flat.sum(axis=-1) * scale.tau)
    var1 = (
        72.0
        / sigma2_hat**2
        * _TWO_PI
        / n**2
        * float(np.sum(pair_prods * pair_kern / pair_delta))
    )

    quad_grids = np.meshgrid(ls, ls, ls, ls, indexing="ij")
    quad_flat = np.stack([g.ravel() for g in quad_grids], axis=-1)
    quad_delta = _delta_from_sorted_magnitudes(np.sort(np.abs(quad_flat), axis=-1))
    quad_prods = (
        vals[:, None, None, None]
        * vals[None, :, None, None]
        * vals[None, None, :, None]
        * vals[None, None, None, :]
    ).ravel()
    quad_kern = fejer_kernel(n, quad_flat.sum(axis=-1) * scale.tau)
    var2 = (
        24.0
        / sigma2_hat**4
        * _TWO_PI
        / n**4
        * float(np.sum(quad_prods * quad_kern / quad_delta))
    )
    return var1, var2


# ---------------------------------------------------------------------------
# statistics, variance sets and studentization


@dataclass(frozen=True)
class TestStatistics:
    """Sample mean, third- and fourth-moment sums of the normalized coefficients.

    ``normalization`` records which scale divided the coefficients: the model
    variance ("model") or the plug-in estimate ("plugin").  The distinction
    matters for the kurtosis statistic: plug-in normalization pins the
    empirical second moment at one exactly, which removes the quadratic
    fluctuation component of U.
    """

    n: int
    mean: float
    skewness: float
    kurtosis: float
    normalization: str = "model"


@dataclass(frozen=True)
class VarianceSet:
    """Variances of S and of the two components of U; mode records their origin."""

    skew: float
    kurt1: float
    kurt2: float
    mode: str = "theoretical"

    @property
    def kurt(self) -> float:
        return self.kurt1 + self.kurt2


@dataclass(frozen=True)
class StudentizedReport:
    """Test statistics with z-scores and two-sided normal p-values."""

    n: int
    mean: float
    skewness: float
    kurtosis: float
    variances: VarianceSet
    z_skew: float
    z_kurt: float
    p_skew: float
    p_kurt: float
    p_joint: float
    mode: str
    seed: object = None


def coeff_stats(wc: WaveletCoefficients, sigma2=None, normalization: str = "model") -> TestStatistics:
    """Compute (mean, S, U) from a coefficient vector, normalizing by sigma2.

    ``sigma2`` defaults to the variance recorded on the coefficients;
    ``normalization`` states whether that variance is the model value or a
    plug-in estimate (see TestStatistics).
    """
    if normalization not in ("model", "plugin"):
        raise ValidationError(f"unknown normalization {normalization!r}")
    s2 = wc.sigma2 if sigma2 is None else sigma2
    if not s2 > 0:
        raise ValidationError("coefficient variance must be positive to normalize")
    bh = wc.beta / np.sqrt(s2)
    n = wc.scale.n
    root = np.sqrt(n)
    # explicit multiplies keep the exact sign symmetry S(-beta) = -S(beta)
    bh2 = bh * bh
    return TestStatistics(
        n=n,
        mean=float(np.mean(bh)),
        skewness=float(np.sum(bh2 * bh) / root),
        kurtosis=float(np.sum(bh2 * bh2 - 3.0) / root),
        normalization=normalization,
    )


def sample_mean(wc: WaveletCoefficients, sigma2=None) -> float:
    """(1/n) sum of normalized coefficients; 0 to rounding for exact-spectral input."""
    return coeff_stats(wc, sigma2).mean


def skewness_stat(wc: WaveletCoefficients, sigma2=None) -> float:
    return coeff_stats(wc, sigma2).skewness


def kurtosis_stat(wc: WaveletCoefficients, sigma2=None) -> float:
    return coeff_stats(wc, sigma2).kurtosis


def theoretical_variances(spec: PowerSpectrum, scale: NeedletScale) -> VarianceSet:
    k1, k2 = kurtosis_variance(spec, scale)
    return VarianceSet(skew=skewness_variance(spec, scale), kurt1=k1, kurt2=k2, mode="theoretical")


def estimated_variances(w, scale: NeedletScale, sigma2_hat=None) -> VarianceSet:
    if sigma2_hat is None:
        sigma2_hat = coeff_variance_estimate(w, scale)
    k1, k2 = kurtosis_variance_estimate(w, scale, sigma2_hat)
    return VarianceSet(
        skew=skewness_variance_estimate(w, scale, sigma2_hat), kurt1=k1, kurt2=k2, mode="estimated"
    )


def studentize(stats: TestStatistics, varset: VarianceSet, seed=None) -> StudentizedReport:
    """z-scores and two-sided p-values; joint p through a Sidak-corrected max test.

    The kurtosis denominator follows the normalization of the statistics:
    model-normalized U carries both variance components, while plug-in
    normalization pins the empirical second moment of the coefficients at one
    exactly, removing the quadratic fluctuation of U (whose variance is
    kurt1) and leaving the fourth-order part with variance kurt2.  The
    skewness z is unaffected: the plug-in scale cancels between S and its
    estimated variance.
    """
    if not (varset.skew > 0 and varset.kurt > 0):
        raise ValidationError("variances must be strictly positive to studentize")
    kurt_denominator = varset.kurt2 if stats.normalization == "plugin" else varset.kurt
    z_s = stats.skewness / math.sqrt(varset.skew)
    z_u = stats.kurtosis / math.sqrt(kurt_denominator)
    p_s = 2.0 * float(spstats.norm.sf(abs(z_s)))
    p_u = 2.0 * float(spstats.norm.sf(abs(z_u)))
    p_joint = 1.0 - (1.0 - min(p_s, p_u)) ** 2
    return StudentizedReport(
        n=stats.n,
        mean=stats.mean,
        skewness=stats.skewness,
        kurtosis=stats.kurtosis,
        variances=varset,
        z_skew=z_s,
        z_kurt=z_u,
        p_skew=p_s,
        p_kurt=p_u,
        p_joint=p_joint,
        mode=varset.mode,
        seed=seed,
    )


# ---------------------------------------------------------------------------
# full pipelines


def report_from_field(fld, scale: NeedletScale, mode: str = "exact", seed=None) -> StudentizedReport:
    """Full test report from spectral data.

    ``mode='exact'`` normalizes by the model variance and divides by the
    theoretical variances (requires the field to carry its spectrum).
    ``mode='studentized'`` divides by the estimated variances; the
    coefficients are normalized by the model variance when the spectrum is
    known and by the plug-in estimate otherwise (with the matching kurtosis
    denominator, see ``studentize``).
    """
    if mode == "exact":
        if fld.spectrum is None:
            raise ValidationError("exact mode needs the generating spectrum on the field")
        wc = needlet_coeffs(fld, scale)
        stats = coeff_stats(wc, coeff_variance(fld.spectrum, scale))
        varset = theoretical_variances(fld.spectrum, scale)
    elif mode == "studentized":
        wc = needlet_coeffs(fld, scale)
        sigma2_hat = coeff_variance_estimate(fld.w, scale)
        if fld.spectrum is not None:
            stats = coeff_stats(wc, coeff_variance(fld.spectrum, scale), normalization="model")
        else:
            stats = coeff_stats(wc, sigma2_hat, normalization="plugin")
        varset = estimated_variances(fld.w, scale, sigma2_hat)
    else:
        raise ValidationError(f"unknown mode {mode!r}; expected 'exact' or 'studentized'")
    return studentize(stats, varset, seed=seed)


def report_from_samples(samples, scale: NeedletScale, spectrum=None, seed=None) -> StudentizedReport:
    """Studentized report from grid samples (the discrete-sampling pipeline).

    Variances are always estimated from the empirical spectrum of the
    samples.  When the generating ``spectrum`` is supplied (simulation
    studies), coefficients are normalized by the model variance as in the
    studentized limit theorem; otherwise the plug-in scale is used.
    """
    wc = needlet_coeffs_from_samples(samples, scale)
    emp = empirical_spectrum(samples, scale.n // 2)
    sigma2_hat = coeff_variance_estimate(emp.w, scale)
    if spectrum is not None:
        stats = coeff_stats(wc, coeff_variance(spectrum, scale), normalization="model")
    else:
        stats = coeff_stats(wc, sigma2_hat, normalization="plugin")
    varset = estimated_variances(emp.w, scale, sigma2_hat)
    return studentize(stats, varset, seed=seed)


def report_from_coeffs(wc: WaveletCoefficients, seed=None) -> StudentizedReport:
    """Studentized report from a bare coefficient vector.

    Every plug-in sum depends on the spectrum only through
    |w_l|^2 a(4l/n)^2, which the coefficient vector determines exactly (it is
    the squared magnitude of the inverse transform of beta), so the full
    studentized pipeline is available even without spectral data.
    """
    n = wc.scale.n
    spectrum_side = np.fft.fft(wc.beta) / np.sqrt(n)
    band = wc.scale.band()
    u_pos = np.abs(spectrum_side[band]) ** 2
    sigma2_hat = float(2.0 / n * np.sum(u_pos))
    if not sigma2_hat > 0:
        raise ValidationError("coefficient vector carries no energy in the band")
    stats = coeff_stats(wc, sigma2_hat, normalization="plugin")
    k1, k2 = _estimated_kurt_from_profile(u_pos, band, wc.scale, sigma2_hat)
    varset = VarianceSet(
        skew=_estimated_skew_from_profile(u_pos, band, wc.scale, sigma2_hat),
        kurt1=k1,
        kurt2=k2,
        mode="estimated",
    )
    return studentize(stats, varset, seed=seed)
