"""Needlet coefficients of a field, their normalization and correlation structure.

The coefficient vector at level j (n = 2^(j+2) entries) is

    beta_k = n^(-1/2) * sum_{n/8 <= |l| <= n/2} w_l a(4l/n) e^{+i l k tau},

the pairing of the field with the translate psi(x - k*tau).  It is a finite
spectral sum, so it is computed exactly by one length-n inverse FFT of the
windowed coefficients rather than by numerical integration.  The same
combination applied to empirical Fourier coefficients (computed from grid
samples) reproduces the Riemann-sum coefficients identically, aliasing
included.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConsistencyError, ValidationError
from .field import GridSample, SpectralField
from .frame import NeedletScale, window_a
from .spectrum import PowerSpectrum

_REALITY_TOL = 1e-10


@dataclass(frozen=True)
class WaveletCoefficients:
    """Real coefficient vector beta_0..beta_{n-1} plus its normalizing variance."""

    scale: NeedletScale
    beta: np.ndarray = field(repr=False)
    sigma2: float = 0.0
    source: str = "exact-spectral"


@dataclass(frozen=True)
class EmpiricalSpectrum:
    """Fourier coefficients estimated from m grid samples; index l = 0..l_max_used."""

    w: np.ndarray = field(repr=False)
    m: int = 0

    @property
    def l_max(self) -> int:
        return self.w.size - 1


def _spectral_combination(w, scale: NeedletScale):
    """beta from a coefficient array w indexed by l (needs entries up to n/2)."""
    n = scale.n
    ls = scale.band()
    weights = scale.band_weights()
    folded = np.zeros(n, dtype=complex)
    np.add.at(folded, ls % n, w[ls] * weights)
    np.add.at(folded, (-ls) % n, np.conj(w[ls]) * weights)
    beta = np.sqrt(n) * np.fft.ifft(folded)
    residue = float(np.max(np.abs(beta.imag)))
    scale_mag = max(1.0, float(np.max(np.abs(beta.real))))
    if residue > _REALITY_TOL * scale_mag:
        raise ConsistencyError(f"coefficient imaginary residue {residue:g} exceeds tolerance")
    return beta.real


def needlet_coeffs(fld: SpectralField, scale: NeedletScale) -> WaveletCoefficients:
    """Exact coefficients from spectral data; requires bandwidth l_max >= n/2.

    The normalization stored in ``sigma2`` is the model variance when the
    field carries its generating spectrum, otherwise the unbiased estimate
    from the realized coefficients.
    """
    n = scale.n
    if fld.l_max < n // 2:
        raise ValidationError(
            f"field bandwidth l_max = {fld.l_max} is insufficient for level j = {scale.j}; "
            f"need l_max >= {n // 2}"
        )
    beta = _spectral_combination(fld.w, scale)
    if fld.spectrum is not None:
        sigma2 = coeff_variance(fld.spectrum, scale)
    else:
        sigma2 = coeff_variance_estimate(fld.w, scale)
    return WaveletCoefficients(scale=scale, beta=beta, sigma2=sigma2, source="exact-spectral")


def empirical_spectrum(samples: GridSample, l_max_used: int) -> EmpiricalSpectrum:
    """Fourier coefficients (1/m) sum_k X(2*pi*k/m) e^{-2*pi*i*k*l/m} for l = 0..l_max_used.

    When the true coefficients are known these satisfy the exact aliasing
    identity w~_l = sum_{k in Z} w_{l+k*m}.
    """
    m = samples.m
    if not 1 <= l_max_used <= m // 2:
        raise ValidationError(f"l_max_used must lie in [1, m/2] = [1, {m // 2}], got {l_max_used}")
    transform = np.fft.fft(samples.values) / m
    return EmpiricalSpectrum(w=transform[: l_max_used + 1].copy(), m=m)


def needlet_coeffs_from_samples(samples: GridSample, scale: NeedletScale) -> WaveletCoefficients:
    """Riemann-sum coefficients (1/m) sum_k X(2*pi*k/m) psi(2*pi*k/m - k'*tau).

    Implemented by estimating the Fourier coefficients from the samples and
    applying the exact spectral combination; the two routes agree identically
    because both reduce to the folded spectrum.  The stored ``sigma2`` is the
    estimate from the empirical spectrum.
    """
    n = scale.n
    if samples.m < n:
        raise ValidationError(
            f"grid with m = {samples.m} points is coarser than the coefficient lattice n = {n}"
        )
    emp = empirical_spectrum(samples, n // 2)
    beta = _spectral_combination(emp.w, scale)
    sigma2 = coeff_variance_estimate(emp.w, scale)
    return WaveletCoefficients(scale=scale, beta=beta, sigma2=sigma2, source="grid-aliased")


def coeff_variance(spec: PowerSpectrum, scale: NeedletScale) -> float:
    """Model variance of each coefficient: (2/n) * sum_{n/8 <= l <= n/2} C_l a(4l/n)^2."""
    ls = scale.band()
    weights2 = scale.band_weights() ** 2
    return float(2.0 / scale.n * np.sum(spec.cl(ls) * weights2))


def coeff_variance_estimate(w, scale: NeedletScale) -> float:
    """Unbiased plug-in variance (2/n) * sum |w_l|^2 a(4l/n)^2 from coefficients w.

    ``w`` is a complex array indexed by l (a SpectralField.w or
    EmpiricalSpectrum.w) with entries up to l = n/2.
    """
    w = np.asarray(w)
    n = scale.n
    if w.size - 1 < n // 2:
        raise ValidationError(
            f"need coefficients up to l = {n // 2}, got array of length {w.size}"
        )
    ls = scale.band()
    weights2 = scale.band_weights() ** 2
    return float(2.0 / n * np.sum(np.abs(w[ls]) ** 2 * weights2))


def coeff_covariance_lags(spec: PowerSpectrum, scale: NeedletScale):
    """Covariance r(dk) = E[beta_k beta_{k+dk}] for all lags dk = 0..n-1.

    r(dk) = (1/n) sum_{n/8 <= |l| <= n/2} C_l a(4l/n)^2 e^{i l tau dk}, real and
    n-periodic; evaluated for every lag with one inverse FFT.
    """
    n = scale.n
    ls = scale.band()
    vals = spec.cl(ls) * scale.band_weights() ** 2
    folded = np.zeros(n, dtype=complex)
    np.add.at(folded, ls % n, vals)
    np.add.at(folded, (-ls) % n, vals)
    return np.fft.ifft(folded).real


def coeff_correlation(spec: PowerSpectrum, scale: NeedletScale, dk):
    """Correlation of coefficients at lag dk (scalar or array of integers)."""
    r = coeff_covariance_lags(spec, scale)
    out = r[np.mod(np.asarray(dk), scale.n)] / r[0]
    if np.ndim(dk) == 0:
        return float(out)
    return out


def correlation_decay_constant(spec: PowerSpectrum, scale: NeedletScale, exponent: int = 3) -> float:
    """max over lags of |Corr(dk)| * (1 + d(dk))^exponent with d the circular lag distance.

    d(dk) = min(dk mod n, n - dk mod n) folds lags into [0, n/2]; the maximum
    staying bounded (uniformly over levels) witnesses the polynomial decay of
    coefficient correlations.
    """
    n = scale.n
    r = coeff_covariance_lags(spec, scale)
    corr = np.abs(r / r[0])
    dks = np.arange(n)
    dist = np.minimum(dks, n - dks)
    return float(np.max(corr * (1.0 + dist) ** exponent))
