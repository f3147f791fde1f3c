"""Smooth dyadic windows, trigonometric needlets and exact quadrature on the circle.

The building blocks are a smooth cutoff ``phi`` (1 on [0, 1/2], 0 outside
[-1, 1]), the band window ``a`` with a(x)^2 = phi(x/2) - phi(x), and the
needlet functions

    psi_j(x) = N^(-1/2) * sum_{l != 0} a(4l/N) exp(i l x),   N = 2^(j+2),

whose translates psi_j(x - k * 2*pi/N), k = 0..N-1, together with the
constant form a tight frame for square-integrable functions on the circle
(normalized measure dx/2pi).  Everything here is deterministic and pure.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConsistencyError, ValidationError

# Largest negative value of phi(x/2) - phi(x) tolerated before declaring the
# transition profile broken (it is >= 0 analytically).
_NEGATIVE_SQUARE_TOL = 1e-12


def _bump(t):
    """exp(-1/t) for t > 0, identically 0 for t <= 0 (smooth at 0+)."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    # exp(-1/t) underflows to 0.0 for very small positive t, which is the
    # correct limit; silence the harmless underflow warning.
    with np.errstate(under="ignore"):
        out[pos] = np.exp(-1.0 / t[pos])
    return out


def phi(xi):
    """Smooth even cutoff: 1 for |xi| <= 1/2, 0 for |xi| >= 1.

    The transition on (1/2, 1) is the standard smooth-partition profile
    s(2 - 2|xi|) / (s(2 - 2|xi|) + s(2|xi| - 1)) with s(t) = exp(-1/t) for
    t > 0.  It is infinitely differentiable and strictly decreasing on the
    transition interval.

    Accepts scalars or arrays; returns the same shape.
    """
    x = np.abs(np.asarray(xi, dtype=float))
    num = _bump(2.0 - 2.0 * x)
    den = num + _bump(2.0 * x - 1.0)
    # den > 0 everywhere: the two supports overlap on (1/2, 1) and cover R.
    out = num / den
    if np.ndim(xi) == 0:
        return float(out)
    return out


def window_a(xi):
    """Band window a(xi) = sqrt(phi(xi/2) - phi(xi)), even, supported on 1/2 <= |xi| <= 2.

    Raises ConsistencyError if the profile produces a significantly negative
    square (which would indicate a broken transition function).
    """
    x = np.abs(np.asarray(xi, dtype=float))
    sq = phi(0.5 * x) - phi(x)
    if np.any(sq < -_NEGATIVE_SQUARE_TOL):
        worst = float(np.min(sq))
        raise ConsistencyError(
            f"window square phi(x/2) - phi(x) = {worst:g} < 0 beyond tolerance"
        )
    out = np.sqrt(np.clip(sq, 0.0, None))
    if np.ndim(xi) == 0:
        return float(out)
    return out


def partition_of_unity(xi, j_max=None):
    """sum_j a(xi / 2^j)^2 over j >= 0, equal to 1 for every |xi| >= 1.

    ``j_max`` defaults to the smallest level after which all further terms
    vanish (the window sees arguments below 1/2).
    """
    x = np.abs(np.asarray(xi, dtype=float))
    if j_max is None:
        top = float(np.max(x)) if x.size else 1.0
        j_max = max(0, int(np.ceil(np.log2(max(top, 1.0)))) + 1)
    total = np.zeros_like(x)
    for j in range(j_max + 1):
        total += window_a(x / 2.0**j) ** 2
    if np.ndim(xi) == 0:
        return float(total)
    return total


@dataclass(frozen=True)
class NeedletScale:
    """Resolution level j with n = 2^(j+2) needlet centers, spacing tau = 2pi/n."""

    j: int

    def __post_init__(self):
        if self.j < 0 or int(self.j) != self.j:
            raise ValidationError(f"resolution level j must be a non-negative integer, got {self.j}")

    @property
    def n(self) -> int:
        """Number of needlet centers (and coefficients) at this level."""
        return 2 ** (self.j + 2)

    @property
    def tau(self) -> float:
        """Grid step 2pi/n."""
        return 2.0 * np.pi / self.n

    def band(self):
        """Positive frequencies l that can carry weight: n/8 <= l <= n/2.

        The exact endpoints have a(4l/n) = 0 and contribute nothing; they are
        included so sums can run over closed integer ranges.
        """
        return np.arange(max(1, self.n // 8), self.n // 2 + 1)

    def band_weights(self):
        """Window values a(4l/n) for l in band()."""
        return window_a(4.0 * self.band() / self.n)


def psi_eval(scale: NeedletScale, x, k=0):
    """Evaluate the needlet psi at level ``scale.j``, translated to center k*tau.

    psi(x) = (2/sqrt(n)) * sum_{l in band} a(4l/n) cos(l x); the translate is
    psi(x - k*tau).  Real and even about its center by construction.
    """
    xs = np.asarray(x, dtype=float) - k * scale.tau
    ls = scale.band()
    ws = scale.band_weights()
    vals = (2.0 / np.sqrt(scale.n)) * (ws @ np.cos(np.multiply.outer(ls, xs)))
    if np.ndim(x) == 0:
        return float(vals)
    return vals


@dataclass(frozen=True)
class QuadratureRule:
    """Equal-weight rule exact on trigonometric polynomials of degree <= degree."""

    degree: int
    points: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    def integrate(self, f):
        """Apply the rule to a callable or to values sampled at ``points``.

        Approximates (1/2pi) * integral of f over [0, 2pi); exact whenever f
        is a trigonometric polynomial of degree <= ``degree``.
        """
        values = f(self.points) if callable(f) else np.asarray(f)
        if values.shape != self.points.shape:
            raise ValidationError(
                f"expected {self.points.size} sampled values, got shape {values.shape}"
            )
        return np.sum(self.weights * values)


def quadrature(m: int) -> QuadratureRule:
    """Rule with m+1 equispaced points 2*l*pi/(m+1) and uniform weights 1/(m+1)."""
    if m < 0 or int(m) != m:
        raise ValidationError(f"quadrature degree must be a non-negative integer, got {m}")
    count = m + 1
    points = 2.0 * np.pi * np.arange(count) / count
    weights = np.full(count, 1.0 / count)
    return QuadratureRule(degree=m, points=points, weights=weights)


def tight_frame_check(coeffs, j_max: int) -> float:
    """Energy discrepancy of the truncated frame expansion of a band-limited f.

    ``coeffs`` holds the Fourier coefficients c_l of f for l = -deg..deg in a
    complex array of odd length 2*deg+1 (index deg corresponds to l = 0).
    Returns | ||f||^2 - |<f, psi_0>|^2 - sum_{j <= j_max, k} |<f, psi_{j,k}>|^2 |
    where psi_0 is the normalized constant and norms are taken against the
    normalized measure dx/2pi.

    Frequencies above 2^j_max cannot be reproduced by levels j <= j_max and
    are rejected.
    """
    c = np.asarray(coeffs, dtype=complex)
    if c.ndim != 1 or c.size % 2 == 0:
        raise ValidationError("coeffs must be a 1-d complex array of odd length (l = -deg..deg)")
    deg = (c.size - 1) // 2
    nonzero = np.nonzero(c)[0]
    if nonzero.size:
        content = int(np.max(np.abs(nonzero - deg)))
        if content > 2**j_max:
            raise ValidationError(
                f"frequency content {content} exceeds 2^j_max = {2**j_max}; "
                "the truncated frame cannot reproduce it"
            )
    energy = float(np.sum(np.abs(c) ** 2))
    captured = float(np.abs(c[deg]) ** 2)  # <f, psi_0> = c_0
    for j in range(j_max + 1):
        scale = NeedletScale(j)
        n = scale.n
        top = min(deg, n // 2)
        ls = np.arange(-top, top + 1)
        ls = ls[ls != 0]
        weights = window_a(4.0 * ls / n)
        folded = np.zeros(n, dtype=complex)
        np.add.at(folded, ls % n, c[deg + ls] * weights)
        # <f, psi_{j,k}> = n^(-1/2) sum_l c_l a(4l/n) e^{i l k tau}
        inner = np.sqrt(n) * np.fft.ifft(folded)
        captured += float(np.sum(np.abs(inner) ** 2))
    return abs(energy - captured)


@dataclass(frozen=True)
class LocalizationProfile:
    """Fitted decay envelope of a needlet: |psi(x)| <= c * 2^(j/2) / (1 + |2^j x|)^k."""

    j: int
    k_decay: int
    x: np.ndarray = field(repr=False)
    psi_abs: np.ndarray = field(repr=False)
    bound: np.ndarray = field(repr=False)
    c_fit: float = 0.0


def localization_profile(scale: NeedletScale, k_decay: int, grid_size: int = 2**14) -> LocalizationProfile:
    """Fit the smallest constant c with |psi(x)| <= c * 2^(j/2) / (1 + |2^j x|)^k_decay on a grid.

    The envelope is the polynomial-decay bound for the sqrt(n)-normalized
    needlet; the fitted constants stay bounded across levels j for fixed
    k_decay.
    """
    if k_decay < 2:
        raise ValidationError(f"k_decay must be >= 2, got {k_decay}")
    x = np.linspace(-np.pi, np.pi, grid_size)
    psi_abs = np.abs(psi_eval(scale, x))
    envelope = 2.0 ** (scale.j / 2.0) / (1.0 + np.abs(2.0**scale.j * x)) ** k_decay
    c_fit = float(np.max(psi_abs / envelope))
    return LocalizationProfile(
        j=scale.j, k_decay=k_decay, x=x, psi_abs=psi_abs, bound=c_fit * envelope, c_fit=c_fit
    )
