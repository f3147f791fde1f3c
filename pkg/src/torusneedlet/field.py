"""Spectral synthesis of stationary Gaussian fields on the circle and grid evaluation."""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConsistencyError, ValidationError
from .spectrum import PowerSpectrum

_REALITY_TOL = 1e-10


@dataclass(frozen=True)
class SpectralField:
    """One realization, stored as Fourier coefficients w_l for l = 0..l_max.

    The zero mode is fixed to 0 and negative frequencies are implied by
    Hermitian symmetry w_{-l} = conj(w_l), so the synthesized field
    X(theta) = sum_l w_l e^{i l theta} is real.  Under the Gaussian model the
    real and imaginary parts of each w_l are independent N(0, C_l/2), hence
    E|w_l|^2 = C_l and |w_l|^2 / C_l is a unit exponential.
    """

    w: np.ndarray = field(repr=False)  # complex, index l; w[0] == 0
    spectrum: PowerSpectrum | None = None
    seed: object = None

    @property
    def l_max(self) -> int:
        return self.w.size - 1


@dataclass(frozen=True)
class GridSample:
    """Real field values X(2*pi*m/M) for m = 0..M-1."""

    values: np.ndarray = field(repr=False)

    @property
    def m(self) -> int:
        return self.values.size


def replication_rng(root_seed, index: int) -> np.random.Generator:
    """Independent, reproducible stream for one replication.

    Stream ``index`` is seeded by the entropy pair (root_seed, index) through
    numpy's SeedSequence, so results do not depend on how replications are
    distributed over workers.
    """
    return np.random.default_rng([int(root_seed), int(index)])


def synthesize(spec: PowerSpectrum, l_max: int, rng) -> SpectralField:
    """Draw w_l, l = 1..l_max, with independent N(0, C_l/2) real and imaginary parts.

    ``rng`` is a numpy Generator or a seed for one; the same seed always
    produces the same coefficient stream.
    """
    if l_max < 1:
        raise ValidationError(f"l_max must be at least 1, got {l_max}")
    seed_record = None
    if not isinstance(rng, np.random.Generator):
        seed_record = rng
        rng = np.random.default_rng(rng)
    cs = spec.cl(np.arange(1, l_max + 1))
    z = rng.standard_normal((2, l_max))
    w = np.zeros(l_max + 1, dtype=complex)
    w[1:] = np.sqrt(cs / 2.0) * (z[0] + 1j * z[1])
    return SpectralField(w=w, spectrum=spec, seed=seed_record)


def evaluate_grid(fld: SpectralField, m: int) -> GridSample:
    """Evaluate X(2*pi*k/m), k = 0..m-1, by folding frequencies mod m and one inverse FFT.

    Frequencies congruent mod m land in the same bin, so undersampled fields
    (m < 2*l_max) alias exactly as the folded spectrum dictates.
    """
    if m < 1:
        raise ValidationError(f"grid size must be at least 1, got {m}")
    ls = np.arange(1, fld.l_max + 1)
    folded = np.zeros(m, dtype=complex)
    np.add.at(folded, ls % m, fld.w[1:])
    np.add.at(folded, (-ls) % m, np.conj(fld.w[1:]))
    values = np.fft.ifft(folded) * m
    residue = float(np.max(np.abs(values.imag))) if m else 0.0
    scale = max(1.0, float(np.max(np.abs(values.real))))
    if residue > _REALITY_TOL * scale:
        raise ConsistencyError(f"grid evaluation imaginary residue {residue:g} exceeds tolerance")
    return GridSample(values=values.real)
