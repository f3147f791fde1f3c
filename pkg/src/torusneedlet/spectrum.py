"""Angular power spectrum models C_l = g(l) * l^(-alpha) and their validation."""

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class _ConstantModulation:
    value: float = 1.0

    def __call__(self, l):
        return np.full_like(np.asarray(l, dtype=float), self.value)

    def describe(self) -> str:
        return "const" if self.value == 1.0 else f"const:{self.value:g}"


@dataclass(frozen=True)
class _CosineModulation:
    base: float
    amplitude: float
    frequency: float

    def __call__(self, l):
        return self.base + self.amplitude * np.cos(self.frequency * np.asarray(l, dtype=float))

    def describe(self) -> str:
        return f"cosine:{self.base:g},{self.amplitude:g},{self.frequency:g}"


@dataclass(frozen=True)
class _TabulatedModulation:
    table: tuple  # ((l, value), ...) sorted by l

    def __call__(self, l):
        ls = np.asarray(l)
        keys = np.array([row[0] for row in self.table])
        vals = np.array([row[1] for row in self.table])
        idx = np.searchsorted(keys, ls)
        bad = (idx >= keys.size) | (keys[np.minimum(idx, keys.size - 1)] != ls)
        if np.any(bad):
            missing = np.asarray(ls)[bad].flat[0]
            raise ValidationError(f"tabulated modulation has no entry for l = {missing}")
        return vals[idx]

    def describe(self) -> str:
        return f"table[{len(self.table)}]"


@dataclass(frozen=True)
class PowerSpectrum:
    """Spectrum C_l = g(|l|) * |l|^(-alpha), even in l, undefined at l = 0.

    ``g`` maps positive integer arrays to values in a fixed positive band
    [c1, c2]; ``alpha > 1`` guarantees summability.  Instances are immutable
    and safe to share across processes.
    """

    alpha: float
    g: object  # callable on integer arrays
    label: str = "const"

    def __post_init__(self):
        if not self.alpha > 1:
            raise ValidationError(f"decay exponent alpha must exceed 1, got {self.alpha}")

    @staticmethod
    def power_law(alpha: float) -> "PowerSpectrum":
        """Pure power law C_l = l^(-alpha)."""
        return PowerSpectrum(alpha=alpha, g=_ConstantModulation(), label="const")

    @staticmethod
    def cosine(alpha: float, base: float = 2.0, amplitude: float = 1.0, frequency: float = 1.0) -> "PowerSpectrum":
        """C_l = (base + amplitude*cos(frequency*l)) * l^(-alpha); needs base > |amplitude|."""
        if not base > abs(amplitude):
            raise ValidationError(
                f"cosine modulation needs base > |amplitude| to stay positive, got {base}, {amplitude}"
            )
        mod = _CosineModulation(base, amplitude, frequency)
        return PowerSpectrum(alpha=alpha, g=mod, label=mod.describe())

    @staticmethod
    def from_table(alpha: float, rows) -> "PowerSpectrum":
        """Tabulated modulation from (l, value) pairs or a file of 'l,value' lines."""
        if isinstance(rows, (str, bytes)) or hasattr(rows, "read"):
            parsed = []
            handle = open(rows) if isinstance(rows, (str, bytes)) else rows
            with handle:
                for line in handle:
                    line = line.strip()
                    if not line or line.startswith("#") or line.lower().startswith("l,"):
                        continue
                    l_txt, v_txt = line.split(",")
                    parsed.append((int(l_txt), float(v_txt)))
            rows = parsed
        table = tuple(sorted((int(l), float(v)) for l, v in rows))
        if not table:
            raise ValidationError("tabulated modulation is empty")
        mod = _TabulatedModulation(table)
        return PowerSpectrum(alpha=alpha, g=mod, label=mod.describe())

    def cl(self, l):
        """C_l for nonzero integer l (scalar or array); C_{-l} = C_l, C_0 undefined."""
        ls = np.asarray(l)
        if np.any(ls == 0):
            raise ValidationError("C_0 has no role in the model (the zero mode is fixed to 0)")
        mag = np.abs(ls).astype(float)
        out = self.g(np.abs(ls)) * mag**-self.alpha
        if np.ndim(l) == 0:
            return float(out)
        return out


@dataclass(frozen=True)
class BoundsReport:
    """Result of scanning the modulation g over 1..l_max."""

    c1_hat: float
    c2_hat: float
    ok: bool
    bad_index: int | None = None
    slope: float = 0.0


def validate_bounds(spec: PowerSpectrum, l_max: int) -> BoundsReport:
    """Scan g(1..l_max) for empirical bounds and positivity.

    A finite scan cannot certify asymptotic bounds, so a log-log slope of g
    over the scanned range is used to flag modulations that drift to 0 or to
    infinity (|slope| > 0.25 fails); bounded oscillating modulations fit a
    near-zero slope.
    """
    if l_max < 8:
        raise ValidationError(f"l_max must be at least 8, got {l_max}")
    ls = np.arange(1, l_max + 1)
    gs = np.asarray(spec.g(ls), dtype=float)
    finite = np.isfinite(gs)
    positive = gs > 0
    if not np.all(finite & positive):
        bad = int(ls[np.argmax(~(finite & positive))])
        return BoundsReport(
            c1_hat=float(np.min(gs[finite])) if np.any(finite) else np.nan,
            c2_hat=float(np.max(gs[finite])) if np.any(finite) else np.nan,
            ok=False,
            bad_index=bad,
        )
    slope = float(np.polyfit(np.log(ls), np.log(gs), 1)[0])
    ok = abs(slope) <= 0.25
    return BoundsReport(c1_hat=float(np.min(gs)), c2_hat=float(np.max(gs)), ok=ok, slope=slope)
