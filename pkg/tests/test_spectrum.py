"""Power spectrum model tests."""

import numpy as np
import pytest

from torusneedlet import PowerSpectrum, ValidationError, validate_bounds


class TestCl:
    def test_pure_power_law(self):
        spec = PowerSpectrum.power_law(4.0)
        assert spec.cl(2) == pytest.approx(1.0 / 16.0, rel=1e-15)

    def test_even_in_l(self):
        spec = PowerSpectrum.power_law(3.0)
        assert spec.cl(-3) == spec.cl(3)

    def test_cosine_modulation(self):
        spec = PowerSpectrum.cosine(2.0, base=2.0, amplitude=1.0, frequency=1.0)
        assert spec.cl(5) == pytest.approx((2.0 + np.cos(5.0)) / 25.0, rel=1e-14)

    def test_zero_mode_rejected(self):
        spec = PowerSpectrum.power_law(2.0)
        with pytest.raises(ValidationError):
            spec.cl(0)
        with pytest.raises(ValidationError):
            spec.cl(np.array([1, 0, 2]))

    def test_vectorized(self):
        spec = PowerSpectrum.power_law(4.0)
        ls = np.array([1, 2, -2, 4])
        assert spec.cl(ls) == pytest.approx([1.0, 1 / 16, 1 / 16, 1 / 256])

    def test_alpha_must_exceed_one(self):
        with pytest.raises(ValidationError):
            PowerSpectrum.power_law(1.0)

    def test_cosine_must_stay_positive(self):
        with pytest.raises(ValidationError):
            PowerSpectrum.cosine(2.0, base=1.0, amplitude=1.0)


class TestTabulated:
    def test_file_roundtrip(self, tmp_path):
        path = tmp_path / "g.csv"
        path.write_text("l,value\n1,2.0\n2,2.5\n3,1.5\n")
        spec = PowerSpectrum.from_table(3.0, str(path))
        assert spec.cl(2) == pytest.approx(2.5 / 8.0)
        with pytest.raises(ValidationError):
            spec.cl(7)

    def test_from_pairs(self):
        spec = PowerSpectrum.from_table(2.0, [(1, 1.0), (2, 3.0)])
        assert spec.cl(2) == pytest.approx(0.75)

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            PowerSpectrum.from_table(2.0, [])


class TestValidateBounds:
    def test_constant(self):
        report = validate_bounds(PowerSpectrum.power_law(4.0), 100)
        assert report.ok
        assert report.c1_hat == report.c2_hat == 1.0

    def test_cosine(self):
        report = validate_bounds(PowerSpectrum.cosine(2.0, 2.0, 1.0, 1.0), 10**4)
        assert report.ok
        assert report.c1_hat >= 1.0
        assert report.c2_hat <= 3.0

    def test_decaying_modulation_flagged(self):
        spec = PowerSpectrum(alpha=2.0, g=lambda l: 1.0 / np.asarray(l, dtype=float), label="1/l")
        report = validate_bounds(spec, 10**4)
        assert not report.ok

    def test_nonpositive_value_flagged_with_index(self):
        def bad(l):
            l = np.asarray(l, dtype=float)
            return np.where(l == 5, -1.0, 1.0)

        report = validate_bounds(PowerSpectrum(alpha=2.0, g=bad, label="bad"), 100)
        assert not report.ok
        assert report.bad_index == 5

    def test_small_lmax_rejected(self):
        with pytest.raises(ValidationError):
            validate_bounds(PowerSpectrum.power_law(2.0), 7)
