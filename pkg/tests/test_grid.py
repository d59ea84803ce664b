import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hartree_decay.grid import (
    ComplexField,
    Symbol,
    apply_multiplier,
    boundary_mass_fraction,
    forward_transform,
    inverse_transform,
    lp_norm,
    make_grid,
    sample,
    sobolev_norm,
    spectral_l2_norm,
)


class TestMakeGrid:
    def test_spacing_and_axis(self):
        g = make_grid(1, 16, 4.0)
        assert g.spacing == 0.5
        assert g.axis[0] == -4.0 and g.axis[-1] == 3.5
        assert g.axis[8] == 0.0

    @pytest.mark.parametrize("args", [(4, 16, 1.0), (1, 15, 1.0), (1, 4, 1.0), (1, 16, 0.0), (1, 16, math.inf)])
    def test_rejects_bad_input(self, args):
        with pytest.raises(ValueError):
            make_grid(*args)

    def test_wavenumbers(self):
        g = make_grid(1, 8, math.pi)
        assert np.allclose(g.wavenumbers, [0, 1, 2, 3, -4, -3, -2, -1])


class TestFields:
    def test_nan_rejected(self):
        g = make_grid(1, 8, 1.0)
        with pytest.raises(ValueError):
            ComplexField(g, np.full(8, np.nan))

    def test_size_mismatch(self):
        g = make_grid(1, 8, 1.0)
        with pytest.raises(ValueError):
            ComplexField(g, np.zeros(9))

    def test_values_read_only(self):
        g = make_grid(1, 8, 1.0)
        f = ComplexField(g, np.ones(8))
        with pytest.raises(ValueError):
            f.values[0] = 2

    def test_arithmetic(self):
        g = make_grid(2, 8, 1.0)
        a = sample(g, {"family": "constant", "value": 2.0})
        b = sample(g, {"family": "constant", "value": 1.0})
        assert np.allclose((a - b).values, 1.0)
        assert np.allclose((a + b).values, 3.0)
        assert np.allclose((2 * b).values, 2.0)

    def test_different_grids(self):
        a = sample(make_grid(1, 8, 1.0), {"family": "constant"})
        b = sample(make_grid(1, 8, 2.0), {"family": "constant"})
        with pytest.raises(ValueError):
            a + b

    def test_unknown_family(self):
        with pytest.raises(ValueError):
            sample(make_grid(1, 8, 1.0), {"family": "lorentzian"})

    def test_nonfinite_parameter(self):
        with pytest.raises(ValueError):
            sample(make_grid(1, 8, 1.0), {"family": "gaussian", "sigma": math.nan})


class TestTransforms:
    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_constant_is_delta(self, d):
        g = make_grid(d, 16, 3.0)
        c = forward_transform(sample(g, {"family": "constant"})).coefficients
        zero = (0,) * d
        assert c[zero] == pytest.approx(g.box_volume, rel=1e-13)
        rest = np.abs(c).copy()
        rest[zero] = 0
        assert rest.max() < 1e-10

    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_gaussian_transform(self, d):
        g = make_grid(d, 64 if d < 3 else 48, 12.0 if d < 3 else 10.0)
        c = forward_transform(sample(g, {"family": "gaussian", "sigma": 1.0})).coefficients
        exact = (2 * np.pi) ** (d / 2) * np.exp(-g.k_squared / 2)
        assert np.max(np.abs(c - exact)) < 1e-10

    def test_shifted_gaussian_phase(self):
        g = make_grid(1, 128, 16.0)
        c = forward_transform(sample(g, {"family": "gaussian", "sigma": 1.0, "center": 2.0})).coefficients
        xi = g.wavenumbers
        exact = np.sqrt(2 * np.pi) * np.exp(-xi**2 / 2 - 2j * xi)
        assert np.max(np.abs(c - exact)) < 1e-10

    def test_round_trip(self):
        g = make_grid(3, 16, 5.0)
        rng = np.random.default_rng(1)
        f = ComplexField(g, rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape))
        back = inverse_transform(forward_transform(f))
        assert np.max(np.abs(back.values - f.values)) < 1e-13

    def test_parseval(self):
        g = make_grid(2, 32, 5.0)
        rng = np.random.default_rng(2)
        f = ComplexField(g, rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape))
        assert spectral_l2_norm(forward_transform(f)) == pytest.approx(lp_norm(f, 2), rel=1e-13)


class TestSymbols:
    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            Symbol("riesz")

    def test_negative_power(self):
        with pytest.raises(ValueError):
            Symbol("power", s=-1)

    def test_laplacian_of_plane_wave(self):
        g = make_grid(2, 16, math.pi)
        f = sample(g, {"family": "plane_wave", "wavevector": [2.0, -3.0]})
        out = inverse_transform(apply_multiplier(forward_transform(f), Symbol("power", s=2)))
        assert np.max(np.abs(out.values - 13 * f.values)) < 1e-11

    def test_schrodinger_free_gaussian(self):
        # e^{-it|ξ|²} applied to a gaussian equals the chirped gaussian of width² σ²+2it
        g = make_grid(1, 256, 30.0)
        f = sample(g, {"family": "gaussian", "sigma": 1.0})
        out = inverse_transform(apply_multiplier(forward_transform(f), Symbol("schrodinger", t=1.5)))
        exact = sample(g, {"family": "gaussian", "sigma": 1.0, "chirp": 1.5})
        assert np.max(np.abs(out.values - exact.values)) < 1e-10

    def test_two_thirds(self):
        g = make_grid(1, 12, 1.0)
        mask = Symbol("two_thirds").evaluate(g)
        kept = np.abs(np.fft.fftfreq(12, 1 / 12))[mask == 1]
        assert kept.max() < 4 and mask.sum() == 7


class TestNorms:
    def test_gaussian_norms(self):
        g = make_grid(3, 48, 10.0)
        f = sample(g, {"family": "gaussian", "sigma": 1.0})
        assert lp_norm(f, 2) == pytest.approx(math.pi**0.75, rel=1e-12)
        assert lp_norm(f, 1) == pytest.approx((2 * math.pi) ** 1.5, rel=1e-12)
        assert lp_norm(f, math.inf) == pytest.approx(1.0)
        # ∫e^{-3|x|²/2} = (2π/3)^{3/2}
        assert lp_norm(f, 3) == pytest.approx((2 * math.pi / 3) ** 0.5, rel=1e-12)

    def test_p_below_one(self):
        with pytest.raises(ValueError):
            lp_norm(sample(make_grid(1, 8, 1.0), {"family": "constant"}), 0.5)

    def test_sobolev_gaussian(self):
        # ‖(1+ξ²)f̂‖² for f = e^{-x²/2}: (2π)^{-1}∫2π(1+ξ²)²e^{-ξ²} = √π(1 + 1 + 3/4)
        g = make_grid(1, 128, 16.0)
        f = sample(g, {"family": "gaussian", "sigma": 1.0})
        assert sobolev_norm(f, 2) == pytest.approx(math.sqrt(math.sqrt(math.pi) * 2.75), rel=1e-12)
        assert sobolev_norm(f, 0) == pytest.approx(lp_norm(f, 2))
        with pytest.raises(ValueError):
            sobolev_norm(f, -1)

    def test_boundary_fraction(self):
        g = make_grid(1, 20, 10.0)
        v = np.zeros(20)
        v[0] = 1.0  # x = -L
        v[10] = 1.0  # x = 0
        assert boundary_mass_fraction(ComplexField(g, v)) == pytest.approx(0.5)
        assert boundary_mass_fraction(ComplexField(g, np.zeros(20))) == 0.0


class TestProperties:
    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.sampled_from([1, 2]))
    def test_round_trip_random(self, seed, d):
        g = make_grid(d, 16, 2.5)
        rng = np.random.default_rng(seed)
        f = ComplexField(g, rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape))
        assert np.allclose(inverse_transform(forward_transform(f)).values, f.values, atol=1e-13)
        assert spectral_l2_norm(forward_transform(f)) == pytest.approx(lp_norm(f, 2), rel=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0.5, 3.0))
    def test_reflection_symmetry(self, sigma):
        # reflecting a centred gaussian maps grid points onto grid points exactly
        g = make_grid(1, 64, 12.0)
        f = sample(g, {"family": "gaussian", "sigma": sigma})
        v = f.values
        assert np.allclose(v[1:], v[1:][::-1], rtol=0, atol=1e-15)
