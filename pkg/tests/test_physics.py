import math

import numpy as np
import pytest

from hartree_decay.grid import lp_norm, make_grid, sample
from hartree_decay.physics import (
    CubicLocal,
    InteractionSpec,
    ModelSpec,
    PotentialSpec,
    default_sobolev_index,
    energy,
    energy_parts,
    hartree_term,
    interaction_l1,
    interaction_transform,
    realize_interaction,
    realize_potential,
    rhs,
)


class TestSpecs:
    def test_potential_validation(self):
        with pytest.raises(ValueError):
            PotentialSpec("coulomb")
        with pytest.raises(ValueError):
            PotentialSpec("gaussian_well", depth=1.0, width=0.0)
        assert PotentialSpec("gaussian_well", depth=0.0).is_zero

    def test_interaction_validation(self):
        with pytest.raises(ValueError):
            InteractionSpec(width=-1.0)
        with pytest.raises(ValueError):
            InteractionSpec("gaussian", mollifier_index=2)
        with pytest.raises(ValueError):
            InteractionSpec("mollifier_of_gaussian", mollifier_index=0)
        with pytest.raises(ValueError):
            CubicLocal(sign=0)

    def test_unresolved_mollifier(self):
        g = make_grid(1, 64, 16.0)  # h = 0.5
        spec = InteractionSpec("mollifier_of_gaussian", width=4.0, mollifier_index=3)
        with pytest.raises(ValueError, match="4h"):
            ModelSpec(g, interaction=spec)
        with pytest.raises(ValueError):
            interaction_l1(spec, g)

    @pytest.mark.parametrize("d,k", [(1, 2), (2, 2), (3, 2)])
    def test_default_sobolev_index(self, d, k):
        assert default_sobolev_index(d) == k

    def test_bad_sobolev_index(self):
        with pytest.raises(ValueError):
            ModelSpec(make_grid(1, 16, 1.0), sobolev_index=3)

    def test_w_l1(self):
        g = make_grid(1, 64, 8.0)
        assert ModelSpec(g).w_l1 == 0.0
        assert ModelSpec(g, interaction=CubicLocal(-1)).w_l1 == 1.0
        assert ModelSpec(g, interaction=InteractionSpec(total_mass=-0.3)).w_l1 == pytest.approx(0.3)


class TestRealisations:
    def test_gaussian_well_values(self):
        g = make_grid(1, 16, 4.0)
        v = realize_potential(PotentialSpec("gaussian_well", depth=-2.0, width=1.0), g).values.real
        assert v[8] == -2.0
        assert np.allclose(v, -2.0 * np.exp(-g.axis**2 / 2))

    def test_lattice_values(self):
        g = make_grid(2, 16, math.pi)
        v = realize_potential(PotentialSpec("smooth_lattice", depth=0.5, wavevector=2.0), g).values.real
        x, y = g.coords()
        assert np.allclose(v, 0.5 * (np.cos(2 * x) + np.cos(2 * y)))

    @pytest.mark.parametrize("n", [1, 2, 4])
    def test_mollifier_mass(self, n):
        g = make_grid(1, 512, 32.0)
        spec = InteractionSpec("mollifier_of_gaussian", total_mass=0.7, width=4.0, mollifier_index=n)
        assert interaction_l1(spec, g) == pytest.approx(0.7, rel=1e-10)
        assert realize_interaction(spec, g).values.real.max() == pytest.approx(
            0.7 * (2 * math.pi * (4.0 / n) ** 2) ** -0.5)

    def test_sampled_transform_matches_closed_form(self):
        g = make_grid(2, 64, 16.0)
        spec = InteractionSpec(total_mass=1.3, width=2.0)
        a = interaction_transform(spec, g, "analytic")
        b = interaction_transform(spec, g, "sampled")
        assert np.max(np.abs(a - b)) < 1e-12


class TestHartreeTerm:
    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_gaussian_convolution_closed_form(self, d):
        # |u|² = e^{-|x|²/σ²} has variance σ²/2; the convolution is again gaussian
        sigma, s, lam = 1.2, 2.0, 0.8
        g = make_grid(d, 96 if d < 3 else 64, 16.0)
        u = sample(g, {"family": "gaussian", "sigma": sigma})
        out = hartree_term(u, InteractionSpec(total_mass=lam, width=s), g)
        var = s * s + sigma * sigma / 2
        exact = (lam * (math.pi * sigma**2) ** (d / 2) * (2 * math.pi * var) ** (-d / 2)
                 * np.exp(-g.radius_squared / (2 * var)))
        assert np.max(np.abs(out.values - exact)) < 1e-8
        assert np.all(out.values.imag == 0)

    def test_sampled_path(self):
        g = make_grid(1, 128, 16.0)
        u = sample(g, {"family": "gaussian", "sigma": 1.0})
        spec = InteractionSpec(total_mass=1.0, width=1.0)
        a = hartree_term(u, spec, g, "analytic").values
        b = hartree_term(u, spec, g, "sampled").values
        assert np.max(np.abs(a - b)) < 1e-10

    def test_constant_density(self):
        g = make_grid(2, 32, 8.0)
        u = sample(g, {"family": "plane_wave", "wavevector": [0.0, 0.0], "amplitude": 2.0})
        out = hartree_term(u, InteractionSpec(total_mass=0.5, width=2.0), g)
        assert np.allclose(out.values, 0.5 * 4.0)


class TestRhs:
    def test_plane_wave_eigenfunction(self):
        g = make_grid(2, 32, math.pi)
        u = sample(g, {"family": "plane_wave", "wavevector": [3.0, 1.0], "amplitude": 0.5})
        lin = ModelSpec(g)
        assert np.max(np.abs(rhs(u, lin).values + 10j * u.values)) < 1e-11
        hartree = ModelSpec(g, interaction=InteractionSpec(total_mass=2.0, width=1.0))
        assert np.max(np.abs(rhs(u, hartree).values + (10 + 0.5) * 1j * u.values)) < 1e-11
        cubic = ModelSpec(g, interaction=CubicLocal(-1))
        assert np.max(np.abs(rhs(u, cubic).values + (10 - 0.25) * 1j * u.values)) < 1e-11

    def test_potential_term(self):
        g = make_grid(1, 64, 8.0)
        u = sample(g, {"family": "constant", "value": 1.0})
        pot = PotentialSpec("gaussian_well", depth=3.0, width=1.0)
        out = rhs(u, ModelSpec(g, potential=pot)).values
        assert np.allclose(out, -1j * realize_potential(pot, g).values)


class TestEnergy:
    def test_plane_wave_energy(self):
        g = make_grid(3, 16, math.pi)
        u = sample(g, {"family": "plane_wave", "wavevector": [1.0, 2.0, 2.0]})
        assert energy(u, ModelSpec(g)) == pytest.approx(9.0 * g.box_volume, rel=1e-12)

    def test_gaussian_kinetic_closed_form(self):
        # ∫|∂ₓ e^{-x²/(2σ²)}|² = √π/(2σ)
        sigma = 1.5
        g = make_grid(1, 128, 20.0)
        u = sample(g, {"family": "gaussian", "sigma": sigma})
        kin, pot, inter = energy_parts(u, ModelSpec(g))
        assert kin == pytest.approx(math.sqrt(math.pi) / (2 * sigma), rel=1e-12)
        assert pot == 0.0 and inter == 0.0

    def test_refinement_agreement(self):
        def e(n):
            g = make_grid(2, n, 12.0)
            m = ModelSpec(g, PotentialSpec("gaussian_well", depth=-1.0, width=2.0),
                          InteractionSpec(total_mass=1.0, width=1.5))
            return energy(sample(g, {"family": "gaussian", "sigma": 1.0, "wavevector": [0.5, 0.0]}), m)

        assert e(64) == pytest.approx(e(256), rel=1e-10)

    @pytest.mark.parametrize("alpha", [0.1, 0.5, 2.0])
    def test_scaling(self, alpha):
        g = make_grid(1, 128, 16.0)
        m = ModelSpec(g, PotentialSpec("gaussian_well", depth=-0.5, width=2.0),
                      InteractionSpec(total_mass=1.0, width=1.0))
        u = sample(g, {"family": "gaussian", "sigma": 1.0})
        k, p, i = energy_parts(u, m)
        assert energy(alpha * u, m) == pytest.approx(alpha**2 * (k + p) + alpha**4 * i, rel=1e-12)

    def test_cubic_energy(self):
        g = make_grid(1, 128, 16.0)
        u = sample(g, {"family": "gaussian", "sigma": 1.0})
        _, _, inter = energy_parts(u, ModelSpec(g, interaction=CubicLocal(1)))
        assert inter == pytest.approx(0.5 * lp_norm(u, 4) ** 4, rel=1e-12)

    def test_even_data_even_field(self):
        g = make_grid(2, 32, 8.0)
        m = ModelSpec(g, PotentialSpec("gaussian_well", depth=1.0), InteractionSpec(width=2.0))
        u = sample(g, {"family": "gaussian", "sigma": 1.3})
        r = rhs(u, m).values[1:, 1:]
        assert np.allclose(r, r[::-1, ::-1], atol=1e-14)
