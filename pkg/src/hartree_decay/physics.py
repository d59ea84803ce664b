"""External potentials, interaction potentials, the energy and the vector field.

The equation is  i∂ₜu = -Δu + Vu + (w*|u|²)u,  or its local cubic variant
i∂ₜu = -Δu + Vu ± |u|²u.  Everything here is a pure function of immutable
specs; realised arrays are cached on the (frozen) :class:`ModelSpec`.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property
from typing import Union

import numpy as np
import scipy.fft as sfft

from .grid import ComplexField, GridSpec, forward_transform, lp_norm

__all__ = [
    "PotentialSpec",
    "InteractionSpec",
    "CubicLocal",
    "ModelSpec",
    "default_sobolev_index",
    "realize_potential",
    "realize_interaction",
    "interaction_transform",
    "interaction_l1",
    "hartree_term",
    "rhs",
    "energy",
    "energy_parts",
]

POTENTIAL_FAMILIES = ("zero", "gaussian_well", "smooth_lattice")
INTERACTION_FAMILIES = ("gaussian", "mollifier_of_gaussian")


@dataclass(frozen=True)
class PotentialSpec:
    """V(x).  ``gaussian_well``: depth·e^{-|x|²/(2σ_V²)}; ``smooth_lattice``:
    depth·Σ_i cos(κ x_i).  Depth may be negative (attractive well)."""

    family: str = "zero"
    depth: float = 0.0
    width: float = 1.0
    wavevector: float = 0.0

    def __post_init__(self) -> None:
        if self.family not in POTENTIAL_FAMILIES:
            raise ValueError(f"unknown potential family {self.family!r}")
        if self.family == "gaussian_well" and not self.width > 0:
            raise ValueError(f"potential width must be positive, got {self.width}")
        if not np.isfinite(self.depth):
            raise ValueError("potential depth must be finite")

    @property
    def is_zero(self) -> bool:
        return self.family == "zero" or self.depth == 0.0


@dataclass(frozen=True)
class InteractionSpec:
    """Gaussian interaction of total mass λ = ∫w and width σ_w.

    ``mollifier_of_gaussian`` with index n realises w_n(x) = n^d w(nx), a
    gaussian of width σ_w/n and unchanged mass.
    """

    family: str = "gaussian"
    total_mass: float = 1.0
    width: float = 1.0
    mollifier_index: int = 1

    def __post_init__(self) -> None:
        if self.family not in INTERACTION_FAMILIES:
            raise ValueError(f"unknown interaction family {self.family!r}")
        if not self.width > 0:
            raise ValueError(f"interaction width must be positive, got {self.width}")
        if int(self.mollifier_index) != self.mollifier_index or self.mollifier_index < 1:
            raise ValueError("mollifier_index must be a positive integer")
        if self.family == "gaussian" and self.mollifier_index != 1:
            raise ValueError("mollifier_index requires family 'mollifier_of_gaussian'")

    @property
    def effective_width(self) -> float:
        return self.width / self.mollifier_index

    def check_resolved(self, grid: GridSpec) -> None:
        if self.effective_width < 4 * grid.spacing:
            raise ValueError(
                f"interaction width {self.effective_width:g} is below 4h = "
                f"{4 * grid.spacing:g}; refine the grid or lower mollifier_index"
            )


@dataclass(frozen=True)
class CubicLocal:
    """Local nonlinearity ±|u|²u (sign +1 defocusing, -1 focusing)."""

    sign: int = 1

    def __post_init__(self) -> None:
        if self.sign not in (1, -1):
            raise ValueError("cubic sign must be +1 or -1")


Interaction = Union[InteractionSpec, CubicLocal, None]


def default_sobolev_index(dimension: int) -> int:
    """Smallest even integer strictly above d/2."""
    k = 2
    while k <= dimension / 2:
        k += 2
    return k


@dataclass(frozen=True)
class ModelSpec:
    grid: GridSpec
    potential: PotentialSpec = PotentialSpec()
    interaction: Interaction = None
    sobolev_index: int | None = None
    spectral_w: str = "analytic"

    def __post_init__(self) -> None:
        d = self.grid.dimension
        if self.sobolev_index is None:
            object.__setattr__(self, "sobolev_index", default_sobolev_index(d))
        k = self.sobolev_index
        if k % 2 or not k > d / 2:
            raise ValueError(f"sobolev_index must be even and > d/2, got {k} for d={d}")
        if self.spectral_w not in ("analytic", "sampled"):
            raise ValueError("spectral_w must be 'analytic' or 'sampled'")
        if isinstance(self.interaction, InteractionSpec):
            self.interaction.check_resolved(self.grid)

    @property
    def dimension(self) -> int:
        return self.grid.dimension

    def without_interaction(self) -> ModelSpec:
        return replace(self, interaction=None)

    def with_interaction(self, interaction: Interaction) -> ModelSpec:
        return replace(self, interaction=interaction)

    @cached_property
    def potential_values(self) -> np.ndarray:
        return realize_potential(self.potential, self.grid).values.real

    @cached_property
    def interaction_half(self) -> np.ndarray | None:
        """ŵ on the rfftn half lattice, or None when there is no Hartree term."""
        if not isinstance(self.interaction, InteractionSpec):
            return None
        full = interaction_transform(self.interaction, self.grid, self.spectral_w)
        n = self.grid.points_per_axis
        return np.ascontiguousarray(full[..., : n // 2 + 1])

    @property
    def w_l1(self) -> float:
        """‖w‖₁ as seen by the estimates (|λ| for the gaussian families, 1 for ±δ)."""
        if self.interaction is None:
            return 0.0
        if isinstance(self.interaction, CubicLocal):
            return 1.0
        return abs(self.interaction.total_mass)


def realize_potential(spec: PotentialSpec, grid: GridSpec) -> ComplexField:
    if spec.family == "zero":
        return ComplexField(grid, np.zeros(grid.shape))
    if spec.family == "gaussian_well":
        v = spec.depth * np.exp(-grid.radius_squared / (2 * spec.width**2))
    else:
        v = spec.depth * sum(np.cos(spec.wavevector * x) for x in grid.coords())
    return ComplexField(grid, np.broadcast_to(v, grid.shape))


def realize_interaction(spec: InteractionSpec, grid: GridSpec) -> ComplexField:
    """Samples of w (or w_n) centred at the origin."""
    s = spec.effective_width
    d = grid.dimension
    w = spec.total_mass * (2 * np.pi * s * s) ** (-d / 2) * np.exp(-grid.radius_squared / (2 * s * s))
    return ComplexField(grid, w)


def interaction_transform(spec: InteractionSpec, grid: GridSpec, provenance: str = "analytic") -> np.ndarray:
    """ŵ on the full lattice: closed form λe^{-σ²|ξ|²/2}, or the transform of the samples."""
    if provenance == "analytic":
        s = spec.effective_width
        return spec.total_mass * np.exp(-0.5 * s * s * grid.k_squared)
    return forward_transform(realize_interaction(spec, grid)).coefficients.real.copy()


def interaction_l1(spec: InteractionSpec, grid: GridSpec) -> float:
    """‖w‖₁ by quadrature of the realised samples."""
    spec.check_resolved(grid)
    return lp_norm(realize_interaction(spec, grid), 1)


# ---------------------------------------------------------------------------
# nonlinearity and vector field on raw arrays (used by the integrator)
# ---------------------------------------------------------------------------


def nonlinear_potential(values: np.ndarray, model: ModelSpec) -> np.ndarray | None:
    """Real array w*|u|² (or ±|u|²), None when the model is linear."""
    inter = model.interaction
    if inter is None:
        return None
    dens = values.real**2 + values.imag**2
    if isinstance(inter, CubicLocal):
        return inter.sign * dens
    return sfft.irfftn(model.interaction_half * sfft.rfftn(dens), s=dens.shape)


def laplacian_values(values: np.ndarray, grid: GridSpec) -> np.ndarray:
    """-Δu on raw samples."""
    return sfft.ifftn(grid.k_squared * sfft.fftn(values))


def rhs_values(values: np.ndarray, model: ModelSpec) -> np.ndarray:
    out = laplacian_values(values, model.grid)
    if not model.potential.is_zero:
        out = out + model.potential_values * values
    p = nonlinear_potential(values, model)
    if p is not None:
        out = out + p * values
    return -1j * out


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------


def hartree_term(u: ComplexField, interaction: InteractionSpec, grid: GridSpec,
                 provenance: str = "analytic") -> ComplexField:
    """w*|u|², computed spectrally (exactly real by construction)."""
    interaction.check_resolved(grid)
    model = ModelSpec(grid, interaction=interaction, spectral_w=provenance)
    return ComplexField(grid, nonlinear_potential(u.values, model))


def rhs(u: ComplexField, model: ModelSpec) -> ComplexField:
    """∂ₜu = -i(-Δu + Vu + N(u))."""
    return ComplexField(model.grid, rhs_values(u.values, model))


def energy_parts(u: ComplexField, model: ModelSpec) -> tuple[float, float, float]:
    """(kinetic, potential, interaction) contributions to the energy."""
    g = model.grid
    uh = forward_transform(u).coefficients
    kinetic = float(np.sum(g.k_squared * np.abs(uh) ** 2) / g.box_volume)
    dens = np.abs(u.values) ** 2
    potential = 0.0
    if not model.potential.is_zero:
        potential = float(g.cell_volume * np.sum(model.potential_values * dens))
    p = nonlinear_potential(u.values, model)
    inter = 0.0 if p is None else float(0.5 * g.cell_volume * np.sum(p * dens))
    return kinetic, potential, inter


def energy(u: ComplexField, model: ModelSpec) -> float:
    """E(u) = ∫|∇u|² + ∫V|u|² + ½∫(w*|u|²)|u|²  (cubic: ±½∫|u|⁴)."""
    return float(sum(energy_parts(u, model)))


def mass(u: ComplexField) -> float:
    """‖u‖₂, the conserved quantity."""
    return lp_norm(u, 2)
