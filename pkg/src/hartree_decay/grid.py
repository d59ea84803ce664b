"""Periodic-box discretisation, Fourier transforms, multipliers and norms.

Transform convention (the single place it is fixed):

    forward:  û(ξ) = h^d · Σ_x f(x) e^{-iξ·x}
    inverse:  f(x) = (2L)^{-d} · Σ_ξ û(ξ) e^{iξ·x}

so that û approximates the continuum transform ∫ f(x) e^{-iξ·x} dx and the
Laplacian has symbol -|ξ|².  Parseval reads

    h^d Σ_x |f(x)|² = (2L)^{-d} Σ_ξ |û(ξ)|².

Grid points are x = h·m with integer m ∈ {-n/2, ..., n/2-1} on each axis, so
the box is [-L, L)^d and reflection x -> -x maps grid points onto grid points
(modulo the period) exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Mapping

import numpy as np
import scipy.fft as sfft

__all__ = [
    "GridSpec",
    "ComplexField",
    "SpectralField",
    "Symbol",
    "make_grid",
    "sample",
    "forward_transform",
    "inverse_transform",
    "apply_multiplier",
    "lp_norm",
    "sobolev_norm",
    "spectral_l2_norm",
    "boundary_mass_fraction",
]


@dataclass(frozen=True)
class GridSpec:
    dimension: int
    points_per_axis: int
    half_length: float

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_length / self.points_per_axis

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points_per_axis,) * self.dimension

    @property
    def size(self) -> int:
        return self.points_per_axis**self.dimension

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dimension

    @property
    def box_volume(self) -> float:
        return (2.0 * self.half_length) ** self.dimension

    @cached_property
    def axis(self) -> np.ndarray:
        """Coordinates along one axis, in natural (increasing) order."""
        n = self.points_per_axis
        return self.spacing * np.arange(-n // 2, n // 2, dtype=float)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Per-axis wavenumbers ξ_j = (π/L)·j in FFT storage order."""
        n = self.points_per_axis
        return (np.pi / self.half_length) * np.fft.fftfreq(n, d=1.0 / n)

    def coords(self) -> list[np.ndarray]:
        """Broadcastable coordinate arrays, one per axis."""
        return _broadcast_axes(self.axis, self.dimension)

    def wavevector(self) -> list[np.ndarray]:
        return _broadcast_axes(self.wavenumbers, self.dimension)

    @cached_property
    def radius_squared(self) -> np.ndarray:
        return sum(c * c for c in self.coords())

    @cached_property
    def k_squared(self) -> np.ndarray:
        """|ξ|² on the full transform lattice."""
        return np.asarray(sum(k * k for k in self.wavevector()))

    @cached_property
    def k_squared_half(self) -> np.ndarray:
        """|ξ|² on the real-input (rfftn) half lattice."""
        ks = self.wavevector()
        n = self.points_per_axis
        ks[-1] = ks[-1][..., : n // 2 + 1]
        return np.asarray(sum(k * k for k in ks))

    @cached_property
    def _sign(self) -> np.ndarray:
        # (-1)^m per axis: phase from the grid origin sitting at x = -L.
        n = self.points_per_axis
        s = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
        out = np.ones(self.shape)
        for a in _broadcast_axes(s, self.dimension):
            out = out * a
        return out

    @cached_property
    def two_thirds_mask(self) -> np.ndarray:
        n = self.points_per_axis
        m = np.abs(np.fft.fftfreq(n, d=1.0 / n))
        keep = (m < n / 3.0).astype(float)
        out = np.ones(self.shape)
        for a in _broadcast_axes(keep, self.dimension):
            out = out * a
        return out


def _broadcast_axes(vec: np.ndarray, dimension: int) -> list[np.ndarray]:
    out = []
    for ax in range(dimension):
        shape = [1] * dimension
        shape[ax] = vec.size
        out.append(vec.reshape(shape))
    return out


def make_grid(dimension: int, points_per_axis: int, half_length: float) -> GridSpec:
    if dimension not in (1, 2, 3):
        raise ValueError(f"dimension must be 1, 2 or 3, got {dimension}")
    if int(points_per_axis) != points_per_axis or points_per_axis < 8:
        raise ValueError(f"points_per_axis must be an integer >= 8, got {points_per_axis}")
    if points_per_axis % 2:
        raise ValueError(f"points_per_axis must be even, got {points_per_axis}")
    if not np.isfinite(half_length) or half_length <= 0:
        raise ValueError(f"half_length must be positive, got {half_length}")
    return GridSpec(int(dimension), int(points_per_axis), float(half_length))


@dataclass(frozen=True, eq=False)
class ComplexField:
    """Complex samples of a function on ``grid``; ``values`` has ``grid.shape``."""

    grid: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        v = _frozen(self.values, self.grid)
        if not np.all(np.isfinite(v)):
            raise ValueError("field contains NaN or Inf")
        object.__setattr__(self, "values", v)

    @property
    def flat(self) -> np.ndarray:
        """Row-major flat view of the samples."""
        return self.values.ravel()

    def __add__(self, other: ComplexField) -> ComplexField:
        _same_grid(self, other)
        return ComplexField(self.grid, self.values + other.values)

    def __sub__(self, other: ComplexField) -> ComplexField:
        _same_grid(self, other)
        return ComplexField(self.grid, self.values - other.values)

    def __mul__(self, scalar: complex) -> ComplexField:
        return ComplexField(self.grid, self.values * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class SpectralField:
    grid: GridSpec
    coefficients: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "coefficients", _frozen(self.coefficients, self.grid))


def _frozen(data: Any, grid: GridSpec) -> np.ndarray:
    v = np.asarray(data, dtype=complex)
    if v.size != grid.size:
        raise ValueError(f"expected {grid.size} samples, got {v.size}")
    # read-only arrays are shared as is; anything writable is copied
    if v.flags.writeable or v.shape != grid.shape:
        v = v.reshape(grid.shape).copy()
        v.flags.writeable = False
    return v


def _same_grid(a: Any, b: Any) -> None:
    if a.grid != b.grid:
        raise ValueError("fields live on different grids")


# ---------------------------------------------------------------------------
# sampling of closed-form families
# ---------------------------------------------------------------------------


def _vec(value: Any, dimension: int) -> np.ndarray:
    if value is None:
        return np.zeros(dimension)
    arr = np.atleast_1d(np.asarray(value, dtype=float))
    if arr.size == 1:
        arr = np.full(dimension, arr.item())
    if arr.size != dimension:
        raise ValueError(f"vector parameter needs {dimension} entries, got {arr.size}")
    return arr


def _eval_family(grid: GridSpec, spec: Mapping[str, Any]) -> np.ndarray:
    family = spec.get("family")
    params = {k: v for k, v in spec.items() if k != "family"}
    d = grid.dimension
    x = grid.coords()
    if family == "constant":
        return np.full(grid.shape, complex(params.get("value", 1.0)))
    if family == "plane_wave":
        k = _vec(params.get("wavevector"), d)
        amp = complex(params.get("amplitude", 1.0))
        phase = sum(ki * xi for ki, xi in zip(k, x))
        return amp * np.exp(1j * phase) * np.ones(grid.shape)
    if family == "gaussian":
        sigma = float(params.get("sigma", 1.0))
        if not sigma > 0:
            raise ValueError("gaussian sigma must be positive")
        amp = complex(params.get("amplitude", 1.0))
        center = _vec(params.get("center"), d)
        k = _vec(params.get("wavevector"), d)
        # chirp τ: envelope replaced by its free evolution over time τ
        tau = float(params.get("chirp", 0.0))
        width = sigma**2 + 2j * tau
        r2 = sum((xi - ci) ** 2 for xi, ci in zip(x, center))
        env = (sigma**2 / width) ** (d / 2) * np.exp(-r2 / (2 * width))
        phase = sum(ki * xi for ki, xi in zip(k, x))
        out = amp * env * np.exp(1j * phase) if np.any(k) else amp * env
        return np.broadcast_to(out, grid.shape).astype(complex)
    if family == "sum":
        terms = params.get("terms")
        if not terms:
            raise ValueError("sum needs a non-empty 'terms' list")
        return sum(_eval_family(grid, t) for t in terms)
    raise ValueError(f"unknown analytic family {family!r}")


def sample(grid: GridSpec, analytic_spec: Mapping[str, Any]) -> ComplexField:
    """Sample a closed-form family on the grid.

    ``analytic_spec`` is a mapping with a ``family`` key:

    - ``gaussian``: ``amplitude·e^{-|x-c|²/(2σ²)}·e^{ik·x}`` with keys
      ``sigma``, ``amplitude``, ``center``, ``wavevector`` and optional
      ``chirp`` τ (the envelope is replaced by its free evolution over time τ,
      i.e. the complex width σ² + 2iτ);
    - ``plane_wave``: ``amplitude·e^{ik·x}``;
    - ``constant``: ``value``;
    - ``sum``: ``terms``, a list of such mappings.
    """
    for key, val in analytic_spec.items():
        if isinstance(val, (int, float, complex)) and not np.isfinite(val):
            raise ValueError(f"parameter {key!r} is not finite")
    return ComplexField(grid, _eval_family(grid, analytic_spec))


# ---------------------------------------------------------------------------
# transforms and multipliers
# ---------------------------------------------------------------------------


def forward_transform(f: ComplexField) -> SpectralField:
    g = f.grid
    coeffs = g.cell_volume * g._sign * sfft.fftn(f.values)
    return SpectralField(g, coeffs)


def inverse_transform(s: SpectralField) -> ComplexField:
    g = s.grid
    vals = sfft.ifftn(g._sign * s.coefficients) / g.cell_volume
    return ComplexField(g, vals)


@dataclass(frozen=True)
class Symbol:
    """A Fourier multiplier.

    kind is one of ``power`` (|ξ|^s), ``bessel`` ((1+|ξ|²)^{s/2}),
    ``schrodinger`` (e^{-it|ξ|²}, the free flow over time ``t``) or
    ``two_thirds`` (spectral truncation keeping |m| < n/3 on each axis).
    """

    kind: str
    s: float = 0.0
    t: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("power", "bessel", "schrodinger", "two_thirds"):
            raise ValueError(f"unknown symbol kind {self.kind!r}")
        if self.kind in ("power", "bessel") and self.s < 0:
            raise ValueError(f"symbol exponent must be non-negative, got {self.s}")

    def evaluate(self, grid: GridSpec) -> np.ndarray:
        k2 = grid.k_squared
        if self.kind == "power":
            if self.s == 0:
                return np.ones_like(k2)
            return k2 ** (self.s / 2)
        if self.kind == "bessel":
            return (1.0 + k2) ** (self.s / 2)
        if self.kind == "schrodinger":
            return np.exp(-1j * self.t * k2)
        return grid.two_thirds_mask


def apply_multiplier(s: SpectralField, symbol: Symbol) -> SpectralField:
    return SpectralField(s.grid, s.coefficients * symbol.evaluate(s.grid))


def filter_values(values: np.ndarray, symbol_values: np.ndarray) -> np.ndarray:
    """Apply a multiplier to raw samples (the normalisation cancels)."""
    return sfft.ifftn(symbol_values * sfft.fftn(values))


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------


def lp_norm(f: ComplexField, p: float) -> float:
    """L^p norm by the rectangle rule; p = inf gives the grid maximum.

    The grid maximum is a lower bound for the true supremum of the
    interpolant.
    """
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    a = np.abs(f.values)
    if np.isinf(p):
        return float(a.max())
    if p == 2:
        return float(np.sqrt(f.grid.cell_volume * np.vdot(f.values, f.values).real))
    if p == 1:
        return float(f.grid.cell_volume * a.sum())
    return float((f.grid.cell_volume * np.sum(a**p)) ** (1.0 / p))


def spectral_l2_norm(s: SpectralField) -> float:
    c = s.coefficients
    return float(np.sqrt(np.vdot(c, c).real / s.grid.box_volume))


def sobolev_norm(f: ComplexField, s: float) -> float:
    """H^s norm ‖(1+|ξ|²)^{s/2} f̂‖₂ in the discrete convention."""
    if s < 0:
        raise ValueError(f"Sobolev index must be non-negative, got {s}")
    if s == 0:
        return lp_norm(f, 2)
    return spectral_l2_norm(apply_multiplier(forward_transform(f), Symbol("bessel", s=s)))


def boundary_mass_fraction(f: ComplexField, shell: float = 0.1) -> float:
    """Fraction of ‖f‖₂² carried by points with some |x_i| >= (1-shell)·L."""
    g = f.grid
    edge = np.abs(g.axis) >= (1.0 - shell) * g.half_length
    mask = np.zeros(g.shape, dtype=bool)
    for a in _broadcast_axes(edge, g.dimension):
        mask = mask | a
    dens = np.abs(f.values) ** 2
    total = dens.sum()
    if total == 0:
        return 0.0
    return float(dens[mask].sum() / total)
