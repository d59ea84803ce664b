"""Strang split-step integration, the linear flow e^{-itH}, ∂ₜu and a Duhamel oracle.

One step is B(dt/2)∘A(dt)∘B(dt/2) with the kinetic flow A(τ) = e^{-iτ|ξ|²}
and the phase flow B(τ) = e^{-iτ(V + w*|u|²)}.  B leaves |u| unchanged, so two
consecutive half phase steps collapse into one full phase step exactly; the
stepper exploits this and costs one kinetic and one phase substep per step.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator

import numpy as np
import scipy.fft as sfft

from .grid import ComplexField, GridSpec, boundary_mass_fraction, filter_values
from .physics import ModelSpec, nonlinear_potential, rhs

__all__ = [
    "StepPlan",
    "Trajectory",
    "NumericalAbort",
    "BoundaryMassError",
    "strang_step",
    "stream",
    "evolve",
    "linear_propagate",
    "time_derivative",
    "duhamel_residual",
    "write_snapshot",
    "read_snapshot",
]

SNAPSHOT_MAGIC = b"HPROP1"
_HEADER = struct.Struct("<6sBIdd")


class NumericalAbort(RuntimeError):
    """The integration produced non-finite values or left its valid window."""

    def __init__(self, message: str, time: float):
        super().__init__(message)
        self.time = time


class BoundaryMassError(NumericalAbort):
    def __init__(self, time: float, fraction: float, limit: float):
        super().__init__(
            f"boundary-mass guard tripped at t={time:.6g}: fraction {fraction:.3e} > {limit:.3e}",
            time,
        )
        self.fraction = fraction
        self.limit = limit


@dataclass(frozen=True)
class StepPlan:
    """Uniform time grid t_start, t_start+dt, ..., t_end.

    A negative dt with t_end < t_start integrates backwards in time.  The
    boundary guard (checked at every snapshot) is disabled by
    ``boundary_mass_max=None``.
    """

    dt: float
    t_end: float
    t_start: float = 0.0
    snapshot_stride: int = 1
    spectral_filter: bool = False
    boundary_mass_max: float | None = 1e-6

    def __post_init__(self) -> None:
        if not (math.isfinite(self.dt) and self.dt != 0):
            raise ValueError(f"dt must be finite and non-zero, got {self.dt}")
        ratio = (self.t_end - self.t_start) / self.dt
        if not ratio > 0:
            raise ValueError("t_end - t_start must be non-zero and have the sign of dt")
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            raise ValueError(f"(t_end - t_start)/dt = {ratio!r} is not an integer")
        if int(self.snapshot_stride) != self.snapshot_stride or self.snapshot_stride < 1:
            raise ValueError("snapshot_stride must be a positive integer")
        if self.boundary_mass_max is not None and not self.boundary_mass_max > 0:
            raise ValueError("boundary_mass_max must be positive or None")

    @property
    def steps(self) -> int:
        return int(round((self.t_end - self.t_start) / self.dt))

    def time_at(self, step: int) -> float:
        return self.t_start + step * self.dt


@dataclass(frozen=True)
class Trajectory:
    """Snapshots every ``snapshot_stride`` steps, plus the final state."""

    times: tuple[float, ...]
    snapshots: tuple[ComplexField, ...]
    model: ModelSpec
    plan: StepPlan
    final: ComplexField = field(repr=False)

    def __post_init__(self) -> None:
        if len(self.times) != len(self.snapshots):
            raise ValueError("times and snapshots differ in length")


# ---------------------------------------------------------------------------
# raw-array substeps
# ---------------------------------------------------------------------------


def _kinetic_multiplier(grid: GridSpec, dt: float, spectral_filter: bool) -> np.ndarray:
    m = np.exp(-1j * dt * grid.k_squared)
    if spectral_filter:
        m = m * grid.two_thirds_mask
    return m


def _phase(values: np.ndarray, model: ModelSpec, tau: float) -> np.ndarray:
    pot = nonlinear_potential(values, model)
    if not model.potential.is_zero:
        pot = model.potential_values if pot is None else pot + model.potential_values
    if pot is None:
        return values
    return values * np.exp(-1j * tau * pot)


def _kinetic(values: np.ndarray, multiplier: np.ndarray) -> np.ndarray:
    spec = sfft.fftn(values, overwrite_x=True)
    spec *= multiplier
    return sfft.ifftn(spec, overwrite_x=True)


def _advance(values: np.ndarray, model: ModelSpec, dt: float, nsteps: int,
             multiplier: np.ndarray) -> np.ndarray:
    """nsteps Strang steps with interior half phase steps merged (may reuse ``values``)."""
    if nsteps == 0:
        return values
    v = _phase(values, model, 0.5 * dt)
    for i in range(nsteps):
        v = _kinetic(v, multiplier)
        v = _phase(v, model, dt if i < nsteps - 1 else 0.5 * dt)
    return v


def _check_finite(values: np.ndarray, t: float) -> None:
    if not np.isfinite(np.vdot(values, values).real):
        raise NumericalAbort(f"non-finite field at t={t:.6g}", t)


# ---------------------------------------------------------------------------
# public API
# ---------------------------------------------------------------------------


def strang_step(u: ComplexField, dt: float, model: ModelSpec, spectral_filter: bool = False) -> ComplexField:
    """One step B(dt/2)∘A(dt)∘B(dt/2); unitary, and exactly reversed by -dt."""
    mult = _kinetic_multiplier(model.grid, dt, spectral_filter)
    v = _advance(np.array(u.values, dtype=complex), model, dt, 1, mult)
    _check_finite(v, dt)
    return ComplexField(model.grid, v)


def stream(u0: ComplexField, model: ModelSpec, plan: StepPlan) -> Iterator[tuple[float, np.ndarray]]:
    """Yield (t, values) at t_start and every stride point; values are read-only copies.

    A final partial stride is integrated but not yielded; use :func:`evolve`
    for the end state.  Raises :class:`NumericalAbort` on non-finite fields
    and :class:`BoundaryMassError` when the guard trips.
    """
    if u0.grid != model.grid:
        raise ValueError("initial data lives on a different grid than the model")
    mult = _kinetic_multiplier(model.grid, plan.dt, plan.spectral_filter)
    v = np.array(u0.values, dtype=complex)
    done = 0
    while True:
        t = plan.time_at(done)
        _check_finite(v, t)
        _guard(v, model.grid, plan, t)
        out = v.copy()
        out.flags.writeable = False
        yield t, out
        remaining = plan.steps - done
        if remaining < plan.snapshot_stride:
            break
        v = _advance(v, model, plan.dt, plan.snapshot_stride, mult)
        done += plan.snapshot_stride


def _guard(values: np.ndarray, grid: GridSpec, plan: StepPlan, t: float) -> None:
    if plan.boundary_mass_max is None:
        return
    frac = boundary_mass_fraction(ComplexField(grid, values))
    if frac > plan.boundary_mass_max:
        raise BoundaryMassError(t, frac, plan.boundary_mass_max)


def evolve(u0: ComplexField, model: ModelSpec, plan: StepPlan,
           observer: Callable[[float, np.ndarray], None] | None = None) -> Trajectory:
    """Integrate over the plan and keep every snapshot (and the end state)."""
    times: list[float] = []
    snaps: list[ComplexField] = []
    last = None
    for t, v in stream(u0, model, plan):
        times.append(t)
        snaps.append(ComplexField(model.grid, v))
        if observer is not None:
            observer(t, v)
        last = v
    tail = plan.steps - (len(snaps) - 1) * plan.snapshot_stride
    if tail:
        mult = _kinetic_multiplier(model.grid, plan.dt, plan.spectral_filter)
        end = _advance(np.array(last), model, plan.dt, tail, mult)
        _check_finite(end, plan.t_end)
        _guard(end, model.grid, plan, plan.t_end)
        final = ComplexField(model.grid, end)
    else:
        final = snaps[-1]
    return Trajectory(tuple(times), tuple(snaps), model, plan, final)


def linear_propagate(f: ComplexField, t: float, model: ModelSpec, dt: float = 0.01) -> ComplexField:
    """e^{-itH}f with H = -Δ + V; the interaction of ``model`` is ignored.

    For V = 0 this is the exact multiplier e^{-it|ξ|²}; otherwise Strang
    steps of size at most ``dt`` (landing exactly on t).
    """
    if t == 0:
        return f
    if model.potential.is_zero:
        return ComplexField(f.grid, filter_values(f.values, np.exp(-1j * t * f.grid.k_squared)))
    linear = model.without_interaction()
    n = max(1, math.ceil(abs(t) / dt - 1e-9))
    h = t / n
    v = _advance(np.array(f.values, dtype=complex), linear, h, n, _kinetic_multiplier(f.grid, h, False))
    _check_finite(v, t)
    return ComplexField(f.grid, v)


def time_derivative(u: ComplexField, model: ModelSpec) -> ComplexField:
    """∂ₜu evaluated from the equation, i.e. rhs(u)."""
    return rhs(u, model)


def duhamel_residual(trajectory: Trajectory, t_index: int) -> float:
    """Relative L² mismatch between u(t) and its discretised Duhamel representation.

    The representation is e^{-i(t-t₀)H}u(t₀) - i∫ e^{-i(t-s)H}N(u(s)) ds with
    the integral by the composite trapezoid rule on the snapshots.  The sum is
    accumulated Horner-style, A_j = e^{-iΔH}A_{j-1} - iΔc_jN_j, which is
    algebraically the same as propagating every term separately.  The linear
    flow for V ≠ 0 uses Strang steps of the trajectory's dt.
    """
    snaps = trajectory.snapshots
    if len(snaps) < 3:
        raise ValueError("duhamel_residual needs at least 3 snapshots")
    if not 0 <= t_index < len(snaps):
        raise IndexError(f"t_index {t_index} outside 0..{len(snaps) - 1}")
    model = trajectory.model
    grid = model.grid
    target = snaps[t_index].values
    norm = math.sqrt(np.vdot(target, target).real)
    if t_index == 0:
        return 0.0
    plan = trajectory.plan
    spacing = plan.dt * plan.snapshot_stride
    linear = model.without_interaction()
    if model.potential.is_zero:
        def flow(v: np.ndarray) -> np.ndarray:
            return filter_values(v, np.exp(-1j * spacing * grid.k_squared))
    else:
        mult = _kinetic_multiplier(grid, plan.dt, False)

        def flow(v: np.ndarray) -> np.ndarray:
            return _advance(v, linear, plan.dt, plan.snapshot_stride, mult)

    def term(j: int) -> np.ndarray:
        v = snaps[j].values
        p = nonlinear_potential(v, model)
        if p is None:
            return np.zeros_like(v)
        weight = 0.5 if j in (0, t_index) else 1.0
        return -1j * spacing * weight * (p * v)

    acc = np.array(snaps[0].values, dtype=complex) + term(0)
    for j in range(1, t_index + 1):
        acc = flow(acc) + term(j)
    diff = target - acc
    err = math.sqrt(np.vdot(diff, diff).real)
    return err / norm if norm > 0 else err


# ---------------------------------------------------------------------------
# binary snapshots
# ---------------------------------------------------------------------------


def write_snapshot(path: str | Path, u: ComplexField, time: float) -> None:
    """HPROP1: magic, u8 dimension, u32 points, f64 half_length, f64 time, then (re, im) f64 pairs, all little-endian."""
    g = u.grid
    header = _HEADER.pack(SNAPSHOT_MAGIC, g.dimension, g.points_per_axis, g.half_length, float(time))
    body = np.ascontiguousarray(u.values, dtype="<c16").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(body)


def read_snapshot(path: str | Path) -> tuple[ComplexField, float]:
    from .grid import make_grid

    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ValueError("truncated snapshot header")
    magic, dim, n, half, time = _HEADER.unpack_from(data)
    if magic != SNAPSHOT_MAGIC:
        raise ValueError(f"bad snapshot magic {magic!r}")
    grid = make_grid(dim, n, half)
    expected = grid.size * 16
    body = data[_HEADER.size:]
    if len(body) != expected:
        raise ValueError(f"snapshot body has {len(body)} bytes, expected {expected}")
    values = np.frombuffer(body, dtype="<c16").reshape(grid.shape).astype(complex)
    return ComplexField(grid, values), time
