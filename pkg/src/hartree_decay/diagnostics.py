"""Measured quantities along a trajectory and numerical checks of the estimates.

Running quantities follow two time conventions.  ``running_N``, ``running_M``
and ``running_M_tilde`` use the window 1 ≤ t ≤ T with weight t^{d/2}, and are
0.0 until a record with t ≥ 1 arrives.  ``running_N0`` uses 0 ≤ t ≤ T with
weight (1+t)^{d/2}.  Fits are always against log(1+t) unless told otherwise.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.fft as sfft
from scipy import integrate

from .grid import ComplexField, GridSpec, boundary_mass_fraction, make_grid
from .physics import ModelSpec, nonlinear_potential
from .propagator import linear_propagate

__all__ = [
    "DiagnosticsRecord",
    "TrajectoryDiagnostics",
    "MeasuredConstant",
    "ConstantsLedger",
    "ChainReport",
    "record",
    "decay_fit",
    "dispersive_constant",
    "hk_propagation_constant",
    "sobolev_constant",
    "kato_ponce_ratio",
    "kato_ponce_constant",
    "equivalent_norm_ratio",
    "equivalent_norm_constant",
    "free_multiplier_bounds",
    "kernel_integral",
    "estimate_chain_check",
    "bandlimited_corpus",
    "write_csv",
    "CSV_COLUMNS",
]

CSV_COLUMNS = (
    "t", "mass", "energy", "sup_norm", "l1_norm", "hk_norm", "dk_l2",
    "dt_sup_norm", "boundary_mass_fraction", "running_N", "running_M",
)


@dataclass(frozen=True)
class DiagnosticsRecord:
    """Norms of u(t) and ∂ₜu(t).  ``mass`` is ‖u‖₂ (not squared)."""

    t: float
    mass: float
    energy: float
    sup_norm: float
    l1_norm: float
    hk_norm: float
    dk_l2: float
    dt_sup_norm: float
    boundary_mass_fraction: float
    dt_dk_l2: float = 0.0
    dt_l2: float = 0.0

    def __post_init__(self) -> None:
        for name, value in asdict(self).items():
            if not math.isfinite(value):
                raise ValueError(f"record field {name} is not finite: {value}")
            if name not in ("t", "energy") and value < 0:
                raise ValueError(f"record field {name} is negative: {value}")


def _spectral_norm(coeffs: np.ndarray, weight: np.ndarray, grid: GridSpec) -> float:
    # ‖weight·û‖₂ in the discrete convention, from raw (unnormalised) FFT data
    return float(np.sqrt(np.sum(weight * (coeffs.real**2 + coeffs.imag**2))) * math.sqrt(grid.cell_volume / grid.size))


def record(t: float, u: ComplexField | np.ndarray, model: ModelSpec) -> DiagnosticsRecord:
    """Evaluate every diagnostic of u at time t (∂ₜu taken from the equation)."""
    g = model.grid
    values = u.values if isinstance(u, ComplexField) else np.asarray(u)
    k = model.sobolev_index
    k2 = g.k_squared
    dk_weight = k2**k  # |ξ|^{2k}
    hk_weight = (1.0 + k2) ** k
    raw = sfft.fftn(values)
    dens = values.real**2 + values.imag**2
    mass = math.sqrt(g.cell_volume * float(dens.sum()))
    sup = math.sqrt(float(dens.max()))
    l1 = g.cell_volume * float(np.sqrt(dens).sum())

    kinetic = _spectral_norm(raw, k2, g) ** 2
    pot = nonlinear_potential(values, model)
    inter = 0.0 if pot is None else 0.5 * g.cell_volume * float(np.sum(pot * dens))
    total_pot = pot
    potential = 0.0
    if not model.potential.is_zero:
        potential = g.cell_volume * float(np.sum(model.potential_values * dens))
        total_pot = model.potential_values if pot is None else pot + model.potential_values

    h_u = sfft.ifftn(k2 * raw)
    if total_pot is not None:
        h_u += total_pot * values
    dtu = -1j * h_u
    dt_raw = sfft.fftn(dtu)
    dt_dens = dtu.real**2 + dtu.imag**2
    return DiagnosticsRecord(
        t=float(t),
        mass=mass,
        energy=kinetic + potential + inter,
        sup_norm=sup,
        l1_norm=l1,
        hk_norm=_spectral_norm(raw, hk_weight, g),
        dk_l2=_spectral_norm(raw, dk_weight, g),
        dt_sup_norm=math.sqrt(float(dt_dens.max())),
        boundary_mass_fraction=boundary_mass_fraction(ComplexField(g, values)) if mass > 0 else 0.0,
        dt_dk_l2=_spectral_norm(dt_raw, dk_weight, g),
        dt_l2=math.sqrt(g.cell_volume * float(dt_dens.sum())),
    )


@dataclass
class TrajectoryDiagnostics:
    """Time-ordered records with the running sup-quantities N, M and M̃."""

    dimension: int
    records: list[DiagnosticsRecord] = field(default_factory=list)
    running_N: float = 0.0
    running_N0: float = 0.0
    running_M: float = 0.0
    running_M_tilde: float = 0.0
    u1_mass: float | None = None
    linear_data_l1: float | None = None
    N_series: list[float] = field(default_factory=list)
    M_series: list[float] = field(default_factory=list)
    M_tilde_series: list[float] = field(default_factory=list)
    _sup_dk: float = 0.0
    _sup_dt_weighted: float = 0.0
    _sup_dt_dk: float = 0.0
    _sup_dt_l2: float = 0.0

    def append(self, rec: DiagnosticsRecord) -> None:
        if self.records and rec.t <= self.records[-1].t:
            raise ValueError("records must be appended in increasing time")
        self.records.append(rec)
        half = self.dimension / 2
        self.running_N0 = max(self.running_N0, (1 + rec.t) ** half * rec.sup_norm)
        if rec.t >= 1:
            if self.u1_mass is None:
                self.u1_mass = rec.mass
            self.running_N = max(self.running_N, rec.t**half * rec.sup_norm)
            self._sup_dk = max(self._sup_dk, rec.dk_l2)
            self._sup_dt_weighted = max(self._sup_dt_weighted, rec.t**half * rec.dt_sup_norm)
            self._sup_dt_dk = max(self._sup_dt_dk, rec.dt_dk_l2)
            self._sup_dt_l2 = max(self._sup_dt_l2, rec.dt_l2)
            self.running_M = self.running_N + self._sup_dk + self.u1_mass
            self.running_M_tilde = (self.running_M + self._sup_dt_weighted
                                    + self._sup_dt_dk + self._sup_dt_l2)
        self.N_series.append(self.running_N)
        self.M_series.append(self.running_M)
        self.M_tilde_series.append(self.running_M_tilde)

    def extend(self, recs: Iterable[DiagnosticsRecord]) -> None:
        for r in recs:
            self.append(r)

    @property
    def sup_dk_l2(self) -> float:
        """sup_{1≤t≤T} ‖D^k u(t)‖₂."""
        return self._sup_dk

    @property
    def times(self) -> np.ndarray:
        return np.array([r.t for r in self.records])

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])

    def n0_at(self, t: float) -> float:
        """N(t) = sup_{0≤s≤t} (1+s)^{d/2}‖u(s)‖_∞ over the recorded samples."""
        half = self.dimension / 2
        vals = [(1 + r.t) ** half * r.sup_norm for r in self.records if r.t <= t + 1e-12]
        if not vals:
            raise ValueError(f"no records at or before t={t}")
        return max(vals)


def write_csv(path: str | Path, diag: TrajectoryDiagnostics) -> None:
    """Time series with the fixed column schema, 17 significant digits."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for rec, n, m in zip(diag.records, diag.N_series, diag.M_series):
            row = [getattr(rec, c) for c in CSV_COLUMNS[:-2]] + [n, m]
            w.writerow([f"{x:.17g}" for x in row])


def decay_fit(records: Sequence[DiagnosticsRecord], t_window: tuple[float, float],
              quantity: str = "sup_norm", offset: float = 1.0) -> tuple[float, float, float]:
    """Least-squares fit q ≈ A·(offset+t)^{-α} over records with t in the window (and t ≥ 1).

    Returns (A, α, r²).  A perfect fit, including a constant signal, has r² = 1.
    """
    lo, hi = t_window
    sel = [r for r in records if lo - 1e-12 <= r.t <= hi + 1e-12 and r.t >= 1]
    if len(sel) < 8:
        raise ValueError(f"fit window {t_window} holds {len(sel)} records with t >= 1; need 8")
    t = np.array([r.t for r in sel])
    if np.ptp(t) == 0:
        raise ValueError("degenerate fit window: all times equal")
    q = np.array([getattr(r, quantity) for r in sel])
    if np.any(q <= 0):
        raise ValueError(f"{quantity} must be positive to fit a power law")
    x = np.log(offset + t)
    y = np.log(q)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0 or ss_res <= 1e-30 * max(ss_tot, 1.0) else 1.0 - ss_res / ss_tot
    return float(math.exp(intercept)), float(-slope), r2


# ---------------------------------------------------------------------------
# measured constants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MeasuredConstant:
    """A sup-over-corpus ratio; ``value`` is the raw maximum floored at 1."""

    name: str
    raw: float
    corpus_size: int

    @property
    def value(self) -> float:
        return max(self.raw, 1.0)

    def to_dict(self) -> dict:
        return {"name": self.name, "raw": self.raw, "value": self.value, "corpus_size": self.corpus_size}


def _times_sorted(times: Iterable[float]) -> list[float]:
    ts = sorted(float(t) for t in times)
    if not ts:
        raise ValueError("times must be non-empty")
    return ts


def _flow_sweep(f: ComplexField, model: ModelSpec, times: list[float], dt: float):
    """Yield (t, e^{-itH}f), propagating incrementally through sorted times."""
    cur, t_cur = f, 0.0
    for t in times:
        cur = linear_propagate(cur, t - t_cur, model, dt) if t != t_cur else cur
        t_cur = t
        yield t, cur


def dispersive_constant(model: ModelSpec, corpus: Sequence[ComplexField], times: Iterable[float],
                        dt: float = 0.01) -> MeasuredConstant:
    """max over corpus × times of |t|^{d/2}‖e^{-itH}f‖_∞/‖f‖₁ (interaction ignored)."""
    if not corpus:
        raise ValueError("empty corpus")
    ts = _times_sorted(times)
    if ts[0] <= 0:
        raise ValueError("dispersive ratio needs t > 0")
    half = model.dimension / 2
    best = 0.0
    for f in corpus:
        l1 = float(model.grid.cell_volume * np.abs(f.values).sum())
        for t, g in _flow_sweep(f, model, ts, dt):
            best = max(best, t**half * float(np.abs(g.values).max()) / l1)
    return MeasuredConstant("C_V", best, len(corpus))


def _hk(values: np.ndarray, grid: GridSpec, k: int) -> float:
    return _spectral_norm(sfft.fftn(values), (1.0 + grid.k_squared) ** k, grid)


def hk_propagation_constant(model: ModelSpec, corpus: Sequence[ComplexField], times: Iterable[float],
                            dt: float = 0.01) -> MeasuredConstant:
    """max over corpus × times of ‖e^{-itH}f‖_{H^k}/‖f‖_{H^k}."""
    if not corpus:
        raise ValueError("empty corpus")
    ts = _times_sorted(times)
    k = model.sobolev_index
    best = 0.0
    for f in corpus:
        base = _hk(f.values, model.grid, k)
        for _, g in _flow_sweep(f, model, ts, dt):
            best = max(best, _hk(g.values, model.grid, k) / base)
    return MeasuredConstant("C_DS", best, len(corpus))


def sobolev_constant(corpus: Sequence[ComplexField], k: int) -> MeasuredConstant:
    """max over corpus of ‖f‖_∞/‖f‖_{H^k} (the embedding H^k ⊂ L^∞, k > d/2)."""
    if not corpus:
        raise ValueError("empty corpus")
    best = 0.0
    for f in corpus:
        best = max(best, float(np.abs(f.values).max()) / _hk(f.values, f.grid, k))
    return MeasuredConstant("C_S", best, len(corpus))


def bandlimited_corpus(grid: GridSpec, count: int, seed: int, band: float = 1.0 / 6.0,
                       scale: float | None = None) -> list[ComplexField]:
    """Random fields whose spectrum lives on |m_i| < band·n with a gaussian envelope.

    The default band keeps products (band 2·band·n) clear of the top third.
    ``scale`` sets the envelope width in index units (default band·n/2).
    """
    rng = np.random.default_rng(seed)
    n = grid.points_per_axis
    m = np.fft.fftfreq(n, d=1.0 / n)
    idx = np.meshgrid(*([m] * grid.dimension), indexing="ij", sparse=True)
    keep = np.ones(grid.shape, dtype=bool)
    r2 = np.zeros(grid.shape)
    for a in idx:
        keep = keep & (np.abs(a) < band * n)
        r2 = r2 + a * a
    s = scale if scale is not None else band * n / 2
    envelope = np.where(keep, np.exp(-r2 / (2 * s * s)), 0.0)
    out = []
    for _ in range(count):
        c = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
        out.append(ComplexField(grid, sfft.ifftn(c * envelope) * grid.size))
    return out


def _top_third_fraction(values: np.ndarray) -> float:
    n = values.shape[0]
    m = np.abs(np.fft.fftfreq(n, d=1.0 / n))
    idx = np.meshgrid(*([m] * values.ndim), indexing="ij", sparse=True)
    outer = np.zeros(values.shape, dtype=bool)
    for a in idx:
        outer = outer | (a >= n / 3)
    c = np.abs(sfft.fftn(values)) ** 2
    total = c.sum()
    return float(c[outer].sum() / total) if total > 0 else 0.0


def _pad_values(values: np.ndarray) -> np.ndarray:
    """Trigonometric interpolation onto the grid with twice the points per axis."""
    n = values.shape[0]
    c = sfft.fftn(values)
    big = np.zeros((2 * n,) * values.ndim, dtype=complex)
    half = n // 2
    sl = [np.r_[0:half, 2 * n - half:2 * n] for _ in range(values.ndim)]
    big[np.ix_(*sl)] = c
    return sfft.ifftn(big) * 2**values.ndim


def kato_ponce_ratio(f: ComplexField, h: ComplexField, k: int, band_tol: float = 1e-20) -> float:
    """‖D^k(fh)‖₂ / (‖D^k f‖₂‖h‖_∞ + ‖f‖_∞‖D^k h‖₂).

    Inputs must be band-limited (spectral energy fraction above |m| ≥ n/3 at
    most ``band_tol``).  All norms are evaluated on the twice-refined grid, on
    which the product is alias-free.
    """
    if f.grid != h.grid:
        raise ValueError("f and h live on different grids")
    for name, x in (("f", f), ("h", h)):
        frac = _top_third_fraction(x.values)
        if frac > band_tol:
            raise ValueError(f"{name} is not band-limited: top-third energy fraction {frac:.3e}")
    g = f.grid
    fine = make_grid(g.dimension, 2 * g.points_per_axis, g.half_length)
    fp, hp = _pad_values(f.values), _pad_values(h.values)
    weight = fine.k_squared**k

    def dk(v: np.ndarray) -> float:
        return _spectral_norm(sfft.fftn(v), weight, fine)

    den = dk(fp) * float(np.abs(hp).max()) + float(np.abs(fp).max()) * dk(hp)
    if den == 0:
        raise ValueError("Kato-Ponce denominator vanishes")
    return dk(fp * hp) / den


def kato_ponce_constant(grid: GridSpec, k: int, pairs: int = 100, seed: int = 0) -> MeasuredConstant:
    corpus = bandlimited_corpus(grid, 2 * pairs, seed)
    best = max(kato_ponce_ratio(corpus[2 * i], corpus[2 * i + 1], k) for i in range(pairs))
    return MeasuredConstant("C_KP", best, pairs)


def _h_power_sum(phi: ComplexField, model: ModelSpec, k: int) -> float:
    g = model.grid
    total = 0.0
    v = np.array(phi.values, dtype=complex)
    for j in range(k // 2 + 1):
        if j:
            nxt = sfft.ifftn(g.k_squared * sfft.fftn(v))
            if not model.potential.is_zero:
                nxt = nxt + model.potential_values * v
            v = nxt
        total += math.sqrt(g.cell_volume * float(np.vdot(v, v).real))
    return total


def equivalent_norm_ratio(phi: ComplexField, model: ModelSpec, k: int | None = None) -> tuple[float, float]:
    """(‖φ‖_{H^k}/Σ_{j≤k/2}‖H^jφ‖₂, its reciprocal) with H = -Δ + V."""
    k = model.sobolev_index if k is None else k
    if k % 2:
        raise ValueError("k must be even")
    hk = _hk(phi.values, phi.grid, k)
    if hk == 0:
        raise ValueError("phi must be non-zero")
    s = _h_power_sum(phi, model, k)
    return hk / s, s / hk


def equivalent_norm_constant(model: ModelSpec, corpus: Sequence[ComplexField], k: int | None = None) -> MeasuredConstant:
    """C_ES = max over the corpus of both ratios."""
    if not corpus:
        raise ValueError("empty corpus")
    best = 0.0
    for phi in corpus:
        best = max(best, *equivalent_norm_ratio(phi, model, k))
    return MeasuredConstant("C_ES", best, len(corpus))


def free_multiplier_bounds(grid: GridSpec, k: int) -> tuple[float, float]:
    """(a, b) = min and max over grid modes of (1+s²)^{k/2} / Σ_{j≤k/2} s^{2j}.

    For V = 0 every φ then satisfies a/(k/2+1) ≤ ‖φ‖_{H^k}/Σ‖(-Δ)^jφ‖₂ ≤ b.
    """
    s2 = np.unique(grid.k_squared)
    num = (1.0 + s2) ** (k / 2)
    den = sum(s2**j for j in range(k // 2 + 1))
    r = num / den
    return float(r.min()), float(r.max())


# ---------------------------------------------------------------------------
# kernel integral
# ---------------------------------------------------------------------------


def kernel_integral(t: float, d: int) -> float:
    """∫_0^{t-1} (1+t)^{d/2}|t-s|^{-d/2}(1+s)^{-d/2} ds (0 when t ≤ 1)."""
    if d < 3:
        raise ValueError(f"kernel integral is not uniformly bounded for d={d}; needs d >= 3")
    if t < 0:
        raise ValueError("t must be non-negative")
    t0 = max(t - 1.0, 0.0)
    if t0 == 0:
        return 0.0
    half = d / 2

    def integrand(s: float) -> float:
        return (1 + t) ** half * (t - s) ** (-half) * (1 + s) ** (-half)

    # the integrand peaks near both ends; split at the midpoint
    mid = 0.5 * t0
    a, _ = integrate.quad(integrand, 0.0, mid, epsabs=0, epsrel=1e-12, limit=200)
    b, _ = integrate.quad(integrand, mid, t0, epsabs=0, epsrel=1e-12, limit=200)
    return a + b


# ---------------------------------------------------------------------------
# ledger and the estimate chain
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstantsLedger:
    """Measured constants (each floored at 1) and the derived composites."""

    dimension: int
    C_V: MeasuredConstant
    C_DS: MeasuredConstant
    C_ES: MeasuredConstant
    C_KP: MeasuredConstant
    C_S: MeasuredConstant

    @classmethod
    def unit(cls, dimension: int) -> ConstantsLedger:
        one = {n: MeasuredConstant(n, 1.0, 0) for n in ("C_V", "C_DS", "C_ES", "C_KP", "C_S")}
        return cls(dimension, **one)

    @property
    def C_SE(self) -> float:
        return 4 * self.C_S.value * self.C_DS.value * self.C_ES.value * self.C_KP.value**2

    @property
    def C_infE(self) -> float:
        d = self.dimension
        if d < 3:
            raise ValueError("C_infE is defined for d >= 3")
        return 2 ** (2 + d / 2) / (d - 2) * self.C_V.value + 2 ** (d / 2) * self.C_SE

    @property
    def C_kE(self) -> float:
        d = self.dimension
        if d < 2:
            raise ValueError("C_kE is defined for d >= 2")
        return 4 * self.C_ES.value * self.C_DS.value * self.C_KP.value**2 / (d - 1)

    def to_dict(self) -> dict:
        out = {"dimension": self.dimension}
        for name in ("C_V", "C_DS", "C_ES", "C_KP", "C_S"):
            out[name] = getattr(self, name).to_dict()
        if self.dimension >= 3:
            out.update(C_SE=self.C_SE, C_infE=self.C_infE, C_kE=self.C_kE)
        return out


@dataclass(frozen=True)
class ChainReport:
    times: tuple[float, ...]
    lhs: tuple[float, ...]
    rhs: tuple[float, ...]

    @property
    def margins(self) -> tuple[float, ...]:
        return tuple(r - l for l, r in zip(self.lhs, self.rhs))

    @property
    def min_margin(self) -> float:
        return min(self.margins) if self.margins else math.inf

    @property
    def witnessed(self) -> bool:
        return all(m >= 0 for m in self.margins)


def estimate_chain_check(diag: TrajectoryDiagnostics, ledger: ConstantsLedger | None, w_l1: float,
                         linear_data_l1: float | None = None, m_scale: float = 1.0) -> ChainReport:
    """Both sides of  t^{d/2}‖u(t)‖_∞ ≤ C_V‖e^{iH}u₁‖₁ + C_infE‖w‖₁M(t)³  at each record t ≥ 1."""
    if ledger is None:
        raise ValueError("estimate_chain_check needs a populated ledger")
    lin = diag.linear_data_l1 if linear_data_l1 is None else linear_data_l1
    if lin is None:
        raise ValueError("‖e^{iH}u₁‖₁ is missing")
    half = diag.dimension / 2
    ts, lhs, rhs = [], [], []
    for rec, m in zip(diag.records, diag.M_series):
        if rec.t < 1:
            continue
        ts.append(rec.t)
        lhs.append(rec.t**half * rec.sup_norm)
        rhs.append(ledger.C_V.value * lin + ledger.C_infE * w_l1 * (m_scale * m) ** 3)
    if not ts:
        raise ValueError("no records with t >= 1")
    return ChainReport(tuple(ts), tuple(lhs), tuple(rhs))
