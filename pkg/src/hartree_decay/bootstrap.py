"""The cubic bootstrap function f(x) = ε + Cx³ - x, the continuity trap and the
Gronwall bound for large data.

For ε, C > 0, f has a local minimum at x_c = 1/√(3C) with value
ε - 2/(3√(3C)); {f ≥ 0} ∩ [0,∞) splits into two components exactly when that
value is negative.  The stationary-point argument uses x̃ = 1/√(6C), where
f′(x̃) = -1/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate, optimize

from .diagnostics import ConstantsLedger

__all__ = [
    "BootstrapAnalysis",
    "TrapVerdict",
    "analyze",
    "bootstrap_function",
    "threshold",
    "fold_epsilon",
    "default_epsilon",
    "tilde_point",
    "cardano_roots",
    "bisection_roots",
    "continuity_trap",
    "smallness_budget",
    "SmallnessBudget",
    "beta_l1",
    "beta_l1_quadrature",
    "gronwall_bound",
    "gronwall_alpha",
    "measured_c1",
]


def _check_positive(epsilon: float, c_coeff: float) -> None:
    if not (epsilon > 0 and math.isfinite(epsilon)):
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if not (c_coeff > 0 and math.isfinite(c_coeff)):
        raise ValueError(f"c_coeff must be positive, got {c_coeff}")


def bootstrap_function(x, epsilon: float, c_coeff: float):
    return epsilon + c_coeff * x**3 - x


def threshold(c_coeff: float) -> float:
    """Sufficient smallness 1/(2√(6C)) for the two-interval structure."""
    return 1.0 / (2.0 * math.sqrt(6.0 * c_coeff))


def fold_epsilon(c_coeff: float) -> float:
    """ε at which the two components merge (double root at 1/√(3C))."""
    return 2.0 / (3.0 * math.sqrt(3.0 * c_coeff))


def default_epsilon(c_coeff: float) -> float:
    return 0.9 * threshold(c_coeff)


def tilde_point(c_coeff: float) -> float:
    return 1.0 / math.sqrt(6.0 * c_coeff)


def _newton(x: float, epsilon: float, c_coeff: float) -> float:
    for _ in range(3):
        d = 3 * c_coeff * x * x - 1
        if d == 0:
            break
        step = bootstrap_function(x, epsilon, c_coeff) / d
        x -= step
        if abs(step) <= 1e-17 * max(1.0, abs(x)):
            break
    return x


def cardano_roots(epsilon: float, c_coeff: float) -> list[float]:
    """Real roots of Cx³ - x + ε in increasing order, by the closed form.

    Three real roots use the trigonometric form; one real root uses the
    hyperbolic form.  Each root gets a short Newton polish.
    """
    _check_positive(epsilon, c_coeff)
    # depressed cubic x³ + px + q with p = -1/C, q = ε/C
    p, q = -1.0 / c_coeff, epsilon / c_coeff
    disc = -(4 * p**3 + 27 * q * q)
    r = 2 * math.sqrt(-p / 3)
    arg = 3 * q / (p * r)  # cos(3θ) argument
    if disc >= 0:
        arg = max(-1.0, min(1.0, arg))
        theta = math.acos(arg) / 3
        roots = [r * math.cos(theta - 2 * math.pi * j / 3) for j in range(3)]
    else:
        # single real root (negative, since f(0) > 0 and f → -∞ as x → -∞)
        roots = [-r * math.cosh(math.acosh(-arg) / 3)]
    return sorted(_newton(x, epsilon, c_coeff) for x in roots)


def bisection_roots(epsilon: float, c_coeff: float) -> list[float]:
    """Non-negative roots by bracketing on [0, x_c] and [x_c, ∞)."""
    _check_positive(epsilon, c_coeff)
    xc = 1.0 / math.sqrt(3 * c_coeff)
    f = lambda x: bootstrap_function(x, epsilon, c_coeff)  # noqa: E731
    if f(xc) > 0:
        return []
    if f(xc) == 0:
        return [xc, xc]
    hi = 2 * xc
    while f(hi) <= 0:
        hi *= 2
    a = optimize.bisect(f, 0.0, xc, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    b = optimize.bisect(f, xc, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    return [a, b]


@dataclass(frozen=True)
class BootstrapAnalysis:
    epsilon: float
    c_coeff: float
    roots: tuple[float, ...]
    intervals: tuple[tuple[float, float], ...]
    c0: float
    threshold: float
    bisection_agreement: float

    @property
    def two_intervals(self) -> bool:
        return len(self.intervals) == 2

    @property
    def gap(self) -> float:
        if not self.two_intervals:
            return 0.0
        return self.intervals[1][0] - self.intervals[0][1]

    @property
    def x_tilde(self) -> float:
        return tilde_point(self.c_coeff)

    def f(self, x):
        return bootstrap_function(x, self.epsilon, self.c_coeff)

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "c_coeff": self.c_coeff,
            "threshold": self.threshold,
            "roots": list(self.roots),
            "c0": self.c0,
            "intervals": [list(i) for i in self.intervals],
            "two_intervals": self.two_intervals,
        }


def analyze(epsilon: float, c_coeff: float) -> BootstrapAnalysis:
    """Root structure of f on [0, ∞), certified against a bisection oracle.

    A double root (the fold) counts as a single component: the gap between
    the pieces would be zero, not strictly positive.
    """
    _check_positive(epsilon, c_coeff)
    roots = [x for x in cardano_roots(epsilon, c_coeff) if x >= 0]
    oracle = bisection_roots(epsilon, c_coeff)
    if len(oracle) != len(roots) and epsilon != fold_epsilon(c_coeff):
        raise ArithmeticError(f"closed-form and bisection disagree on the root count: {roots} vs {oracle}")
    agreement = max((abs(a - b) for a, b in zip(roots, oracle)), default=0.0)
    if len(roots) == 2 and roots[1] - roots[0] > 0:
        intervals = ((0.0, roots[0]), (roots[1], math.inf))
        c0 = roots[0]
    else:
        intervals = ((0.0, math.inf),)
        c0 = math.inf
    return BootstrapAnalysis(epsilon, c_coeff, tuple(roots), intervals, c0,
                             threshold(c_coeff), agreement)


@dataclass(frozen=True)
class TrapVerdict:
    """PASS, JUMPED (some sample left the first component) or NOT_TRAPPED
    (the series starts above c0, so the trap never applied)."""

    verdict: str
    margin: float
    first_offending_index: int | None = None

    @property
    def passed(self) -> bool:
        return self.verdict == "PASS"

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "margin": self.margin,
                "first_offending_index": self.first_offending_index}


def continuity_trap(m_series: Sequence[float], analysis: BootstrapAnalysis) -> TrapVerdict:
    if len(m_series) == 0:
        raise ValueError("empty M series")
    if not analysis.two_intervals:
        raise ValueError("continuity trap needs the two-interval structure")
    m = np.asarray(m_series, dtype=float)
    margin = float(np.min(analysis.c0 - m))
    if m[0] > analysis.c0:
        return TrapVerdict("NOT_TRAPPED", margin, 0)
    bad = np.nonzero(m > analysis.c0)[0]
    if bad.size:
        return TrapVerdict("JUMPED", margin, int(bad[0]))
    return TrapVerdict("PASS", margin)


@dataclass(frozen=True)
class SmallnessBudget:
    """C = 3‖w‖₁max(C_infE, C_kE), the resulting analysis, and ε₀."""

    c_coeff: float
    analysis: BootstrapAnalysis
    epsilon0: float
    linear_l1_max: float
    hk_max: float

    def to_dict(self) -> dict:
        return {
            "c_coeff": self.c_coeff,
            "epsilon": self.analysis.epsilon,
            "c0": self.analysis.c0,
            "epsilon0": self.epsilon0,
            "linear_l1_max": self.linear_l1_max,
            "hk_max": self.hk_max,
        }


def smallness_budget(ledger: ConstantsLedger, w_l1: float, epsilon: float | None = None) -> SmallnessBudget:
    """Thresholds a run's data must meet for the bootstrap argument to apply.

    The budget is ε₀ = min(ε, C₀)/(3·C_V·C_DS); data qualifies when
    ‖e^{iH}u₁‖₁ ≤ ε₀ and ‖u₁‖_{H^k} ≤ ε₀ (each then contributes at most
    ε/3 to M).
    """
    if ledger is None:
        raise ValueError("smallness_budget needs a populated ledger")
    if not w_l1 > 0:
        raise ValueError("w_l1 must be positive")
    c = 3.0 * w_l1 * max(ledger.C_infE, ledger.C_kE)
    eps = default_epsilon(c) if epsilon is None else epsilon
    an = analyze(eps, c)
    eps0 = min(eps, an.c0) / (3 * ledger.C_V.value * ledger.C_DS.value)
    return SmallnessBudget(c, an, eps0, eps0, eps0)


# ---------------------------------------------------------------------------
# Gronwall bound
# ---------------------------------------------------------------------------


def beta_l1(c1: float, t0: float, d: int) -> float:
    """∫_{T₀}^∞ 2^{d/2+1}C₁s^{-d/2} ds in closed form."""
    if d < 3:
        raise ValueError(f"β is not integrable for d={d}; needs d >= 3")
    half = d / 2
    return 2 ** (half + 1) * c1 * t0 ** (1 - half) / (half - 1)


def beta_l1_quadrature(c1: float, t0: float, d: int) -> float:
    if d < 3:
        raise ValueError(f"β is not integrable for d={d}; needs d >= 3")
    half = d / 2
    val, _ = integrate.quad(lambda s: 2 ** (half + 1) * c1 * s ** (-half), t0, np.inf,
                            epsabs=0, epsrel=1e-13, limit=200)
    return val


def gronwall_bound(alpha: float, beta_integral: float) -> float:
    """C₀ = α·exp(‖β‖_{L¹})."""
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    return alpha * math.exp(beta_integral)


def gronwall_alpha(n_at_t0: float, c1: float, ledger: ConstantsLedger, linear_data_l1: float) -> float:
    """α = 2(1 + 2^{d/2}·C₁·2/(d-2))·N(T₀) + 2·C_V·‖e^{iH}u₁‖₁."""
    d = ledger.dimension
    if d < 3:
        raise ValueError("Gronwall bound needs d >= 3")
    return 2 * (1 + 2 ** (d / 2) * c1 * 2 / (d - 2)) * n_at_t0 + 2 * ledger.C_V.value * linear_data_l1


def measured_c1(ledger: ConstantsLedger, w_l1: float, u1_mass: float, sup_dk_l2: float) -> float:
    """C₁ = max(C_V‖w‖₁‖u₁‖₂², C_S·C_DS·C_ES·‖w‖₁·(‖u₁‖₂ + 3·C_KP²·sup‖D^k u‖₂))."""
    a = ledger.C_V.value * w_l1 * u1_mass**2
    b = (ledger.C_S.value * ledger.C_DS.value * ledger.C_ES.value * w_l1
         * (u1_mass + 3 * ledger.C_KP.value**2 * sup_dk_l2))
    return max(a, b)
