"""The acceptance matrix: thirteen criteria, each evaluated at its stated tolerance.

Runs shared between criteria (the free runs, the small-data d=3 runs, the
inequality suite) are computed once per :class:`AcceptanceContext`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from . import bootstrap as bs
from .config import from_preset
from .diagnostics import kernel_integral
from .grid import lp_norm, make_grid, sample
from .physics import InteractionSpec, ModelSpec, PotentialSpec, energy
from .propagator import StepPlan, duhamel_residual, evolve
from .scenarios import RunSummary, bootstrap_checks, run_scenario

__all__ = ["CriterionResult", "AcceptanceContext", "CRITERIA", "run_criteria", "select_criteria"]


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    parts: dict[str, bool] = field(default_factory=dict)
    metrics: dict[str, Any] = field(default_factory=dict)

    def line(self) -> str:
        failed = [k for k, v in self.parts.items() if not v]
        tail = f" (failed: {', '.join(failed)})" if failed else ""
        return f"criterion {self.number:2d} {self.title}: {'PASS' if self.passed else 'FAIL'}{tail}"


class AcceptanceContext:
    """Caches expensive runs so criteria sharing a run evaluate it once."""

    def __init__(self, fast: bool = False, seed: int = 0, dimensions: Sequence[int] | None = None):
        self.fast = fast
        self.seed = seed
        self.dimensions = tuple(dimensions) if dimensions else (1, 2, 3)
        self._cache: dict[Any, Any] = {}

    def cached(self, key: Any, fn: Callable[[], Any]) -> Any:
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    def scenario(self, name: str, dimension: int | None = None, overrides: Sequence[str] = ()) -> RunSummary:
        key = ("scenario", name, dimension, tuple(overrides))
        ov = [*overrides, f"seed={self.seed}"]
        return self.cached(key, lambda: run_scenario(from_preset(name, ov, dimension, self.fast)))

    def small_data(self, depth: float) -> RunSummary:
        return self.scenario("small_data_hartree", 3, (f"potential.depth={depth!r}",))


def _result(number: int, title: str, parts: dict[str, bool], **metrics: Any) -> CriterionResult:
    return CriterionResult(number, title, all(parts.values()) and bool(parts), parts, metrics)


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------


def criterion_1(ctx: AcceptanceContext) -> CriterionResult:
    parts, m = {}, {}
    for d in ctx.dimensions:
        s = ctx.scenario("free_decay", d)
        parts[f"d{d}"] = s.checks.get("dispersive_law", False)
        m[f"d{d}_ratio"] = s.extras.get("dispersive_ratio_max")
        m[f"d{d}_bound"] = s.extras.get("dispersive_bound")
    return _result(1, "free dispersive law", parts, **m)


def criterion_2(ctx: AcceptanceContext) -> CriterionResult:
    parts, m = {}, {}
    for d in ctx.dimensions:
        s = ctx.scenario("free_decay", d)
        parts[f"d{d}"] = s.checks.get("decay_exponent", False)
        m[f"d{d}"] = s.exponents.get("sup_norm")
    return _result(2, "decay-exponent recovery", parts, **m)


def criterion_3(ctx: AcceptanceContext) -> CriterionResult:
    parts, m = {}, {}
    for depth in (-0.05, 0.05):
        s = ctx.small_data(depth)
        tag = "attractive" if depth < 0 else "repulsive"
        fit = s.exponents.get("sup_norm")
        parts[f"{tag}_exponent"] = fit is not None and 1.35 <= fit["exponent"] <= 1.65
        for name in ("smallness_budget", "running_M_monotone", "running_M_below_c0", "continuity_trap"):
            parts[f"{tag}_{name}"] = s.checks.get(name, False)
        m[tag] = {"fit": fit, "bootstrap": s.bootstrap, "extras": s.extras, "aborted": s.aborted}
    return _result(3, "small-data Hartree decay", parts, **m)


def criterion_4(ctx: AcceptanceContext) -> CriterionResult:
    parts, m = {}, {}
    for depth in (-0.05, 0.05):
        s = ctx.small_data(depth)
        tag = "attractive" if depth < 0 else "repulsive"
        fit = s.exponents.get("dt_sup_norm")
        parts[f"{tag}_derivative_exponent"] = fit is not None and 1.3 <= fit["exponent"] <= 1.7
        m[tag] = fit
    return _result(4, "derivative decay", parts, **m)


def _d1_hartree_model(points: int = 256, half_length: float = 16.0) -> ModelSpec:
    grid = make_grid(1, points, half_length)
    return ModelSpec(grid, PotentialSpec("gaussian_well", -0.5, 2.0), InteractionSpec("gaussian", 1.0, 1.0))


def _d1_data(model: ModelSpec):
    return sample(model.grid, {"family": "gaussian", "sigma": 1.0, "amplitude": 1.0})


def energy_drift(dt: float, t_end: float = 2.0) -> tuple[float, float]:
    """(|E(T) - E(0)|, max relative mass drift) for the d=1 reference Hartree run."""
    model = _d1_hartree_model()
    u0 = _d1_data(model)
    tr = evolve(u0, model, StepPlan(dt=dt, t_end=t_end, snapshot_stride=int(round(t_end / dt)),
                                    boundary_mass_max=None))
    m0 = lp_norm(u0, 2)
    drift = max(abs(lp_norm(s, 2) / m0 - 1) for s in (*tr.snapshots, tr.final))
    return abs(energy(tr.final, model) - energy(u0, model)), drift


def criterion_5(ctx: AcceptanceContext) -> CriterionResult:
    parts: dict[str, bool] = {}
    drifts = {}
    for d in ctx.dimensions:
        drifts[f"free_d{d}"] = ctx.scenario("free_decay", d).extras.get("max_mass_drift", math.inf)
    if 3 in ctx.dimensions:
        for depth in (-0.05, 0.05):
            drifts[f"small_data_{depth}"] = ctx.small_data(depth).extras.get("max_mass_drift", math.inf)
    e1, m1 = energy_drift(0.01)
    e2, m2 = energy_drift(0.005)
    drifts["d1_hartree_dt0.01"], drifts["d1_hartree_dt0.005"] = m1, m2
    parts["mass_drift"] = max(drifts.values()) <= 1e-11
    ratio = e1 / e2
    parts["energy_drift_order"] = 4 * 0.7 <= ratio <= 4 * 1.3
    return _result(5, "conservation", parts, mass_drift=drifts, energy_drift=[e1, e2], energy_ratio=ratio)


def duhamel_at_end(dt: float, t_end: float = 1.0) -> float:
    model = _d1_hartree_model()
    tr = evolve(_d1_data(model), model, StepPlan(dt=dt, t_end=t_end, boundary_mass_max=None))
    return duhamel_residual(tr, len(tr.snapshots) - 1)


def criterion_6(ctx: AcceptanceContext) -> CriterionResult:
    r_coarse = duhamel_at_end(2e-3)
    r_fine = duhamel_at_end(1e-3)
    ratio = r_coarse / r_fine
    parts = {"order_two": 4 * 0.7 <= ratio, "absolute_at_1e-3": r_fine <= 1e-4}
    return _result(6, "Duhamel residual", parts, residuals=[r_coarse, r_fine], ratio=ratio,
                   observed_order=math.log2(ratio))


def criterion_7(ctx: AcceptanceContext) -> CriterionResult:
    res = bootstrap_checks(0.1, 7.0, 1000, ctx.seed)
    an = res["analysis"]
    parts = {
        "two_components": an.two_intervals and an.gap > 0,
        "tilde_identity": res["tilde_identity_max_error"] <= 1e-14,
        "root_agreement": res["root_agreement_max"] <= 1e-12,
    }
    return _result(7, "bootstrap structure", parts, c0=an.c0, roots=list(an.roots),
                   tilde_identity_max_error=res["tilde_identity_max_error"],
                   tilde_inequality_holds=res["tilde_inequality_holds"],
                   root_agreement_max=res["root_agreement_max"])


KERNEL_SWEEP = (2.0, 5.0, 10.0, 20.0, 50.0, 100.0)


def criterion_8(ctx: AcceptanceContext) -> CriterionResult:
    values = [kernel_integral(t, 3) for t in KERNEL_SWEEP]
    try:
        kernel_integral(5.0, 2)
        raised = False
    except ValueError:
        raised = True
    parts = {
        "bounded": all(math.isfinite(v) for v in values),
        "max_over_min_le_2": max(values) / min(values) <= 2.0,
        "d2_raises": raised,
    }
    return _result(8, "kernel integral", parts, values=dict(zip(KERNEL_SWEEP, values)),
                   ratio=max(values) / min(values))


def criterion_9(ctx: AcceptanceContext) -> CriterionResult:
    s = ctx.scenario("inequality_suite", 1)
    keys = ("kato_ponce_bounded", "kato_ponce_stable", "kato_ponce_scale_invariant")
    return _result(9, "Kato-Ponce", {k: s.checks.get(k, False) for k in keys},
                   C_KP=s.extras.get("C_KP"), C_KP_reseeded=s.extras.get("C_KP_reseeded"))


def criterion_10(ctx: AcceptanceContext) -> CriterionResult:
    s = ctx.scenario("inequality_suite", 1)
    keys = ("equivalent_norm_potential", "equivalent_norm_free_modes")
    return _result(10, "equivalent norm", {k: s.checks.get(k, False) for k in keys},
                   max_lower=s.extras.get("equivalent_norm_max_lower"),
                   max_upper=s.extras.get("equivalent_norm_max_upper"))


def criterion_11(ctx: AcceptanceContext) -> CriterionResult:
    s = ctx.scenario("cubic_limit")
    keys = ("errors_strictly_decreasing", "gronwall_bound_holds")
    return _result(11, "cubic limit", {k: s.checks.get(k, False) for k in keys}, table=s.extras.get("table"))


def criterion_12(ctx: AcceptanceContext) -> CriterionResult:
    # closed form against quadrature over a spread of (C₁, T₀)
    worst = 0.0
    for c1 in (0.5, 1.0, 44.0):
        for t0 in (2.0, 4.0, 10.0):
            a, b = bs.beta_l1(c1, t0, 3), bs.beta_l1_quadrature(c1, t0, 3)
            worst = max(worst, abs(a - b) / a)
    s = ctx.scenario("large_data_gronwall")
    parts = {"beta_closed_form": worst <= 1e-10, "run_below_bound": s.checks.get("N_below_bound", False)}
    return _result(12, "Gronwall large-data bound", parts, beta_rel_error=worst,
                   N_T=s.extras.get("N_T"), bound=s.extras.get("bound"))


def self_convergence(dts: Sequence[float] = (0.04, 0.02, 0.01, 0.005), t_end: float = 1.0,
                     dt_ref: float = 1e-4) -> tuple[float, list[float]]:
    """Log-log slope of ‖u_dt(T) - u_ref(T)‖₂ against dt for the d=1 reference run."""
    model = _d1_hartree_model()
    u0 = _d1_data(model)

    def final(dt: float):
        return evolve(u0, model, StepPlan(dt=dt, t_end=t_end, snapshot_stride=int(round(t_end / dt)),
                                          boundary_mass_max=None)).final

    ref = final(dt_ref)
    errs = [lp_norm(final(dt) - ref, 2) for dt in dts]
    slope = float(np.polyfit(np.log(dts), np.log(errs), 1)[0])
    return slope, errs


def reversibility(dt: float = 0.01, t_end: float = 2.0) -> float:
    model = _d1_hartree_model()
    u0 = _d1_data(model)
    n = int(round(t_end / dt))
    fwd = evolve(u0, model, StepPlan(dt=dt, t_end=t_end, snapshot_stride=n, boundary_mass_max=None)).final
    back = evolve(fwd, model, StepPlan(dt=-dt, t_start=t_end, t_end=0.0, snapshot_stride=n,
                                       boundary_mass_max=None)).final
    return lp_norm(back - u0, 2) / lp_norm(u0, 2)


def criterion_13(ctx: AcceptanceContext) -> CriterionResult:
    slope, errs = self_convergence()
    rev = reversibility()
    parts = {"slope_2": abs(slope - 2.0) <= 0.2, "reversible": rev <= 1e-9}
    return _result(13, "integrator self-convergence", parts, slope=slope, errors=errs, reversibility=rev)


@dataclass(frozen=True)
class Criterion:
    number: int
    scenarios: tuple[str, ...]
    dimensions: tuple[int, ...]
    run: Callable[[AcceptanceContext], CriterionResult]


CRITERIA: tuple[Criterion, ...] = (
    Criterion(1, ("free_decay",), (1, 2, 3), criterion_1),
    Criterion(2, ("free_decay",), (1, 2, 3), criterion_2),
    Criterion(3, ("small_data_hartree",), (3,), criterion_3),
    Criterion(4, ("derivative_decay", "small_data_hartree"), (3,), criterion_4),
    Criterion(5, ("small_data_hartree", "free_decay"), (1, 3), criterion_5),
    Criterion(6, ("small_data_hartree",), (1,), criterion_6),
    Criterion(7, ("bootstrap_sweep",), (), criterion_7),
    Criterion(8, ("inequality_suite",), (3,), criterion_8),
    Criterion(9, ("inequality_suite",), (1,), criterion_9),
    Criterion(10, ("inequality_suite",), (1,), criterion_10),
    Criterion(11, ("cubic_limit",), (1,), criterion_11),
    Criterion(12, ("large_data_gronwall",), (3,), criterion_12),
    Criterion(13, ("small_data_hartree",), (1,), criterion_13),
)


def select_criteria(only: str | None = None, dimension: int | None = None) -> list[Criterion]:
    out = []
    for c in CRITERIA:
        if only is not None and only not in c.scenarios and only != str(c.number):
            continue
        if dimension is not None and dimension not in c.dimensions:
            continue
        out.append(c)
    return out


def run_criteria(only: str | None = None, dimension: int | None = None, fast: bool = False,
                 seed: int = 0, report: Callable[[CriterionResult], None] | None = None) -> list[CriterionResult]:
    ctx = AcceptanceContext(fast=fast, seed=seed, dimensions=(dimension,) if dimension else None)
    results = []
    for c in select_criteria(only, dimension):
        r = c.run(ctx)
        results.append(r)
        if report is not None:
            report(r)
    return results
