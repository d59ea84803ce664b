"""The nine preset experiments.  Each takes a :class:`ScenarioConfig` and
returns a :class:`RunSummary` with one pass/fail entry per declared check."""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import bootstrap as bs
from .config import ScenarioConfig
from .diagnostics import (
    ConstantsLedger,
    MeasuredConstant,
    TrajectoryDiagnostics,
    bandlimited_corpus,
    decay_fit,
    dispersive_constant,
    equivalent_norm_constant,
    equivalent_norm_ratio,
    estimate_chain_check,
    free_multiplier_bounds,
    hk_propagation_constant,
    kato_ponce_constant,
    kato_ponce_ratio,
    kernel_integral,
    record,
    sobolev_constant,
    write_csv,
)
from .grid import ComplexField, lp_norm, make_grid, sample, sobolev_norm
from .physics import CubicLocal, InteractionSpec, ModelSpec, PotentialSpec, interaction_l1, nonlinear_potential
from .propagator import BoundaryMassError, StepPlan, evolve, linear_propagate, stream, write_snapshot

__all__ = [
    "RunSummary",
    "TrajectoryRun",
    "HartreeRun",
    "build_model",
    "build_initial",
    "build_plan",
    "measure_ledger",
    "run_trajectory",
    "hartree_decay_run",
    "cubic_limit_experiment",
    "run_scenario",
    "SCENARIO_RUNNERS",
]


@dataclass
class RunSummary:
    scenario: str
    checks: dict[str, bool] = field(default_factory=dict)
    exponents: dict[str, dict[str, float]] = field(default_factory=dict)
    ledger: dict[str, Any] | None = None
    bootstrap: dict[str, Any] | None = None
    wall_seconds: float = 0.0
    seed: int = 0
    extras: dict[str, Any] = field(default_factory=dict)
    aborted: str | None = None

    def check(self, name: str, passed: bool) -> None:
        if name in self.checks:
            raise KeyError(f"check {name!r} declared twice")
        self.checks[name] = bool(passed)

    @property
    def passed(self) -> bool:
        return self.aborted is None and all(self.checks.values())

    @property
    def exit_code(self) -> int:
        if self.aborted is not None:
            return 3
        return 0 if self.passed else 1

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "passed": self.passed,
            "checks": [{"name": k, "passed": v} for k, v in self.checks.items()],
            "exponents": self.exponents,
            "ledger": self.ledger,
            "bootstrap": self.bootstrap,
            "wall_seconds": self.wall_seconds,
            "seed": self.seed,
            "extras": _jsonable(self.extras),
            "aborted": self.aborted,
        }

    def write(self, directory: str | Path) -> Path:
        p = Path(directory)
        p.mkdir(parents=True, exist_ok=True)
        out = p / "summary.json"
        out.write_text(json.dumps(self.to_dict(), indent=2, allow_nan=True) + "\n")
        return out


def _jsonable(x: Any) -> Any:
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.bool_):
        return bool(x)
    return x


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------


def _grid(cfg: ScenarioConfig, points: int | None = None, half_length: float | None = None):
    g = cfg.section("grid")
    return make_grid(g["dimension"], points or g["points"], half_length or g["half_length"])


def _potential(cfg: ScenarioConfig) -> PotentialSpec:
    p = cfg.section("potential")
    return PotentialSpec(p["family"], float(p["depth"]), float(p["width"]), float(p["wavevector"]))


def _interaction(cfg: ScenarioConfig):
    i = cfg.section("interaction")
    fam = i["family"]
    if fam == "none":
        return None
    if fam == "cubic":
        return CubicLocal(int(i["sign"]))
    return InteractionSpec(fam, float(i["total_mass"]), float(i["width"]), int(i["mollifier_index"]))


def build_model(cfg: ScenarioConfig, points: int | None = None, half_length: float | None = None,
                interaction: bool = True) -> ModelSpec:
    grid = _grid(cfg, points, half_length)
    return ModelSpec(grid, _potential(cfg), _interaction(cfg) if interaction else None)


def build_initial(cfg: ScenarioConfig, grid) -> ComplexField:
    i = cfg.section("initial")
    spec = {"family": "gaussian", "amplitude": float(i["amplitude"]), "sigma": float(i["width"]),
            "chirp": float(i.get("chirp", 0.0))}
    if "center" in i:
        spec["center"] = [float(c) for c in i["center"]]
    return sample(grid, spec)


def build_plan(cfg: ScenarioConfig) -> StepPlan:
    t = cfg.section("time")
    tol = cfg.section("tolerances")
    return StepPlan(dt=float(t["dt"]), t_end=float(t["t_end"]), snapshot_stride=int(t["stride"]),
                    boundary_mass_max=float(tol["boundary_mass_max"]))


def _gaussian_corpus(grid, count: int) -> list[ComplexField]:
    widths = [1.0, 1.5, 2.0, 2.5, 3.0, 1.25, 1.75, 2.25]
    out = []
    for j in range(count):
        sigma = widths[j % len(widths)]
        center = [0.5 * (j % 3)] + [0.0] * (grid.dimension - 1)
        out.append(sample(grid, {"family": "gaussian", "sigma": sigma, "center": center}))
    return out


def measure_ledger(cfg: ScenarioConfig) -> ConstantsLedger:
    """Measure C_V, C_DS, C_ES, C_KP and C_S for the configured V on the ledger grid."""
    led = cfg.section("ledger")
    d = cfg.section("grid")["dimension"]
    model = build_model(cfg, led["points"], led["half_length"], interaction=False)
    corpus = _gaussian_corpus(model.grid, int(led["corpus_size"]))
    times = [float(t) for t in led["times"]]
    dt = float(led["dt"])
    k = model.sobolev_index
    c_v = dispersive_constant(model, corpus, times, dt)
    c_ds = hk_propagation_constant(model, corpus, times, dt)
    c_es = equivalent_norm_constant(model, corpus, k)
    c_s = sobolev_constant(corpus, k)
    kp_grid = make_grid(d, int(led["kp_points"]), float(led["half_length"]))
    c_kp = kato_ponce_constant(kp_grid, k, int(led["kp_pairs"]), cfg.seed)
    return ConstantsLedger(d, c_v, c_ds, c_es, c_kp, c_s)


@dataclass
class TrajectoryRun:
    diag: TrajectoryDiagnostics
    trip_time: float | None
    trip_fraction: float | None
    u1: ComplexField | None
    final: ComplexField
    final_time: float
    mass0: float
    max_mass_drift: float


def run_trajectory(model: ModelSpec, u0: ComplexField, plan: StepPlan,
                   snapshot_dir: Path | None = None) -> TrajectoryRun:
    """Stream the integration, recording diagnostics at every snapshot.

    A boundary-guard trip ends the run early and is reported, not raised:
    it marks the end of the window where whole-space behaviour is visible.
    """
    diag = TrajectoryDiagnostics(model.dimension)
    mass0 = lp_norm(u0, 2)
    u1 = None
    last = None
    trip = frac = None
    drift = 0.0
    try:
        for t, v in stream(u0, model, plan):
            rec = record(t, v, model)
            diag.append(rec)
            if mass0 > 0:
                drift = max(drift, abs(rec.mass / mass0 - 1.0))
            if u1 is None and abs(t - 1.0) < 1e-9:
                u1 = ComplexField(model.grid, v)
            last = (t, v)
    except BoundaryMassError as exc:
        trip, frac = exc.time, exc.fraction
    if last is None:
        raise RuntimeError("boundary guard tripped on the initial data; enlarge the box")
    final = ComplexField(model.grid, last[1])
    if snapshot_dir is not None:
        snapshot_dir.mkdir(parents=True, exist_ok=True)
        write_snapshot(snapshot_dir / "initial.hprop", u0, plan.t_start)
        write_snapshot(snapshot_dir / "final.hprop", final, last[0])
    return TrajectoryRun(diag, trip, frac, u1, final, last[0], mass0, drift)


def _fit_window(cfg: ScenarioConfig, run: TrajectoryRun) -> tuple[float, float]:
    tol = cfg.section("tolerances")
    hi = float(tol["fit_end"])
    if run.trip_time is not None:
        hi = min(hi, 0.8 * run.trip_time)
    return float(tol["fit_start"]), min(hi, run.final_time)


def _fit(summary: RunSummary, name: str, run: TrajectoryRun, window, quantity: str):
    try:
        amp, alpha, r2 = decay_fit(run.diag.records, window, quantity)
    except ValueError as exc:
        summary.extras[f"{name}_fit_error"] = str(exc)
        return None
    summary.exponents[name] = {"amplitude": amp, "exponent": alpha, "r2": r2,
                               "window": [window[0], window[1]]}
    return alpha, r2


def _outputs(cfg: ScenarioConfig, out_dir: Path | None, run: TrajectoryRun | None, summary: RunSummary) -> None:
    if out_dir is None:
        return
    out_dir.mkdir(parents=True, exist_ok=True)
    if run is not None and cfg.get("output.csv", True):
        write_csv(out_dir / "diagnostics.csv", run.diag)
    summary.write(out_dir)


def _snap_dir(cfg: ScenarioConfig, out_dir: Path | None) -> Path | None:
    if out_dir is None or not cfg.get("output.snapshots", False):
        return None
    return out_dir / "snapshots"


def _mass_ok(run: TrajectoryRun) -> bool:
    return run.max_mass_drift <= 1e-11


# ---------------------------------------------------------------------------
# scenarios
# ---------------------------------------------------------------------------


def free_decay(cfg: ScenarioConfig, out_dir: Path | None = None) -> RunSummary:
    s = RunSummary(cfg.scenario, seed=cfg.seed)
    model = build_model(cfg, interaction=False)
    model = ModelSpec(model.grid)  # V = 0, w = 0
    d = model.dimension
    u0 = build_initial(cfg, model.grid)
    run = run_trajectory(model, u0, build_plan(cfg), _snap_dir(cfg, out_dir))
    l1 = lp_norm(u0, 1)
    t_hi = 0.8 * run.trip_time if run.trip_time is not None else run.final_time
    ratios = [r.t ** (d / 2) * r.sup_norm / l1 for r in run.diag.records if 1 <= r.t <= t_hi + 1e-12]
    bound = (4 * math.pi) ** (-d / 2)
    s.extras.update(trip_time=run.trip_time, dispersive_ratio_max=max(ratios, default=math.nan),
                    dispersive_bound=bound, samples=len(ratios))
    s.check("dispersive_law", bool(ratios) and max(ratios) <= bound * 1.05)
    fit = _fit(s, "sup_norm", run, _fit_window(cfg, run), "sup_norm")
    s.check("decay_exponent", fit is not None and abs(fit[0] - d / 2) <= 0.1 and fit[1] >= 0.999)
    s.check("mass_conservation", _mass_ok(run))
    s.extras["max_mass_drift"] = run.max_mass_drift
    _outputs(cfg, out_dir, run, s)
    return s


def linear_dispersive(cfg: ScenarioConfig, out_dir: Path | None = None) -> RunSummary:
    s = RunSummary(cfg.scenario, seed=cfg.seed)
    ledger = measure_ledger(cfg)
    s.ledger = ledger.to_dict()
    raws = [getattr(ledger, n).raw for n in ("C_V", "C_DS", "C_ES", "C_KP", "C_S")]
    s.check("constants_finite", all(math.isfinite(r) and r > 0 for r in raws))
    if _potential(cfg).is_zero:
        d = ledger.dimension
        s.check("free_dispersive_bound", ledger.C_V.raw <= (4 * math.pi) ** (-d / 2) * 1.05)
    _outputs(cfg, out_dir, None, s)
    return s


@dataclass
class HartreeRun:
    run: TrajectoryRun
    ledger: ConstantsLedger
    budget: bs.SmallnessBudget
    linear_data_l1: float
    u1_hk: float
    window: tuple[float, float]


def hartree_decay_run(cfg: ScenarioConfig, out_dir: Path | None = None) -> HartreeRun:
    """The small-data run shared by the Hartree, cubic and derivative scenarios."""
    model = build_model(cfg)
    ledger = measure_ledger(cfg)
    budget = bs.smallness_budget(ledger, model.w_l1)
    u0 = build_initial(cfg, model.grid)
    plan = build_plan(cfg)
    run = run_trajectory(model, u0, plan, _snap_dir(cfg, out_dir))
    if run.u1 is None:
        raise RuntimeError("the run never reached t = 1; extend time.t_end or align time.dt")
    e_ih_u1 = linear_propagate(run.u1, -1.0, model, plan.dt)
    lin = lp_norm(e_ih_u1, 1)
    run.diag.linear_data_l1 = lin
    return HartreeRun(run, ledger, budget, lin, sobolev_norm(run.u1, model.sobolev_index),
                      _fit_window(cfg, run))


def _monotone(series) -> bool:
    a = np.asarray(series)
    return bool(np.all(np.diff(a) >= 0))


def _small_data_summary(cfg: ScenarioConfig, hr: HartreeRun, s: RunSummary, w_l1: float) -> None:
    run = hr.run
    d = run.diag.dimension
    s.ledger = hr.ledger.to_dict()
    s.extras.update(trip_time=run.trip_time, linear_data_l1=hr.linear_data_l1, u1_hk=hr.u1_hk,
                    max_mass_drift=run.max_mass_drift, running_M=run.diag.running_M,
                    running_N=run.diag.running_N, running_N0=run.diag.running_N0)
    b = hr.budget
    s.check("smallness_budget", hr.linear_data_l1 <= b.epsilon0 and hr.u1_hk <= b.epsilon0)
    fit = _fit(s, "sup_norm", run, hr.window, "sup_norm")
    s.check("decay_exponent", fit is not None and abs(fit[0] - d / 2) <= 0.15)
    _fit(s, "dt_sup_norm", run, hr.window, "dt_sup_norm")  # reported; judged by derivative_decay
    s.check("running_M_monotone", _monotone(run.diag.M_series))
    s.check("running_M_below_c0", max(run.diag.M_series) <= b.analysis.c0)
    trap = bs.continuity_trap(run.diag.M_series, b.analysis)
    s.bootstrap = {**b.analysis.to_dict(), **trap.to_dict(), "epsilon0": b.epsilon0,
                   "budget_c_coeff": b.c_coeff}
    s.check("continuity_trap", trap.passed)
    chain = estimate_chain_check(run.diag, hr.ledger, w_l1)
    s.extras["estimate_chain_min_margin"] = chain.min_margin
    s.check("estimate_chain", chain.witnessed)
    s.check("mass_conservation", _mass_ok(run))


def small_data_hartree(cfg: ScenarioConfig, out_dir: Path | None = None) -> RunSummary:
    s = RunSummary(cfg.scenario, seed=cfg.seed)
    hr = hartree_decay_run(cfg, out_dir)
    _small_data_summary(cfg, hr, s, build_model(cfg).w_l1)
    _outputs(cfg, out_dir, hr.run, s)
    return s


def small_data_cubic(cfg: ScenarioConfig, out_dir: Path | None = None) -> RunSummary:
    return small_data_hartree(cfg, out_dir)


def derivative_decay(cfg: ScenarioConfig, out_dir: Path | None = None) -> RunSummary:
    s = RunSummary(cfg.scenario, seed=cfg.seed)
    hr = hartree_decay_run(cfg, out_dir)
    run = hr.run
    d = run.diag.dimension
    s.ledger = hr.ledger.to_dict()
    fit = _fit(s, "dt_sup_norm", run, hr.window, "dt_sup_norm")
    s.check("derivative_exponent", fit is not None and abs(fit[0] - d / 2) <= 0.2)
    s.check("running_M_tilde_monotone", _monotone(run.diag.M_tilde_series))
    s.check("mass_conservation", _mass_ok(run))
    s.extras.update(running_M_tilde=run.diag.running_M_tilde, trip_time=run.trip_time)
    _outputs(cfg, out_dir, run, s)
    return s


def cubic_limit_experiment(cfg: ScenarioConfig) -> dict[str, Any]:
    """Cubic NLS against Hartree with w_n = n^d w(n·) from the same data.

    For each n: sup_t‖u - u_n‖₂, ε_n = 2‖u₀‖₂²∫₀^T‖|u|² - w_n*|u|²‖_∞ ds
    (trapezoid over snapshots), C = 2|λ|·sup_t(‖u‖_∞ + ‖u_n‖_∞)‖u‖_∞, and
    whether ‖u - u_n‖₂² ≤ ε_n·e^{Ct} at every snapshot.
    """
    inter = cfg.section("interaction")
    sign = int(inter["sign"])
    grid = _grid(cfg)
    pot = _potential(cfg)
    plan = build_plan(cfg)
    u0 = build_initial(cfg, grid)
    cubic = ModelSpec(grid, pot, CubicLocal(sign))
    ref = evolve(u0, cubic, plan)
    times = np.array(ref.times)
    m0sq = lp_norm(u0, 2) ** 2
    u_sup = np.array([np.abs(v.values).max() for v in ref.snapshots])
    rows = []
    for n in cfg.section("cubic_limit")["indices"]:
        spec = InteractionSpec("mollifier_of_gaussian", float(sign), float(inter["width"]), int(n))
        model = ModelSpec(grid, pot, spec)
        tr = evolve(u0, model, plan)
        err = np.array([lp_norm(a - b, 2) for a, b in zip(ref.snapshots, tr.snapshots)])
        gap = []
        for v in ref.snapshots:
            dens = np.abs(v.values) ** 2
            gap.append(np.abs(dens - sign * nonlinear_potential(v.values, model)).max())
        eps_n = 2 * m0sq * float(np.trapezoid(gap, times))
        un_sup = np.array([np.abs(v.values).max() for v in tr.snapshots])
        c = 2 * abs(spec.total_mass) * float(np.max((u_sup + un_sup) * u_sup))
        bound = eps_n * np.exp(c * (times - times[0]))
        rows.append({
            "n": int(n),
            "sup_error": float(err.max()),
            "epsilon_n": eps_n,
            "C": c,
            "bound_holds": bool(np.all(err**2 <= bound)),
            "min_bound_margin": float(np.min(bound - err**2)),
            "w_n_l1": interaction_l1(spec, grid),
        })
    return {"rows": rows, "times": times.tolist()}


def cubic_limit(cfg: ScenarioConfig, out_dir: Path | None = None) -> RunSummary:
    s = RunSummary(cfg.scenario, seed=cfg.seed)
    table = cubic_limit_experiment(cfg)
    rows = table["rows"]
    errs = [r["sup_error"] for r in rows]
    s.extras["table"] = rows
    s.check("errors_strictly_decreasing", all(a > b for a, b in zip(errs, errs[1:])))
    s.check("gronwall_bound_holds", all(r["bound_holds"] for r in rows))
    l1 = [r["w_n_l1"] for r in rows]
    s.check("mollifier_mass_constant", max(l1) - min(l1) <= 1e-6 * max(l1))
    _outputs(cfg, out_dir, None, s)
    return s


def bootstrap_checks(epsilon: float, c_coeff: float, samples: int, seed: int) -> dict[str, Any]:
    """Structure of f for (ε, C) plus randomised identity and root checks."""
    an = bs.analyze(epsilon, c_coeff)
    rng = np.random.default_rng(seed)
    worst_identity = worst_ineq = worst_roots = worst_deriv = 0.0
    ineq_ok = True
    all_two = True
    for _ in range(samples):
        c = 10 ** rng.uniform(-2, 2)
        eps = rng.uniform(0.001, 0.999) * bs.threshold(c)
        a = bs.analyze(eps, c)
        x = bs.tilde_point(c)
        fx = bs.bootstrap_function(x, eps, c)
        target = eps - 1 / (2 * math.sqrt(6 * c))
        worst_identity = max(worst_identity, abs(fx - target))
        ineq_ok &= fx <= target
        worst_ineq = max(worst_ineq, fx - target)
        worst_roots = max(worst_roots, a.bisection_agreement)
        worst_deriv = max(worst_deriv, abs(3 * c * x * x - 1 + 0.5))
        all_two &= a.two_intervals and a.gap > 0
    fold = bs.fold_epsilon(c_coeff)
    below = bs.analyze(fold * (1 - 1e-6), c_coeff).two_intervals
    above = bs.analyze(fold * (1 + 1e-6), c_coeff).two_intervals
    return {
        "analysis": an,
        "tilde_identity_max_error": worst_identity,
        "tilde_inequality_holds": bool(ineq_ok),
        "tilde_inequality_worst": worst_ineq,
        "root_agreement_max": max(worst_roots, an.bisection_agreement),
        "derivative_max_error": worst_deriv,
        "threshold_sufficient": bool(all_two),
        "fold_transition": bool(below and not above),
    }


def bootstrap_sweep(cfg: ScenarioConfig, out_dir: Path | None = None) -> RunSummary:
    s = RunSummary(cfg.scenario, seed=cfg.seed)
    b = cfg.section("bootstrap")
    res = bootstrap_checks(float(b["epsilon"]), float(b["c_coeff"]), int(b["samples"]), cfg.seed)
    an = res.pop("analysis")
    s.bootstrap = {**an.to_dict(), "verdict": "TWO_INTERVALS" if an.two_intervals else "CONNECTED",
                   "margin": an.gap}
    s.extras.update(res)
    s.check("two_intervals", an.two_intervals and an.gap > 0)
    s.check("root_agreement", res["root_agreement_max"] <= 1e-12)
    s.check("tilde_derivative", res["derivative_max_error"] <= 1e-14)
    s.check("tilde_identity", res["tilde_identity_max_error"] <= 1e-14)
    s.check("tilde_inequality", res["tilde_inequality_holds"])
    s.check("threshold_sufficient", res["threshold_sufficient"])
    s.check("fold_transition", res["fold_transition"])
    _outputs(cfg, out_dir, None, s)
    return s


KERNEL_TIMES = (2.0, 5.0, 10.0, 20.0, 50.0, 100.0)


def inequality_suite(cfg: ScenarioConfig, out_dir: Path | None = None) -> RunSummary:
    s = RunSummary(cfg.scenario, seed=cfg.seed)
    led = cfg.section("ledger")
    grid = _grid(cfg)
    k = ModelSpec(grid).sobolev_index
    pairs = int(led["kp_pairs"])
    kp = kato_ponce_constant(grid, k, pairs, cfg.seed)
    kp2 = kato_ponce_constant(grid, k, pairs, cfg.seed + 1)
    corpus = bandlimited_corpus(grid, 2 * pairs, cfg.seed)
    ratios = [kato_ponce_ratio(corpus[2 * i], corpus[2 * i + 1], k) for i in range(pairs)]
    s.check("kato_ponce_bounded", max(ratios) <= kp.raw)
    s.check("kato_ponce_stable", abs(kp2.raw - kp.raw) <= 0.1 * kp.raw)
    f, h = corpus[0], corpus[1]
    base = kato_ponce_ratio(f, h, k)
    scaled = [kato_ponce_ratio(f * a, h * b, k) for a, b in ((2.0, 1.0), (0.3, 7.0), (1e3, 1e-3))]
    s.check("kato_ponce_scale_invariant", max(abs(r / base - 1) for r in scaled) <= 1e-12)
    s.extras.update(C_KP=kp.raw, C_KP_reseeded=kp2.raw)

    model_v = ModelSpec(grid, _potential(cfg))
    ratios_v = [equivalent_norm_ratio(phi, model_v, k) for phi in corpus[:20]]
    lo = max(r[0] for r in ratios_v)
    hi = max(r[1] for r in ratios_v)
    finite = all(math.isfinite(a) and math.isfinite(b) for a, b in ratios_v)
    s.check("equivalent_norm_potential", finite and lo * hi >= 1.0)
    a, b = free_multiplier_bounds(grid, k)
    free = ModelSpec(grid)
    r_free = [equivalent_norm_ratio(phi, free, k)[0] for phi in corpus[:20]]
    s.check("equivalent_norm_free_modes", all(a / (k // 2 + 1) <= r <= b for r in r_free))
    s.extras.update(equivalent_norm_max_lower=lo, equivalent_norm_max_upper=hi, free_mode_bounds=[a, b])

    values = [kernel_integral(t, 3) for t in KERNEL_TIMES]
    s.extras["kernel_values"] = dict(zip([str(t) for t in KERNEL_TIMES], values))
    s.check("kernel_finite", all(math.isfinite(v) for v in values))
    s.check("kernel_plateau_ratio", max(values) / min(values) <= 2.0)
    try:
        kernel_integral(5.0, 2)
        raised = False
    except ValueError:
        raised = True
    s.check("kernel_rejects_d2", raised)
    _outputs(cfg, out_dir, None, s)
    return s


def large_data_gronwall(cfg: ScenarioConfig, out_dir: Path | None = None) -> RunSummary:
    s = RunSummary(cfg.scenario, seed=cfg.seed)
    model = build_model(cfg)
    d = model.dimension
    ledger = measure_ledger(cfg)
    s.ledger = ledger.to_dict()
    u0 = build_initial(cfg, model.grid)
    plan = build_plan(cfg)
    run = run_trajectory(model, u0, plan, _snap_dir(cfg, out_dir))
    t0 = float(cfg.section("gronwall")["t0"])
    if run.u1 is None:
        raise RuntimeError("the run never reached t = 1")
    lin = lp_norm(linear_propagate(run.u1, -1.0, model, plan.dt), 1)
    diag = run.diag
    w_l1 = model.w_l1
    c1 = bs.measured_c1(ledger, w_l1, diag.u1_mass, diag.sup_dk_l2)
    beta = bs.beta_l1(c1, t0, d)
    beta_q = bs.beta_l1_quadrature(c1, t0, d)
    s.check("beta_quadrature", abs(beta - beta_q) <= 1e-10 * max(1.0, abs(beta)))
    n_t0 = max(n for r, n in zip(diag.records, diag.N_series) if r.t <= t0 + 1e-9)
    alpha = bs.gronwall_alpha(n_t0, c1, ledger, lin)
    bound = bs.gronwall_bound(alpha, beta)
    s.check("N_below_bound", diag.running_N <= bound)
    s.check("mass_conservation", _mass_ok(run))
    # the large-data T₀ is meant to satisfy 2^{d/2}C₁(C_d+1)sup_{r≥T₀/2}(‖u‖^{1/4}+‖u‖) ≤ 1/2
    c_d = 1.0 / (3 * d / 8 - 1)
    tail = max((r.sup_norm**0.25 + r.sup_norm) for r in diag.records if r.t >= t0 / 2)
    s.extras.update(C1=c1, beta_l1=beta, beta_l1_quadrature=beta_q, alpha=alpha, bound=bound,
                    N_T=diag.running_N, N_T0=n_t0, linear_data_l1=lin, trip_time=run.trip_time,
                    t0_condition=2 ** (d / 2) * c1 * (c_d + 1) * tail)
    _outputs(cfg, out_dir, run, s)
    return s


SCENARIO_RUNNERS: dict[str, Callable[[ScenarioConfig, Path | None], RunSummary]] = {
    "free_decay": free_decay,
    "linear_dispersive": linear_dispersive,
    "small_data_hartree": small_data_hartree,
    "small_data_cubic": small_data_cubic,
    "derivative_decay": derivative_decay,
    "cubic_limit": cubic_limit,
    "bootstrap_sweep": bootstrap_sweep,
    "inequality_suite": inequality_suite,
    "large_data_gronwall": large_data_gronwall,
}


def run_scenario(cfg: ScenarioConfig, out_dir: str | Path | None = None) -> RunSummary:
    """Run one scenario, timing it; numerical aborts become an aborted summary."""
    from .propagator import NumericalAbort

    start = time.perf_counter()
    path = Path(out_dir) if out_dir is not None else None
    try:
        summary = SCENARIO_RUNNERS[cfg.scenario](cfg, path)
    except NumericalAbort as exc:
        summary = RunSummary(cfg.scenario, seed=cfg.seed, aborted=str(exc))
        summary.extras["abort_time"] = exc.time
    summary.wall_seconds = time.perf_counter() - start
    if path is not None:
        summary.write(path)
    return summary
