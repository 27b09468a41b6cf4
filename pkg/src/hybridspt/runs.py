"""Grid evaluations behind the command line: points, sweeps, phase diagrams,
squeezing scans, elimination checks and convergence reports.

Every function returns plain rows (dicts) in grid order; serialization lives
in :mod:`hybridspt.io`.
"""
from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from math import ceil, isfinite, log, nan, sqrt

import numpy as np

from . import analytic, model, observables, spectra
from . import hilbert as hs
from .errors import ConvergenceFailure, HybridSptError
from .model import ModelParams, SqueezedFrame

log_ = logging.getLogger(__name__)


@dataclass(frozen=True)
class Numerics:
    tol: float = 1e-6
    cutoff_max: int = 16384
    initial_cutoff: int = 30
    growth: float = 1.5
    k: int = 4
    predisplace: bool = False
    predisplace_min_beta2: float = 25.0
    frame: str = "squeezed"
    orders: tuple[int, ...] = (2, 4, 6, 8)
    dense_threshold: int = 4096
    degeneracy_tol: float = 1e-3
    monitor: str = "n_mean"
    timing: bool = False


@dataclass(frozen=True)
class PointSpec:
    """One parameter point.  Give ``gtilde_c`` or ``gtilde_c_s`` and one frequency ratio."""

    gtilde_c: float | None = None
    alpha: float = 0.0
    xi_ratio: float = 0.0
    gtilde_c_s: float | None = None
    Omega_over_omega_s: float | None = None
    Omega_over_omega_b: float | None = None

    def resolve(self) -> ModelParams:
        if (self.gtilde_c is None) == (self.gtilde_c_s is None):
            raise ValueError("give exactly one of gtilde_c, gtilde_c_s")
        gt = self.gtilde_c
        if gt is None:
            gt = model.gtilde_c_for_squeezed_coupling(self.gtilde_c_s, self.alpha, self.xi_ratio)
        ratio_s = self.Omega_over_omega_s
        if ratio_s is None and self.Omega_over_omega_b is None:
            ratio_s = 1e3
        return ModelParams.from_ratios(gt, self.alpha, self.xi_ratio,
                                       Omega_over_omega_s=ratio_s,
                                       Omega_over_omega_b=self.Omega_over_omega_b)


# --- single point -------------------------------------------------------------

def _initial_cutoff(frame: SqueezedFrame, shift: float, num: Numerics) -> int:
    x = frame.gtilde_c_s
    if x > 1 and shift == 0.0:
        b2 = analytic.sp_solution(x, frame.omega_s, frame.Omega).beta_g ** 2
        return max(num.initial_cutoff, int(ceil(b2 + 8 * sqrt(b2) + 40)))
    return num.initial_cutoff


def _monitor(num: Numerics, shift: float):
    if num.monitor == "energy":
        return lambda res: res.ground_energy
    if num.monitor == "variance_P":
        def var_p(res):
            return observables.quadrature_moments(res.ground_state, res.space, orders=(2,),
                                                  shift=shift, cross_check=False).moments[2]
        return var_p
    if num.monitor == "n_mean":
        def n_mean(res):
            b = observables.mode_operator(res.space, shift=shift)
            v = b @ res.ground_state
            return float(np.vdot(v, v).real)
        return n_mean
    raise ValueError(f"unknown convergence monitor {num.monitor!r}")


def solve_frame(frame: SqueezedFrame, num: Numerics = Numerics()) -> tuple[spectra.SpectrumResult, float]:
    """Converged low spectrum of ``H_s``; returns the result and the pre-displacement used."""
    x = frame.gtilde_c_s
    shift = 0.0
    if num.predisplace and x > 1:
        b2 = analytic.sp_solution(x, frame.omega_s, frame.Omega).beta_g ** 2
        if b2 >= num.predisplace_min_beta2:
            shift = sqrt(b2)

    def builder(cutoff):
        space = hs.HilbertSpace((cutoff,))
        if shift:
            return spectra.TruncatedProblem(model.build_H_s_displaced(frame, space, shift), space,
                                            displacement=shift)
        return spectra.TruncatedProblem(model.build_H_s(frame, space), space,
                                        symmetry=hs.parity_operator(space))

    res = spectra.converge_truncation(
        builder, _monitor(num, shift), tol=num.tol, initial_cutoff=_initial_cutoff(frame, shift, num),
        growth=num.growth, ceiling=num.cutoff_max, k=num.k, dense_threshold=num.dense_threshold)
    return res, shift


def physical_state(res: spectra.SpectrumResult, frame: SqueezedFrame, num: Numerics = Numerics()):
    """Ground state, or the broken-symmetry combination of a parity doublet."""
    if res.displacement == 0.0 and len(res.eigenvalues) >= 2:
        deg = spectra.detect_degeneracy(res, num.degeneracy_tol, frame.omega_s)
        if deg == 2:
            pair = observables.symmetry_broken_pair(res.state(0), res.state(1), res.space)
            return pair.plus, deg
        return res.ground_state, deg
    deg = spectra.detect_degeneracy(res, num.degeneracy_tol, frame.omega_s) if len(res.eigenvalues) > 1 else 1
    return res.ground_state, deg


def analytic_columns(frame: SqueezedFrame, frame_kind: str) -> dict:
    x, ws, Om = frame.gtilde_c_s, frame.omega_s, frame.Omega
    r = frame.r if frame_kind == "lab" else 0.0
    out = dict(g2_oracle=nan, g2_printed=nan, g2_limit=nan, gap_analytic=nan,
               coherence_analytic=0.0, energy_analytic=nan)
    if x < 1:
        sol = analytic.np_solution(x, ws, Om)
        out["gap_analytic"] = sol.epsilon_np
        out["energy_analytic"] = sol.E_G_np
        if x > 0:
            t = -(r + sol.r_np)
            out["g2_oracle"] = analytic.g2_gaussian(analytic.GaussianState(0.0, t)) if t else float("inf")
            out["g2_printed"] = analytic.g2_np_analytic(x).printed_formula
            out["g2_limit"] = out["g2_oracle"]
    elif x > 1:
        sol = analytic.sp_solution(x, ws, Om, r)
        out["gap_analytic"] = sol.epsilon_sp
        out["energy_analytic"] = sol.E_G_sp
        cmp_ = analytic.g2_sp_analytic(x, ws, Om, r)
        out["g2_oracle"] = cmp_.value
        out["g2_printed"] = cmp_.printed_formula
        out["g2_limit"] = 1.0
        out["coherence_analytic"] = sol.coherence[0]
    return out


def evaluate_point(spec: PointSpec, num: Numerics = Numerics()) -> dict:
    """Full observable set at one parameter point.  Never raises for physics errors;
    they are reported in the ``status`` column."""
    t0 = time.perf_counter()
    row = dict(alpha=spec.alpha, xi_ratio=spec.xi_ratio)
    try:
        params = spec.resolve()
        frame = model.derive_squeezed_frame(params)
    except HybridSptError as exc:
        row.update(status=f"error:{type(exc).__name__}", message=str(exc))
        return _finish(row, t0, num)
    row.update(gtilde_c=params.gtilde_c, gtilde_c_s=frame.gtilde_c_s, r=frame.r,
               omega_s=frame.omega_s, Omega_over_omega_s=frame.omega_ratio,
               Omega_over_omega_b=params.Omega / params.omega_b)
    try:
        res, shift = solve_frame(frame, num)
    except ConvergenceFailure as exc:
        row.update(status="error:ConvergenceFailure", message=str(exc))
        return _finish(row, t0, num)
    frame_r = frame.r if num.frame == "lab" else 0.0
    state, deg = physical_state(res, frame, num)
    rep = observables.g2_numeric(state, res.space, shift=res.displacement, frame_r=frame_r)
    cls = observables.classify_phase(frame, rep, deg)
    mom = observables.quadrature_moments(state, res.space, orders=num.orders, frame=num.frame,
                                         frame_r=frame.r, shift=res.displacement)
    row.update(
        status="ok" if res.converged else "unconverged",
        phase_analytic=cls.analytic_label, phase_statistical=cls.statistical_label,
        occupation_guard=rep.occupation_guard_triggered,
        n_mean=rep.n_mean, g2=rep.g2, coherence_abs=abs(rep.coherence),
        parity=float(np.real(np.vdot(res.ground_state, hs.parity_operator(res.space).matrix @ res.ground_state))),
        gap=res.gap, degeneracy=deg, ground_energy=res.ground_energy,
    )
    row.update(analytic_columns(frame, num.frame))
    for N in num.orders:
        row[f"moment_{N}"] = mom.moments[N]
        row[f"threshold_{N}"] = mom.thresholds[N]
    row.update(cutoff=res.truncation_dims[0], converged=res.converged, solver=res.solver,
               residual=res.residual, convergence_metric=res.convergence_metric,
               predisplacement=res.displacement)
    return _finish(row, t0, num)


def _finish(row, t0, num):
    row.setdefault("status", "ok")
    if row["status"].startswith("error"):
        row.setdefault("converged", False)
    if num.timing:
        row["wall_time"] = time.perf_counter() - t0
    return row


def _map(fn, items, workers):
    items = list(items)
    if workers is None:
        workers = os.cpu_count() or 1
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _eval_pair(args):
    spec, num = args
    return evaluate_point(spec, num)


# --- 1-D sweeps ----------------------------------------------------------------

SWEEP_VARIABLES = ("gtilde_c", "gtilde_c_s", "xi_ratio")


@dataclass(frozen=True)
class SweepSpec:
    variable: str = "gtilde_c"
    start: float = 0.5
    stop: float = 1.5
    count: int = 51
    alpha: float = 0.0
    xi_ratio: float = 0.0
    gtilde_c: float | None = 1.0
    gtilde_c_s: float | None = None
    Omega_over_omega_s: float | None = 1e3
    Omega_over_omega_b: float | None = None
    numerics: Numerics = field(default_factory=Numerics)

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise ValueError(f"sweep variable must be one of {SWEEP_VARIABLES}")
        if self.count < 2:
            raise ValueError("sweep needs count >= 2")
        if not self.start < self.stop:
            raise ValueError("sweep needs min < max")
        if self.numerics.tol <= 0:
            raise ValueError("tolerance must be positive")

    def grid(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)

    def point(self, value: float) -> PointSpec:
        base = dict(alpha=self.alpha, xi_ratio=self.xi_ratio, gtilde_c=self.gtilde_c,
                    Omega_over_omega_s=self.Omega_over_omega_s,
                    Omega_over_omega_b=self.Omega_over_omega_b)
        if self.variable == "gtilde_c_s":
            base.update(gtilde_c=None, gtilde_c_s=float(value))
        else:
            base[self.variable] = float(value)
            if self.variable == "xi_ratio" and self.gtilde_c_s is not None:
                base.update(gtilde_c=None, gtilde_c_s=self.gtilde_c_s)
        return PointSpec(**base)


def run_sweep(spec: SweepSpec, workers: int | None = 1) -> list[dict]:
    rows = _map(_eval_pair, [(spec.point(v), spec.numerics) for v in spec.grid()], workers)
    for v, row in zip(spec.grid(), rows):
        row[spec.variable] = float(v)
    return rows


def transition_location(xs, g2s, level: float = 2.0):
    """First grid interval where ``g2`` crosses ``level`` (NP bunching -> SP coherent).

    Returns ``(x_left, x_right)`` or ``None``.  Scanned in the direction of
    decreasing g2 so reversed transitions are found too.
    """
    xs = np.asarray(xs, float)
    g = np.asarray(g2s, float)
    ok = np.isfinite(g)
    for i in range(len(xs) - 1):
        if ok[i] and ok[i + 1] and (g[i] - level) * (g[i + 1] - level) < 0:
            return (xs[i], xs[i + 1])
    return None


# --- phase diagram ---------------------------------------------------------------

@dataclass(frozen=True)
class PhaseDiagramSpec:
    xi_start: float = 0.0
    xi_stop: float = 0.3
    xi_count: int = 7
    x_start: float = 0.5
    x_stop: float = 1.5
    x_count: int = 11
    alpha_low: float = 0.0
    alpha_high: float = 1.5
    xi_split: float = 0.25
    Omega_over_omega_s: float = 1e3
    numerics: Numerics = field(default_factory=Numerics)

    def alpha_for(self, xi_ratio: float) -> float:
        return self.alpha_low if xi_ratio < self.xi_split else self.alpha_high


def run_phase_diagram(spec: PhaseDiagramSpec, workers: int | None = 1) -> list[dict]:
    xis = np.linspace(spec.xi_start, spec.xi_stop, spec.xi_count)
    xs = np.linspace(spec.x_start, spec.x_stop, spec.x_count)
    jobs, meta = [], []
    for xi in xis:
        a = spec.alpha_for(xi)
        crit = model.critical_coupling(a, xi)
        for x in xs:
            jobs.append((PointSpec(gtilde_c_s=float(x), alpha=a, xi_ratio=float(xi),
                                   Omega_over_omega_s=spec.Omega_over_omega_s), spec.numerics))
            meta.append(dict(xi_ratio=float(xi), gtilde_c_s=float(x), alpha=a,
                             boundary_gtilde_c=crit if crit else nan,
                             boundary_reason="" if crit else crit.reason))
    rows = _map(_eval_pair, jobs, workers)
    for m, row in zip(meta, rows):
        row.update(m)
    return rows


# --- squeezing scan --------------------------------------------------------------

DEFAULT_PANELS = ((0.0, 0.0), (0.0, 0.245), (1.5, 0.0), (1.5, 0.26))


@dataclass(frozen=True)
class SqueezingSpec:
    panels: tuple[tuple[float, float], ...] = DEFAULT_PANELS
    Omega_over_omega_b: float = 1e3
    count: int = 21
    half_width: float | None = None
    orders: tuple[int, ...] = (2, 4, 6, 8)
    perfect_fraction: float = 0.1
    numerics: Numerics = field(default_factory=lambda: Numerics(predisplace=True, monitor="variance_P"))

    def grid(self, alpha: float, xi_ratio: float) -> tuple[np.ndarray, float | None]:
        """Grid of ``g~_c`` centred on the analytic critical point (1.0 if none).

        The centre is a grid point; ``count`` is forced odd.
        """
        crit = model.critical_coupling(alpha, xi_ratio)
        centre = crit if crit else 1.0
        hw = self.half_width if self.half_width is not None else 0.4 * centre
        n = self.count if self.count % 2 else self.count + 1
        g = centre + hw * np.linspace(-1.0, 1.0, n)
        return g, (crit if crit else None)


def run_squeezing_scan(spec: SqueezingSpec, workers: int | None = 1) -> tuple[list[dict], list[dict]]:
    """Quadrature moments along ``g~_c`` for each ``(alpha, xi)`` panel.

    Returns the per-point rows and one summary row per (panel, order) with the
    argmin location, minimum moment and its ratio to the coherent threshold.
    """
    num = replace(spec.numerics, orders=spec.orders)
    jobs, meta = [], []
    for p, (alpha, xi) in enumerate(spec.panels):
        grid, crit = spec.grid(alpha, xi)
        for g in grid:
            jobs.append((PointSpec(gtilde_c=float(g), alpha=alpha, xi_ratio=xi,
                                   Omega_over_omega_b=spec.Omega_over_omega_b), num))
            meta.append(dict(panel=p, gtilde_c=float(g), critical_gtilde_c=crit if crit else nan))
    rows = _map(_eval_pair, jobs, workers)
    for m, row in zip(meta, rows):
        row.update(m)

    summary = []
    for p, (alpha, xi) in enumerate(spec.panels):
        prow = [r for r in rows if r["panel"] == p and r["status"] in ("ok", "unconverged")]
        step = float(np.diff(spec.grid(alpha, xi)[0])[0])
        for N in spec.orders:
            vals = np.array([r[f"moment_{N}"] for r in prow])
            i = int(np.argmin(vals))
            thr = analytic.coherent_threshold(N)
            summary.append(dict(
                panel=p, alpha=alpha, xi_ratio=xi, order=N, grid_step=step,
                argmin_gtilde_c=prow[i]["gtilde_c"], min_moment=float(vals[i]),
                threshold=thr, min_ratio=float(vals[i]) / thr,
                max_ratio=float(vals.max()) / thr,
                all_below_threshold=bool(np.all(vals < thr)),
                perfect=bool(vals[i] < spec.perfect_fraction * thr),
            ))
    return rows, summary


# --- cavity elimination ---------------------------------------------------------

@dataclass(frozen=True)
class EliminationSpec:
    ratios: tuple[float, ...] = (0.0, 0.01, 0.02, 0.04, 0.08)
    delta_over_omega_b: float = 20.0
    Omega_over_omega_b: float = 2.0
    gtilde_c: float = 0.5
    alpha: float = 0.0
    cutoff_a: int = 20
    cutoff_b: int = 200
    check_fraction: float = 0.75
    check_tol: float = 1e-9


def _ground_energy(H):
    # two-mode matrices are very sparse; Lanczos wins well below the default dense threshold
    return spectra.diagonalize(H, 1, dense_threshold=1000).ground_energy


def elimination_point(spec: EliminationSpec, ratio: float, omega_b: float = 1.0) -> dict:
    delta = spec.delta_over_omega_b * omega_b
    G = ratio * delta
    Omega = spec.Omega_over_omega_b * omega_b
    g = spec.gtilde_c * 0.5 * sqrt(omega_b * Omega)
    two = ModelParams(omega_b=omega_b, Omega=Omega, alpha=spec.alpha, g=g, G=G, delta_a_tilde=delta)
    eff = ModelParams(omega_b=omega_b, Omega=Omega, alpha=spec.alpha, g=g, xi=two.xi_value)

    def energies(ca, cb):
        s2 = hs.HilbertSpace((ca, cb))
        s1 = hs.HilbertSpace((cb,))
        return (_ground_energy(model.build_H_linearized(two, s2)),
                _ground_energy(model.build_H_eff(eff, s1)))

    e_lin, e_eff = energies(spec.cutoff_a, spec.cutoff_b)
    c_a = max(2, int(ceil(spec.check_fraction * spec.cutoff_a)))
    c_b = max(2, int(ceil(spec.check_fraction * spec.cutoff_b)))
    e_lin_small, _ = energies(c_a, c_b)
    drift = abs(e_lin_small - e_lin)
    return dict(G_over_delta=ratio, G=G, delta_a_tilde=delta, xi=two.xi_value,
                E_linearized=e_lin, E_effective=e_eff, delta_E=e_lin - e_eff,
                abs_delta_E=abs(e_lin - e_eff), cutoff_a=spec.cutoff_a, cutoff_b=spec.cutoff_b,
                truncation_drift=drift, converged=bool(drift <= spec.check_tol * max(1.0, abs(e_lin))))


def fit_power_law(xs, ys) -> float:
    """Slope of ``log y`` against ``log x`` by least squares."""
    lx = np.log(np.asarray(xs, float))
    ly = np.log(np.asarray(ys, float))
    return float(np.polyfit(lx, ly, 1)[0])


def validate_elimination(spec: EliminationSpec = EliminationSpec(), workers: int | None = 1):
    """Ground energies of the two-mode and eliminated models; returns rows and the exponent."""
    rows = _map(_elim_job, [(spec, r) for r in spec.ratios], workers)
    fit = [(r["G_over_delta"], r["abs_delta_E"]) for r in rows if r["G_over_delta"] > 0]
    exponent = fit_power_law(*zip(*fit)) if len(fit) >= 2 else nan
    for r in rows:
        r["fitted_exponent"] = exponent
    return rows, exponent


def _elim_job(args):
    spec, ratio = args
    return elimination_point(spec, ratio)


# --- convergence report ----------------------------------------------------------

def convergence_report(spec: PointSpec, num: Numerics = Numerics()) -> list[dict]:
    """Cutoff history for a point, with and without pre-displacement where it applies."""
    params = spec.resolve()
    frame = model.derive_squeezed_frame(params)
    variants = [("plain", replace(num, predisplace=False))]
    if frame.gtilde_c_s > 1:
        variants.append(("predisplaced", replace(num, predisplace=True, predisplace_min_beta2=0.0)))
    rows = []
    for name, nm in variants:
        res, shift = solve_frame(frame, nm)
        for cutoff, obs, energy in res.history:
            rows.append(dict(variant=name, gtilde_c_s=frame.gtilde_c_s,
                             Omega_over_omega_s=frame.omega_ratio, cutoff=cutoff,
                             observable=obs, ground_energy=energy, predisplacement=shift,
                             converged_at=res.truncation_dims[0], converged=res.converged))
    return rows
