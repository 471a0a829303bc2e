"""
The flow, critical, connections and loja commands.

Each command reads an `ExperimentConfig`, writes its artifacts below the
output directory and returns a `RunReport`. Runtime failures of single
trajectories or analyses become failed verdicts; configuration problems
raise `ConfigurationError` before any work starts.
"""

from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .config import ConnectionsSpec, ExperimentConfig, LojaSpec
from .plotting import plot_bias, plot_fit
from .report import RunReport, TheoremTag, write_json
from ..analysis import (
    check_distance_inequality,
    dense_limit_survey,
    distance_envelope,
    estimate_lojasiewicz,
    exponential_decay_rate,
    lojasiewicz_threshold,
    normal_bias,
    secant_limit,
    tail_length_rate,
    z_set_crossings,
)
from ..critical import (
    BranchKind,
    ConnectionReport,
    CriticalPoint,
    SweepResult,
    find_connections,
    level_slice_samples,
    restriction_extremum,
    sweep_critical,
)
from ..exceptions import ConfigurationError, MorselabError
from ..fields import CatalogField, ReferenceFacts, ScalarField
from ..flow import Trajectory, dissipation_residual, integrate_many
from ..flow.trajectory import CSV_FLOAT_FORMAT
from ..log_utils import get_logger
from ..manifolds import CriticalManifoldModel

logger = get_logger(__name__)

DISSIPATION_TOL = 1e-3
CLOSED_FORM_TOL = 1e-6
CLOSED_FORM_CHECKPOINTS = 20
LOCATE_TOL = 1e-6
LEVEL_FRACTIONS = (0.25, 0.75)
ENVELOPE_SHRINK = 0.1
MANIFOLD_ANALYSES = {"bias", "secant", "distance", "dense_limits"}


def require_field(cfg: ExperimentConfig) -> ScalarField:
    if cfg.field is None:
        raise ConfigurationError("This command needs a 'field' block", config_key="field")
    return cfg.field.build()


def reference_facts(field: ScalarField) -> Optional[ReferenceFacts]:
    return field.reference_facts() if isinstance(field, CatalogField) else None


def closed_form_error(
    traj: Trajectory,
    closed_form: Callable[[np.ndarray, float], np.ndarray],
    checkpoints: int = CLOSED_FORM_CHECKPOINTS,
    t_stop: Optional[float] = None,
) -> float:
    """
    Largest relative (infinity-norm) deviation from a closed-form flow.

    Checkpoints are evenly spaced on [0, t_stop]. By default t_stop is the
    last sample where |grad f| is still above 1e-4 of its starting value,
    beyond which the state is at the level of the absolute tolerance.
    """
    if t_stop is None:
        strong = np.flatnonzero(traj.grad_norms >= 1e-4 * traj.grad_norms[0])
        t_stop = float(traj.times[strong[-1]]) if strong.size else traj.t_end
    t_stop = min(float(t_stop), traj.t_end)
    x0 = traj.points[0]
    worst = 0.0
    for t in np.linspace(0.0, t_stop, checkpoints):
        exact = np.asarray(closed_form(x0, float(t)), dtype=float)
        scale = max(float(np.max(np.abs(exact))), np.finfo(float).tiny)
        worst = max(worst, float(np.max(np.abs(traj.state_at(float(t)) - exact))) / scale)
    return worst


def critical_frame(points: Sequence[CriticalPoint]) -> pd.DataFrame:
    rows = []
    for cp in points:
        row: Dict[str, Any] = {
            "class": str(cp.kind),
            "index": cp.index,
            "nullity": cp.nullity,
            "value": cp.value,
            "residual": cp.residual,
        }
        row.update({f"x_{i + 1}": v for i, v in enumerate(cp.location)})
        rows.append(row)
    return pd.DataFrame(rows)


def write_frame(frame: pd.DataFrame, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    return path


def declared_recovered(field: ScalarField, facts: ReferenceFacts, points: Sequence[CriticalPoint]) -> Tuple[int, int]:
    """How many declared critical points a sweep found with the declared index."""
    found = 0
    for declared in facts.critical_points:
        for cp in points:
            close = field.domain.distance(cp.location, np.asarray(declared.location)) < LOCATE_TOL
            if close and cp.index == declared.index and cp.nullity == declared.nullity:
                found += 1
                break
    return found, len(facts.critical_points)


def run_flow(cfg: ExperimentConfig, out: Path) -> RunReport:
    """Integrate every configured start; one CSV per trajectory plus flows.json."""
    report = RunReport(command="flow", config=cfg.echo())
    field = require_field(cfg)
    starts = cfg.start_points(field.dimension)
    facts = reference_facts(field)

    with report.timed("integrate"):
        batch = integrate_many(field, starts, cfg.integrator, cfg.workers)

    summaries = []
    for i, traj in enumerate(batch.trajectories):
        name = f"trajectory_{i:03d}"
        if traj is None:
            report.record_error(f"{name} integration", TheoremTag.DISSIPATION, batch.errors[i])
            continue
        report.record_artifact(traj.to_csv(out / f"{name}.csv"), out)
        summaries.append({"name": name, **traj.summary()})
        residual = dissipation_residual(field, traj)
        report.add(f"{name} dissipation", TheoremTag.DISSIPATION, residual < DISSIPATION_TOL, residual, DISSIPATION_TOL)
        if facts is not None and facts.closed_form is not None:
            err = closed_form_error(traj, facts.closed_form)
            report.add(f"{name} closed form", TheoremTag.INTEGRATOR, err < CLOSED_FORM_TOL, err, CLOSED_FORM_TOL)

    report.record_artifact(write_json(out / "flows.json", {"field": field.describe(), "trajectories": summaries}), out)
    return report


def _sweep(cfg: ExperimentConfig, field: ScalarField, report: RunReport) -> SweepResult:
    if cfg.sweep is None:
        raise ConfigurationError("This command needs a 'sweep' block", config_key="sweep")
    spec = cfg.sweep
    with report.timed("sweep"):
        return sweep_critical(
            field, spec.lower, spec.upper, spec.grid, spec.tol, spec.merge_radius, cfg.workers
        )


def run_critical(cfg: ExperimentConfig, out: Path) -> RunReport:
    """Sweep a box for critical points and classify them."""
    report = RunReport(command="critical", config=cfg.echo())
    field = require_field(cfg)
    result = _sweep(cfg, field, report)

    report.record_artifact(write_frame(critical_frame(result.points), out / "critical_points.csv"), out)
    report.record_artifact(write_json(out / "critical_points.json", {
        "field": field.describe(),
        "points": [cp.to_dict() for cp in result.points],
        "counts": result.counts(),
        "seeds": result.seeds,
        "failures": result.failures,
    }), out)

    facts = reference_facts(field)
    if facts is not None and facts.morse and facts.critical_points:
        found, declared = declared_recovered(field, facts, result.points)
        report.add(
            "declared critical points recovered", TheoremTag.CLASSIFICATION,
            found == declared and len(result.points) == declared,
            {"found": found, "distinct": len(result.points)}, declared,
        )
    return report


def check_connections(
    field: ScalarField,
    points: Sequence[CriticalPoint],
    cfg: ExperimentConfig,
    report: RunReport,
    out: Path,
    root: Optional[Path] = None,
) -> ConnectionReport:
    """
    Trace unstable branches, then check dimensions, level crossings and the restriction extremum.

    Artifacts go under `out` and are listed relative to `root` (default `out`).
    """
    spec = cfg.connections or ConnectionsSpec()
    root = root or out

    with report.timed("connections"):
        found = find_connections(
            field, points, cfg.integrator, spec.seed_eps, spec.locate_tol, spec.plane_samples, cfg.workers
        )
    report.record_artifact(write_json(out / "connections.json", found.to_dict()), root)
    for k, c in enumerate(found.connections):
        report.record_artifact(c.representative.to_csv(out / "connections" / f"connection_{k:03d}.csv"), root)

    report.add(
        "all branches resolved", TheoremTag.CONNECTIONS, not found.unresolved,
        len(found.unresolved), 0, "; ".join(u.reason for u in found.unresolved),
    )
    dims = [c.expected_dimension for c in found.connections]
    report.add(
        "connection dimensions positive", TheoremTag.CONNECTIONS, bool(dims) and min(dims) >= 1,
        sorted(set(dims)), ">= 1",
    )

    for k, c in enumerate(found.connections):
        for frac in LEVEL_FRACTIONS:
            level = c.target.value + frac * (c.source.value - c.target.value)
            if spec.level is not None and c.target.value < spec.level < c.source.value:
                level = spec.level
            samples = level_slice_samples(field, [c], level)
            count = samples[0].crossings if samples else 0
            report.add(f"connection {k} crosses f={level:.4g} once", TheoremTag.LEVEL_CROSSING, count == 1, count, 1)

    by_source: Dict[int, List[Trajectory]] = {}
    sources: Dict[int, CriticalPoint] = {}
    for c in found.connections:
        by_source.setdefault(id(c.source), []).append(c.representative)
        sources[id(c.source)] = c.source
    for key, branches in by_source.items():
        cp = sources[key]
        check = restriction_extremum(field, cp, branches, BranchKind.UNSTABLE)
        report.add(
            f"f below f(p) on W^u of {np.round(cp.location, 6).tolist()}", TheoremTag.RESTRICTION,
            check.passed, check.worst_margin, "> 0",
        )
    return found


def run_connections(cfg: ExperimentConfig, out: Path) -> RunReport:
    """Sweep, then follow every unstable branch to its limit."""
    report = RunReport(command="connections", config=cfg.echo())
    field = require_field(cfg)
    result = _sweep(cfg, field, report)
    report.record_artifact(write_frame(critical_frame(result.points), out / "critical_points.csv"), out)
    check_connections(field, result.points, cfg, report, out)
    return report


def _manifold(facts: Optional[ReferenceFacts], spec: LojaSpec) -> Optional[CriticalManifoldModel]:
    if facts is None or not facts.manifolds:
        return None
    if spec.manifold >= len(facts.manifolds):
        raise ConfigurationError(
            f"Field declares {len(facts.manifolds)} critical manifold(s)", config_key="loja.manifold"
        )
    return facts.manifolds[spec.manifold]


def limit_of(
    field: ScalarField,
    traj: Trajectory,
    spec: LojaSpec,
    manifold: Optional[CriticalManifoldModel],
    facts: Optional[ReferenceFacts],
) -> Tuple[np.ndarray, Optional[float]]:
    """
    Limit point and critical value for the fits.

    The critical value is exact whenever the catalog knows it: from the
    config, on a declared manifold, or at a declared point near the endpoint.
    Otherwise None, and the fits fall back to the terminal value.
    """
    end = field.domain.wrap(traj.endpoint)
    if spec.limit is not None:
        p = np.asarray(spec.limit, dtype=float)
    elif manifold is not None and manifold.contains(end, 1e-3):
        p = manifold.project(end)
    else:
        p = end
    if spec.f_p is not None:
        return p, spec.f_p
    if facts is not None:
        if manifold is not None and manifold.contains(p, LOCATE_TOL):
            return p, field.value(p)
        for declared in facts.critical_points:
            if field.domain.distance(end, np.asarray(declared.location)) < 1e-3:
                return np.asarray(declared.location, dtype=float), declared.value
    return p, None


def run_loja(cfg: ExperimentConfig, out: Path) -> RunReport:
    """Run the selected exponent, bias, secant, Z-set and coverage analyses."""
    report = RunReport(command="loja", config=cfg.echo())
    field = require_field(cfg)
    spec = cfg.loja or LojaSpec()
    facts = reference_facts(field)
    manifold = _manifold(facts, spec)
    wanted = set(spec.analyses)
    if manifold is None and wanted & MANIFOLD_ANALYSES:
        raise ConfigurationError(
            f"Analyses {sorted(wanted & MANIFOLD_ANALYSES)} need a catalog field with a critical manifold",
            config_key="loja.analyses",
        )
    if "distance" in wanted and not spec.distance_samples:
        raise ConfigurationError("The distance analysis needs 'distance_samples'", config_key="loja.distance_samples")

    starts = cfg.start_points(field.dimension)
    results: Dict[str, Any] = {"field": field.describe(), "trajectories": []}

    if "distance" in wanted:
        try:
            fit = check_distance_inequality(field, manifold, spec.distance_samples, spec.exponent_grid)
        except MorselabError as e:
            report.record_error("distance inequality", TheoremTag.DISTANCE, e)
        else:
            results["distance"] = fit.to_dict()
            report.add("distance inequality", TheoremTag.DISTANCE, fit.passed, fit.exponent, "lower bound holds")
            report.record_artifact(plot_fit(fit, out / "distance_fit", "dist", "f")[0], out)

    if "dense_limits" in wanted:
        try:
            cov = dense_limit_survey(field, manifold, starts, cfg.integrator, spec.mesh_count, max_workers=cfg.workers)
        except MorselabError as e:
            report.record_error("dense limits", TheoremTag.DENSE_LIMITS, e)
        else:
            results["dense_limits"] = cov.to_dict()
            if cov.parameter_gap is not None:
                report.add("limit parameter gap", TheoremTag.DENSE_LIMITS,
                           cov.parameter_gap < 2.0 * cov.nominal_spacing, cov.parameter_gap, 2.0 * cov.nominal_spacing)
            else:
                report.add("limit mesh gap", TheoremTag.DENSE_LIMITS, np.isfinite(cov.max_gap), cov.max_gap, "finite")

    per_traj = wanted - {"distance", "dense_limits"}
    if per_traj:
        with report.timed("integrate"):
            batch = integrate_many(field, starts, cfg.integrator, cfg.workers)
        for i, traj in enumerate(batch.trajectories):
            name = f"trajectory_{i:03d}"
            if traj is None:
                report.record_error(f"{name} integration", TheoremTag.LOJASIEWICZ, batch.errors[i])
                continue
            report.record_artifact(traj.to_csv(out / f"{name}.csv"), out)
            results["trajectories"].append(
                {"name": name, **_trajectory_analyses(field, traj, name, spec, manifold, facts, report, out)}
            )

    report.record_artifact(write_json(out / "loja.json", results), out)
    return report


def _trajectory_analyses(
    field: ScalarField,
    traj: Trajectory,
    name: str,
    spec: LojaSpec,
    manifold: Optional[CriticalManifoldModel],
    facts: Optional[ReferenceFacts],
    report: RunReport,
    out: Path,
) -> Dict[str, Any]:
    p, f_p = limit_of(field, traj, spec, manifold, facts)
    done: Dict[str, Any] = {"limit": p.tolist(), "f_p": f_p}
    wanted = set(spec.analyses)
    theta: Optional[float] = None

    def guarded(label: str, tag: TheoremTag, run: Callable[[], None]) -> None:
        try:
            run()
        except MorselabError as e:
            report.record_error(f"{name} {label}", tag, e)

    def loja() -> None:
        nonlocal theta
        fit = estimate_lojasiewicz(field, traj, p, f_p)
        theta = fit.exponent
        done["lojasiewicz"] = fit.to_dict()
        report.add(f"{name} theta", TheoremTag.LOJASIEWICZ, fit.passed, fit.exponent, "[0.45, 1)")
        report.record_artifact(plot_fit(fit, out / f"{name}_loja", "f - f(p)", "|grad f|")[0], out)

    def tail() -> None:
        fit = tail_length_rate(traj, p, f_p)
        done["tail_length"] = fit.to_dict()
        report.add(f"{name} beta", TheoremTag.RATE, fit.passed, fit.exponent, "(0, 1)")

    def decay() -> None:
        fit = exponential_decay_rate(traj, p, field)
        done["decay"] = fit.to_dict()
        report.add(f"{name} decay rate", TheoremTag.EXPONENTIAL, fit.passed, fit.exponent, "> 0")

    def envelope() -> None:
        env = distance_envelope(traj, p, field)
        done["envelope_final"] = env.final
        shrink = ENVELOPE_SHRINK * float(env.envelope[0])
        report.add(f"{name} distance envelope", TheoremTag.FULL_CONVERGENCE, env.final <= shrink, env.final, shrink)

    def bias() -> None:
        rep = normal_bias(traj, manifold, p)
        done["bias"] = rep.to_dict()
        report.add(f"{name} normal bias", TheoremTag.NORMAL_BIAS, rep.bounded, rep.tail_sup, "<= 2x tail median")
        report.record_artifact(plot_bias(rep, out / f"{name}_bias")[0], out)

    def secant() -> None:
        rep = secant_limit(traj, manifold, p)
        done["secant"] = rep.to_dict()
        off = abs(rep.tangent_angle - np.pi / 2)
        report.add(f"{name} secant limit", TheoremTag.SECANT, rep.tail_spread < 1e-3 and off < 1e-2,
                   {"tail_spread": rep.tail_spread, "normal_offset": off}, {"tail_spread": 1e-3, "normal_offset": 1e-2})

    def zset() -> None:
        theta_hat = theta if theta is not None else estimate_lojasiewicz(field, traj, p, f_p).exponent
        k = spec.k or lojasiewicz_threshold(theta_hat)
        rep = z_set_crossings(field, traj, p, k, theta_hat, f_p)
        done["zset"] = rep.to_dict()
        report.add(f"{name} Z-set crossings", TheoremTag.Z_SET, rep.passed, rep.count, "<= 1, transversal")

    steps = [
        ("lojasiewicz", TheoremTag.LOJASIEWICZ, loja),
        ("tail_length", TheoremTag.RATE, tail),
        ("decay", TheoremTag.EXPONENTIAL, decay),
        ("envelope", TheoremTag.FULL_CONVERGENCE, envelope),
        ("bias", TheoremTag.NORMAL_BIAS, bias),
        ("secant", TheoremTag.SECANT, secant),
        ("zset", TheoremTag.Z_SET, zset),
    ]
    for label, tag, run in steps:
        if label in wanted:
            guarded(label, tag, run)
    return done
