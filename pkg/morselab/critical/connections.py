"""
Stable/unstable manifold tracing and heteroclinic connections.

Unstable branches start at p +/- seed_eps * v for each unstable eigenvector v
and follow the flow forward. Stable branches do the same along stable
eigenvectors but follow the reversed field -f over a short horizon, which
traces the same orbits backward in time with ordinary step control.
"""

from dataclasses import dataclass, field as dc_field
from enum import StrEnum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .points import CriticalPoint, PointClass, classify, degeneracy_tol
from ..exceptions import InputError, UnsupportedError
from ..fields.base import ReversedField, ScalarField
from ..flow.batch import integrate_many
from ..flow.config import IntegratorConfig
from ..flow.events import event_crossings
from ..flow.trajectory import Trajectory
from ..log_utils import get_logger
from ..manifolds import CriticalManifoldModel

logger = get_logger(__name__)

DEFAULT_SEED_EPS = 1e-4
DEFAULT_LOCATE_TOL = 1e-4
STABLE_HORIZON = 10.0


class BranchKind(StrEnum):
    STABLE = "stable"
    UNSTABLE = "unstable"


def _normalized(v: np.ndarray) -> np.ndarray:
    """Unit vector whose largest-magnitude component is positive, with rounding dust zeroed."""
    v = np.where(np.abs(v) < 1e-15, 0.0, v)
    v = v / np.linalg.norm(v)
    return v if v[np.argmax(np.abs(v))] > 0 else -v


def eigen_directions(cp: CriticalPoint, kind: BranchKind) -> List[np.ndarray]:
    """Normalized eigenvectors of the unstable (negative) or stable (positive) eigenvalues."""
    cutoff = degeneracy_tol(cp.eigenvalues)
    mask = cp.eigenvalues <= -cutoff if kind == BranchKind.UNSTABLE else cp.eigenvalues >= cutoff
    return [_normalized(cp.eigenvectors[:, i]) for i in np.flatnonzero(mask)]


def unstable_sphere_samples(cp: CriticalPoint, plane_samples: int = 8) -> List[np.ndarray]:
    """
    Unit directions in the unstable eigenspace.

    Index 1 gives the two eigen-directions. Higher indices add evenly spaced
    directions in the plane of the two leading unstable eigenvectors, which
    include those eigenvectors themselves.
    """
    basis = eigen_directions(cp, BranchKind.UNSTABLE)
    if not basis:
        return []
    if len(basis) == 1:
        return [basis[0], -basis[0]]
    directions = []
    for k in range(plane_samples):
        angle = 2.0 * np.pi * k / plane_samples
        c, s = np.cos(angle), np.sin(angle)
        c = 0.0 if abs(c) < 1e-12 else c
        s = 0.0 if abs(s) < 1e-12 else s
        v = c * basis[0] + s * basis[1]
        directions.append(v / np.linalg.norm(v))
    for v in basis[2:]:
        directions.extend([v, -v])
    return directions


def _trace(
    field: ScalarField,
    cp: CriticalPoint,
    directions: Sequence[np.ndarray],
    seed_eps: float,
    cfg: IntegratorConfig,
    max_workers: int,
) -> List[Optional[Trajectory]]:
    seeds = [cp.location + seed_eps * v for v in directions]
    return integrate_many(field, seeds, cfg, max_workers).trajectories


def manifold_branches(
    field: ScalarField,
    cp: CriticalPoint,
    kind: BranchKind = BranchKind.UNSTABLE,
    seed_eps: float = DEFAULT_SEED_EPS,
    cfg: Optional[IntegratorConfig] = None,
    max_workers: int = 1,
) -> List[Trajectory]:
    """
    Trace the branches of W^u(p) or W^s(p) leaving a non-degenerate critical point.

    Returns two trajectories per eigen-direction (+v first, then -v).
    Stable branches are trajectories of the reversed field, integrated over
    at most `STABLE_HORIZON` time units.

    Raises:
        UnsupportedError: cp is degenerate
        InputError: seed_eps is not positive
    """
    if cp.degenerate:
        raise UnsupportedError(
            "Manifold tracing needs a non-degenerate critical point",
            details={"location": cp.location.tolist(), "nullity": cp.nullity},
        )
    if not seed_eps > 0:
        raise InputError("seed_eps must be positive", parameter="seed_eps")
    kind = BranchKind(kind)
    cfg = cfg or IntegratorConfig()

    directions = []
    for v in eigen_directions(cp, kind):
        directions.extend([v, -v])
    if kind == BranchKind.STABLE:
        target: ScalarField = ReversedField(field)
        cfg = cfg.with_horizon(min(cfg.t_max, STABLE_HORIZON))
    else:
        target = field
    return [t for t in _trace(target, cp, directions, seed_eps, cfg, max_workers) if t is not None]


@dataclass(eq=False)
class Connection:
    """A flow line from source p to target q, represented by one traced branch."""
    source: CriticalPoint
    target: CriticalPoint
    representative: Trajectory
    branch_id: int
    expected_dimension: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "source": self.source.location.tolist(),
            "target": self.target.location.tolist(),
            "branch_id": self.branch_id,
            "expected_dimension": self.expected_dimension,
            "t_end": self.representative.t_end,
        }


@dataclass
class UnresolvedBranch:
    source: CriticalPoint
    branch_id: int
    reason: str
    endpoint: Optional[np.ndarray] = None


@dataclass
class ConnectionReport:
    """
    Connections found by following every unstable branch.

    Attributes:
        connections: Matched branches
        unresolved: Branches that did not end at a known critical point
    """
    connections: List[Connection] = dc_field(default_factory=list)
    unresolved: List[UnresolvedBranch] = dc_field(default_factory=list)

    def __len__(self) -> int:
        return len(self.connections)

    def between(self, source: CriticalPoint, target: CriticalPoint) -> List[Connection]:
        return [c for c in self.connections if c.source is source and c.target is target]

    def dimension_report(self) -> List[Dict[str, Any]]:
        groups: Dict[Tuple[int, int], Dict[str, Any]] = {}
        for c in self.connections:
            key = (id(c.source), id(c.target))
            entry = groups.setdefault(key, {
                "source": c.source.location.tolist(),
                "target": c.target.location.tolist(),
                "source_index": c.source.index,
                "target_index": c.target.index,
                "expected_dimension": c.expected_dimension,
                "branches": 0,
            })
            entry["branches"] += 1
        return list(groups.values())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "connections": [c.to_dict() for c in self.connections],
            "unresolved": [
                {
                    "source": u.source.location.tolist(),
                    "branch_id": u.branch_id,
                    "reason": u.reason,
                    "endpoint": None if u.endpoint is None else u.endpoint.tolist(),
                }
                for u in self.unresolved
            ],
            "dimensions": self.dimension_report(),
        }


def match_point(
    field: ScalarField, x: np.ndarray, points: Sequence[CriticalPoint], locate_tol: float
) -> Optional[CriticalPoint]:
    """Closest listed critical point within locate_tol of x (domain distance), if any."""
    best, best_d = None, locate_tol
    for cp in points:
        d = field.domain.distance(x, cp.location)
        if d < best_d:
            best, best_d = cp, d
    return best


def find_connections(
    field: ScalarField,
    points: Sequence[CriticalPoint],
    cfg: Optional[IntegratorConfig] = None,
    seed_eps: float = DEFAULT_SEED_EPS,
    locate_tol: float = DEFAULT_LOCATE_TOL,
    plane_samples: int = 8,
    max_workers: int = 1,
) -> ConnectionReport:
    """
    Follow every unstable branch of every saddle and maximum and match endpoints.

    Each connection is annotated with lambda_p - lambda_q, the dimension of
    the connecting family predicted for transverse stable/unstable manifolds.
    Branches that stop elsewhere are listed as unresolved.

    Raises:
        UnsupportedError: A listed point is degenerate
    """
    cfg = cfg or IntegratorConfig()
    report = ConnectionReport()
    for cp in points:
        if cp.degenerate:
            raise UnsupportedError("Connections need non-degenerate critical points",
                                   details={"location": cp.location.tolist()})

    for cp in sorted(points, key=lambda c: (-c.value, tuple(c.location))):
        if cp.index == 0:
            continue
        directions = unstable_sphere_samples(cp, plane_samples)
        branches = _trace(field, cp, directions, seed_eps, cfg, max_workers)
        for branch_id, traj in enumerate(branches):
            if traj is None:
                report.unresolved.append(UnresolvedBranch(cp, branch_id, "integration failed"))
                continue
            end = traj.endpoint
            target = match_point(field, end, points, locate_tol)
            if not traj.converged or target is None:
                reason = f"stopped with {traj.stop_reason} away from listed points"
                report.unresolved.append(UnresolvedBranch(cp, branch_id, reason, end))
                logger.debug("Branch %d of %s unresolved: %s", branch_id, cp.location.tolist(), reason)
                continue
            if target is cp or target.value >= cp.value:
                report.unresolved.append(UnresolvedBranch(cp, branch_id, "returned to a higher level", end))
                continue
            report.connections.append(
                Connection(cp, target, traj, branch_id, cp.index - target.index)
            )
    return report


@dataclass(frozen=True)
class LevelSample:
    """Where one connecting flow line crosses the level f = t."""
    branch_id: int
    x: np.ndarray
    value: float
    crossings: int


def level_slice_samples(field: ScalarField, connections: Sequence[Connection], t: float) -> List[LevelSample]:
    """
    One point per connecting flow line on the level set f = t.

    The crossing count of each line is reported too; it is 1 on a genuine
    connection because f is strictly decreasing along it.

    Raises:
        InputError: No connections, or t outside the open interval (f(q), f(p))
    """
    if not connections:
        raise InputError("No connections given", parameter="connections")
    for c in connections:
        if not c.target.value < t < c.source.value:
            raise InputError(
                f"Level {t} must lie strictly between {c.target.value} and {c.source.value}",
                parameter="t",
            )
    out = []
    for c in connections:
        crossings = event_crossings(
            c.representative,
            lambda x: field._value(x) - t,
            g_gradient=field._gradient,
            field=field,
        )
        if not crossings:
            continue
        x = crossings[0].x
        out.append(LevelSample(c.branch_id, x, field.value(x), len(crossings)))
    return out


@dataclass
class NormalHessian:
    """Hessian of f restricted to the normal space of a critical manifold at p."""
    eigenvalues: np.ndarray
    index: int
    nonsingular: bool


def normal_hessian(field: ScalarField, manifold: CriticalManifoldModel, p: Sequence[float]) -> NormalHessian:
    """
    Restrict the Hessian at p in N to the normal space.

    Raises:
        InputError: p is not on the manifold
    """
    p = field.check_point(p)
    if not manifold.contains(p, DEFAULT_LOCATE_TOL):
        raise InputError("Point is not on the critical manifold", parameter="p")
    q = manifold.normal_basis(p)
    block = q.T @ field.hessian(p) @ q
    eigenvalues = np.linalg.eigvalsh(block) if block.size else np.array([])
    cutoff = degeneracy_tol(np.linalg.eigvalsh(field.hessian(p)))
    return NormalHessian(
        eigenvalues=eigenvalues,
        index=int(np.sum(eigenvalues <= -cutoff)),
        nonsingular=bool(np.all(np.abs(eigenvalues) >= cutoff)),
    )


@dataclass
class BottDimensionReport:
    """
    Dimension of the connecting set W(N1, N2) two ways.

    `formula` is n1 + lambda1 - lambda2 from measured spectra. `numeric`
    counts n1 + d + 1, where d is the dimension of the set of unstable
    directions at the source that reach N2 (0 for isolated directions, 1 for
    arcs in an unstable plane), and the 1 accounts for the flow direction.
    """
    source_dimension: int
    source_index: int
    target_index: int
    reached: int
    sampled: int
    formula: int
    numeric: int

    @property
    def agrees(self) -> bool:
        return self.formula == self.numeric


def _reached_set_dimension(hits: List[bool], index: int) -> int:
    if index <= 1 or not any(hits):
        return 0
    # plane samples wrap around; any two neighbouring hits form an arc
    n = min(len(hits), len(hits) - 2 * max(index - 2, 0))
    ring = hits[:n]
    return 1 if any(ring[i] and ring[(i + 1) % n] for i in range(n)) else 0


def bott_dimension(
    field: ScalarField,
    source: Sequence[float],
    target: CriticalManifoldModel,
    source_manifold: Optional[CriticalManifoldModel] = None,
    cfg: Optional[IntegratorConfig] = None,
    seed_eps: float = DEFAULT_SEED_EPS,
    plane_samples: int = 8,
    locate_tol: float = DEFAULT_LOCATE_TOL,
) -> BottDimensionReport:
    """
    Compare the dimension formula for Morse-Bott connections with a numeric count.

    Args:
        source: A point of the source critical manifold N1
        target: The target critical manifold N2
        source_manifold: Model of N1; an isolated point when omitted
    """
    cfg = cfg or IntegratorConfig()
    cp = classify(field, source)
    n1 = cp.nullity
    if source_manifold is not None:
        n1 = source_manifold.dimension
        lam1 = normal_hessian(field, source_manifold, cp.location).index
    else:
        lam1 = cp.index
    # only the normal spectrum matters at the source; null directions are tangent to N1
    unstable = CriticalPoint(
        location=cp.location, value=cp.value, eigenvalues=cp.eigenvalues, eigenvectors=cp.eigenvectors,
        index=cp.index, nullity=0, kind=PointClass.SADDLE, residual=cp.residual,
    )
    directions = unstable_sphere_samples(unstable, plane_samples)
    trajs = _trace(field, unstable, directions, seed_eps, cfg, 1)
    hits = []
    lam2_values = []
    for traj in trajs:
        ok = traj is not None and traj.converged and target.distance(field.domain.wrap(traj.endpoint)) < locate_tol
        hits.append(bool(ok))
        if ok:
            end = target.project(field.domain.wrap(traj.endpoint))
            lam2_values.append(normal_hessian(field, target, end).index)
    lam2 = max(lam2_values) if lam2_values else 0
    d = _reached_set_dimension(hits, lam1)
    return BottDimensionReport(
        source_dimension=n1,
        source_index=lam1,
        target_index=lam2,
        reached=sum(hits),
        sampled=len(hits),
        formula=n1 + lam1 - lam2,
        numeric=n1 + d + 1 if any(hits) else -1,
    )


@dataclass
class ExtremumCheck:
    """f along unstable branches stays below f(p); along stable branches it stays above."""
    kind: BranchKind
    passed: bool
    worst_margin: float


def restriction_extremum(
    field: ScalarField, cp: CriticalPoint, branches: Sequence[Trajectory], kind: BranchKind
) -> ExtremumCheck:
    """
    Check that p is a strict maximum of f on W^u(p) and a strict minimum on W^s(p).

    Values are recomputed from the original field, so stable branches traced
    with the reversed field are handled alike.
    """
    kind = BranchKind(kind)
    margins = []
    for traj in branches:
        values = np.array([field._value(x) for x in traj.points])
        if kind == BranchKind.UNSTABLE:
            margins.append(cp.value - float(values.max()))
        else:
            margins.append(float(values.min()) - cp.value)
    worst = min(margins) if margins else 0.0
    return ExtremumCheck(kind=kind, passed=bool(margins) and worst > 0.0, worst_margin=worst)
