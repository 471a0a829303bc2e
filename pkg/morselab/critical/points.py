"""
Locating and classifying critical points.

Example:
    >>> from morselab.fields import create_field
    >>> cp = find_critical(create_field("quad_saddle"), [0.3, -0.2])
    >>> cp.kind, cp.index, cp.eigenvalues.tolist()
    (<PointClass.SADDLE: 'saddle'>, 1, [-2.0, 2.0])
"""

import concurrent.futures
import itertools
from dataclasses import dataclass, field as dc_field
from enum import StrEnum
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from ..exceptions import CriticalPointNotFound, InputError
from ..fields.base import ScalarField
from ..log_utils import get_logger

logger = get_logger(__name__)

DEFAULT_TOL = 1e-12
DEGENERACY_RELATIVE = 1e-7
MERGE_RELATIVE = 1e-4


class PointClass(StrEnum):
    LOCAL_MIN = "local_min"
    SADDLE = "saddle"
    LOCAL_MAX = "local_max"
    DEGENERATE = "degenerate"


def degeneracy_tol(eigenvalues: np.ndarray) -> float:
    """Scale-aware cutoff under which an eigenvalue counts as zero."""
    radius = float(np.max(np.abs(eigenvalues))) if len(eigenvalues) else 0.0
    return DEGENERACY_RELATIVE * max(1.0, radius)


@dataclass(frozen=True, eq=False)
class CriticalPoint:
    """
    A located critical point with its Hessian spectrum.

    Attributes:
        location: The point (wrapped into the fundamental domain on tori)
        value: f(location)
        eigenvalues: Hessian eigenvalues, ascending
        eigenvectors: Matching unit eigenvectors as columns
        index: Number of negative eigenvalues
        nullity: Number of eigenvalues below the degeneracy cutoff
        kind: Classification derived from index and nullity
        residual: |grad f(location)|
        iterations: Newton iterations used (0 when classified directly)
        used_fallback: Whether a singular Hessian forced descent steps
    """
    location: np.ndarray
    value: float
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = dc_field(repr=False)
    index: int
    nullity: int
    kind: PointClass
    residual: float
    iterations: int = 0
    used_fallback: bool = False

    @property
    def degenerate(self) -> bool:
        return self.kind == PointClass.DEGENERATE

    def to_dict(self) -> Dict[str, Any]:
        return {
            "location": self.location.tolist(),
            "value": self.value,
            "eigenvalues": self.eigenvalues.tolist(),
            "index": self.index,
            "nullity": self.nullity,
            "class": str(self.kind),
            "residual": self.residual,
        }


def classify(field: ScalarField, x: Sequence[float], iterations: int = 0, used_fallback: bool = False) -> CriticalPoint:
    """Classify the Hessian spectrum at x; x is assumed critical."""
    x = field.check_point(x)
    eigenvalues, eigenvectors = np.linalg.eigh(field.hessian(x))
    cutoff = degeneracy_tol(eigenvalues)
    nullity = int(np.sum(np.abs(eigenvalues) < cutoff))
    index = int(np.sum(eigenvalues <= -cutoff))
    n = field.dimension
    if nullity > 0:
        kind = PointClass.DEGENERATE
    elif index == 0:
        kind = PointClass.LOCAL_MIN
    elif index == n:
        kind = PointClass.LOCAL_MAX
    else:
        kind = PointClass.SADDLE
    location = field.domain.wrap(x)
    return CriticalPoint(
        location=location,
        value=field.value(location),
        eigenvalues=eigenvalues,
        eigenvectors=eigenvectors,
        index=index,
        nullity=nullity,
        kind=kind,
        residual=float(np.linalg.norm(field.gradient(location))),
        iterations=iterations,
        used_fallback=used_fallback,
    )


def _merit(field: ScalarField, x: np.ndarray) -> float:
    g = field._gradient(x)
    return 0.5 * float(np.dot(g, g))


def find_critical(
    field: ScalarField,
    seed: Sequence[float],
    tol: float = DEFAULT_TOL,
    max_iter: int = 200,
) -> CriticalPoint:
    """
    Damped Newton iteration on grad f = 0.

    The Newton step is a least-squares solve, so singular Hessians still give
    a step in their range. When that step does not decrease 1/2 |grad f|^2,
    a descent step on 1/2 |grad f|^2 is taken instead.

    Args:
        field: Field to search
        seed: Start point
        tol: Required |grad f| at the result
        max_iter: Iteration cap

    Raises:
        CriticalPointNotFound: Divergence, stagnation or iteration cap
        InputError: Invalid seed
    """
    x = field.check_point(seed)
    if tol <= 0:
        raise InputError("Tolerance must be positive", parameter="tol")
    scale = 1e8 * (1.0 + float(np.linalg.norm(x)))
    used_fallback = False

    for it in range(max_iter + 1):
        g = field._gradient(x)
        gnorm = float(np.linalg.norm(g))
        if gnorm < tol:
            return classify(field, x, iterations=it, used_fallback=used_fallback)
        if it == max_iter:
            break

        h = field.hessian(x)
        phi = 0.5 * gnorm * gnorm
        step, *_ = np.linalg.lstsq(h, -g, rcond=None)

        accepted = False
        alpha = 1.0
        while alpha > 1e-10:
            trial = x + alpha * step
            if np.all(np.isfinite(trial)) and _merit(field, trial) < (1.0 - 1e-4 * alpha) * phi:
                x = trial
                accepted = True
                break
            alpha *= 0.5

        if not accepted:
            used_fallback = True
            descent = -(h @ g)
            dnorm2 = float(np.dot(descent, descent))
            if dnorm2 == 0.0:
                raise CriticalPointNotFound(
                    "Newton and descent steps both vanish", seed=seed, iterations=it,
                    details={"grad_norm": gnorm},
                )
            alpha = phi / dnorm2
            while alpha > 1e-16:
                trial = x + alpha * descent
                if np.all(np.isfinite(trial)) and _merit(field, trial) < phi:
                    x = trial
                    accepted = True
                    break
                alpha *= 0.5
            if not accepted:
                raise CriticalPointNotFound(
                    "Search stagnated", seed=seed, iterations=it, details={"grad_norm": gnorm}
                )

        if float(np.linalg.norm(x)) > scale:
            raise CriticalPointNotFound("Newton iteration diverged", seed=seed, iterations=it)

    raise CriticalPointNotFound(
        f"No convergence within {max_iter} iterations", seed=seed, iterations=max_iter,
        details={"grad_norm": float(np.linalg.norm(field._gradient(x)))},
    )


@dataclass
class SweepResult:
    """Deduplicated critical points of a grid sweep plus the seeds that failed."""
    points: List[CriticalPoint]
    failures: int = 0
    seeds: int = 0

    def counts(self) -> Dict[str, int]:
        out: Dict[str, int] = {}
        for cp in self.points:
            out[str(cp.kind)] = out.get(str(cp.kind), 0) + 1
        return out

    def __len__(self) -> int:
        return len(self.points)


def _grid(field: ScalarField, lower: np.ndarray, upper: np.ndarray, counts: Sequence[int]) -> List[np.ndarray]:
    axes = []
    for i, (lo, hi, c) in enumerate(zip(lower, upper, counts)):
        periodic = field.domain.is_periodic and np.isclose(hi - lo, field.domain.periods[i])
        axes.append(np.linspace(lo, hi, int(c), endpoint=not periodic))
    return [np.array(p) for p in itertools.product(*axes)]


def _inside(field: ScalarField, x: np.ndarray, lower: np.ndarray, upper: np.ndarray, slack: float) -> bool:
    if field.domain.is_periodic:
        return True
    return bool(np.all(x >= lower - slack) and np.all(x <= upper + slack))


def merge_points(field: ScalarField, points: List[CriticalPoint], radius: float) -> List[CriticalPoint]:
    """Greedy deduplication after a deterministic lexicographic sort."""
    ordered = sorted(points, key=lambda cp: tuple(np.round(cp.location, 12)))
    kept: List[CriticalPoint] = []
    for cp in ordered:
        if all(field.domain.distance(cp.location, k.location) >= radius for k in kept):
            kept.append(cp)
    return kept


def sweep_critical(
    field: ScalarField,
    lower: Sequence[float],
    upper: Sequence[float],
    grid: Sequence[int],
    tol: float = DEFAULT_TOL,
    merge_radius: Optional[float] = None,
    max_workers: int = 1,
) -> SweepResult:
    """
    Run `find_critical` from every node of a grid and merge duplicates.

    Axes spanning a full torus period exclude their right endpoint. Points
    outside the box are dropped on Euclidean domains.

    Args:
        lower, upper: Box corners
        grid: Node count per axis
        merge_radius: Deduplication radius; defaults to 1e-4 times the box diagonal
    """
    lower_arr = np.asarray(lower, dtype=float)
    upper_arr = np.asarray(upper, dtype=float)
    if lower_arr.shape != (field.dimension,) or upper_arr.shape != (field.dimension,) or len(grid) != field.dimension:
        raise InputError("Box and grid must match the field dimension", parameter="region")
    if np.any(upper_arr <= lower_arr) or any(int(c) < 1 for c in grid):
        raise InputError("Region must be a nondegenerate box with positive grid counts", parameter="region")

    radius = merge_radius if merge_radius is not None else MERGE_RELATIVE * float(np.linalg.norm(upper_arr - lower_arr))
    seeds = _grid(field, lower_arr, upper_arr, grid)

    def _one(seed: np.ndarray) -> Optional[CriticalPoint]:
        try:
            return find_critical(field, seed, tol)
        except CriticalPointNotFound as e:
            logger.debug("Seed %s: %s", seed.tolist(), e)
            return None

    if max_workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=max_workers) as executor:
            found = list(executor.map(_one, seeds))
    else:
        found = [_one(s) for s in seeds]

    located = [cp for cp in found if cp is not None and _inside(field, cp.location, lower_arr, upper_arr, radius)]
    merged = merge_points(field, located, radius)
    logger.info("Sweep of %s: %d seeds, %d distinct points", field.field_id, len(seeds), len(merged))
    return SweepResult(points=merged, failures=sum(cp is None for cp in found), seeds=len(seeds))
