"""
Parallel integration of many start points.
"""

import concurrent.futures
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .config import IntegratorConfig
from .engine import integrate_flow
from .trajectory import Trajectory
from ..exceptions import MorselabError
from ..fields.base import ScalarField
from ..log_utils import get_logger

logger = get_logger(__name__)


@dataclass
class FlowBatch:
    """
    Results of a batch, in the order of the start points.

    Attributes:
        trajectories: One entry per start; None where integration failed
        errors: Start index -> the error it raised
    """
    trajectories: List[Optional[Trajectory]] = field(default_factory=list)
    errors: Dict[int, MorselabError] = field(default_factory=dict)

    @property
    def succeeded(self) -> List[Trajectory]:
        return [t for t in self.trajectories if t is not None]

    @property
    def failure_count(self) -> int:
        return len(self.errors)

    def __len__(self) -> int:
        return len(self.trajectories)


def integrate_many(
    field: ScalarField,
    starts: Sequence[Sequence[float]],
    cfg: Optional[IntegratorConfig] = None,
    max_workers: int = 1,
) -> FlowBatch:
    """
    Integrate the flow from every start point.

    Trajectories are independent, so they run on a thread pool when
    `max_workers > 1`; the output order always follows `starts`.

    Example:
        >>> batch = integrate_many(field, np.random.default_rng(0).uniform(size=(10, 2)), max_workers=4)
        >>> len(batch.succeeded)
        10
    """
    cfg = cfg or IntegratorConfig()
    points = [np.asarray(s, dtype=float) for s in starts]
    batch = FlowBatch(trajectories=[None] * len(points))

    def _one(i: int) -> None:
        try:
            batch.trajectories[i] = integrate_flow(field, points[i], cfg)
        except MorselabError as e:
            logger.debug("Start %d (%s) failed: %s", i, points[i].tolist(), e)
            batch.errors[i] = e

    if max_workers <= 1:
        for i in range(len(points)):
            _one(i)
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=max_workers) as executor:
            list(executor.map(_one, range(len(points))))

    return batch
