"""
Experiment configuration.

Configs are YAML files validated by pydantic. Every error that can be
traced to a place in the file is reported with its line and column.

Example config:

    field:
      catalog: power_well
      params: {k: 2}
    integrator:
      rel_tol: 1.0e-10
    starts:
      random: {count: 20, lower: [-1.0], upper: [1.0]}
    seed: 7
"""

import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..exceptions import ConfigSyntaxError, ConfigurationError, UnknownFieldError
from ..fields import Domain, DomainKind, FieldRegistry, ScalarField, create_field
from ..flow.config import IntegratorConfig

OUTPUT_DIR_ENV_VAR = "MORSELAB_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "morselab-out"
MAX_SEED = 2 ** 64


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class FieldSpec(_Block):
    """A catalog id with parameters, or an expression with its variables and domain."""

    catalog: Optional[str] = None
    params: Dict[str, Any] = Field(default_factory=dict)
    expression: Optional[str] = None
    variables: Optional[List[str]] = None
    domain_kind: DomainKind = DomainKind.EUCLIDEAN
    periods: Optional[List[float]] = None

    @model_validator(mode="after")
    def _one_source(self) -> "FieldSpec":
        if (self.catalog is None) == (self.expression is None):
            raise ValueError("exactly one of 'catalog' or 'expression' is required")
        if self.expression is not None and not self.variables:
            raise ValueError("'expression' needs 'variables'")
        if self.catalog is not None and (self.variables or self.periods):
            raise ValueError("'variables' and 'periods' only apply to expressions")
        if self.expression is not None and self.params:
            raise ValueError("'params' only apply to catalog fields")
        return self

    def domain(self) -> Domain:
        if self.domain_kind == DomainKind.EUCLIDEAN:
            return Domain.euclidean()
        periods = self.periods or [2.0 * np.pi] * len(self.variables or ())
        return Domain.torus(periods)

    def build(self) -> ScalarField:
        if self.catalog is not None:
            return create_field(self.catalog, self.params)
        return create_field(expression=self.expression, variables=self.variables, domain=self.domain())


class RandomStarts(_Block):
    """Uniform samples from a box, drawn with PCG64 from the experiment seed."""

    count: int = Field(gt=0)
    lower: List[float]
    upper: List[float]

    @model_validator(mode="after")
    def _box(self) -> "RandomStarts":
        if len(self.lower) != len(self.upper) or not self.lower:
            raise ValueError("'lower' and 'upper' must have the same nonzero length")
        if any(hi <= lo for lo, hi in zip(self.lower, self.upper)):
            raise ValueError("every 'upper' bound must exceed its 'lower' bound")
        return self


class StartSpec(_Block):
    points: Optional[List[List[float]]] = None
    random: Optional[RandomStarts] = None

    @model_validator(mode="after")
    def _some(self) -> "StartSpec":
        if not self.points and self.random is None:
            raise ValueError("give 'points', 'random' or both")
        return self


class SweepSpec(_Block):
    lower: List[float]
    upper: List[float]
    grid: List[int]
    tol: float = Field(default=1e-12, gt=0)
    merge_radius: Optional[float] = Field(default=None, gt=0)


class ConnectionsSpec(_Block):
    seed_eps: float = Field(default=1e-4, gt=0)
    locate_tol: float = Field(default=1e-4, gt=0)
    plane_samples: int = Field(default=8, ge=4)
    level: Optional[float] = None


LojaAnalysis = Literal[
    "lojasiewicz", "tail_length", "decay", "envelope", "bias", "secant", "zset", "distance", "dense_limits"
]


class LojaSpec(_Block):
    """Which analyses the `loja` command runs on the configured starts."""

    analyses: List[LojaAnalysis] = Field(default_factory=lambda: ["lojasiewicz", "tail_length"])
    limit: Optional[List[float]] = None
    f_p: Optional[float] = None
    k: Optional[int] = Field(default=None, ge=1)
    manifold: int = Field(default=0, ge=0, description="Index into the catalog entry's critical manifolds")
    distance_samples: Optional[List[List[float]]] = None
    exponent_grid: List[float] = Field(default_factory=list)
    mesh_count: Optional[int] = Field(default=None, gt=0)


class VerifySpec(_Block):
    """Sample sizes of the acceptance suite."""

    derivative_points: int = Field(default=1000, gt=0)
    torus_starts: int = Field(default=1000, gt=0)
    enter_once_starts: int = Field(default=100, gt=0)
    zset_starts: int = Field(default=100, gt=0)
    circle_starts: int = Field(default=200, gt=0)
    enter_radius: float = Field(default=0.1, gt=0)


class ExperimentConfig(_Block):
    """
    Everything one run needs. Echoed into the run report, from which it re-validates.

    Attributes:
        field: Field to study (not needed by `verify`)
        integrator: Flow integrator settings
        starts: Start points for flow-based commands
        sweep: Region and grid for critical-point sweeps
        connections: Branch seeding settings
        loja: Analyses for the `loja` command
        verify: Sample sizes for the acceptance suite
        output_dir: Artifact directory
        seed: Random seed, required whenever random starts are drawn
        workers: Thread pool size for independent trajectories
    """

    field: Optional[FieldSpec] = None
    integrator: IntegratorConfig = Field(default_factory=IntegratorConfig)
    starts: Optional[StartSpec] = None
    sweep: Optional[SweepSpec] = None
    connections: Optional[ConnectionsSpec] = None
    loja: Optional[LojaSpec] = None
    verify: Optional[VerifySpec] = None
    output_dir: Optional[str] = None
    seed: Optional[int] = Field(default=None, ge=0, lt=MAX_SEED)
    workers: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _seeded(self) -> "ExperimentConfig":
        if self.seed is None and (self.verify is not None or (self.starts and self.starts.random)):
            raise ValueError("'seed' is required when random starts are drawn")
        return self

    def rng(self) -> np.random.Generator:
        """PCG64 generator for this run's seed."""
        if self.seed is None:
            raise ConfigurationError("No seed configured", config_key="seed")
        return np.random.Generator(np.random.PCG64(self.seed))

    def start_points(self, dimension: int) -> np.ndarray:
        """Explicit points followed by random draws, validated against the field dimension."""
        if self.starts is None:
            raise ConfigurationError("This command needs a 'starts' block", config_key="starts")
        rows: List[np.ndarray] = [np.asarray(p, dtype=float) for p in self.starts.points or ()]
        spec = self.starts.random
        if spec is not None:
            if len(spec.lower) != dimension:
                raise ConfigurationError(
                    f"Random start box has {len(spec.lower)} coordinates, the field has {dimension}",
                    config_key="starts.random",
                )
            rows.extend(self.rng().uniform(spec.lower, spec.upper, size=(spec.count, dimension)))
        for i, row in enumerate(rows):
            if row.shape != (dimension,):
                raise ConfigurationError(
                    f"Start {i} has {row.size} coordinates, the field has {dimension}",
                    config_key="starts.points",
                )
        return np.array(rows)

    def resolve_output_dir(self, override: Optional[Union[str, Path]] = None) -> Path:
        """CLI override, then the config, then MORSELAB_OUTPUT_DIR, then ./morselab-out."""
        chosen = override or self.output_dir or os.environ.get(OUTPUT_DIR_ENV_VAR) or DEFAULT_OUTPUT_DIR
        return Path(chosen)

    def echo(self) -> Dict[str, Any]:
        return self.model_dump(mode="json", exclude_none=True)


def _node_at(root: Optional[yaml.Node], loc: Sequence[Union[str, int]]) -> Optional[yaml.Node]:
    """Deepest node of the composed YAML tree along a pydantic error location."""
    node = root
    for part in loc:
        if isinstance(node, yaml.MappingNode):
            match = next(((k, v) for k, v in node.value if k.value == str(part)), None)
            if match is None:
                return node
            node = match[1]
        elif isinstance(node, yaml.SequenceNode) and isinstance(part, int) and part < len(node.value):
            node = node.value[part]
        else:
            return node
    return node


def _position(node: Optional[yaml.Node]) -> Tuple[Optional[int], Optional[int]]:
    if node is None:
        return None, None
    return node.start_mark.line + 1, node.start_mark.column + 1


def parse_config(text: str, overrides: Optional[Mapping[str, Any]] = None) -> ExperimentConfig:
    """
    Validate YAML text as an ExperimentConfig.

    Args:
        text: YAML document
        overrides: Top-level keys applied before validation (CLI options)

    Raises:
        ConfigSyntaxError: Malformed YAML or schema violation, with position
        UnknownFieldError: The catalog id is not registered
    """
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
        raw = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line, column = (mark.line + 1, mark.column + 1) if mark is not None else (None, None)
        problem = getattr(e, "problem", None) or str(e)
        raise ConfigSyntaxError(f"Malformed YAML: {problem}", line=line, column=column) from e

    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        line, column = _position(root)
        raise ConfigSyntaxError("Config must be a mapping of sections", line=line, column=column)
    raw = {**raw, **{k: v for k, v in (overrides or {}).items() if v is not None}}

    try:
        cfg = ExperimentConfig.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        loc = [p for p in first["loc"] if isinstance(p, (str, int))]
        line, column = _position(_node_at(root, loc))
        key = ".".join(str(p) for p in loc) or None
        raise ConfigSyntaxError(
            first["msg"], config_key=key, line=line, column=column,
            details={"errors": len(e.errors())} if len(e.errors()) > 1 else None,
        ) from e

    if cfg.field is not None and cfg.field.catalog is not None:
        if FieldRegistry.get(cfg.field.catalog) is None:
            raise UnknownFieldError(cfg.field.catalog, FieldRegistry.list_names())
    return cfg


def load_config(path: Union[str, Path], overrides: Optional[Mapping[str, Any]] = None) -> ExperimentConfig:
    """
    Read and validate a config file.

    Raises:
        ConfigurationError: The file cannot be read
        ConfigSyntaxError: See `parse_config`
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigurationError(f"Cannot read config {path}: {e.strerror or e}") from e
    return parse_config(text, overrides)
