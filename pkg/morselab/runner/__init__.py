"""
Experiment runner: configs, commands, verdicts and artifacts.
"""

from pathlib import Path
from typing import Callable, Dict

from .config import (
    DEFAULT_OUTPUT_DIR,
    OUTPUT_DIR_ENV_VAR,
    ConnectionsSpec,
    ExperimentConfig,
    FieldSpec,
    LojaSpec,
    RandomStarts,
    StartSpec,
    SweepSpec,
    VerifySpec,
    load_config,
    parse_config,
)
from .experiments import run_connections, run_critical, run_flow, run_loja
from .plotting import PlotStyle, emit_plot_data
from .report import (
    IN_SCOPE_TAGS,
    ExitCode,
    RunReport,
    TheoremTag,
    Verdict,
    coverage_verdict,
    regenerate_summaries,
)
from .verify import AcceptanceSuite, run_verify
from ..exceptions import ConfigurationError

COMMANDS: Dict[str, Callable[[ExperimentConfig, Path], RunReport]] = {
    "flow": run_flow,
    "critical": run_critical,
    "connections": run_connections,
    "loja": run_loja,
    "verify": run_verify,
}


def run_command(command: str, cfg: ExperimentConfig, out: Path) -> RunReport:
    """
    Run one subcommand and write its report into `out`.

    Raises:
        ConfigurationError: Unknown command, or the config lacks a block the command needs
    """
    runner = COMMANDS.get(command)
    if runner is None:
        raise ConfigurationError(f"Unknown command '{command}'", details={"available": sorted(COMMANDS)})
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    report = runner(cfg, out)
    report.write(out)
    return report


__all__ = [
    "ExperimentConfig",
    "FieldSpec",
    "StartSpec",
    "RandomStarts",
    "SweepSpec",
    "ConnectionsSpec",
    "LojaSpec",
    "VerifySpec",
    "load_config",
    "parse_config",
    "OUTPUT_DIR_ENV_VAR",
    "DEFAULT_OUTPUT_DIR",
    "RunReport",
    "Verdict",
    "TheoremTag",
    "ExitCode",
    "IN_SCOPE_TAGS",
    "coverage_verdict",
    "regenerate_summaries",
    "PlotStyle",
    "emit_plot_data",
    "AcceptanceSuite",
    "COMMANDS",
    "run_command",
    "run_flow",
    "run_critical",
    "run_connections",
    "run_loja",
    "run_verify",
]
