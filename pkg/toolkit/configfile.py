"""
Config file parsing: YAML in, a validated ConfigFile out, or every problem at once.
"""
import logging
from pathlib import Path

import yaml
from pydantic import ValidationError

from errors import ConfigError
from harness.models import ExperimentConfig
from toolkit.models import ConfigFile

logger = logging.getLogger(__name__)


class _DuplicateKeyLoader(yaml.SafeLoader):
    """SafeLoader that records duplicate mapping keys instead of silently overwriting."""

    def __init__(self, stream):
        super().__init__(stream)
        self.duplicates: list[str] = []

    def construct_mapping(self, node, deep=False):
        seen = set()
        for key_node, _ in node.value:
            key = self.construct_object(key_node, deep=deep)
            if key in seen:
                self.duplicates.append(f"duplicate key '{key}' at line {key_node.start_mark.line + 1}")
            seen.add(key)
        return super().construct_mapping(node, deep=deep)


def _format(error: ValidationError) -> list[str]:
    problems = []
    for item in error.errors():
        location = '.'.join(str(part) for part in item['loc']) or '<root>'
        problems.append(f"{location}: {item['msg']}")
    return problems


def validate_config(data: dict) -> ConfigFile:
    """Validate a parsed document, collecting every schema and cross-section problem."""
    try:
        config = ConfigFile.model_validate(data)
    except ValidationError as e:
        raise ConfigError(_format(e)) from None
    if config.experiment is not None:
        problems = [
            f"experiment: '{name}' section is required"
            for name in ('process', 'kernel', 'weights')
            if getattr(config, name) is None
        ]
        if problems:
            raise ConfigError(problems)
        try:
            experiment_config(config)
        except ValidationError as e:
            raise ConfigError([f"experiment: {p}" for p in _format(e)]) from None
    return config


def parse_config(path: str | Path) -> ConfigFile:
    """Load and validate a YAML config file.

    Raises:
        ConfigError: Missing file, YAML syntax errors, duplicate keys or schema violations
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError([f"{path}: file not found"])
    loader = _DuplicateKeyLoader(path.read_text(encoding='utf-8'))
    try:
        data = loader.get_single_data()
    except yaml.YAMLError as e:
        raise ConfigError([f"{path}: {e}"]) from None
    finally:
        loader.dispose()
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError([f"{path}: top level must be a mapping"])

    problems = list(loader.duplicates)
    try:
        config = validate_config(data)
    except ConfigError as e:
        problems.extend(e.problems)
        config = None
    if problems:
        raise ConfigError(problems)
    logger.debug(f"Parsed config {path}")
    return config


def dump_config(config: ConfigFile) -> str:
    """Canonical YAML for ``config``; parse_config reads it back to an equal ConfigFile."""
    payload = config.model_dump(mode='json', exclude_none=True)
    return yaml.safe_dump(payload, sort_keys=False, default_flow_style=None)


def experiment_config(config: ConfigFile, seed: int | None = None) -> ExperimentConfig:
    """Bind the process, kernel and weights sections to the experiment section."""
    if config.experiment is None:
        raise ConfigError(["'experiment' section is required for clt"])
    section = config.experiment
    return ExperimentConfig(
        process=config.process,
        kernel=config.kernel,
        weights=config.weights,
        n_grid=section.n_grid,
        replicates=section.replicates,
        centering=section.centering,
        rate=section.rate,
        seed=config.seed if seed is None else seed,
        include_diagonal=section.include_diagonal,
        dominance_probe=section.dominance_probe,
    )
