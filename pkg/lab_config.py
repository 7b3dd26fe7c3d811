"""Runtime configuration and logging setup for the lab.

Settings come from four layers, lowest precedence first: built-in defaults,
``LAB_*`` environment variables, a JSON config file and explicit CLI flags.

Example:
    >>> from lab_config import LabConfig
    >>> config = LabConfig().merged({"dimension": 2, "resolution": 10})
    >>> config.resolution
    10
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

from lab_errors import ConfigError

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

# cells per axis exponent used by sweeps when no resolution is given
DEFAULT_SWEEP_RESOLUTION = {1: 12, 2: 8, 3: 5}


@dataclass(frozen=True)
class LabConfig:
    """Resolved settings for one CLI invocation or service process.

    Attributes:
        dimension: Spatial dimension n.
        resolution: Grid resolution exponent L (cells per unit axis 2^L).
        seed: Seed for randomized suites.
        tolerance: Relative tolerance of bisections (Luxemburg norms, inverses).
        quad_tolerance: Relative tolerance of adaptive quadrature.
        levels: Optional inclusive dyadic level window.
        output_path: Optional CSV output path.
        log_level: Logging level name.
    """

    dimension: int = 1
    resolution: int = 10
    seed: int = 0
    tolerance: float = 1e-10
    quad_tolerance: float = 1e-8
    levels: tuple[int, int] | None = None
    output_path: str | None = None
    log_level: str = "WARNING"
    sweep_resolution: dict[int, int] = field(
        default_factory=lambda: dict(DEFAULT_SWEEP_RESOLUTION)
    )

    @classmethod
    def from_env(cls, environ: dict[str, str] | None = None) -> LabConfig:
        """Build a config from ``LAB_*`` environment variables."""
        environ = os.environ if environ is None else environ
        overrides: dict[str, Any] = {}
        if "LAB_LOG_LEVEL" in environ:
            overrides["log_level"] = environ["LAB_LOG_LEVEL"]
        for key, name in (("LAB_SEED", "seed"), ("LAB_RESOLUTION", "resolution"),
                          ("LAB_DIMENSION", "dimension")):
            if key in environ:
                try:
                    overrides[name] = int(environ[key])
                except ValueError as exc:
                    raise ConfigError(
                        f"{key} must be an integer",
                        context={"value": environ[key]},
                    ) from exc
        return cls().merged(overrides)

    def merged(self, overrides: dict[str, Any]) -> LabConfig:
        """Return a copy with ``overrides`` applied; ``None`` values are skipped."""
        known = {f.name for f in fields(self)}
        unknown = sorted(set(overrides) - known)
        if unknown:
            raise ConfigError("unknown configuration keys", context={"keys": unknown})
        clean = {key: value for key, value in overrides.items() if value is not None}
        if "levels" in clean and clean["levels"] is not None:
            clean["levels"] = tuple(int(v) for v in clean["levels"])
        if "sweep_resolution" in clean:
            clean["sweep_resolution"] = {
                int(k): int(v) for k, v in clean["sweep_resolution"].items()
            }
        return replace(self, **clean)

    def sweep_resolution_for(self, dimension: int) -> int:
        return self.sweep_resolution.get(dimension, DEFAULT_SWEEP_RESOLUTION.get(dimension, 5))

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def load_config(path: str | Path) -> dict[str, Any]:
    """Read a JSON config file mirroring the CLI flags.

    Args:
        path: File path.

    Returns:
        The decoded mapping; keys use the flag names with underscores.

    Raises:
        ConfigError: If the file is unreadable or not a JSON object.
    """
    try:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config file: {exc}", context={"path": str(path)}) from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object", context={"path": str(path)})
    logger.debug("Loaded config file", extra={"path": str(path), "keys": sorted(data)})
    return data


def configure_logging(level: str = "INFO") -> None:
    """Install the root handler with the lab's log format."""
    numeric = getattr(logging, str(level).upper(), None)
    if not isinstance(numeric, int):
        raise ConfigError("unknown log level", context={"level": level})
    logging.basicConfig(level=numeric, format=LOG_FORMAT)
    logging.getLogger().setLevel(numeric)
