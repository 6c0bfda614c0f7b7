"""
Configuration settings for the cleanSpectrum package.

Configuration can be set via:
1. Command-line arguments (highest priority)
2. Environment variables (CLEANSPEC_<KEY>)
3. Configuration files (YAML/JSON)
4. Default values (lowest priority)
"""

import os
import json
import logging
from pathlib import Path
from typing import Any, Literal, Optional, Union

from pydantic import BaseModel, Field, ValidationError

from cleanSpectrum.errors import ConfigurationError

# Set up logger
logger = logging.getLogger(__name__)

# Try to import yaml, but make it optional
try:
    import yaml
    YAML_AVAILABLE = True
except ImportError:
    YAML_AVAILABLE = False
    logger.debug("PyYAML not installed. YAML configuration files will not be supported.")

# Project root directory
PROJECT_ROOT = Path(__file__).parent.parent

# Default configuration paths
DEFAULT_CONFIG_PATHS = [
    PROJECT_ROOT / "cleanspectrum.yml",
    PROJECT_ROOT / "cleanspectrum.yaml",
    PROJECT_ROOT / "cleanspectrum.json",
    Path.home() / ".config" / "cleanspectrum.yml",
    Path.home() / ".config" / "cleanspectrum.yaml",
    Path.home() / ".config" / "cleanspectrum.json",
    Path.home() / ".cleanspectrum.yml",
    Path.home() / ".cleanspectrum.yaml",
    Path.home() / ".cleanspectrum.json",
]

ENV_PREFIX = "CLEANSPEC_"

# Dataset files
DATASET_FORMAT_VERSION = 1
DATASET_ENCODING = "utf-8"

# Method mix used when none is given: equal weight on every generator family
DEFAULT_METHOD_MIX: dict[str, float] = {
    "spectrum_sketch": 0.25,
    "unit_sphere": 0.25,
    "constant_blocks": 0.25,
    "toeplitz_blocks": 0.25,
}


class Settings(BaseModel):
    """Typed view over the numerical and runtime settings."""
    eigen_method: Literal["lapack", "jacobi"] = Field(
        "lapack", description="Symmetric eigensolver backend")
    givens_precision: float = Field(
        1e-10, gt=0.0, description="Diagonal tolerance of the Givens loop before exact assignment")
    rie_rescale: bool = Field(True, description="Rescale RIE output to trace N")
    rie_leave_one_out: bool = Field(
        False, description="Exclude the evaluated eigenvalue from its own Stieltjes transform")
    rie_estimate: Literal["kernel", "resolvent"] = Field(
        "kernel", description="Stieltjes transform estimate used by the RIE")
    clean_rescale: bool = Field(True, description="Rescale autoencoder output to trace N")
    hidden: list[int] = Field(default_factory=lambda: [300, 200])
    dropout: float = Field(0.25, ge=0.0, lt=1.0, description="Drop probability on the second hidden layer")
    learning_rate: float = Field(1e-3, gt=0.0)
    batch_size: int = Field(64, ge=1)
    epochs: int = Field(50, ge=1)
    optimizer: Literal["adam", "sgd"] = "adam"
    retry_budget: int = Field(5, ge=0, description="Redraws allowed per dataset record")
    workers: int = Field(1, ge=1)
    show_progress: bool = True


class ConfigManager:
    """
    Configuration manager that handles loading and accessing configuration
    from files, environment variables, and default settings.
    """

    def __init__(
        self,
        config_file: Optional[Union[str, Path]] = None,
        profile: str = "default",
        env_prefix: str = ENV_PREFIX
    ):
        """
        Initialize the configuration manager.

        Args:
            config_file: Optional path to a configuration file
            profile: Configuration profile to use
            env_prefix: Prefix for environment variables
        """
        self.config_file = config_file
        self.profile = profile
        self.env_prefix = env_prefix
        self.config_data: dict[str, Any] = {}

        self._load_config()

    def _load_config(self) -> None:
        """Load configuration from the first available configuration file."""
        if self.config_file:
            config_path = Path(self.config_file)
            if not config_path.exists():
                logger.warning("Specified config file not found: %s", config_path)
            else:
                self._load_config_file(config_path)
        else:
            for path in DEFAULT_CONFIG_PATHS:
                if path.exists():
                    logger.debug("Loading configuration from: %s", path)
                    self._load_config_file(path)
                    break

    def _load_config_file(self, config_path: Path) -> None:
        """
        Load configuration from a file.

        Args:
            config_path: Path to configuration file (YAML or JSON)
        """
        try:
            extension = config_path.suffix.lower()

            if extension in ['.yml', '.yaml']:
                if not YAML_AVAILABLE:
                    logger.warning("Cannot load YAML config - PyYAML not installed")
                    return
                with open(config_path, 'r', encoding="utf-8") as f:
                    config_data = yaml.safe_load(f)
            elif extension == '.json':
                with open(config_path, 'r', encoding="utf-8") as f:
                    config_data = json.load(f)
            else:
                logger.warning("Unsupported config file format: %s", extension)
                return

            if not config_data:
                logger.warning("Empty configuration file: %s", config_path)
                return

            if isinstance(config_data, dict) and 'profiles' in config_data:
                profiles = config_data.get('profiles', {})
                if self.profile in profiles:
                    self.config_data = profiles[self.profile]
                    logger.debug("Loaded configuration profile: %s", self.profile)
                else:
                    logger.warning("Profile '%s' not found in config file", self.profile)
                    if 'default' in profiles:
                        self.config_data = profiles['default']
                        logger.debug("Loaded 'default' profile as fallback")
            else:
                self.config_data = config_data

            logger.debug("Successfully loaded configuration from %s", config_path)

        except Exception as e:
            logger.warning("Error loading configuration from %s: %s", config_path, str(e))

    def get(self, key: str, default: Any = None) -> Any:
        """
        Get a configuration value with fallback to environment and default.

        Args:
            key: Configuration key
            default: Default value if not found in config or environment

        Returns:
            Configuration value
        """
        env_value = os.getenv(f"{self.env_prefix}{key.upper()}")
        if env_value is not None:
            return self._convert_value(env_value)

        if key in self.config_data:
            return self.config_data[key]

        return default

    def _convert_value(self, value: str) -> Any:
        """
        Convert string values from environment variables to appropriate types.

        Args:
            value: String value from environment variable

        Returns:
            Converted value (bool, int, float, list of ints, or original string)
        """
        lower_val = value.lower()
        if lower_val in ['true', 'yes']:
            return True
        if lower_val in ['false', 'no']:
            return False

        # Layer widths are written as "300,200"
        if ',' in value:
            try:
                return [int(part) for part in value.split(',')]
            except ValueError:
                return value

        try:
            if '.' in value or 'e' in lower_val:
                return float(value)
            return int(value)
        except ValueError:
            return value


# Default config manager instance for package-level access
config_manager = ConfigManager()


def get_settings(**overrides: Any) -> Settings:
    """
    Build the typed settings from the active configuration.

    Args:
        **overrides: Values that take priority (command-line flags); None is ignored

    Returns:
        Validated Settings

    Raises:
        ConfigurationError: If a configured value is invalid
    """
    values: dict[str, Any] = {}
    for name in Settings.model_fields:
        value = config_manager.get(name)
        if value is not None:
            values[name] = value
    values.update({key: value for key, value in overrides.items() if value is not None})

    try:
        return Settings(**values)
    except ValidationError as e:
        error = e.errors()[0]
        location = ".".join(str(loc) for loc in error["loc"])
        raise ConfigurationError(f"Invalid setting '{location}': {error['msg']}") from e
