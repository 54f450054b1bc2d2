from enum import Enum
from pathlib import Path
from typing import Optional

from pydantic import Field, field_validator, model_validator
from pydantic_settings import (
    BaseSettings,
    PydanticBaseSettingsSource,
    SettingsConfigDict,
    YamlConfigSettingsSource,
)

from .invariants import InvariantId, Stage
from .sampling import DEFAULT_MAX_RETRIES
from .verify import SUITES, SystemName

CONFIG_FILE_NAME = "borel-config.yaml"
ENV_PREFIX = "BOREL_"
DEFAULT_MAX_N = 6


class Command(str, Enum):
    TABLE = "table"
    WEIGHTS = "weights"
    EVAL = "eval"
    VERIFY = "verify"
    RANK = "rank"
    LATTICE = "lattice"


class OutputFormat(str, Enum):
    JSON = "json"
    TEXT = "text"


class CliConfig(BaseSettings):
    """
    One command invocation. Values come from CLI flags first, then ``BOREL_*`` environment
    variables, then ``borel-config.yaml`` in the working directory.
    """

    command: Command
    n: int = Field(ge=1)

    seed: int = Field(default=0, ge=0)
    trials: int = Field(default=50, ge=1)
    bound: int = Field(default=10, ge=1)
    """Numerator and denominator magnitude bound for sampled rationals."""

    format: OutputFormat = OutputFormat.JSON

    id: Optional[str] = None
    """The generator to evaluate, e.g. ``J:2,1``, ``y:3`` or ``Y:3,0``."""

    suite: Optional[str] = None
    matrix_path: Optional[Path] = None
    """JSON file holding a square array of rational strings."""

    stage: Optional[Stage] = None
    """
    The chain stage for ``table``, ``weights``, ``lattice`` and the ``lattice`` suite.
    Defaults to ``J``, except for the lattice command and suite which default to the
    final stage.
    """

    system: Optional[SystemName] = None
    jobs: int = Field(default=1, ge=1)
    """Worker processes for verification trials."""

    max_retries: int = Field(default=DEFAULT_MAX_RETRIES, ge=0)

    max_n: int = Field(default=DEFAULT_MAX_N, ge=1)
    allow_large: bool = False
    """
    Set to ``True`` to run with ``n > max_n``. Exact determinants grow quickly with ``n``.
    """

    model_config = SettingsConfigDict(
        env_prefix=ENV_PREFIX, yaml_file=CONFIG_FILE_NAME, extra="ignore"
    )

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        return init_settings, env_settings, YamlConfigSettingsSource(settings_cls)

    @field_validator("matrix_path", mode="before")
    @classmethod
    def resolve_matrix_path(cls, value):
        if not value:
            return None

        return Path(value).expanduser()

    @field_validator("suite")
    @classmethod
    def check_suite(cls, value):
        if value is not None and value not in SUITES:
            raise ValueError(f"Unknown suite '{value}'. Choose from: {', '.join(SUITES)}.")

        return value

    @field_validator("id")
    @classmethod
    def check_id(cls, value):
        if value is not None:
            InvariantId.parse(value)

        return value

    @model_validator(mode="after")
    def check_command_requirements(self):
        if self.n > self.max_n and not self.allow_large:
            raise ValueError(
                f"n={self.n} exceeds max_n={self.max_n}. Pass --allow-large to run anyway."
            )

        if self.command is Command.EVAL and (self.id is None or self.matrix_path is None):
            raise ValueError("'eval' needs both --id and --matrix.")

        elif self.command is Command.VERIFY and self.suite is None:
            raise ValueError("'verify' needs --suite.")

        elif self.command is Command.RANK and self.system is None:
            raise ValueError("'rank' needs --system (J or B).")

        return self

    @property
    def resolved_stage(self) -> Stage:
        if self.stage is not None:
            return self.stage

        if self.command is Command.LATTICE or self.suite == "lattice":
            return Stage.FINAL

        return Stage.J

    @property
    def invariant_id(self) -> Optional[InvariantId]:
        return None if self.id is None else InvariantId.parse(self.id).validate_for(self.n)
