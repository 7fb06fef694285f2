from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Type

from pydantic_settings import BaseSettings, PydanticBaseSettingsSource

from app.logic.errors import UsageError
from app.logic.limits import RunLimits


class Settings(BaseSettings):
    # Application
    APP_NAME: str = "soqe-kit"
    VERSION: str = "1.0.0"
    DEBUG: bool = False
    REPORT_HEADER: str = "soqe-kit report v1"

    # Reasoning
    THEORY: str = "Tu"
    PSORT_CARD: Optional[int] = None  # None = infinitely many points
    MAX_CLAUSES: int = 200
    MAX_DNF: int = 10000
    BG_DEPTH: int = 2
    PRECEDENCE: Optional[str] = None
    SATURATION_TIMEOUT: float = 30.0

    # External fixpoint solver
    SOLVE_CHC: Optional[str] = None
    CHC_SOLVER_TIMEOUT: float = 60.0

    # Redis
    REDIS_HOST: str = "localhost"
    REDIS_PORT: int = 6379
    REDIS_DB: int = 0
    REDIS_PASSWORD: Optional[str] = None

    # Cache TTL
    CACHE_TTL_SHORT: int = 300  # 5 minutes
    CACHE_TTL_MEDIUM: int = 1800  # 30 minutes
    CACHE_TTL_LONG: int = 86400  # 24 hours

    class Config:
        env_file = ".env"

    def limits(self) -> RunLimits:
        return RunLimits(
            max_clauses=self.MAX_CLAUSES,
            max_dnf=self.MAX_DNF,
            bg_depth=self.BG_DEPTH,
            psort_card=self.PSORT_CARD,
            timeout=self.SATURATION_TIMEOUT,
        )


class CliSettings(Settings):
    """Settings for one command-line run: defaults, then the config file, then flags; no environment"""

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: Type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> Tuple[PydanticBaseSettingsSource, ...]:
        return (init_settings,)


def read_config_file(path: Path) -> Dict[str, str]:
    """``key=value`` lines with ``#`` comments; keys are lower-case setting names"""
    values: Dict[str, str] = {}
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{number}: expected key=value")
        key, value = (part.strip() for part in line.split("=", 1))
        if key.upper() not in Settings.model_fields:
            raise UsageError(f"{path}:{number}: unknown setting {key!r}")
        values[key.upper()] = value
    return values


def load_cli_settings(config_path: Optional[Path] = None, overrides: Optional[Dict[str, Any]] = None) -> CliSettings:
    values: Dict[str, Any] = read_config_file(config_path) if config_path else {}
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return CliSettings(**values)


settings = Settings()
