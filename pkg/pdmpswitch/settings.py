import os
from pathlib import Path

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from pdmpswitch.errors import ConfigError

# Load .env from project folder (stable even if started from another cwd)
load_dotenv(dotenv_path=Path(__file__).resolve().parent.parent / ".env")

# Environment variables understood by the toolkit, with their defaults:
# - PDMP_THREADS: max worker processes for ensembles (1 = run in-process)
# - PDMP_LOG_LEVEL: 0 (off) .. 5 (trace), same scale as --log-level
# - PDMP_LOG_FILE: optional file that receives the log as well
# - PDMP_OUTPUT_DIR: base directory for relative output paths
ENV_DEFAULTS = {
    "PDMP_THREADS": "1",
    "PDMP_LOG_LEVEL": "3",
    "PDMP_LOG_FILE": "",
    "PDMP_OUTPUT_DIR": ".",
}


class Settings(BaseModel):
    model_config = ConfigDict(frozen=True)

    threads: int = Field(1, ge=1, description="Worker cap for ensemble runs")
    log_level: int = Field(3, ge=0, le=5, description="Numeric log level, 5 is most verbose")
    log_file: str = Field("", description="Append log to this file when non-empty")
    output_dir: str = Field(".", min_length=1, description="Base directory for outputs")

    def output_path(self, name: str) -> Path:
        path = Path(name)
        if path.is_absolute():
            return path
        return Path(self.output_dir) / path


def _validate_config(raw: dict[str, str]) -> Settings:
    bad = []
    for key in ("PDMP_THREADS", "PDMP_LOG_LEVEL"):
        try:
            int(raw[key])
        except ValueError:
            bad.append(f"{key}={raw[key]!r}")
    if bad:
        raise ConfigError("load_settings()", None,
                          f"Invalid environment variables: {', '.join(bad)}")

    try:
        return Settings(
            threads=int(raw["PDMP_THREADS"]),
            log_level=int(raw["PDMP_LOG_LEVEL"]),
            log_file=raw["PDMP_LOG_FILE"],
            output_dir=raw["PDMP_OUTPUT_DIR"],
        )
    except ValidationError as e:
        names = ", ".join(".".join(str(p) for p in err["loc"]) for err in e.errors())
        raise ConfigError("load_settings()", None,
                          f"Invalid environment variables: {names}") from e


def load_settings(environ: dict[str, str] | None = None) -> Settings:
    """
    Read toolkit settings from the environment (after .env has been loaded).
    """
    env = os.environ if environ is None else environ
    raw = {key: env.get(key, default) for key, default in ENV_DEFAULTS.items()}
    return _validate_config(raw)
