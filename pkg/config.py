from pathlib import Path
from typing import Optional
from pydantic_settings import BaseSettings, SettingsConfigDict
from pydantic import Field

RESOURCES_DIR = Path(__file__).parent / "resources"


class Settings(BaseSettings):
    # --- Build ---
    # None means "ask psutil for the physical core count"
    RKTB_WORKERS: Optional[int] = Field(default=None, ge=1)
    CHUNK_SIZE: int = Field(default=1 << 16, ge=1024)

    # --- Storage ---
    USE_CACHE: bool = True
    CACHE_DIR: Path = Path(".rktb_cache")

    # --- U(m,n) table and conjecture ---
    TABLE_SQUARE_BUDGET: int = Field(
        default=400,
        description="Boards with more squares than this are skipped by table/conjecture",
    )

    # --- Proof pipeline ---
    VERIFY_HEIGHT: int = 10
    WINDOW_SIZE: int = 4
    WINDOW_A0: int = 4
    WINDOW_B0: int = 2
    FIT_HEIGHT: int = 14

    CLAIMS_FILE: Path = RESOURCES_DIR / "claims.json"
    PUBLISHED_FILE: Path = RESOURCES_DIR / "published.json"

    # --- Logging ---
    DEBUG: bool = False
    LOG_FILE: str = "rookmate.log"

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore"
    )

settings = Settings()
