"""
Configuration Management
Centralized configuration for the wsatlab backend, CLI and services
"""

from pydantic_settings import BaseSettings, SettingsConfigDict


class Config(BaseSettings):
    """Application configuration (environment prefix WSATLAB_)"""

    model_config = SettingsConfigDict(
        env_prefix="WSATLAB_",
        env_file=".env",
        extra="ignore",
    )

    # Application
    APP_NAME: str = "wsatlab"
    APP_VERSION: str = "0.1.0"
    APP_DESCRIPTION: str = "Weak saturation laboratory API"

    # Server
    HOST: str = "127.0.0.1"  # Localhost only
    PORT: int = 43110
    RELOAD: bool = False
    ALLOWED_ORIGINS: list[str] = [
        "http://localhost:5173",
        "http://127.0.0.1:5173",
    ]
    CORS_MAX_AGE: int = 3600  # seconds

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT_JSON: bool = False
    LOG_TO_FILE: bool = False
    LOG_DIR: str = "logs"
    LOG_MAX_BYTES: int = 10 * 1024 * 1024  # 10MB
    LOG_BACKUP_COUNT: int = 5

    # Graph limits
    MAX_VERTICES: int = 512
    SUBSET_ENUMERATION_CAP: int = 24

    # Percolation
    INDUCED_COPIES: bool = False

    # Invariants / bounds
    PROPERTY_WINDOW_FACTOR: int = 3  # property-3 window: i <= factor * v
    CLOSURE_VERIFY_MAX_VERTICES: int = 40

    # Exact solver
    SOLVER_BUDGET_NODES: int = 5_000_000
    SOLVER_BUDGET_MS: int = 600_000
    SOLVER_WORKERS: int = 1
    SOLVER_CANONICAL_AUGMENTATION: bool = False
    SOLVER_FEASIBILITY_CACHE_SIZE: int = 200_000  # LRU entries per level search
    SOLVER_ISOMORPH_CACHE_SIZE: int = 50_000  # WL-hash buckets of visited leaves
    AUTOMORPHISM_ENUMERATION_CAP: int = 5000


# Create singleton instance
config = Config()
