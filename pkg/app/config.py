from functools import lru_cache

from pydantic import Field, ValidationInfo, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

# Hard ceilings; settings may only lower them.
HARD_LIMITS = {
    "max_ground": 24,
    "max_isomorphism_ground": 10,
    "exhaustive_axiom_ground": 16,
    "max_circuits": 4096,
    "max_perfect_collections": 5_000_000,
    "max_field_order": 1024,
    "max_group_order": 24,
    "max_gain_vertices": 5,
    "max_gain_group_order": 8,
    "max_lift_vertices": 4,
    "max_lift_group_order": 9,
    "max_lab_ground": 6,
    "max_lab_circuits": 6,
}


class Settings(BaseSettings):
    app_name: str = "liftforge"
    app_version: str = "1.0"
    max_ground: int = Field(default=24)
    max_isomorphism_ground: int = Field(default=10)
    # Above this size rank axioms are sampled instead of enumerated
    exhaustive_axiom_ground: int = Field(default=12)
    axiom_samples: int = Field(default=20000)
    max_circuits: int = Field(default=1024)
    max_perfect_collections: int = Field(default=2_000_000)
    max_field_order: int = Field(default=1024)
    max_group_order: int = Field(default=24)
    max_gain_vertices: int = Field(default=5)
    max_gain_group_order: int = Field(default=8)
    max_lift_vertices: int = Field(default=4)
    max_lift_group_order: int = Field(default=6)
    max_lab_ground: int = Field(default=5)
    max_lab_circuits: int = Field(default=6)
    workers: int = Field(default=1)
    seed: int = Field(default=0)
    log_level: str = Field(default="WARNING")

    model_config = SettingsConfigDict(
        env_prefix="LIFTFORGE_", env_file=".env", env_file_encoding="utf-8", extra="ignore"
    )

    @field_validator(*HARD_LIMITS.keys(), mode="after")
    @classmethod
    def clamp_capacity(cls, value: int, info: ValidationInfo):
        if value < 0:
            raise ValueError(f"{info.field_name} must be non-negative")
        return min(value, HARD_LIMITS[info.field_name])

    @field_validator("workers", mode="after")
    @classmethod
    def at_least_one_worker(cls, value: int):
        return max(1, value)

    @field_validator("log_level", mode="before")
    @classmethod
    def upper_log_level(cls, value):
        if isinstance(value, str):
            return value.strip().upper() or "WARNING"
        return value


@lru_cache()
def get_settings() -> Settings:
    return Settings()


def override_settings(**updates) -> Settings:
    """Apply command-line overrides to the cached settings.

    Capacities can only move downward from the configured value.
    """
    settings = get_settings()
    for name, value in updates.items():
        if value is None:
            continue
        if name in HARD_LIMITS:
            value = min(int(value), getattr(settings, name))
        elif name == "workers":
            value = max(1, int(value))
        setattr(settings, name, value)
    return settings
