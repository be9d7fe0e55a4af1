from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    # App
    app_name: str = "fracwave"
    app_version: str = "1.0.0"
    log_level: str = "INFO"

    # Parallelism
    threads: int = 1  # study worker pool size
    fft_workers: int = 1  # forwarded to scipy.fft

    # Solver
    dnc_floor: int = 32  # divide-and-conquer switches to stepping below this

    # Reference solves
    max_reference_mib: int = 4096
    default_ref_J: int = 8192
    default_ref_N: int = 1023

    class Config:
        env_file = ".env"
        case_sensitive = False
        env_prefix = "FRACWAVE_"
        extra = "ignore"


settings = Settings()
