import os
import sys
from typing import List, Optional
from dotenv import load_dotenv

load_dotenv()

INPUT_ERROR_EXIT = 4


def _optional_int(raw: str) -> Optional[int]:
    raw = raw.strip()
    return int(raw) if raw.lstrip("-").isdigit() else None


class Config:
    """Base configuration class for planefix."""

    # Logging
    LOG_LEVEL: str = os.getenv("PLANEFIX_LOG_LEVEL", "INFO").upper()
    LOG_FILE: str = os.getenv("PLANEFIX_LOG_FILE", "")

    # Separation and sampling tolerances (plane units)
    EPS_SEP: float = float(os.getenv("PLANEFIX_EPS_SEP", "0.03"))
    H_SAMPLE: float = float(os.getenv("PLANEFIX_H_SAMPLE", "0.01"))
    TUBE_FACTOR: float = float(os.getenv("PLANEFIX_TUBE_FACTOR", "3"))

    # Fixed-point location
    TOL_FIX: float = float(os.getenv("PLANEFIX_TOL_FIX", "1e-10"))
    SEED_JITTER: Optional[int] = _optional_int(os.getenv("PLANEFIX_SEED_JITTER", ""))

    # Complement decomposition
    GRID_PITCH: float = float(os.getenv("PLANEFIX_GRID_PITCH", "0.05"))

    # Injectivity / orientation neighbourhoods
    INJECTIVITY_RADIUS: float = float(os.getenv("PLANEFIX_INJECTIVITY_RADIUS", "0.25"))

    # Adaptive refinement cap
    MAX_SAMPLES: int = int(os.getenv("PLANEFIX_MAX_SAMPLES", "262144"))

    LOG_LEVELS: List[str] = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]

    @classmethod
    def validate(cls) -> None:
        """Validate tolerance and logging values."""
        errors = []

        for name in ("EPS_SEP", "H_SAMPLE", "TOL_FIX", "GRID_PITCH", "INJECTIVITY_RADIUS"):
            if not getattr(cls, name) > 0:
                errors.append(f"PLANEFIX_{name} must be positive")

        if cls.TUBE_FACTOR < 1:
            errors.append("PLANEFIX_TUBE_FACTOR must be at least 1")

        if cls.MAX_SAMPLES < 1024:
            errors.append("PLANEFIX_MAX_SAMPLES must be at least 1024")

        if cls.LOG_LEVEL not in cls.LOG_LEVELS:
            errors.append(f"PLANEFIX_LOG_LEVEL must be one of {', '.join(cls.LOG_LEVELS)}")

        if errors:
            print("❌ Configuration Error(s):")
            for error in errors:
                print(f"   - {error}")
            print("\n💡 Fix the PLANEFIX_* environment variables (or .env) and try again.")
            sys.exit(INPUT_ERROR_EXIT)


# Auto-validate configuration on import
Config.validate()
