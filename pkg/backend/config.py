""" Pydantic settings for HexHeight configuration
"""
from typing import Dict, List, Literal, Tuple
from pydantic_settings import BaseSettings, SettingsConfigDict
from pydantic import Field
from dotenv import load_dotenv

# Load .env file
load_dotenv()


class Settings(BaseSettings):
    """Application settings with environment variable support (prefix HEXHEIGHT_)"""

    model_config = SettingsConfigDict(
        env_prefix="HEXHEIGHT_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # Randomized suites
    default_seed: int = Field(default=20240611, description="Seed used when --seed is omitted")
    trials: int = Field(default=100, ge=1)

    # Output
    output_format: Literal["csv", "json-lines"] = "csv"

    # Fourier side
    grid_exponent: int = Field(default=11, ge=6, description="Quadrature grid is 2^k x 2^k")
    partial_sum_terms: int = Field(default=200, ge=1)

    # Float comparisons (exact checks never use these)
    float_slack: float = 1e-9
    holder_slack: float = 1e-12
    oracle_tolerance: float = 1e-4  # closed form vs quadrature, plus 4x the grid-doubling estimate

    # Minimization windows
    offset_window: int = 1  # 9-offset window after centering
    oracle_window: int = 3  # exhaustive check window
    direct_average_budget: int = Field(default=100_000, ge=0, description="Max L evaluations per trial for the direct pair average")

    # Logging
    log_level: str = "INFO"
    log_checks: bool = True


# Singleton instance
settings = Settings()


# Region table: minimizer offset (after centering) -> region tag.
# I: L = F(x, y-1), II: L = F(x-1, y), III: L = F(x, y+1), IV: L = F(x+1, y)
REGION_BY_OFFSET: Dict[Tuple[int, int], str] = {
    (0, 0): "octagon",
    (0, -1): "I",
    (-1, 0): "II",
    (0, 1): "III",
    (1, 0): "IV",
}

# Voronoi-relevant vectors of a normalized form with b > 0, in cyclic order
RELEVANT_VECTORS: List[Tuple[int, int]] = [
    (1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1),
]

# Column layouts for tabular output, keyed by subcommand
OUTPUT_COLUMNS: Dict[str, List[str]] = {
    "reduce": ["a", "b", "c", "D", "t11", "t12", "t21", "t22"],
    "eval-l": ["x", "y", "value", "region", "minimizers"],
    "fourier": ["m", "n", "case", "value", "prefactor", "pi_power", "oracle", "oracle_error", "abs_diff"],
    "hexagon": ["kind", "label", "index", "x", "y"],
    "avg-d": ["x", "y", "d", "closed_form", "direct", "equal"],
    "local-bounds": ["trial", "check", "N", "d", "lhs", "rhs", "holds"],
    "theta": ["check", "lhs", "rhs", "delta", "holds", "ties"],
    "simulate": [
        "scenario", "trial", "n", "n_base_change", "N", "lhs", "est1", "est2", "est3", "combined",
        "holder_floor", "holds",
    ],
    "holder": ["lhs", "rhs", "sharper", "intermediate", "holds"],
    "scaling": ["n", "trials", "min_scaled", "floor", "holds"],
}
