import os
from dataclasses import dataclass, field, fields
from typing import Dict, Optional

from dotenv import load_dotenv

from utils.errors import ConfigurationError

# Load environment variables from .env file
load_dotenv()

# Run defaults
REPORT_DIR = os.getenv("NULLRIG_REPORT_DIR")  # Default directory for report files
DEFAULT_SAMPLES = int(os.getenv("NULLRIG_SAMPLES", "50"))
DEFAULT_SEED = int(os.getenv("NULLRIG_SEED", "42"))
MAX_WORKERS = int(os.getenv("NULLRIG_MAX_WORKERS", str(min(32, (os.cpu_count() or 1) + 4))))
DEFAULT_SIGN_CONVENTION = int(os.getenv("NULLRIG_SIGN_CONVENTION", "1"))  # ε in g̃ = g + ε Σ ωᵢ⊗ωᵢ

# Numerical thresholds
RANK_TOL = float(os.getenv("NULLRIG_RANK_TOL", "1e-8"))  # relative to the largest singular value
SIGNATURE_TOL = float(os.getenv("NULLRIG_SIGNATURE_TOL", "1e-8"))  # relative to the spectral radius
PIVOT_TOL = float(os.getenv("NULLRIG_PIVOT_TOL", "1e-6"))  # |det| of a pivot block before re-charting
DEGENERACY_MARGIN = float(os.getenv("NULLRIG_MARGIN", "1e-2"))  # sampling distance from degenerate loci
NONDEGENERACY_FLOOR = 1e-10  # |det g̃| floor for Lemma 3.1

# Check tolerances
FIRST_ORDER_TOL = float(os.getenv("NULLRIG_FIRST_ORDER_TOL", "1e-8"))
CURVATURE_TOL = float(os.getenv("NULLRIG_CURVATURE_TOL", "1e-7"))
RELATION_TOL = float(os.getenv("NULLRIG_RELATION_TOL", "1e-9"))  # frame relations, decompositions, metricity
FRAME_TOL = 1e-9
ALGEBRAIC_TOL = 1e-10
ORACLE_TOL = 1e-5
ORACLE_SAMPLES = 10

SUITES = ("all", "frames", "metric", "connection", "curvature", "conformal")
FORMATS = ("json", "text")
RIGGING_MODES = ("auto", "catalog")


@dataclass
class RunConfig:
    """Everything one `check` invocation needs. Mirrors the CLI flags one to one."""

    example: str = "all"
    suite: str = "all"
    tolerance: Dict[str, float] = field(default_factory=dict)
    samples: int = DEFAULT_SAMPLES
    seed: int = DEFAULT_SEED
    sign_convention: int = DEFAULT_SIGN_CONVENTION
    rigging: str = "catalog"
    report_path: Optional[str] = None
    format: str = "text"
    workers: int = MAX_WORKERS
    timestamp: bool = True

    def __post_init__(self):
        if self.suite not in SUITES:
            raise ConfigurationError(f"Unknown suite '{self.suite}' (choose from {', '.join(SUITES)})")
        if self.format not in FORMATS:
            raise ConfigurationError(f"Unknown format '{self.format}' (choose from {', '.join(FORMATS)})")
        if self.rigging not in RIGGING_MODES:
            raise ConfigurationError(f"Unknown rigging mode '{self.rigging}' (choose auto or catalog)")
        if self.sign_convention not in (1, -1):
            raise ConfigurationError(f"Sign convention must be +1 or -1, got {self.sign_convention}")
        if self.samples < 1:
            raise ConfigurationError("samples must be at least 1")
        if self.workers < 1:
            raise ConfigurationError("workers must be at least 1")
        for check_id, tol in self.tolerance.items():
            if not tol > 0:
                raise ConfigurationError(f"Tolerance override for '{check_id}' must be positive, got {tol}")

    @classmethod
    def from_mapping(cls, values: Dict[str, object]) -> "RunConfig":
        """Build a RunConfig from already-typed values, rejecting unknown keys."""
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise ConfigurationError(f"Unknown configuration keys: {', '.join(unknown)}")
        return cls(**values)

    def to_dict(self) -> Dict[str, object]:
        return {f.name: getattr(self, f.name) for f in fields(self)}
