"""
Sampling and concurrent evaluation of the identity checks over catalog examples.
"""

import concurrent.futures
import logging
import platform
import sys
from dataclasses import dataclass, field
from threading import Lock
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np
from tqdm import tqdm

from core import verifier
from core.catalog import CatalogEntry, get_entry
from core.induced import GeometrySetup, InducedGeometry, induce
from core.verifier import CheckContext, IdentityCheck
from utils import config
from utils.errors import ConfigurationError, NumericalError

logger = logging.getLogger("NullRig")


@dataclass
class ExampleResult:
    """All aggregated checks of one example."""

    id: str
    classification: str
    rigging_source: str
    screen_source: str
    closed: str
    points: int
    checks: List[IdentityCheck] = field(default_factory=list)

    @property
    def status(self) -> str:
        return "fail" if any(c.status == "fail" for c in self.checks) else "pass"

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "classification": self.classification,
            "rigging_source": self.rigging_source,
            "screen_source": self.screen_source,
            "closed": self.closed,
            "points": self.points,
            "status": self.status,
            "checks": [c.to_dict() for c in self.checks],
        }


def sample_points(entry: CatalogEntry, count: int, seed: int, margin: float = config.DEGENERACY_MARGIN) -> np.ndarray:
    """
    Uniform points of the sampling box shrunk by the degeneracy margin, inside both chart domains.

    Args:
        entry: catalog entry
        count: number of points
        seed: generator seed; the same seed gives the same points
        margin: fraction of the box width kept clear on each side
    """
    f, m = entry.immersion, entry.ambient
    if f.box is None:
        raise ConfigurationError(f"Example '{entry.id}' has no sampling box")
    low, high = (np.asarray(b, dtype=float) for b in f.box)
    width = high - low
    low, high = low + margin * width, high - margin * width
    rng = np.random.default_rng(seed)
    points = []
    attempts = 0
    while len(points) < count:
        attempts += 1
        if attempts > 1000 * count:
            raise ConfigurationError(f"Could not draw {count} points inside the domain of '{entry.id}'")
        u = rng.uniform(low, high)
        if not f.domain(u):
            continue
        if not m.chart_domain(np.asarray(f.map_fn(u), dtype=float)):
            continue
        points.append(u)
    return np.array(points)


class SuiteRunner:
    def __init__(
        self,
        suite: str = "all",
        tolerance: Optional[Mapping[str, float]] = None,
        samples: int = config.DEFAULT_SAMPLES,
        seed: int = config.DEFAULT_SEED,
        sign: int = config.DEFAULT_SIGN_CONVENTION,
        rigging: str = "catalog",
        max_workers: Optional[int] = None,
        quiet: bool = False,
    ):
        """
        Initialize the suite runner

        Args:
            suite: suite selector (all, frames, metric, connection, curvature, conformal)
            tolerance: overrides by check id, suite name or "all"
            samples: sample points per example
            seed: sampling seed
            sign: sign convention ε of the rigged metric
            rigging: "catalog" uses analytic riggings where an entry has one, "auto" always constructs
            max_workers: worker threads (defaults to config.MAX_WORKERS)
            quiet: disable the progress bar
        """
        if suite not in config.SUITES:
            raise ConfigurationError(f"Unknown suite '{suite}'")
        self.checks = verifier.select_checks(suite)
        self.suite = suite
        self.tolerance = dict(tolerance or {})
        unknown = sorted(set(self.tolerance) - set(verifier.CHECK_IDS) - set(config.SUITES))
        if unknown:
            raise ConfigurationError(f"Tolerance overrides name unknown checks: {', '.join(unknown)}")
        self.samples = samples
        self.seed = seed
        self.sign = sign
        self.rigging = rigging
        self.max_workers = max_workers or config.MAX_WORKERS
        self.quiet = quiet
        self.progress_lock = Lock()

    def run(self, entries: Sequence[CatalogEntry]) -> List[ExampleResult]:
        return [self.run_example(entry) for entry in entries]

    def run_example(self, entry: CatalogEntry) -> ExampleResult:
        """Evaluate every selected check at every sample point of one example."""
        if not entry.supported:
            raise ConfigurationError(
                f"Example '{entry.id}' is {entry.classification}; only r-lightlike and coisotropic submanifolds are supported"
            )
        setup = entry.setup(self.rigging, self.sign)
        points = sample_points(entry, self.samples, self.seed)
        expected = entry.expected_for(self.rigging, self.sign)
        declared_closed = entry.declared_closed(self.rigging)
        logger.info(f"Checking {entry.id}: {len(self.checks)} checks at {len(points)} points")

        per_point: Dict[int, Dict[str, verifier.Measurement]] = {}
        first: Optional[InducedGeometry] = None
        with concurrent.futures.ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            progress = tqdm(total=len(points), desc=entry.id, file=sys.stderr, disable=self.quiet)
            future_to_index = {
                executor.submit(
                    self._evaluate_with_progress,
                    setup,
                    u,
                    CheckContext(
                        setup=setup,
                        expected=expected,
                        declared_closed=declared_closed,
                        oracle=index < config.ORACLE_SAMPLES,
                    ),
                    progress,
                ): index
                for index, u in enumerate(points)
            }
            try:
                for future in concurrent.futures.as_completed(future_to_index):
                    index = future_to_index[future]
                    geo, measurements = future.result()
                    per_point[index] = measurements
                    if index == 0:
                        first = geo
            finally:
                progress.close()

        checks = [
            verifier.summarize(
                check,
                [per_point[i][check.id] for i in range(len(points))],
                verifier.resolve_tolerance(check, self.tolerance),
            )
            for check in self.checks
        ]
        return ExampleResult(
            id=entry.id,
            classification=setup.plan.classification,
            rigging_source=first.rigging.source,
            screen_source=first.frame.screen_source,
            closed=first.rigging.closed_flag,
            points=len(points),
            checks=checks,
        )

    def _evaluate_with_progress(self, setup: GeometrySetup, u, ctx: CheckContext, progress: tqdm):
        try:
            geo = induce(setup, u)
            measurements = verifier.evaluate(geo, ctx, self.checks)
        except NumericalError as e:
            logger.error(f"Numerical failure at {np.asarray(u).tolist()}: {e}")
            raise
        with self.progress_lock:
            progress.update(1)
        return geo, measurements

    def environment(self) -> dict:
        """Conventions and versions echoed into every report."""
        return {
            "sign_convention": self.sign,
            "rigging_mode": self.rigging,
            "documented_signs": dict(verifier.DOCUMENTED_SIGNS),
            "bracket_interpretation": "induced metric g",
            "gauss_arguments": "PZ on both sides; unprojected-Z variant in diagnostics",
            "sum_placement": "each i-term summed as a whole",
            "oracle_samples": config.ORACLE_SAMPLES,
            "python": platform.python_version(),
            "numpy": np.__version__,
        }


def run_suite(
    example: str,
    suite: str = "all",
    tolerance: Optional[Mapping[str, float]] = None,
    samples: int = config.DEFAULT_SAMPLES,
    seed: int = config.DEFAULT_SEED,
    **options,
) -> ExampleResult:
    """Run one suite on one catalog example."""
    runner = SuiteRunner(suite=suite, tolerance=tolerance, samples=samples, seed=seed, **options)
    return runner.run_example(get_entry(example))


def adjudicate_catalog(
    entries: Sequence[CatalogEntry], samples: int = 10, seed: int = config.DEFAULT_SEED, sign: int = 1
) -> List[dict]:
    """Sign adjudication over the supported catalog entries with their analytic riggings."""
    geometries = []
    for entry in entries:
        if not entry.supported:
            continue
        setup = entry.setup("catalog", sign)
        for u in sample_points(entry, samples, seed):
            geometries.append(induce(setup, u))
    logger.info(f"Adjudicating sign constants on {len(geometries)} points")
    return verifier.adjudicate(geometries)
