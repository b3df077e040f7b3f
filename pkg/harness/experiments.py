"""
Monte Carlo experiments: empirical rejection rates of the shape tests.

Each replicate owns a generator spawned from the cell seed by replicate index, so
results do not depend on the number of worker threads.
"""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence

import numpy as np

from design import Hypothesis, Method
from harness.simulation import SimConfig, draw_sample
from utils.errors import FlmTestError, ValidationError
from vctest import TestOptions, run_test

logger = logging.getLogger(__name__)

DEFAULT_POWER_DELTAS = (0.0, 1.0, 3.0, 5.0)


@dataclass(frozen=True)
class ReplicateOutcome:
    p_value: float
    converged: bool
    failed: bool
    runtime: float


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    """Aggregated outcome of one simulation cell."""

    config: SimConfig
    method: Method
    hypothesis: Hypothesis
    outcomes: List[ReplicateOutcome] = field(default_factory=list)

    @property
    def replicates(self) -> int:
        return len(self.outcomes)

    @property
    def rejections(self) -> int:
        """Rejections among converged replicates; nonconverged ones count as acceptances."""
        return sum(
            1 for o in self.outcomes if o.converged and o.p_value <= self.config.alpha
        )

    @property
    def nonconverged(self) -> int:
        return sum(1 for o in self.outcomes if not o.converged)

    @property
    def failures(self) -> int:
        return sum(1 for o in self.outcomes if o.failed)

    @property
    def rate(self) -> float:
        return self.rejections / self.replicates if self.replicates else 0.0

    @property
    def se(self) -> float:
        if not self.replicates:
            return 0.0
        return float(np.sqrt(self.rate * (1.0 - self.rate) / self.replicates))

    @property
    def converged_rate(self) -> Optional[float]:
        """Rejection rate with nonconverged replicates excluded."""
        converged = self.replicates - self.nonconverged
        return self.rejections / converged if converged else None

    @property
    def mean_runtime(self) -> float:
        if not self.outcomes:
            return 0.0
        return float(np.mean([o.runtime for o in self.outcomes]))

    def to_row(self) -> dict:
        """One CSV row (runtimes excluded)."""
        return {
            'family': self.config.family,
            'hypothesis': self.hypothesis.value,
            'method': self.method.value,
            'n': self.config.n,
            'm_i': self.config.m_i,
            'coefficient': self.config.coefficient,
            'delta': self.config.delta,
            'replicates': self.replicates,
            'rejections': self.rejections,
            'rate': self.rate,
            'se': self.se,
            'converged_rate': self.converged_rate,
            'nonconverged': self.nonconverged,
        }

    def to_dict(self) -> dict:
        row = self.to_row()
        row.update({'failures': self.failures, 'config': self.config.to_dict()})
        return row


def _run_replicate(
    config: SimConfig,
    hypothesis: Hypothesis,
    options: TestOptions,
    seed_sequence: np.random.SeedSequence,
    index: int,
) -> ReplicateOutcome:
    data_seed, null_seed = seed_sequence.spawn(2)
    started = time.perf_counter()

    try:
        sample = draw_sample(config, np.random.default_rng(data_seed))
        replicate_options = replace(options, seed=int(null_seed.generate_state(1)[0]))
        result = run_test(sample.data, hypothesis, replicate_options)
        return ReplicateOutcome(
            p_value=result.p_value,
            converged=result.converged,
            failed=False,
            runtime=time.perf_counter() - started,
        )

    except (FlmTestError, np.linalg.LinAlgError, ValueError, ArithmeticError) as e:
        logger.warning(f"Replicate {index} failed ({type(e).__name__}): {e}")
        return ReplicateOutcome(
            p_value=1.0, converged=False, failed=True, runtime=time.perf_counter() - started
        )


def run_experiment(
    config: SimConfig,
    method,
    hypothesis,
    threads: int = 1,
    options: Optional[TestOptions] = None,
) -> ExperimentResult:
    """
    Run every replicate of one simulation cell.

    Args:
        config: Simulation cell
        method: aRLRT or aScore
        hypothesis: Hypothesis under test
        threads: Worker threads for replicates
        options: Base test options; method, null draws and seeds are set per replicate

    Returns:
        ExperimentResult: Per-replicate outcomes and aggregates
    """
    method = Method.parse(method)
    hypothesis = Hypothesis.parse(hypothesis)
    if threads < 1:
        raise ValidationError(f"threads must be positive, got {threads}")

    options = replace(
        options or TestOptions(),
        method=method,
        null_draws=config.null_draws,
        threads=1,
        report_coefficient=False,
    )
    children = np.random.SeedSequence(config.seed).spawn(config.replicates)

    logger.info(
        f"Experiment {config.family} {config.coefficient} delta={config.delta} n={config.n} "
        f"m_i={config.m_i}: {hypothesis.value} / {method.value}, "
        f"{config.replicates} replicates on {threads} thread(s)"
    )

    def replicate(index: int) -> ReplicateOutcome:
        return _run_replicate(config, hypothesis, options, children[index], index)

    if threads == 1:
        outcomes = [replicate(i) for i in range(config.replicates)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            outcomes = list(executor.map(replicate, range(config.replicates)))

    result = ExperimentResult(config=config, method=method, hypothesis=hypothesis, outcomes=outcomes)
    logger.info(
        f"Rejection rate {result.rate:.4f} (SE {result.se:.4f}), "
        f"{result.nonconverged} nonconverged, {result.failures} failed, mean runtime {result.mean_runtime:.2f}s"
    )
    return result


def power_mode(
    config: SimConfig,
    delta_grid: Sequence[float] = DEFAULT_POWER_DELTAS,
    hypotheses: Sequence = tuple(Hypothesis),
    methods: Sequence = (Method.RLRT,),
    threads: int = 1,
    options: Optional[TestOptions] = None,
) -> List[ExperimentResult]:
    """
    Power analysis for beta(t) = delta * tabulated beta, at n and 2n subjects.

    Returns:
        List[ExperimentResult]: Ordered by n, delta, hypothesis, method
    """
    if config.coefficient != 'tabulated':
        raise ValidationError("Power mode needs a tabulated coefficient")
    if not delta_grid:
        raise ValidationError("Power mode needs at least one delta")

    results = []
    for n in (config.n, 2 * config.n):
        for delta in delta_grid:
            cell = replace(config, n=n, delta=float(delta))
            for hypothesis in hypotheses:
                for method in methods:
                    results.append(run_experiment(cell, method, hypothesis, threads, options))
    return results
