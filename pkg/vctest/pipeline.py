"""
End-to-end shape tests.

    fpca -> K_x -> spline basis and penalty -> mixed-model design -> PQL fits
         -> RLRT with simulated null distribution, or score test
"""
import logging
from dataclasses import asdict, dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from bases import SplineBasis, build_basis, decompose_penalty, difference_penalty
from config import Config
from design import GlmmDesign, Hypothesis, Method, build_design, coefficient_from_effects, compute_J
from fpca import FpcaModel, FunctionalDataset, fit_fpca
from glmm import PqlFit, get_family, pql_fit
from utils.decorators import log_stage
from utils.errors import ValidationError
from vctest.results import TestResult
from vctest.rlrt import rlrt_pvalue, rlrt_statistic, simulate_rlrt_null
from vctest.score import score_test

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TestOptions:
    """Resolved options of a shape test."""

    __test__ = False

    method: Method = Method.RLRT
    num_basis: int = Config.NUM_BASIS
    degree: int = Config.SPLINE_DEGREE
    kx: Optional[int] = None
    null_draws: int = Config.NULL_DRAWS
    seed: int = Config.SEED
    pre_centered: bool = False
    null_conditioning: str = Config.NULL_CONDITIONING
    rlrt_mode: str = Config.RLRT_MODE
    threads: int = 1
    max_iter: int = Config.PQL_MAX_ITER
    tol: float = Config.PQL_TOL
    quadrature_refine: int = Config.QUADRATURE_REFINE
    kx_scan_max: int = Config.KX_SCAN_MAX
    report_coefficient: bool = True

    def __post_init__(self):
        object.__setattr__(self, 'method', Method.parse(self.method))

        if self.null_conditioning not in Config.NULL_CONDITIONING_CHOICES:
            raise ValidationError(f"Unknown null conditioning: {self.null_conditioning}")
        if self.rlrt_mode not in Config.RLRT_MODE_CHOICES:
            raise ValidationError(f"Unknown RLRT mode: {self.rlrt_mode}")
        if self.null_draws < 1:
            raise ValidationError(f"null_draws must be positive, got {self.null_draws}")
        if self.kx is not None and self.kx < 1:
            raise ValidationError(f"K_x must be positive, got {self.kx}")
        if self.threads < 1:
            raise ValidationError(f"threads must be positive, got {self.threads}")

    def to_dict(self) -> dict:
        options = asdict(self)
        options['method'] = self.method.value
        return options


def prepare_design(
    data: FunctionalDataset,
    model: FpcaModel,
    hypothesis: Hypothesis,
    options: TestOptions,
) -> Tuple[GlmmDesign, SplineBasis]:
    """Basis, penalty split and mixed-model design for one hypothesis."""
    lo, hi = data.domain
    basis = build_basis(lo, hi, options.num_basis, options.degree)
    penalty = decompose_penalty(difference_penalty(basis.num_basis, hypothesis.order), hypothesis.order)
    J = compute_J(model.retained_eigenfunctions, basis, data.common_grid, options.quadrature_refine)
    return build_design(model.scores, J, penalty), basis


def estimated_coefficient(fit: PqlFit, design: GlmmDesign, basis: SplineBasis, grid: np.ndarray) -> np.ndarray:
    """beta(t) on the grid from the fixed effects and random-effect predictions of a fit."""
    penalty = design.penalty
    u_star = np.asarray(fit.u_hat) / np.sqrt(penalty.lambda1)
    return coefficient_from_effects(penalty, basis, fit.beta_hat[1:], u_star, grid)


def _fit_summary(fit: PqlFit, label: str) -> dict:
    return {
        f'converged_{label}': fit.converged,
        f'iterations_{label}': fit.iterations,
    }


def _rlrt(design: GlmmDesign, data: FunctionalDataset, options: TestOptions) -> Tuple[TestResult, PqlFit]:
    family = get_family(data.family, data.trials)
    alternative = pql_fit(design, data.responses, family, max_iter=options.max_iter, tol=options.tol)

    null_fit = None
    if options.rlrt_mode == 'two_fit' or options.null_conditioning == 'null':
        null_fit = pql_fit(
            design, data.responses, family, lambda_fixed=0.0,
            max_iter=options.max_iter, tol=options.tol,
        )

    if options.rlrt_mode == 'two_fit':
        statistic = max(0.0, 2.0 * (alternative.rel_at_opt - null_fit.rel_at_zero))
    else:
        statistic = rlrt_statistic(alternative)

    source = null_fit if options.null_conditioning == 'null' else alternative
    eigenvalues = source.null_eigenvalues

    if eigenvalues.size == 0:
        logger.warning("Working random design is numerically zero; reporting p = 1")
        p_value, draws, mass_at_zero = 1.0, 0, 1.0
    else:
        sample = simulate_rlrt_null(
            eigenvalues, source.n, source.p, options.null_draws, options.seed, options.threads
        )
        p_value = rlrt_pvalue(statistic, sample)
        draws = sample.size
        mass_at_zero = float(np.mean(sample == 0.0))

    diagnostics = _fit_summary(alternative, 'alt')
    if null_fit is not None:
        diagnostics.update(_fit_summary(null_fit, 'null'))
    diagnostics.update({
        'lambda_hat': alternative.lambda_hat,
        'sigma2_u': alternative.sigma2_u,
        'sigma2_e': alternative.sigma2_e,
        'n': alternative.n,
        'p': alternative.p,
        'null_eigenvalues': int(eigenvalues.size),
        'rlrt_mode': options.rlrt_mode,
        'null_conditioning': options.null_conditioning,
    })

    result = TestResult(
        hypothesis=design.hypothesis,
        method=Method.RLRT,
        statistic=statistic,
        p_value=p_value,
        null_draws=draws,
        mass_at_zero=mass_at_zero,
        diagnostics=diagnostics,
    )
    return result, alternative


def _score(design: GlmmDesign, data: FunctionalDataset, options: TestOptions) -> Tuple[TestResult, Optional[PqlFit]]:
    family = get_family(data.family, data.trials)
    null_fit = pql_fit(
        design, data.responses, family, lambda_fixed=0.0,
        max_iter=options.max_iter, tol=options.tol,
    )
    result = score_test(design, data.responses, family, null_fit=null_fit)

    alternative = None
    if options.report_coefficient:
        alternative = pql_fit(design, data.responses, family, max_iter=options.max_iter, tol=options.tol)
        diagnostics = dict(result.diagnostics)
        diagnostics.update(_fit_summary(alternative, 'alt'))
        diagnostics['lambda_hat'] = alternative.lambda_hat
        result = replace(result, diagnostics=diagnostics)

    return result, alternative


@log_stage('test')
def run_test(
    data: FunctionalDataset,
    hypothesis,
    options: Optional[TestOptions] = None,
    fpca_model: Optional[FpcaModel] = None,
) -> TestResult:
    """
    Test the shape of the coefficient function.

    Args:
        data: Functional dataset
        hypothesis: nullity, functionality or linearity
        options: Test options (defaults from Config)
        fpca_model: Reuse an existing FPCA fit

    Returns:
        TestResult: Statistic, p-value and diagnostics

    Raises:
        ValidationError: If K_x is below d + 1
    """
    options = options or TestOptions()
    hypothesis = Hypothesis.parse(hypothesis)
    order = hypothesis.order

    if options.kx is not None and options.kx < order + 1:
        raise ValidationError(f"K_x must be at least d+1 = {order + 1}")

    model = fpca_model or fit_fpca(
        data,
        d_max=order,
        kx=options.kx,
        pre_centered=options.pre_centered,
        max_components=options.kx_scan_max,
    )
    if model.kx < order + 1:
        raise ValidationError(f"K_x must be at least d+1 = {order + 1}")

    design, basis = prepare_design(data, model, hypothesis, options)

    if options.method == Method.RLRT:
        result, alternative = _rlrt(design, data, options)
    else:
        result, alternative = _score(design, data, options)

    diagnostics = dict(result.diagnostics)
    diagnostics.update({'kx': model.kx, 'ku': basis.num_basis, 'noise_var': model.noise_var})

    coefficient = None
    if options.report_coefficient and alternative is not None:
        coefficient = estimated_coefficient(alternative, design, basis, data.common_grid)

    result = replace(
        result,
        diagnostics=diagnostics,
        coefficient=coefficient,
        grid=data.common_grid if coefficient is not None else None,
    )

    logger.info(
        f"{hypothesis.value} ({result.method.value}): statistic={result.statistic:.4f}, "
        f"p={result.p_value:.4f}, converged={result.converged}"
    )
    return result


def run_all_tests(
    data: FunctionalDataset,
    options: Optional[TestOptions] = None,
    methods: Optional[Sequence[Method]] = None,
) -> List[TestResult]:
    """
    Run linearity, functionality and nullity on one FPCA fit.

    The shared fit uses the linearity floor K_x >= 3.

    Args:
        data: Functional dataset
        options: Test options; its method is replaced per run
        methods: Methods to run (both when omitted)

    Returns:
        List[TestResult]: Results ordered by method, then hypothesis
    """
    options = options or TestOptions()
    if options.kx is not None and options.kx < 3:
        raise ValidationError("K_x must be at least d+1 = 3")

    model = fit_fpca(
        data,
        d_max=Hypothesis.LINEARITY.order,
        kx=options.kx,
        pre_centered=options.pre_centered,
        max_components=options.kx_scan_max,
    )

    results = []
    for method in methods or list(Method):
        method = Method.parse(method)
        method_options = replace(options, method=method)
        for hypothesis in (Hypothesis.LINEARITY, Hypothesis.FUNCTIONALITY, Hypothesis.NULLITY):
            results.append(run_test(data, hypothesis, method_options, fpca_model=model))

    return results
