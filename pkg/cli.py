"""
flmtest - Command Line Entry Point
Tests the shape of the coefficient function in generalized scalar-on-function models.

Commands:
    test      run nullity, functionality or linearity tests on CSV data
    fpca      fit functional principal components to a curve file
    simulate  run a Monte Carlo experiment plan from a key = value file
    generate  write a synthetic dataset
    power     power analysis for a scaled, tabulated coefficient

Exit codes: 0 success, 1 error, 2 result produced but PQL did not converge.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from config import Config
from design import Hypothesis, Method
from fpca import fit_fpca
from harness import SimConfig, build_plan, generate_dataset, power_mode, run_experiment
from storage import (
    load_curves,
    load_dataset,
    read_coefficient,
    read_settings,
    write_dataset,
    write_experiment_csv,
    write_json,
)
from utils.errors import FlmTestError
from utils.messages import (
    format_experiment_table,
    format_fpca_summary,
    format_results_table,
    format_test_result,
)
from vctest import TestOptions, run_all_tests, run_test

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NONCONVERGED = 2


def configure_logging() -> None:
    """Log to stderr and to a file under Config.LOG_DIR."""
    handlers = [logging.StreamHandler(sys.stderr)]
    try:
        handlers.append(logging.FileHandler(Config.log_path('flmtest.log'), encoding='utf-8'))
    except OSError as e:
        print(f"Could not open log file in {Config.LOG_DIR}: {e}", file=sys.stderr)

    logging.basicConfig(
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        level=getattr(logging, Config.LOG_LEVEL.upper(), logging.INFO),
        handlers=handlers,
    )


def _envelope(command: str, **payload) -> dict:
    body = {'version': Config.VERSION, 'command': command, 'environment': Config.as_dict()}
    body.update(payload)
    return body


def _emit(payload: dict, out: Optional[str]) -> None:
    text = write_json(payload, out)
    if out is None:
        sys.stdout.write(text)


def _test_methods(args: argparse.Namespace) -> List[Method]:
    """Methods to run: both for 'all', aRLRT alone for one hypothesis unless given."""
    if args.method == 'all' or (args.method is None and args.hypothesis == 'all'):
        return list(Method)
    return [Method.parse(args.method or Method.RLRT)]


def _test_options(args: argparse.Namespace, method: Method) -> TestOptions:
    return TestOptions(
        method=method,
        num_basis=args.ku,
        kx=args.kx,
        null_draws=args.null_draws,
        seed=args.seed,
        pre_centered=args.pre_centered,
        null_conditioning=args.null_conditioning,
        rlrt_mode=args.rlrt_mode,
        threads=args.threads,
    )


def cmd_test(args: argparse.Namespace) -> int:
    """Run shape tests on a curve file and a response file."""
    data = load_dataset(args.curves, args.responses, args.family)
    methods = _test_methods(args)
    options = _test_options(args, methods[0])

    if args.hypothesis == 'all':
        results = run_all_tests(data, options, methods)
    else:
        results = [
            run_test(data, args.hypothesis, _test_options(args, method)) for method in methods
        ]

    if len(results) == 1:
        print(format_test_result(results[0]), file=sys.stderr)
        payload = {'result': results[0].to_dict()}
    else:
        print(format_results_table(results), file=sys.stderr)
        payload = {'results': [r.to_dict() for r in results]}

    config = {
        'options': options.to_dict(),
        'inputs': {
            'curves': str(args.curves),
            'responses': str(args.responses),
            'family': args.family,
            'hypothesis': args.hypothesis,
            'methods': [m.value for m in methods],
        },
    }
    _emit(_envelope('test', config=config, **payload), args.out)

    if not all(r.converged for r in results):
        logger.warning("At least one PQL fit did not converge")
        return EXIT_NONCONVERGED
    return EXIT_OK


def cmd_fpca(args: argparse.Namespace) -> int:
    """Fit FPCA to a curve file."""
    data = load_curves(args.curves)
    model = fit_fpca(
        data,
        d_max=args.d_max,
        kx=args.kx,
        pre_centered=args.pre_centered,
        max_components=Config.KX_SCAN_MAX,
    )
    print(format_fpca_summary(model), file=sys.stderr)

    config = {
        'curves': str(args.curves),
        'kx': args.kx,
        'd_max': args.d_max,
        'pre_centered': args.pre_centered,
    }
    _emit(_envelope('fpca', config=config, fpca=model.to_summary()), args.out)
    return EXIT_OK


def _write_experiments(results, out_dir: Path, stem: str, config: dict) -> None:
    rows = [r.to_row() for r in results]
    write_experiment_csv(rows, out_dir / f"{stem}.csv")
    write_json(
        _envelope(stem, config=config, cells=[r.to_dict() for r in results]),
        out_dir / f"{stem}.json",
    )
    print(format_experiment_table(rows))


def cmd_simulate(args: argparse.Namespace) -> int:
    """Run every cell of a simulation plan."""
    config_path = Path(args.config)
    settings = read_settings(config_path)
    cells = build_plan(settings, seed=args.seed, base_dir=config_path.parent)

    results = []
    for index, cell in enumerate(cells, start=1):
        logger.info(f"Cell {index}/{len(cells)}")
        results.append(run_experiment(cell.config, cell.method, cell.hypothesis, args.threads))

    config = {
        'settings': {key: setting.value for key, setting in sorted(settings.items())},
        'seed': args.seed,
    }
    _write_experiments(results, Path(args.out_dir), 'experiments', config)
    return EXIT_OK


def _sim_config(args: argparse.Namespace, **overrides) -> SimConfig:
    fields = {
        'family': args.family,
        'n': args.n,
        'm_i': args.m_i,
        'seed': args.seed,
        'trials': args.trials,
    }
    if getattr(args, 'coefficient_file', None):
        beta_grid, beta_values = read_coefficient(args.coefficient_file)
        fields['beta_grid'] = tuple(float(t) for t in beta_grid)
        fields['beta_values'] = tuple(float(b) for b in beta_values)
    fields.update(overrides)
    return SimConfig(**fields)


def cmd_generate(args: argparse.Namespace) -> int:
    """Write one synthetic dataset."""
    config = _sim_config(args, coefficient=args.coefficient, delta=args.delta)
    data = generate_dataset(config)

    out_dir = Path(args.out_dir)
    write_dataset(data, out_dir / 'curves.csv', out_dir / 'responses.csv')
    write_json(_envelope('generate', config=config.to_dict()), out_dir / 'generate.json')
    return EXIT_OK


def cmd_power(args: argparse.Namespace) -> int:
    """Power analysis for delta times a tabulated coefficient at n and 2n."""
    config = _sim_config(
        args,
        coefficient='tabulated',
        replicates=args.replicates,
        null_draws=args.null_draws,
    )
    deltas = [float(d) for d in args.deltas.split(',') if d.strip()]
    hypotheses = list(Hypothesis) if args.hypothesis == 'all' else [Hypothesis.parse(args.hypothesis)]
    methods = list(Method) if args.method == 'all' else [Method.parse(args.method)]

    results = power_mode(config, deltas, hypotheses, methods, args.threads)
    echo = {'sim': config.to_dict(), 'deltas': deltas}
    _write_experiments(results, Path(args.out_dir), 'power', echo)
    return EXIT_OK


def _add_sim_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--family', default='gaussian', choices=Config.SUPPORTED_FAMILIES)
    parser.add_argument('--n', type=int, default=100, help='number of subjects')
    parser.add_argument('--m-i', type=int, default=80, help='observations per subject')
    parser.add_argument('--trials', type=int, default=10, help='binomial trials')
    parser.add_argument('--out-dir', default='results')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='flmtest',
        description='Shape tests for the coefficient function of generalized functional linear models.',
    )
    parser.add_argument('--version', action='version', version=f"%(prog)s {Config.VERSION}")
    commands = parser.add_subparsers(dest='command', required=True)

    test = commands.add_parser('test', help='test nullity, functionality or linearity')
    test.add_argument('curves', help='curve file with columns id,t,x')
    test.add_argument('responses', help='response file with columns id,y[,trials]')
    test.add_argument('--hypothesis', default='all',
                      choices=[h.value for h in Hypothesis] + ['all'])
    test.add_argument('--family', default='gaussian', choices=Config.SUPPORTED_FAMILIES)
    test.add_argument('--method', default=None,
                      help='aRLRT, aScore or all (default: all with --hypothesis all, else aRLRT)')
    test.add_argument('--null-draws', type=int, default=Config.NULL_DRAWS)
    test.add_argument('--ku', type=int, default=Config.NUM_BASIS, help='number of B-splines')
    test.add_argument('--kx', type=int, default=None, help='force the FPCA truncation')
    test.add_argument('--seed', type=int, default=Config.SEED)
    test.add_argument('--pre-centered', action='store_true')
    test.add_argument('--null-conditioning', default=Config.NULL_CONDITIONING,
                      choices=Config.NULL_CONDITIONING_CHOICES)
    test.add_argument('--rlrt-mode', default=Config.RLRT_MODE, choices=Config.RLRT_MODE_CHOICES)
    test.add_argument('--threads', type=int, default=Config.THREADS)
    test.add_argument('--out', default=None, help='JSON output path (stdout when omitted)')
    test.set_defaults(handler=cmd_test)

    fpca = commands.add_parser('fpca', help='fit functional principal components')
    fpca.add_argument('curves', help='curve file with columns id,t,x')
    fpca.add_argument('--kx', type=int, default=None)
    fpca.add_argument('--d-max', type=int, default=2, help='K_x floor is d_max + 1')
    fpca.add_argument('--pre-centered', action='store_true')
    fpca.add_argument('--out', default=None)
    fpca.set_defaults(handler=cmd_fpca)

    simulate = commands.add_parser('simulate', help='run a simulation plan')
    simulate.add_argument('config', help='key = value plan file')
    simulate.add_argument('--out-dir', default='results')
    simulate.add_argument('--threads', type=int, default=Config.THREADS)
    simulate.add_argument('--seed', type=int, required=True)
    simulate.set_defaults(handler=cmd_simulate)

    generate = commands.add_parser('generate', help='write a synthetic dataset')
    _add_sim_arguments(generate)
    generate.add_argument('--coefficient', default='scalar',
                          choices=['scalar', 'linear', 'trig', 'tabulated'])
    generate.add_argument('--delta', type=float, default=0.0)
    generate.add_argument('--coefficient-file', default=None, help='t,beta file for tabulated')
    generate.add_argument('--seed', type=int, default=Config.SEED)
    generate.set_defaults(handler=cmd_generate)

    power = commands.add_parser('power', help='power analysis for a tabulated coefficient')
    _add_sim_arguments(power)
    power.add_argument('coefficient_file', help='t,beta file')
    power.add_argument('--deltas', default='0,1,3,5')
    power.add_argument('--replicates', type=int, default=100)
    power.add_argument('--null-draws', type=int, default=Config.NULL_DRAWS)
    power.add_argument('--hypothesis', default='all',
                       choices=[h.value for h in Hypothesis] + ['all'])
    power.add_argument('--method', default=Method.RLRT.value)
    power.add_argument('--threads', type=int, default=Config.THREADS)
    power.add_argument('--seed', type=int, required=True)
    power.set_defaults(handler=cmd_power)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, run the command and map the outcome to an exit code."""
    args = build_parser().parse_args(argv)
    configure_logging()

    logger.info("=" * 60)
    logger.info(f"flmtest {Config.VERSION}: {args.command}")
    logger.info("=" * 60)

    if not Config.validate():
        logger.error("Configuration validation failed. Exiting.")
        return EXIT_ERROR

    try:
        code = args.handler(args)
    except (FlmTestError, ValueError, OSError) as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_ERROR
    except Exception as e:
        logger.error(f"Unexpected error in {args.command}: {e}", exc_info=True)
        return EXIT_ERROR

    logger.info("=" * 60)
    logger.info(f"{args.command} finished with exit code {code}")
    logger.info("=" * 60)
    return code


if __name__ == '__main__':
    sys.exit(main())
