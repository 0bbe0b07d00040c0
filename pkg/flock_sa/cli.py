import argparse
import json
import sys
from typing import List, Optional

from flock_sa.confscore import score_centrality
from flock_sa.core import FlockSaError, SimParams, load_config
from flock_sa.exporters import write_score_dump, write_summary, write_sweep_csv, write_trajectory_jsonl
from flock_sa.metrics import episode_cost
from flock_sa.sim import run_episode
from flock_sa.sweep import SweepSpec, run_sweep, summarize_sweep
from flock_sa.system_logger import SystemLogger


def _aux_flag(value: str) -> bool:
    value = value.lower()
    if value in ('on', 'true', '1'):
        return True
    if value in ('off', 'false', '0'):
        return False
    raise argparse.ArgumentTypeError(f"expected on/off, got '{value}'")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='flock_sa',
        description='Flocking simulation with a ConfScore-based auxiliary controller',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s simulate --config config.json --aux off
  %(prog)s scores --config config.json --out scores.csv
  %(prog)s sweep --config config/sweep_default.json --out sweep.csv --summary summary.xlsx
        """
    )
    subparsers = parser.add_subparsers(dest='command', required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', required=True, help='Path to the JSON config file')
    common.add_argument('--out', help='Output file (defaults to standard output)')
    common.add_argument('--seed', type=int, help='Override the seed')
    common.add_argument('--aux', type=_aux_flag, help='Enable the auxiliary controller: on/off')
    common.add_argument('--controller', help='Base controller: local, global or none')
    common.add_argument('--top-k', dest='top_k', type=int, help='Override k')
    common.add_argument('--lambda', dest='lambda_override', type=float, help='Override lambda')

    simulate = subparsers.add_parser('simulate', parents=[common], help='Run one episode')
    simulate.add_argument('--dump-trajectory', dest='dump_trajectory',
                          help='Write per-step JSON Lines to this path')
    simulate.add_argument('--dump-scores', dest='dump_scores', help='Write the score dump CSV to this path')

    scores = subparsers.add_parser('scores', parents=[common], help='Run one episode and dump ConfScores')
    scores.add_argument('--full-scores', dest='full_scores', action='store_true',
                        help='Sample scores at every step instead of first/middle/last')

    sweep = subparsers.add_parser('sweep', parents=[common], help='Run an N/R/V/k sweep')
    sweep.add_argument('--workers', type=int, default=1, help='Parallel worker processes')
    sweep.add_argument('--summary', help='Write the per-cell summary (.csv or .xlsx)')
    return parser


def _params_from_args(doc: dict, args) -> SimParams:
    params = SimParams.from_dict(doc)
    return params.with_overrides(
        seed=args.seed,
        aux_enabled=args.aux,
        top_k=args.top_k,
        lambda_override=args.lambda_override,
    )


def cmd_simulate(args, logger) -> int:
    doc = load_config(args.config)
    params = _params_from_args(doc, args)
    controller = args.controller or doc.get('controller', 'local')
    record = run_episode(params, controller, keep_trajectory=bool(args.dump_trajectory))
    summary = episode_cost(record)

    if args.dump_trajectory:
        write_trajectory_jsonl(record, args.dump_trajectory)
    if args.dump_scores:
        write_score_dump(record, args.dump_scores)

    output = {
        'params': params.to_dict(),
        'controller': record.controller_name,
        'initial_state_hash': record.initial_state_hash,
        **summary.to_dict(),
    }
    text = json.dumps(output, indent=4)
    if args.out:
        with open(args.out, 'w', encoding='utf-8') as f:
            f.write(text + "\n")
    else:
        print(text)
    logger.info(f"Simulation finished: total cost {summary.total_cost:.9g}")
    return 0


def cmd_scores(args, logger) -> int:
    doc = load_config(args.config)
    params = _params_from_args(doc, args)
    controller = args.controller or doc.get('controller', 'local')
    record = run_episode(params, controller, full_scores=args.full_scores)

    write_score_dump(record, args.out or sys.stdout)
    for sample in record.score_history:
        centrality = score_centrality(sample.positions, sample.scores)
        shown = 'undefined' if centrality is None else f"{centrality:.4f}"
        message = f"step {sample.step}: score/centrality correlation {shown}"
        logger.info(message)
        if args.out:
            print(message)
    return 0


def cmd_sweep(args, logger) -> int:
    doc = load_config(args.config)
    if args.controller:
        doc['controllers'] = [args.controller]
    if args.aux is not None:
        doc['aux_enabled'] = args.aux
        doc['paired_ab'] = False
    for key in ('seed', 'top_k', 'lambda_override'):
        value = getattr(args, key)
        if value is not None:
            doc[key] = value
    if args.top_k is not None:
        doc['top_k_values'] = [args.top_k]

    spec = SweepSpec.from_config(doc)
    rows = run_sweep(spec, max_workers=args.workers)
    write_sweep_csv(rows, args.out or sys.stdout)
    if args.summary:
        write_summary(summarize_sweep(rows), args.summary)
    return 0


COMMANDS = {
    'simulate': cmd_simulate,
    'scores': cmd_scores,
    'sweep': cmd_sweep,
}


def main(argv: Optional[List[str]] = None) -> int:
    logger = SystemLogger().get_logger()
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        # argparse exits 0 for --help and 2 for usage errors; usage errors map to 1
        if e.code in (0, None):
            return 0
        logger.error(f"Invalid command line: {argv if argv is not None else sys.argv[1:]}")
        return 1
    logger.info(f"Starting flock_sa {args.command}")

    try:
        status = COMMANDS[args.command](args, logger)
        logger.info(f"{args.command} completed successfully.")
        return status
    except (FlockSaError, FileNotFoundError, ValueError) as e:
        logger.error(f"Error: {e}")
        print(f"Error: {e}", file=sys.stderr)
        return 1
    except Exception as e:
        logger.error(f"An unexpected error occurred: {e}")
        print(f"An unexpected error occurred: {e}", file=sys.stderr)
        return 1


if __name__ == '__main__':
    sys.exit(main())
