#!/usr/bin/env python3
"""
Main CLI entry point for subdecay

Exit codes: 0 when every claim passes, 1 when a claim fails or a module
error stops a run, 2 for usage, configuration and missing-artifact errors.
"""

import sys
import argparse
import logging
import textwrap

from subdecay import __version__
from subdecay.errors import ConfigError, MissingArtifactError, SubdecayError
from subdecay.main import ExperimentRunner, emit_report, list_presets, load_config, preset_path

# Configure logger
logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


def setup_argparse() -> argparse.ArgumentParser:
    """Set up command-line argument parser"""
    parser = argparse.ArgumentParser(
        description="subdecay - decay checks for non-local-in-time subdiffusion",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=textwrap.dedent("""\
            Examples:
              subdecay presets list                # List packaged experiments
              subdecay presets show frac-l2-d3     # Print a preset's JSON
              subdecay run frac-l2-d3 --out runs/d3  # Run a preset
              subdecay run my.json --threads 4     # Run a config file on 4 threads
              subdecay run my.json --tol-scale 2   # Double every tolerance
              subdecay report runs/d3              # Summarize a run and write plot data
        """)
    )
    parser.add_argument('--version', action='version', version=f"subdecay {__version__}")

    subparsers = parser.add_subparsers(dest='command', help='Command to execute')

    # Run command
    run_parser = subparsers.add_parser('run', help='Run an experiment config or preset')
    run_parser.add_argument('config', help='Config file path or preset name')
    run_parser.add_argument('--out', dest='output_dir', default=None,
                            help='Artifact directory (defaults to the configured output directory)')
    run_parser.add_argument('--threads', type=int, default=None,
                            help='Worker threads for independent sample times')
    run_parser.add_argument('--tol-scale', dest='tol_scale', type=float, default=None,
                            help='Multiply every tolerance of this run')

    # Report command
    report_parser = subparsers.add_parser('report', help='Summarize the artifacts of a run')
    report_parser.add_argument('directory', help='Artifact directory of a previous run')

    # Presets command
    presets_parser = subparsers.add_parser('presets', help='List or show packaged presets')
    presets_subparsers = presets_parser.add_subparsers(dest='presets_command', help='Presets command')
    presets_subparsers.add_parser('list', help='List preset names and descriptions')
    show_parser = presets_subparsers.add_parser('show', help='Print the JSON of a preset')
    show_parser.add_argument('name', help='Preset name')

    return parser


def handle_run(args: argparse.Namespace) -> int:
    """Handle the run command"""
    if args.threads is not None and args.threads < 1:
        print("Error: --threads must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    if args.tol_scale is not None and not args.tol_scale > 0:
        print("Error: --tol-scale must be positive", file=sys.stderr)
        return EXIT_USAGE

    try:
        experiment = load_config(args.config)
        runner = ExperimentRunner(experiment, output_dir=args.output_dir, threads=args.threads,
                                  tolerance_scale=args.tol_scale)
        result = runner.run()
    except ConfigError as e:
        print(f"Configuration error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SubdecayError as e:
        logger.error(f"Run of {args.config} stopped: {type(e).__name__}: {e}")
        return EXIT_FAIL

    failed = [f"{report.claim} [{context}]" for context, report in result.reports if not report.passed]
    print(f"{experiment.name}: {len(result.reports) - len(failed)}/{len(result.reports)} claims passed")
    for claim in failed:
        print(f"  FAIL {claim}")
    print(f"Artifacts written to {runner.output_dir}")
    return EXIT_PASS if result.passed else EXIT_FAIL


def handle_report(args: argparse.Namespace) -> int:
    """Handle the report command"""
    try:
        print(emit_report(args.directory), end="")
    except MissingArtifactError as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_PASS


def handle_presets(args: argparse.Namespace) -> int:
    """Handle the presets command"""
    if args.presets_command == 'show':
        path = preset_path(args.name)
        if path is None:
            print(f"Error: no preset named {args.name!r}", file=sys.stderr)
            return EXIT_USAGE
        with open(path, 'r') as f:
            print(f.read(), end="")
        return EXIT_PASS

    presets = list_presets()
    if not presets:
        print("No presets found")
        return EXIT_PASS
    width = max(len(name) for name, _ in presets)
    for name, description in presets:
        print(f"{name.ljust(width)}  {description}")
    return EXIT_PASS


def main() -> int:
    """Main entry point for the application"""
    parser = setup_argparse()
    args = parser.parse_args()

    # Handle command
    if args.command == 'run':
        return handle_run(args)
    elif args.command == 'report':
        return handle_report(args)
    elif args.command == 'presets':
        return handle_presets(args)
    else:
        # A bare invocation is a usage error
        parser.print_help()
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
