"""
Command-line entry point

    python -m shared.cli analyze app.json --resource MediaPlayer
    python -m shared.cli fix app.json --resource WakeLock --release late --out bundle.json
    python -m shared.cli stats app.json --resource MediaPlayer --format text --dot graphs/
    python -m shared.cli corpus generate --resource WifiLock --seed 7 --count 50 --out corpus/
    python -m shared.cli oracle run app.json --resource MediaPlayer
    python -m shared.cli resources

Exit codes: 0 success (no leaks / all fixes valid), 1 leaks or violations
found, 2 input error, 3 some fix failed validation. Diagnostics go to
standard error only.
"""
import argparse
import logging
import os
import sys
from typing import List, Optional

from shared.analysis import analyze_app
from shared.config import RELEASE_POLICIES, RunConfig, get_log_level, get_loop_bound, get_oracle_budget
from shared.errors import PlumbError
from shared.ir import AppModel, list_bundled, load_resource, parse_app, resource_spec_to_dict, serialize_app
from shared.oracle import generate_corpus, oracle_leaks, oracle_violations
from shared.repair import render_repair, render_reports, repair, validate
from shared.rfg import app_stats, build_rfg, rfg_to_dot, stats_document
from shared.utils.helpers import to_json

logger = logging.getLogger("shared.cli")

EXIT_OK = 0
EXIT_FOUND = 1
EXIT_INPUT = 2
EXIT_INVALID_FIX = 3


def _read_app(path: str) -> AppModel:
    with open(path, "rb") as fh:
        return parse_app(fh.read())


def _emit(text: str, out: Optional[str]):
    if not text.endswith("\n"):
        text += "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config(args) -> RunConfig:
    return RunConfig.from_env(
        args.app,
        args.resource,
        depth=getattr(args, "depth", None),
        release_policy=getattr(args, "release", None),
        validate_flag=False if getattr(args, "no_validate", False) else None,
        output_format=getattr(args, "format", None),
        output_path=getattr(args, "out", None),
        dot_dir=getattr(args, "dot", None),
    )


def cmd_analyze(args) -> int:
    config = _config(args)
    app = _read_app(config.app_path)
    spec = load_resource(config.resource_spec_path)
    result = analyze_app(app, spec, config.depth, config.release_policy)
    if config.output_format == "text":
        _emit(render_reports(result.reports), config.output_path)
    else:
        _emit(to_json(result.to_dict()), config.output_path)
    return EXIT_FOUND if result.reports else EXIT_OK


def cmd_fix(args) -> int:
    config = _config(args)
    app = _read_app(config.app_path)
    spec = load_resource(config.resource_spec_path)
    result = repair(app, spec, config.depth, config.validate_flag, config.release_policy)
    if config.output_format == "text":
        _emit(render_repair(result), config.output_path)
    else:
        _emit(to_json(result.to_bundle()), config.output_path)
    if args.patched:
        _emit(serialize_app(result.patched), args.patched)
    return EXIT_OK if result.all_valid else EXIT_INVALID_FIX


def cmd_validate(args) -> int:
    config = _config(args)
    app = _read_app(config.app_path)
    spec = load_resource(config.resource_spec_path)
    result = validate(app, spec, config.depth, config.release_policy)
    if config.output_format == "text":
        lines = [result.verdict] + [
            f"- {v.kind} in {v.component}: {' '.join(v.to_dict()['witness'])}" for v in result.violations
        ]
        _emit("\n".join(lines), config.output_path)
    else:
        _emit(to_json(result.to_dict()), config.output_path)
    return EXIT_OK if result.valid else EXIT_FOUND


def cmd_stats(args) -> int:
    config = _config(args)
    app = _read_app(config.app_path)
    spec = load_resource(config.resource_spec_path)
    if config.output_format == "text":
        _emit(app_stats(app, spec).to_string(index=False), config.output_path)
    else:
        _emit(to_json(stats_document(app, spec)), config.output_path)
    if config.dot_dir:
        os.makedirs(config.dot_dir, exist_ok=True)
        for name, proc in sorted(app.procedures.items()):
            path = os.path.join(config.dot_dir, f"{name}.dot")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(rfg_to_dot(build_rfg(proc, spec)))
        logger.info(f"Wrote {len(app.procedures)} DOT file(s) to {config.dot_dir}")
    return EXIT_OK


def cmd_corpus_generate(args) -> int:
    spec = load_resource(args.resource)
    apps = generate_corpus(args.seed, args.count, spec)
    os.makedirs(args.out, exist_ok=True)
    for app in apps:
        with open(os.path.join(args.out, f"{app.name}.json"), "w", encoding="utf-8") as fh:
            fh.write(serialize_app(app) + "\n")
    with open(os.path.join(args.out, f"{spec.name}.resource.json"), "w", encoding="utf-8") as fh:
        fh.write(to_json(resource_spec_to_dict(spec)) + "\n")
    logger.info(f"Wrote {len(apps)} app(s) to {args.out}")
    return EXIT_OK


def cmd_oracle_run(args) -> int:
    config = _config(args)
    app = _read_app(config.app_path)
    spec = load_resource(config.resource_spec_path)
    loop_bound = args.loop_bound or get_loop_bound()
    budget = args.budget or get_oracle_budget()
    leaks = oracle_leaks(app, spec, config.depth, loop_bound, config.release_policy, budget)
    violations = oracle_violations(app, spec, config.depth, loop_bound, config.release_policy, budget)
    document = {
        "app": app.name,
        "resource": spec.name,
        "depth": config.depth,
        "loop_bound": loop_bound,
        "leaks": [
            {"component": comp, "acquire": {"procedure": o[0], "block": o[1], "index": o[2]}}
            for comp, o in leaks
        ],
        "violations": [{"component": comp, "kind": kind} for comp, kind in violations],
    }
    _emit(to_json(document), config.output_path)
    return EXIT_FOUND if leaks else EXIT_OK


def cmd_resources(args) -> int:
    _emit("\n".join(list_bundled()), None)
    return EXIT_OK


def _app_arguments(parser: argparse.ArgumentParser, fixes: bool = False):
    parser.add_argument("app", help="IR document of the app")
    parser.add_argument("--resource", required=True, help="Resource spec file or bundled resource name")
    parser.add_argument("--depth", type=int, default=None, help="Unrolling depth D (default PLUMB_DEPTH or 3)")
    parser.add_argument("--release", choices=RELEASE_POLICIES, default=None, help="Release callback policy")
    parser.add_argument("--format", choices=("json", "text"), default=None)
    parser.add_argument("--out", default=None, help="Output file (default standard output)")
    if fixes:
        parser.add_argument("--no-validate", action="store_true", help="Skip validation of the patched app")
        parser.add_argument("--patched", default=None, help="Also write the patched IR document here")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plumbline", description="Resource leak detection and repair for app IR")
    commands = parser.add_subparsers(dest="command", required=True)

    analyze = commands.add_parser("analyze", help="Report leaks of one resource")
    _app_arguments(analyze)
    analyze.set_defaults(handler=cmd_analyze)

    fix = commands.add_parser("fix", help="Synthesize, apply and validate fixes")
    _app_arguments(fix, fixes=True)
    fix.set_defaults(handler=cmd_fix)

    check = commands.add_parser("validate", help="Check an app for use-after-release, double release and leaks")
    _app_arguments(check)
    check.set_defaults(handler=cmd_validate)

    stats = commands.add_parser("stats", help="CFG and RFG size and cyclomatic complexity")
    _app_arguments(stats)
    stats.add_argument("--dot", default=None, help="Directory for per-procedure RFG DOT files")
    stats.set_defaults(handler=cmd_stats)

    corpus = commands.add_parser("corpus", help="Random corpus tooling")
    corpus_commands = corpus.add_subparsers(dest="corpus_command", required=True)
    generate = corpus_commands.add_parser("generate", help="Write a seeded random corpus")
    generate.add_argument("--resource", required=True)
    generate.add_argument("--seed", type=int, default=0)
    generate.add_argument("--count", type=int, default=10)
    generate.add_argument("--out", required=True, help="Output directory")
    generate.set_defaults(handler=cmd_corpus_generate)

    oracle = commands.add_parser("oracle", help="Brute-force reference verdicts")
    oracle_commands = oracle.add_subparsers(dest="oracle_command", required=True)
    run = oracle_commands.add_parser("run", help="Enumerate bounded runs of an app")
    _app_arguments(run)
    run.add_argument("--loop-bound", type=int, default=None)
    run.add_argument("--budget", type=int, default=None)
    run.set_defaults(handler=cmd_oracle_run)

    resources = commands.add_parser("resources", help="List bundled resource specs")
    resources.set_defaults(handler=cmd_resources)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(
        stream=sys.stderr,
        level=getattr(logging, get_log_level(), logging.INFO),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_INPUT
    try:
        return args.handler(args)
    except (OSError, PlumbError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
