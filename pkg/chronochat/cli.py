"""
Command line entry point: one verb per pipeline stage.

Every generative verb needs --seed; nothing reads the wall clock.
Exit codes: 0 success, 1 domain error, 2 usage error.
"""

import argparse
import functools
import json
import logging
import os
import random
import sys

from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

from chronochat.dataset import (
    assign_splits,
    compute_stats,
    export_conversation,
    import_conversations,
    import_gapchat,
    write_corpus,
)
from chronochat.dialogue import (
    ContextMode,
    LlmChatAgent,
    MockChatAgent,
    SelfChatConfig,
    plan_self_chat,
    render_context,
    run_batch,
    run_whole_session_chat,
)
from chronochat.dialogue.context import MODE_SECTIONS
from chronochat.errors import ChronochatError, MalformedDocument, MissingFile
from chronochat.evaluation import (
    evaluate,
    filter_judgments,
    gap_bucket_report,
    load_judgments,
    render_bucket_table,
    render_table,
)
from chronochat.llm import (
    BackendConfig,
    BackendMode,
    REFERENCE_FIXTURES,
    ExtractionStyle,
    estimate_event_duration,
    extract_events,
    generate_event_schedule,
    resolve_backend,
)
from chronochat.simulation import (
    REFERENCE_POOL,
    ClockState,
    Duration,
    Schedule,
    ScheduleSplit,
    advance,
    compute_progress_label,
    effective_duration,
    generate_pair_timelines,
    get_life_event,
    initial_event_cards,
    load_event_pool,
    parse_duration,
    render_update_cards,
    split_schedule,
    timeline_from_dict,
    timeline_to_dict,
)
from chronochat.simulation.progress import label_from_text, parse_step_phrase

from .logging_config import setup_logging

CONFIG_DIR = os.environ.get("CHRONOCHAT_CONFIG_DIR", "./config")
LOGGING_CONFIG = os.environ.get("CHRONOCHAT_LOGGING_CONFIG", CONFIG_DIR + "/logging.yaml")
POOL_PATH = os.environ.get("CHRONOCHAT_POOL", str(REFERENCE_POOL))

DEFAULT_HORIZON = '1 year'

AGENTS = 'agents'
WHOLE_SESSION = 'whole-session'
GENERATORS = (AGENTS, WHOLE_SESSION)

logger = logging.getLogger(__name__)


def duration_arg(text: str) -> Duration:
    try:
        return parse_duration(text)
    except ChronochatError as e:
        raise argparse.ArgumentTypeError(str(e)) from e


def elapsed_arg(text: str) -> Duration:
    try:
        return parse_duration(text, allow_zero=True)
    except ChronochatError as e:
        raise argparse.ArgumentTypeError(str(e)) from e


def _emit(args: argparse.Namespace, text: str) -> None:
    if getattr(args, 'out', None):
        Path(args.out).write_text(text + '\n', encoding='utf-8')
        logger.info('wrote %s', args.out)
    else:
        sys.stdout.write(text + '\n')


def _dump(args: argparse.Namespace, payload: Any) -> None:
    _emit(args, json.dumps(payload, indent=2, ensure_ascii=False))


def _read_json(path: str) -> Any:
    if not os.path.exists(path):
        raise MissingFile(f'{path} does not exist')
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except ValueError as e:
        raise MalformedDocument(f'{path}: {e}') from e


def _read_text(path: str) -> str:
    if path == '-':
        return sys.stdin.read()
    if not os.path.exists(path):
        raise MissingFile(f'{path} does not exist')
    return Path(path).read_text(encoding='utf-8')


def _backend(args: argparse.Namespace) -> BackendConfig:
    fixtures = args.fixtures
    if args.backend == BackendMode.MOCK and not fixtures:
        fixtures = str(REFERENCE_FIXTURES)
    return BackendConfig.from_env(mode=args.backend, fixtures=fixtures).validate()


# simulation

def cmd_gen_timeline(args: argparse.Namespace) -> int:
    pool = load_event_pool(args.pool)
    timelines = generate_pair_timelines(pool, args.horizon, random.Random(f'{args.seed}/timeline'))
    _dump(args, {
        'seed': args.seed,
        'timelines': {speaker: timeline_to_dict(t) for speaker, t in timelines.items()},
        'initial_events': {speaker: initial_event_cards(t) for speaker, t in timelines.items()},
    })
    return 0


def cmd_advance(args: argparse.Namespace) -> int:
    pool = load_event_pool(args.pool)
    document = _read_json(args.timeline)
    raw = document.get('timelines', {}).get(args.speaker) if 'timelines' in document else document
    if raw is None:
        raise MalformedDocument(f'{args.timeline} holds no timeline for speaker {args.speaker}')

    timeline = timeline_from_dict(raw, pool)
    clock, bundle = advance(timeline, ClockState(elapsed=args.elapsed, session_index=args.session_index), args.gap)
    _dump(args, {
        'clock': {'elapsed': str(clock.elapsed), 'session_index': clock.session_index},
        'bundle': bundle.to_dict(),
        'cards': render_update_cards(timeline, bundle),
    })
    return 0


def cmd_progress(args: argparse.Namespace) -> int:
    _emit(args, compute_progress_label(args.duration, args.elapsed).text)
    return 0


def _schedule_from_args(args: argparse.Namespace) -> Schedule:
    if args.steps:
        return Schedule(tuple(parse_step_phrase(p.strip()) for p in args.steps.split(';') if p.strip()))
    event = get_life_event(load_event_pool(args.pool), args.event)
    effective_duration(event, args.schedule_index)
    if not event.schedules:
        raise MalformedDocument(f'life event {event.id} has no schedule')
    return event.schedules[args.schedule_index]


def cmd_split_schedule(args: argparse.Namespace) -> int:
    split = split_schedule(_schedule_from_args(args), args.elapsed)
    _dump(args, {
        'finished': [step.phrase() for step in split.finished],
        'todo': [step.phrase() for step in split.todo],
    })
    return 0


# language model

def cmd_extract_events(args: argparse.Namespace) -> int:
    result = extract_events(_read_text(args.history), _backend(args), style=args.style)
    if result.skipped:
        logger.warning('%d reply lines did not parse', result.skipped)
    _dump(args, {'events': [e.to_dict() for e in result.events], 'skipped': result.skipped})
    return 0


def cmd_estimate_duration(args: argparse.Namespace) -> int:
    _emit(args, str(estimate_event_duration(args.event, _backend(args))))
    return 0


def cmd_gen_schedule(args: argparse.Namespace) -> int:
    schedule = generate_event_schedule(args.event, args.duration, _backend(args))
    _emit(args, '\n'.join(step.phrase() for step in schedule.steps))
    return 0


# dialogue

def _context_input(path: str) -> Dict[str, Any]:
    """
    Sections of a context document:
      {"history": [...], "events": {"A": [...]},
       "progress": {"A": [["event", "half finished"]]},
       "schedule": {"A": [["event", {"finished": [...], "todo": [...]}]]},
       "gap": "2 weeks"}
    """
    raw = _read_json(path)
    if not isinstance(raw, dict):
        raise MalformedDocument(f'{path}: expected a JSON object')
    try:
        return {
            'history': [str(line) for line in raw.get('history', [])],
            'events': raw.get('events') or None,
            'progress': {speaker: [(description, label_from_text(label)) for description, label in items]
                         for speaker, items in (raw.get('progress') or {}).items()},
            'schedule': {speaker: [(description,
                                    ScheduleSplit(finished=tuple(parse_step_phrase(p) for p in split['finished']),
                                                  todo=tuple(parse_step_phrase(p) for p in split['todo'])))
                                   for description, split in items]
                         for speaker, items in (raw.get('schedule') or {}).items()},
            'gap': parse_duration(raw['gap']) if raw.get('gap') else None,
        }
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, ChronochatError):
            raise
        raise MalformedDocument(f'{path}: {e}') from e


def cmd_build_context(args: argparse.Namespace) -> int:
    sections = _context_input(args.input)
    wants_progress, wants_schedule, wants_gap = MODE_SECTIONS[args.mode]
    gap = args.gap or sections['gap']
    text = render_context(sections['history'],
                          events=sections['events'],
                          progress_items=sections['progress'] if wants_progress else None,
                          schedule_items=sections['schedule'] if wants_schedule else None,
                          gap=gap if wants_gap else None,
                          mode=args.mode,
                          budget=args.budget)
    _emit(args, text)
    return 0


def _agent_factory(args: argparse.Namespace) -> Callable[[SelfChatConfig], tuple]:
    if args.backend == BackendMode.MOCK and not args.fixtures:
        return lambda config: (MockChatAgent('A', config.seed), MockChatAgent('B', config.seed))

    backend = _backend(args)
    return lambda config: (LlmChatAgent('A', backend), LlmChatAgent('B', backend))


def cmd_self_chat(args: argparse.Namespace) -> int:
    pool = load_event_pool(args.pool)
    configs = [plan_self_chat(pool,
                              seed=args.seed if args.count == 1 else f'{args.seed}-{i}',
                              num_sessions=args.sessions,
                              mode=args.mode,
                              min_utterances=args.min_utterances)
               for i in range(args.count)]

    if args.generator == WHOLE_SESSION:
        runner = functools.partial(run_whole_session_chat, backend=resolve_backend(_backend(args)))
        conversations, failures = run_batch(configs, runner=runner, parallel=args.parallel,
                                            progress=sys.stderr.isatty())
    else:
        conversations, failures = run_batch(configs, _agent_factory(args), parallel=args.parallel,
                                            progress=sys.stderr.isatty())
    for failure in failures:
        logger.error('%s', failure)

    conversations = assign_splits(conversations, random.Random(f'{args.seed}/splits'))
    if args.out:
        count = write_corpus(conversations, args.out)
        logger.info('wrote %d conversations to %s', count, args.out)
    else:
        for conv in conversations:
            sys.stdout.write(export_conversation(conv) + '\n')
    return 1 if failures else 0


# dataset

def cmd_import(args: argparse.Namespace) -> int:
    if args.from_gapchat:
        conversations, issues = import_gapchat(args.from_gapchat)
    elif args.path:
        conversations, issues = import_conversations(args.path)
    else:
        raise MissingFile('import needs a corpus file or --from-gapchat DIR')

    for issue in issues:
        logger.warning('skipped record at line %d: %s %s', issue.line_number, issue.error, issue.detail)

    if args.out:
        write_corpus(conversations, args.out)
    else:
        for conv in conversations:
            sys.stdout.write(export_conversation(conv) + '\n')
    sys.stderr.write(f'imported {len(conversations)} conversations, skipped {len(issues)} records\n')
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    conversations: List = []
    for path in args.paths:
        loaded, issues = import_conversations(path)
        for issue in issues:
            logger.warning('%s: skipped line %d: %s', path, issue.line_number, issue.detail)
        conversations.extend(loaded)
    _dump(args, compute_stats(conversations).to_dict())
    return 0


# evaluation

def cmd_eval(args: argparse.Namespace) -> int:
    judgments = load_judgments(args.judgments)

    if args.by_bucket:
        kept, _ = filter_judgments(judgments)
        rows = {model: gap_bucket_report(kept, model, args.baseline) for model in args.model}
        if args.format == 'json':
            _dump(args, {model: [row.to_dict() for row in model_rows] for model, model_rows in rows.items()})
        else:
            _emit(args, '\n\n'.join(f'{model} vs {args.baseline}\n{render_bucket_table(model_rows)}'
                                    for model, model_rows in rows.items()))
        return 0

    reports = [evaluate(judgments, model, args.baseline) for model in args.model]
    if args.format == 'json':
        _dump(args, [report.to_dict() for report in reports])
    else:
        _emit(args, render_table(reports))
    return 0


# service

def cmd_serve(args: argparse.Namespace) -> int:
    from .main import BIND_ADDR, DATA_DIR, serve

    serve(args.bind or BIND_ADDR,
          data_dir=args.data_dir or DATA_DIR,
          pool_path=args.pool,
          logging_config=args.log_config or LOGGING_CONFIG)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--log-config', default=None, help='logging YAML, CHRONOCHAT_LOGGING_CONFIG by default')
    common.add_argument('--pool', default=POOL_PATH, help='event pool JSON')
    common.add_argument('--out', default=None, help='write the result here instead of standard output')

    seeded = argparse.ArgumentParser(add_help=False)
    seeded.add_argument('--seed', required=True, help='seed for every random draw')

    llm = argparse.ArgumentParser(add_help=False)
    llm.add_argument('--backend', choices=BackendMode.ALL, default=BackendMode.MOCK)
    llm.add_argument('--fixtures', default=None, help='mock fixture YAML')

    mode = argparse.ArgumentParser(add_help=False)
    mode.add_argument('--mode', choices=ContextMode.ALL, default=ContextMode.BOTH)

    parser = argparse.ArgumentParser(prog='chronochat',
                                     description='Simulate time passing across multi-session dialogues.')
    sub = parser.add_subparsers(dest='command', metavar='COMMAND', required=True)

    p = sub.add_parser('gen-timeline', parents=[common, seeded], help='timelines for both speakers')
    p.add_argument('--horizon', type=duration_arg, default=parse_duration(DEFAULT_HORIZON))
    p.add_argument('--dump-timeline', dest='out', help='alias of --out')
    p.set_defaults(func=cmd_gen_timeline)

    p = sub.add_parser('advance', parents=[common], help='advance a dumped timeline by a gap')
    p.add_argument('--timeline', required=True, help='timeline dump from gen-timeline')
    p.add_argument('--speaker', default='A')
    p.add_argument('--gap', type=duration_arg, required=True)
    p.add_argument('--elapsed', type=elapsed_arg, default=Duration(0))
    p.add_argument('--session-index', type=int, default=1)
    p.set_defaults(func=cmd_advance)

    p = sub.add_parser('progress', parents=[common], help='progress label of an event')
    p.add_argument('--duration', type=duration_arg, required=True)
    p.add_argument('--elapsed', type=elapsed_arg, required=True)
    p.set_defaults(func=cmd_progress)

    p = sub.add_parser('split-schedule', parents=[common], help='finished and to-do steps')
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument('--event', help='life event id from the pool')
    source.add_argument('--steps', help='step phrases separated by ";"')
    p.add_argument('--schedule-index', type=int, default=0)
    p.add_argument('--elapsed', type=elapsed_arg, required=True)
    p.set_defaults(func=cmd_split_schedule)

    p = sub.add_parser('extract-events', parents=[common, llm], help='events the speakers are engaged in')
    p.add_argument('--history', required=True, help='dialogue history file, - for standard input')
    p.add_argument('--style', choices=ExtractionStyle.ALL, default=ExtractionStyle.INSTRUCTION)
    p.set_defaults(func=cmd_extract_events)

    p = sub.add_parser('estimate-duration', parents=[common, llm], help='how long an event takes')
    p.add_argument('--event', required=True, help='event description')
    p.set_defaults(func=cmd_estimate_duration)

    p = sub.add_parser('gen-schedule', parents=[common, llm], help='steps to finish an event')
    p.add_argument('--event', required=True, help='event description')
    p.add_argument('--duration', type=duration_arg, required=True)
    p.set_defaults(func=cmd_gen_schedule)

    p = sub.add_parser('build-context', parents=[common, mode], help='render a time-aware model input')
    p.add_argument('--input', required=True, help='JSON document with the context sections')
    p.add_argument('--gap', type=duration_arg, default=None, help='overrides the gap of the input')
    p.add_argument('--budget', type=int, default=4096)
    p.set_defaults(func=cmd_build_context)

    p = sub.add_parser('self-chat', parents=[common, seeded, llm, mode], help='generate self-chat conversations')
    p.add_argument('--count', type=int, default=1)
    p.add_argument('--sessions', type=int, default=None, help='sessions per conversation (3-5)')
    p.add_argument('--min-utterances', type=int, default=20)
    p.add_argument('--parallel', type=int, default=1)
    p.add_argument('--generator', choices=GENERATORS, default=AGENTS,
                   help='turn-by-turn agents, or one completion per session')
    p.set_defaults(func=cmd_self_chat)

    p = sub.add_parser('import', parents=[common], help='validate and normalise a corpus')
    p.add_argument('path', nargs='?', help='corpus file (.chrono.jsonl)')
    p.add_argument('--from-gapchat', default=None, metavar='DIR')
    p.set_defaults(func=cmd_import)

    p = sub.add_parser('stats', parents=[common], help='corpus statistics')
    p.add_argument('paths', nargs='+')
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser('eval', parents=[common], help='aggregate pairwise human judgments')
    p.add_argument('judgments', help='judgments JSON lines')
    p.add_argument('--model', action='append', required=True, help='compared model, repeatable')
    p.add_argument('--baseline', required=True)
    p.add_argument('--by-bucket', action='store_true', help='scores per session gap bucket')
    p.add_argument('--format', choices=('table', 'json'), default='table')
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser('serve', parents=[common], help='run the chat room service')
    p.add_argument('--bind', default=None, help='host:port')
    p.add_argument('--data-dir', default=None)
    p.set_defaults(func=cmd_serve)

    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code in (0, None) else 2

    setup_logging(args.log_config or LOGGING_CONFIG)

    try:
        return args.func(args)
    except ChronochatError as e:
        logger.debug('%s failed', args.command, exc_info=True)
        sys.stderr.write(f'chronochat {args.command}: {type(e).__name__}: {e}\n')
        return 1


def main() -> None:
    sys.exit(run())
