import json
import logging
import random

from collections import defaultdict
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

from chronochat.errors import (
    ChronochatError,
    InvariantViolation,
    MalformedDocument,
    MissingFile,
    NoSuchSchedule,
    PoolExhausted,
)

from .specs import (
    MAX_SCHEDULE_STEPS,
    SCHEDULE_REQUIRED_ABOVE,
    TWO_SCHEDULES_ABOVE,
    EventPool,
    LifeEvent,
    Schedule,
    Step,
    WorldEvent,
)
from .temporal import Duration, GapBucket, parse_duration

logger = logging.getLogger(__name__)

REFERENCE_POOL = Path(__file__).with_name('reference_pool.json')


def _duration(raw: Any, subject: str) -> Duration:
    try:
        return parse_duration(raw)
    except ChronochatError as e:
        raise MalformedDocument(f'{subject}: bad duration {raw!r}: {e}') from e


def _parse_life_event(raw: Dict[str, Any]) -> LifeEvent:
    if not isinstance(raw, dict) or 'id' not in raw:
        raise MalformedDocument(f'life event without id: {raw!r}')

    event_id = str(raw['id'])
    schedules: List[Schedule] = []

    for raw_schedule in raw.get('schedules') or []:
        if not isinstance(raw_schedule, list):
            raise MalformedDocument(f'{event_id}: a schedule must be a list of steps')
        steps = []
        for raw_step in raw_schedule:
            if not isinstance(raw_step, dict):
                raise MalformedDocument(f'{event_id}: a step must be an object')
            steps.append(Step(description=str(raw_step.get('description', '')).strip(),
                              duration=_duration(raw_step.get('duration'), event_id)))
        schedules.append(Schedule(tuple(steps)))

    return LifeEvent(id=event_id,
                     description=str(raw.get('description', '')).strip(),
                     nominal_duration=_duration(raw.get('duration'), event_id),
                     schedules=tuple(schedules),
                     origin=raw.get('origin', 'curated'))


def _parse_world_event(raw: Dict[str, Any]) -> WorldEvent:
    try:
        return WorldEvent(id=str(raw['id']),
                          headline=str(raw['headline']).strip(),
                          real_world_index=int(raw['index']))
    except (KeyError, TypeError, ValueError) as e:
        raise MalformedDocument(f'bad world event {raw!r}: {e}') from e


def validate_life_event(event: LifeEvent) -> None:
    """
    Raise InvariantViolation naming the first rule the event breaks.
    """
    if not event.description:
        raise InvariantViolation(event.id, 'non-empty-description')
    if event.nominal_duration.minutes < 1:
        raise InvariantViolation(event.id, 'positive-duration')

    for schedule in event.schedules:
        if not schedule.steps:
            raise InvariantViolation(event.id, 'non-empty-schedule')
        if len(schedule.steps) > MAX_SCHEDULE_STEPS:
            raise InvariantViolation(event.id, 'max-7-steps',
                                     f'{event.id}: schedule has {len(schedule.steps)} steps, '
                                     f'at most {MAX_SCHEDULE_STEPS} allowed')
        for step in schedule.steps:
            if not step.description:
                raise InvariantViolation(event.id, 'non-empty-step-description')
            if step.duration.minutes < 1:
                raise InvariantViolation(event.id, 'positive-step-duration')

    if event.nominal_duration <= SCHEDULE_REQUIRED_ABOVE and event.schedules:
        raise InvariantViolation(event.id, 'no-schedule',
                                 f'{event.id}: events of one hour or less carry no schedule')
    if event.nominal_duration <= TWO_SCHEDULES_ABOVE and len(event.schedules) > 1:
        raise InvariantViolation(event.id, 'one-schedule',
                                 f'{event.id}: events of one month or less carry one schedule, '
                                 f'found {len(event.schedules)}')
    if event.nominal_duration > SCHEDULE_REQUIRED_ABOVE and not event.schedules:
        raise InvariantViolation(event.id, 'schedule-required',
                                 f'{event.id}: events longer than one hour need a schedule')
    if event.nominal_duration > TWO_SCHEDULES_ABOVE and len(event.schedules) != 2:
        raise InvariantViolation(event.id, 'two-schedules',
                                 f'{event.id}: events longer than one month need exactly two '
                                 f'schedules, found {len(event.schedules)}')


def build_event_pool(document: Dict[str, Any]) -> EventPool:
    """
    Turn a parsed pool document into a validated EventPool.
    """
    if not isinstance(document, dict):
        raise MalformedDocument('pool document must be an object')
    if 'life_events' not in document:
        raise MalformedDocument('pool document has no life_events section')

    life_events = tuple(_parse_life_event(raw) for raw in document.get('life_events') or [])
    world_events = tuple(_parse_world_event(raw) for raw in document.get('world_events') or [])

    seen = set()
    for event in life_events:
        if event.id in seen:
            raise InvariantViolation(event.id, 'unique-id')
        seen.add(event.id)
        validate_life_event(event)

    indices = set()
    for event in world_events:
        if event.id in seen:
            raise InvariantViolation(event.id, 'unique-id')
        seen.add(event.id)
        if event.real_world_index in indices:
            raise InvariantViolation(event.id, 'unique-world-index')
        indices.add(event.real_world_index)

    bucket_index: Dict[Any, List[str]] = defaultdict(list)
    for event in life_events:
        bucket_index[event.bucket].append(event.id)

    world_sorted = tuple(sorted(world_events, key=lambda w: w.real_world_index))

    return EventPool(life_events=life_events,
                     world_events=world_sorted,
                     bucket_index={k: tuple(v) for k, v in bucket_index.items()})


def load_event_pool(path: Union[str, Path] = REFERENCE_POOL) -> EventPool:
    """
    Load an event pool JSON document and validate every invariant.
    """
    path = Path(path)
    if not path.exists():
        raise MissingFile(f'event pool {path} does not exist')

    try:
        text = path.read_text(encoding='utf-8')
    except UnicodeDecodeError as e:
        raise MalformedDocument(f'event pool {path} is not valid UTF-8: {e}') from e
    if not text.strip():
        raise MalformedDocument(f'event pool {path} is empty')

    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise MalformedDocument(f'invalid JSON in {path}: {e}') from e

    pool = build_event_pool(document)
    logger.info('loaded event pool %s: %d life events, %d world events',
                path, len(pool.life_events), len(pool.world_events))
    return pool


def dump_event_pool(pool: EventPool, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(pool.to_dict(), indent=2, ensure_ascii=False) + '\n',
                          encoding='utf-8')


def effective_duration(event: LifeEvent, schedule_index: int = 0) -> Duration:
    """
    Sum of the chosen schedule's steps; the nominal duration when the event
    has no schedule.
    """
    if not event.schedules:
        if schedule_index != 0:
            raise NoSuchSchedule(f'{event.id} has no schedule {schedule_index}')
        return event.nominal_duration

    if not 0 <= schedule_index < len(event.schedules):
        raise NoSuchSchedule(f'{event.id} has {len(event.schedules)} schedules, '
                             f'no index {schedule_index}')
    return event.schedules[schedule_index].duration


def sample_life_events(pool: EventPool, count: int, rng: random.Random) -> List[LifeEvent]:
    """
    Distinct events drawn uniformly without replacement.
    """
    if count < 0 or count > len(pool.life_events):
        raise PoolExhausted(f'cannot draw {count} events from a pool of {len(pool.life_events)}')
    return rng.sample(list(pool.life_events), count)


def bucket_sizes(pool: EventPool) -> Dict[str, int]:
    return {bucket.label: len(ids) for bucket, ids in sorted(pool.bucket_index.items())}


def world_events_in_order(pool: EventPool) -> Tuple[WorldEvent, ...]:
    return tuple(sorted(pool.world_events, key=lambda w: w.real_world_index))


def get_life_event(pool: EventPool, event_id: str) -> LifeEvent:
    try:
        return pool.life_event(event_id)
    except KeyError as e:
        raise MalformedDocument(f'no life event {event_id!r} in pool') from e


def life_event_bucket(event: LifeEvent) -> GapBucket:
    return event.bucket
