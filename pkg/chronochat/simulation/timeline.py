"""
Per-speaker timelines and the clock that moves them between sessions.

Life events sit on two lanes, so at most two run at once. Lane 0 starts at
the origin and gives the speaker an initial event; lane 1 starts at a random
offset. A successor starts exactly when its predecessor ends. World events
are instantaneous and shared by both speakers of a pairing.
"""

import logging
import random

from typing import Any, Dict, List, Optional, Sequence, Tuple

from chronochat.errors import BeyondHorizon, HorizonTooShort, MalformedDocument, PoolExhausted, ZeroGap

from .catalog import effective_duration, world_events_in_order
from .progress import NO_SIGNIFICANT_PROGRESS_MESSAGE, compute_progress_label, split_schedule
from .specs import (
    MAX_CONCURRENT_LIFE_EVENTS,
    ClockState,
    EventKind,
    EventPool,
    LifeEvent,
    ProgressLabel,
    Timeline,
    TimelineEntry,
    UpdateBundle,
)
from .temporal import Duration, parse_duration

logger = logging.getLogger(__name__)

SPEAKERS = ('A', 'B')


def place_world_events(pool: EventPool, horizon: Duration, rng: random.Random) -> Tuple[TimelineEntry, ...]:
    """
    Random offsets assigned in real-world order, so the headlines happen
    in the order they happened.
    """
    events = world_events_in_order(pool)
    offsets = sorted(rng.randrange(horizon.minutes) for _ in events)
    return tuple(TimelineEntry(event=event,
                               schedule_choice=0,
                               start_offset=Duration.from_minutes(offset),
                               duration=Duration(0),
                               kind=EventKind.WORLD)
                 for event, offset in zip(events, offsets))


def generate_timeline(pool: EventPool,
                      speaker_id: str,
                      horizon: Duration,
                      rng: random.Random,
                      world_entries: Optional[Sequence[TimelineEntry]] = None) -> Timeline:
    if not pool.life_events:
        raise PoolExhausted('cannot build a timeline from an empty pool')
    if horizon.minutes < 1:
        raise HorizonTooShort('the timeline horizon must be at least one minute')

    queue: List[Tuple[LifeEvent, int, Duration]] = []
    for event in rng.sample(list(pool.life_events), len(pool.life_events)):
        choice = rng.randrange(len(event.schedules)) if event.schedules else 0
        duration = effective_duration(event, choice)
        if duration <= horizon:
            queue.append((event, choice, duration))

    if not queue:
        raise HorizonTooShort(f'no life event fits a horizon of {horizon}')

    cursors = [0] + [rng.randrange(horizon.minutes) for _ in range(MAX_CONCURRENT_LIFE_EVENTS - 1)]
    open_lanes = set(range(MAX_CONCURRENT_LIFE_EVENTS))
    entries: List[TimelineEntry] = []

    while open_lanes and queue:
        lane = min(open_lanes, key=lambda i: (cursors[i], i))
        room = horizon.minutes - cursors[lane]
        pick = next((i for i, item in enumerate(queue) if item[2].minutes <= room), None)
        if pick is None:
            open_lanes.discard(lane)
            continue
        event, choice, duration = queue.pop(pick)
        entries.append(TimelineEntry(event=event,
                                     schedule_choice=choice,
                                     start_offset=Duration.from_minutes(cursors[lane]),
                                     duration=duration,
                                     kind=EventKind.LIFE,
                                     lane=lane))
        cursors[lane] += duration.minutes

    if world_entries is None:
        world_entries = place_world_events(pool, horizon, rng)

    ordered = sorted(list(entries) + list(world_entries),
                     key=lambda e: (e.start_offset.minutes, e.kind != EventKind.LIFE, e.lane))
    logger.debug('timeline for %s: %d life entries, %d world entries',
                 speaker_id, len(entries), len(world_entries))
    return Timeline(speaker_id=speaker_id, entries=tuple(ordered), horizon=horizon)


def generate_pair_timelines(pool: EventPool,
                            horizon: Duration,
                            rng: random.Random,
                            speakers: Sequence[str] = SPEAKERS) -> Dict[str, Timeline]:
    """
    Timelines for a pairing; world events are placed once and shared.
    """
    world = place_world_events(pool, horizon, rng)
    return {speaker: generate_timeline(pool, speaker, horizon, rng, world_entries=world)
            for speaker in speakers}


def _active_entries(timeline: Timeline, t: Duration) -> List[Tuple[TimelineEntry, Duration]]:
    return [(entry, t - entry.start_offset)
            for entry in timeline.life_entries
            if entry.start_offset <= t < entry.end_offset]


def events_active_at(timeline: Timeline, t: Duration) -> List[Tuple[str, Duration]]:
    if t > timeline.horizon:
        raise BeyondHorizon(f'{t} is beyond the timeline horizon {timeline.horizon}')
    return [(entry.event_id, elapsed) for entry, elapsed in _active_entries(timeline, t)]


def active_entries_at(timeline: Timeline, t: Duration) -> List[Tuple[TimelineEntry, Duration]]:
    """
    Like events_active_at but yields entries and tolerates times past the horizon.
    """
    return _active_entries(timeline, t)


def _progress_message(entry: TimelineEntry, elapsed_before: Duration, elapsed_after: Duration) -> str:
    schedule = entry.schedule
    if schedule is not None:
        before = split_schedule(schedule, elapsed_before)
        after = split_schedule(schedule, elapsed_after)
        newly_finished = after.finished[len(before.finished):]
        if not newly_finished:
            return NO_SIGNIFICANT_PROGRESS_MESSAGE
        return 'Finished: ' + '; '.join(step.phrase() for step in newly_finished) + '.'

    label = compute_progress_label(entry.duration, elapsed_after)
    if label == ProgressLabel.NO_SIGNIFICANT_PROGRESS or \
            label == compute_progress_label(entry.duration, elapsed_before):
        return NO_SIGNIFICANT_PROGRESS_MESSAGE
    return f'Progress: {label.text}.'


def _future_plans(timeline: Timeline, after: Duration) -> List[str]:
    plans = []
    for entry, elapsed in _active_entries(timeline, after):
        schedule = entry.schedule
        if schedule is None:
            continue
        todo = split_schedule(schedule, elapsed).todo
        if todo:
            plans.append(f'{entry.description}: next, {todo[0].phrase()}.')

    for lane in range(MAX_CONCURRENT_LIFE_EVENTS):
        upcoming = next((e for e in timeline.life_entries
                         if e.lane == lane and e.start_offset > after), None)
        if upcoming is not None:
            plans.append(f'Coming up: {upcoming.description}, '
                         f'which would take about {upcoming.event.nominal_duration}.')
    return plans


def advance(timeline: Timeline, clock: ClockState, gap: Duration) -> Tuple[ClockState, UpdateBundle]:
    """
    Move the clock forward by gap and describe what happened to the speaker's
    events in the meantime.
    """
    if gap.minutes < 1:
        raise ZeroGap('cannot advance by less than one minute')

    before = clock.elapsed
    after = before + gap

    finished_progress: Dict[str, str] = {}
    completed: List[str] = []
    new_events: List[str] = []

    for entry, elapsed_before in _active_entries(timeline, before):
        elapsed_after = after - entry.start_offset
        if elapsed_after >= entry.duration:
            completed.append(entry.event_id)
        else:
            finished_progress[entry.event_id] = _progress_message(entry, elapsed_before, elapsed_after)

    for entry in timeline.entries:
        if not before < entry.start_offset <= after:
            continue
        if entry.kind == EventKind.WORLD:
            new_events.append(entry.event_id)
        elif after >= entry.end_offset:
            completed.append(entry.event_id)
        else:
            new_events.append(entry.event_id)

    bundle = UpdateBundle(finished_progress=finished_progress,
                          completed=tuple(completed),
                          new_events=tuple(new_events),
                          future_plans=tuple(_future_plans(timeline, after)))
    new_clock = ClockState(elapsed=after, session_index=clock.session_index + 1)

    logger.debug('advanced %s by %s to %s: %d in progress, %d completed, %d new',
                 timeline.speaker_id, gap, after, len(finished_progress), len(completed), len(new_events))
    return new_clock, bundle


def _entry(timeline: Timeline, event_id: str) -> TimelineEntry:
    for entry in timeline.entries:
        if entry.event_id == event_id:
            return entry
    raise KeyError(event_id)


def started_card(entry: TimelineEntry) -> str:
    return (f'You just started {entry.description}, '
            f'which would take about {entry.event.nominal_duration.format(spell_one=True)}.')


def initial_event_cards(timeline: Timeline) -> List[str]:
    return [started_card(entry) for entry, _ in _active_entries(timeline, Duration(0))]


def render_update_cards(timeline: Timeline, bundle: UpdateBundle) -> Dict[str, List[str]]:
    """
    Speaker-facing text for an update bundle, one list per panel section.
    """
    finished = [f'{_entry(timeline, event_id).description}: {message}'
                for event_id, message in bundle.finished_progress.items()]
    completed = [f'You have finished {_entry(timeline, event_id).description}.'
                 for event_id in bundle.completed]

    new_events = []
    for event_id in bundle.new_events:
        entry = _entry(timeline, event_id)
        if entry.kind == EventKind.WORLD:
            new_events.append(f'News: {entry.description}')
        else:
            new_events.append(started_card(entry))

    return {
        'finished_progress': finished,
        'completed': completed,
        'new_events': new_events,
        'future_plans': list(bundle.future_plans),
    }


def timeline_to_dict(timeline: Timeline) -> Dict[str, Any]:
    return {
        'speaker_id': timeline.speaker_id,
        'horizon': str(timeline.horizon),
        'entries': [entry.to_dict() for entry in timeline.entries],
    }


def timeline_from_dict(data: Dict[str, Any], pool: EventPool) -> Timeline:
    try:
        entries = []
        for raw in data['entries']:
            if raw['kind'] == EventKind.WORLD:
                event = pool.world_event(raw['event_id'])
                duration = Duration(0)
            else:
                event = pool.life_event(raw['event_id'])
                duration = effective_duration(event, raw['schedule_choice'])
            entries.append(TimelineEntry(event=event,
                                         schedule_choice=raw['schedule_choice'],
                                         start_offset=parse_duration(raw['start_offset'], allow_zero=True),
                                         duration=duration,
                                         kind=raw['kind'],
                                         lane=raw.get('lane', 0)))
        return Timeline(speaker_id=data['speaker_id'],
                        entries=tuple(entries),
                        horizon=parse_duration(data['horizon']))
    except KeyError as e:
        raise MalformedDocument(f'timeline dump refers to unknown field or event {e}') from e
