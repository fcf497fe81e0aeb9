from dataclasses import dataclass, field
from enum import IntEnum
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

from .temporal import Duration, GapBucket, classify_gap_bucket

MAX_SCHEDULE_STEPS = 7
MAX_CONCURRENT_LIFE_EVENTS = 2

# a schedule is required above one hour, and two schedules above one month
SCHEDULE_REQUIRED_ABOVE = Duration.of(1, 'hour')
TWO_SCHEDULES_ABOVE = Duration.of(1, 'month')


@dataclass(frozen=True)
class Step:
    """One step towards finishing a life event."""
    description: str
    duration: Duration

    def phrase(self) -> str:
        return f'{self.duration.format(spell_one=True)} for {self.description}'

    def to_dict(self) -> Dict[str, Any]:
        return {'description': self.description, 'duration': str(self.duration)}


@dataclass(frozen=True)
class Schedule:
    """Ordered steps; the sum of their durations is the effective duration."""
    steps: Tuple[Step, ...]

    @property
    def duration(self) -> Duration:
        return Duration.from_minutes(sum(s.duration.minutes for s in self.steps))

    def to_list(self) -> List[Dict[str, Any]]:
        return [s.to_dict() for s in self.steps]


@dataclass(frozen=True)
class LifeEvent:
    id: str
    description: str
    nominal_duration: Duration
    schedules: Tuple[Schedule, ...] = ()
    origin: str = 'curated'

    @property
    def bucket(self) -> GapBucket:
        return classify_gap_bucket(self.nominal_duration)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'id': self.id,
            'description': self.description,
            'duration': str(self.nominal_duration),
            'origin': self.origin,
            'schedules': [s.to_list() for s in self.schedules],
        }


@dataclass(frozen=True)
class WorldEvent:
    id: str
    headline: str
    real_world_index: int

    def to_dict(self) -> Dict[str, Any]:
        return {'id': self.id, 'headline': self.headline, 'index': self.real_world_index}


@dataclass(frozen=True)
class EventPool:
    life_events: Tuple[LifeEvent, ...]
    world_events: Tuple[WorldEvent, ...]
    bucket_index: Mapping[GapBucket, Tuple[str, ...]] = field(default_factory=dict)

    def life_event(self, event_id: str) -> LifeEvent:
        for event in self.life_events:
            if event.id == event_id:
                return event
        raise KeyError(event_id)

    def world_event(self, event_id: str) -> WorldEvent:
        for event in self.world_events:
            if event.id == event_id:
                return event
        raise KeyError(event_id)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'life_events': [e.to_dict() for e in self.life_events],
            'world_events': [e.to_dict() for e in self.world_events],
        }


class EventKind:
    LIFE = 'life'
    WORLD = 'world'


@dataclass(frozen=True)
class TimelineEntry:
    """
    Placement of one event on a speaker's timeline.
    duration is the effective duration for life events and zero for world events.
    """
    event: Union[LifeEvent, WorldEvent]
    schedule_choice: int
    start_offset: Duration
    duration: Duration
    kind: str = EventKind.LIFE
    lane: int = 0

    @property
    def event_id(self) -> str:
        return self.event.id

    @property
    def description(self) -> str:
        if isinstance(self.event, WorldEvent):
            return self.event.headline
        return self.event.description

    @property
    def end_offset(self) -> Duration:
        return self.start_offset + self.duration

    @property
    def schedule(self) -> Optional[Schedule]:
        if isinstance(self.event, LifeEvent) and self.event.schedules:
            return self.event.schedules[self.schedule_choice]
        return None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'event_id': self.event_id,
            'kind': self.kind,
            'schedule_choice': self.schedule_choice,
            'start_offset': str(self.start_offset),
            'lane': self.lane,
        }


@dataclass(frozen=True)
class Timeline:
    speaker_id: str
    entries: Tuple[TimelineEntry, ...]
    horizon: Duration

    @property
    def life_entries(self) -> Tuple[TimelineEntry, ...]:
        return tuple(e for e in self.entries if e.kind == EventKind.LIFE)

    @property
    def world_entries(self) -> Tuple[TimelineEntry, ...]:
        return tuple(e for e in self.entries if e.kind == EventKind.WORLD)


@dataclass(frozen=True)
class ClockState:
    elapsed: Duration = Duration(0)
    session_index: int = 1

    def to_dict(self) -> Dict[str, Any]:
        return {'elapsed_minutes': self.elapsed.minutes, 'session_index': self.session_index}


@dataclass(frozen=True)
class UpdateBundle:
    """
    What a speaker learns when time moves forward.
    finished_progress maps event id to a progress message, future_plans
    holds ready-to-show lines.
    """
    finished_progress: Mapping[str, str] = field(default_factory=dict)
    completed: Tuple[str, ...] = ()
    new_events: Tuple[str, ...] = ()
    future_plans: Tuple[str, ...] = ()

    def to_dict(self) -> Dict[str, Any]:
        return {
            'finished_progress': dict(self.finished_progress),
            'completed': list(self.completed),
            'new_events': list(self.new_events),
            'future_plans': list(self.future_plans),
        }


class ProgressLabel(IntEnum):
    NO_SIGNIFICANT_PROGRESS = 0
    QUARTER_FINISHED = 1
    HALF_FINISHED = 2
    THREE_QUARTERS_FINISHED = 3
    FINISHED = 4

    @property
    def text(self) -> str:
        return PROGRESS_LABEL_TEXT[self]


PROGRESS_LABEL_TEXT: Dict[ProgressLabel, str] = {
    ProgressLabel.NO_SIGNIFICANT_PROGRESS: 'no significant progress',
    ProgressLabel.QUARTER_FINISHED: '1/4 finished',
    ProgressLabel.HALF_FINISHED: 'half finished',
    ProgressLabel.THREE_QUARTERS_FINISHED: '3/4 finished',
    ProgressLabel.FINISHED: 'finished',
}


@dataclass(frozen=True)
class ScheduleSplit:
    finished: Tuple[Step, ...]
    todo: Tuple[Step, ...]
