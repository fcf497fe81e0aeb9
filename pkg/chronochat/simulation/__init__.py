"""
Simulated time for multi-session dialogues.

Exports:
- Duration, GapBucket and the duration parsers
- event pool loading and validation
- timeline generation and clock advance
- progress labels and schedule splits
"""
__version__ = "0.1.0"
__author__ = "chronochat contributors"

from .temporal import (
    Duration,
    GapBucket,
    MAX_GAP,
    MIN_GAP,
    classify_gap_bucket,
    find_duration,
    parse_duration,
    sample_session_gap,
)
from .specs import (
    ClockState,
    EventKind,
    EventPool,
    LifeEvent,
    ProgressLabel,
    Schedule,
    ScheduleSplit,
    Step,
    Timeline,
    TimelineEntry,
    UpdateBundle,
    WorldEvent,
)
from .catalog import (
    REFERENCE_POOL,
    build_event_pool,
    bucket_sizes,
    dump_event_pool,
    effective_duration,
    get_life_event,
    life_event_bucket,
    load_event_pool,
    sample_life_events,
    validate_life_event,
)
from .progress import (
    NO_SIGNIFICANT_PROGRESS_MESSAGE,
    compute_progress_label,
    describe_progress,
    parse_progress_line,
    parse_schedule_line,
    render_progress_line,
    render_schedule_line,
    split_schedule,
)
from .timeline import (
    SPEAKERS,
    active_entries_at,
    advance,
    events_active_at,
    generate_pair_timelines,
    generate_timeline,
    initial_event_cards,
    render_update_cards,
    timeline_from_dict,
    timeline_to_dict,
)

__all__ = [
    "ClockState",
    "Duration",
    "EventKind",
    "EventPool",
    "GapBucket",
    "LifeEvent",
    "MAX_GAP",
    "MIN_GAP",
    "NO_SIGNIFICANT_PROGRESS_MESSAGE",
    "ProgressLabel",
    "REFERENCE_POOL",
    "SPEAKERS",
    "Schedule",
    "ScheduleSplit",
    "Step",
    "Timeline",
    "TimelineEntry",
    "UpdateBundle",
    "WorldEvent",
    "active_entries_at",
    "advance",
    "bucket_sizes",
    "build_event_pool",
    "classify_gap_bucket",
    "compute_progress_label",
    "describe_progress",
    "dump_event_pool",
    "effective_duration",
    "events_active_at",
    "get_life_event",
    "life_event_bucket",
    "find_duration",
    "generate_pair_timelines",
    "generate_timeline",
    "initial_event_cards",
    "load_event_pool",
    "parse_duration",
    "parse_progress_line",
    "parse_schedule_line",
    "render_progress_line",
    "render_schedule_line",
    "render_update_cards",
    "sample_life_events",
    "sample_session_gap",
    "split_schedule",
    "timeline_from_dict",
    "timeline_to_dict",
    "validate_life_event",
]
