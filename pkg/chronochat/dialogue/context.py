"""
Time-aware model input. History lines come first, then literal section
headers, each followed by its lines:

    A: Hey, how are you doing?
    B: I'll need to join a book reading event today.
    Events
    B: writing doctorate thesis, book reading event.
    Progress
    B: writing doctorate thesis [no significant progress], book reading event [finished].
    Gap
    2 hours
"""

from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import logging

from chronochat.errors import ModeSectionMismatch, UnparseableText
from chronochat.simulation.progress import (
    parse_progress_line,
    parse_schedule_line,
    render_progress_line,
    render_schedule_line,
)
from chronochat.simulation.specs import ProgressLabel, ScheduleSplit
from chronochat.simulation.temporal import Duration, parse_duration

logger = logging.getLogger(__name__)

DEFAULT_BUDGET = 4096

EVENTS_HEADER = 'Events'
PROGRESS_HEADER = 'Progress'
SCHEDULE_HEADER = 'Schedule'
GAP_HEADER = 'Gap'
HEADERS = (EVENTS_HEADER, PROGRESS_HEADER, SCHEDULE_HEADER, GAP_HEADER)


class ContextMode:
    NONE = 'none'
    GAP_ONLY = 'gap_only'
    PROGRESS = 'progress'
    SCHEDULE = 'schedule'
    BOTH = 'both'

    ALL = (NONE, GAP_ONLY, PROGRESS, SCHEDULE, BOTH)


# mode -> (progress, schedule, gap) sections present
MODE_SECTIONS: Dict[str, Tuple[bool, bool, bool]] = {
    ContextMode.NONE: (False, False, False),
    ContextMode.GAP_ONLY: (False, False, True),
    ContextMode.PROGRESS: (True, False, True),
    ContextMode.SCHEDULE: (False, True, True),
    ContextMode.BOTH: (True, True, True),
}

EventItems = Mapping[str, Sequence[str]]
ProgressItems = Mapping[str, Sequence[Tuple[str, ProgressLabel]]]
ScheduleItems = Mapping[str, Sequence[Tuple[str, ScheduleSplit]]]


@dataclass(frozen=True)
class ContextBlock:
    """
    Rendered sections of a time-aware input. A section that is absent is
    None; a present section may hold no lines.
    """
    history: Tuple[str, ...]
    events_lines: Optional[Tuple[str, ...]] = None
    progress_lines: Optional[Tuple[str, ...]] = None
    schedule_lines: Optional[Tuple[str, ...]] = None
    gap_line: Optional[str] = None
    mode: str = ContextMode.NONE

    def _sections(self) -> List[str]:
        lines: List[str] = []
        if self.events_lines is not None:
            lines += [EVENTS_HEADER, *self.events_lines]
        if self.progress_lines is not None:
            lines += [PROGRESS_HEADER, *self.progress_lines]
        if self.schedule_lines is not None:
            lines += [SCHEDULE_HEADER, *self.schedule_lines]
        if self.gap_line is not None:
            lines += [GAP_HEADER, self.gap_line]
        return lines

    def render(self, budget: int = DEFAULT_BUDGET, retrieved: Sequence[str] = ()) -> str:
        """
        Join everything into one text of at most budget characters where
        possible. Oldest prefix lines go first; sections are never cut.
        """
        prefix = [line for doc in retrieved for line in doc.splitlines() if line.strip()]
        prefix += list(self.history)
        sections = self._sections()

        def size(lines: Sequence[str]) -> int:
            return sum(len(line) for line in lines) + max(len(lines) - 1, 0)

        dropped = 0
        while prefix and size(prefix + sections) > budget:
            prefix.pop(0)
            dropped += 1
        if dropped:
            logger.debug('context over budget %d, dropped %d oldest lines', budget, dropped)

        return '\n'.join(prefix + sections)


def _events_lines(events: EventItems) -> Tuple[str, ...]:
    return tuple(f'{speaker}: {", ".join(descriptions)}.'
                 for speaker, descriptions in events.items() if descriptions)


def build_context(history: Sequence[str],
                  events: Optional[EventItems] = None,
                  progress_items: Optional[ProgressItems] = None,
                  schedule_items: Optional[ScheduleItems] = None,
                  gap: Optional[Duration] = None,
                  mode: str = ContextMode.NONE) -> ContextBlock:
    """
    Check the supplied sections against the mode and render each of them.
    The Events section is emitted whenever events are supplied.
    """
    if mode not in MODE_SECTIONS:
        raise ModeSectionMismatch(f'unknown context mode {mode!r}')

    wants_progress, wants_schedule, wants_gap = MODE_SECTIONS[mode]
    supplied = (progress_items is not None, schedule_items is not None, gap is not None)
    for name, wanted, given in zip(('progress', 'schedule', 'gap'), MODE_SECTIONS[mode], supplied):
        if wanted != given:
            raise ModeSectionMismatch(f'mode {mode} {"needs" if wanted else "does not take"} a {name} section')

    return ContextBlock(
        history=tuple(history),
        events_lines=_events_lines(events) if events else None,
        progress_lines=tuple(render_progress_line(s, items)
                             for s, items in progress_items.items() if items) if wants_progress else None,
        schedule_lines=tuple(render_schedule_line(s, items)
                             for s, items in schedule_items.items() if items) if wants_schedule else None,
        gap_line=str(gap) if wants_gap else None,
        mode=mode,
    )


def render_context(history: Sequence[str],
                   events: Optional[EventItems] = None,
                   progress_items: Optional[ProgressItems] = None,
                   schedule_items: Optional[ScheduleItems] = None,
                   gap: Optional[Duration] = None,
                   mode: str = ContextMode.NONE,
                   budget: int = DEFAULT_BUDGET,
                   retrieved: Sequence[str] = ()) -> str:
    block = build_context(history, events, progress_items, schedule_items, gap, mode)
    return block.render(budget=budget, retrieved=retrieved)


def _mode_of(progress: bool, schedule: bool, gap: bool) -> str:
    for mode, sections in MODE_SECTIONS.items():
        if sections == (progress, schedule, gap):
            return mode
    raise UnparseableText('context sections do not form a known mode')


def parse_context(text: str) -> ContextBlock:
    """
    Inverse of ContextBlock.render for blocks rendered without retrieved
    documents. Every line is validated against its section grammar.
    """
    lines = text.split('\n') if text else []
    start = next((i for i, line in enumerate(lines) if line in HEADERS), len(lines))
    history = tuple(lines[:start])

    sections: Dict[str, List[str]] = {}
    current = None
    for line in lines[start:]:
        if line in HEADERS and line not in sections:
            current = line
            sections[current] = []
        else:
            sections[current].append(line)

    order = [h for h in HEADERS if h in sections]
    if list(sections) != order:
        raise UnparseableText('context sections are out of order')

    for line in sections.get(PROGRESS_HEADER, []):
        parse_progress_line(line)
    for line in sections.get(SCHEDULE_HEADER, []):
        parse_schedule_line(line)

    gap_line = None
    if GAP_HEADER in sections:
        if len(sections[GAP_HEADER]) != 1:
            raise UnparseableText('the Gap section holds exactly one line')
        gap_line = sections[GAP_HEADER][0]
        parse_duration(gap_line)

    def section(header: str) -> Optional[Tuple[str, ...]]:
        return tuple(sections[header]) if header in sections else None

    return ContextBlock(history=history,
                        events_lines=section(EVENTS_HEADER),
                        progress_lines=section(PROGRESS_HEADER),
                        schedule_lines=section(SCHEDULE_HEADER),
                        gap_line=gap_line,
                        mode=_mode_of(PROGRESS_HEADER in sections, SCHEDULE_HEADER in sections,
                                      GAP_HEADER in sections))
