"""
Prompted extraction of ongoing events, duration estimation and schedule
generation. Replies are parsed strictly and never re-queried: a line that
does not fit the grammar is dropped and counted.
"""

from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import logging
import re

from chronochat.errors import (
    ChronochatError,
    EmptyReply,
    NoDurationInReply,
    NoParsableSteps,
    UnparseableText,
)
from chronochat.simulation.specs import MAX_SCHEDULE_STEPS, LifeEvent, Schedule, Step, TWO_SCHEDULES_ABOVE
from chronochat.simulation.temporal import (
    QUANTITY_PATTERN,
    QUANTITY_START,
    UNIT_PATTERN,
    Duration,
    find_duration,
    parse_duration,
)
from chronochat.simulation.catalog import validate_life_event
from chronochat.utils import stable_hash

from .backend import ChatBackend, resolve_backend
from .specs import BackendConfig, ExtractedEvent, ExtractionResult, ExtractionStyle
from .templates import TemplateLibrary, default_library

logger = logging.getLogger(__name__)

Backend = Union[BackendConfig, ChatBackend]

NOT_MENTIONED = 'something is not mentioned'

EVENT_LINE_RE = re.compile(
    r'^\s*(?:speaker\s+)?([A-Za-z])\s*:\s*(.+?)\s*(?:\(\s*(?:about\s+)?([^()]*?)\s*\))?\s*\.?\s*$',
    re.IGNORECASE)
SLOT_SENTENCE_RE = re.compile(
    r'\b([A-Za-z])\s+is\s+engaging\s+in\s+(.+?)(?:,\s*which\s+takes\s+about\s+(.+?))?(?:\s+to\s+finish)?\s*$',
    re.IGNORECASE)
YES_RE = re.compile(r'^\W*yes\b', re.IGNORECASE)
STEP_START_RE = re.compile(rf'{QUANTITY_START}({QUANTITY_PATTERN})\s+({UNIT_PATTERN})\s+for\s+', re.IGNORECASE)
STEP_TAIL_RE = re.compile(r'(?:[\s,;.:]+|\band\b|\bthen\b|[-*•])+$', re.IGNORECASE)
PREAMBLE_RE = re.compile(r'^(?:in the above conversation, speakers talked about the events they are engaging\.\s*)',
                         re.IGNORECASE)


def _extracted(speaker: str, description: str, duration_text: Optional[str]) -> ExtractedEvent:
    description = description.strip().rstrip(',.;').strip()
    if not description:
        raise UnparseableText('empty event description')
    duration = parse_duration(duration_text) if duration_text else None
    return ExtractedEvent(speaker=speaker.upper(), description=description, estimated_duration=duration)


def parse_event_lines(reply: str) -> ExtractionResult:
    """
    Parse "<speaker>: <description> (about <duration>)" lines. A speaker
    line reading "something is not mentioned" yields no event and is not
    counted as skipped; blank lines are ignored.
    """
    events: List[ExtractedEvent] = []
    skipped = 0
    for line in reply.splitlines():
        if not line.strip():
            continue
        m = EVENT_LINE_RE.match(line)
        if m is None:
            skipped += 1
            continue
        if m.group(2).strip().rstrip('.').lower() == NOT_MENTIONED:
            continue
        try:
            events.append(_extracted(m.group(1), m.group(2), m.group(3)))
        except ChronochatError:
            skipped += 1

    if skipped:
        logger.warning('skipped %d unparsable extraction lines', skipped)
    return ExtractionResult(events=tuple(events), skipped=skipped)


def parse_slot_filling(reply: str) -> ExtractionResult:
    """
    Parse "A is engaging in X. B is engaging in Y, which takes about 3 months."
    """
    text = PREAMBLE_RE.sub('', ' '.join(reply.split()))
    events: List[ExtractedEvent] = []
    skipped = 0
    # sentences end at a period followed by a speaker clause or the end of text
    for sentence in re.split(r'\.\s+(?=[A-Za-z]\s+is\s+engaging\b)|\.\s*$', text):
        if not sentence.strip():
            continue
        m = SLOT_SENTENCE_RE.search(sentence.strip())
        if m is None:
            skipped += 1
            continue
        if m.group(2).strip().rstrip('.').lower() == NOT_MENTIONED:
            continue
        try:
            events.append(_extracted(m.group(1), m.group(2), m.group(3)))
        except ChronochatError:
            skipped += 1

    if skipped:
        logger.warning('skipped %d unparsable slot-filling sentences', skipped)
    return ExtractionResult(events=tuple(events), skipped=skipped)


def _ask(backend: ChatBackend, library: TemplateLibrary, name: str, bindings: Dict[str, Any]) -> str:
    messages = library.messages(name, bindings)
    logger.debug('rendered %s prompt with bindings %s', name, stable_hash(bindings, 8))
    reply = backend.complete(messages, template=name, bindings=bindings)
    if not reply or not reply.strip():
        raise EmptyReply(f'{name} returned an empty reply')
    return reply


def _extract_qa(history: str,
                backend: ChatBackend,
                library: TemplateLibrary,
                speakers: Sequence[str]) -> ExtractionResult:
    """
    Ask a yes/no question per speaker, then ask for the events only of the
    speakers answered Yes. Every question carries the earlier answers.
    """
    answered: List[str] = []
    number = 0

    def ask(question: str) -> str:
        nonlocal number
        number += 1
        bindings = {'history': history,
                    'answered': '\n'.join(answered),
                    'question': f'Question {number}:\n{question}'}
        reply = _ask(backend, library, 'extract_events_qa', bindings).strip()
        answered.append(f'Question {number}:\n{question}\nAnswer: {reply}')
        return reply

    engaged = [s for s in speakers
               if YES_RE.match(ask(f'Did speaker {s} mention any events that speaker {s} is engaging? '
                                   f'Answer with Yes or No'))]

    events: List[ExtractedEvent] = []
    skipped = 0
    for speaker in engaged:
        reply = ask(f'What are the events that speaker {speaker} is engaging? '
                    f'Answer the content of the event and an estimated time to finish that event.')
        result = parse_slot_filling(re.sub(r'^\s*speaker\s+', '', reply, flags=re.IGNORECASE))
        events.extend(e for e in result.events if e.speaker == speaker)
        skipped += result.skipped + sum(1 for e in result.events if e.speaker != speaker)

    return ExtractionResult(events=tuple(events), skipped=skipped)


def extract_events(history: str,
                   backend: Backend,
                   style: str = ExtractionStyle.INSTRUCTION,
                   library: Optional[TemplateLibrary] = None,
                   speakers: Sequence[str] = ('A', 'B')) -> ExtractionResult:
    """
    Events the speakers are engaged in, according to the dialogue history.
    """
    if not history or not history.strip():
        raise UnparseableText('cannot extract events from an empty history')

    backend = resolve_backend(backend)
    library = library or default_library()

    if style == ExtractionStyle.INSTRUCTION:
        return parse_event_lines(_ask(backend, library, 'extract_events', {'history': history}))
    if style == ExtractionStyle.SLOT_FILLING:
        return parse_slot_filling(_ask(backend, library, 'extract_events_slot_filling', {'history': history}))
    if style == ExtractionStyle.QA:
        return _extract_qa(history, backend, library, speakers)
    raise UnparseableText(f'unknown extraction style {style!r}')


def estimate_event_duration(description: str,
                            backend: Backend,
                            library: Optional[TemplateLibrary] = None) -> Duration:
    """
    The first duration phrase of the reply is the estimate.
    """
    if not description or not description.strip():
        raise UnparseableText('cannot estimate the duration of an empty description')

    library = library or default_library()
    reply = _ask(resolve_backend(backend), library, 'estimate_duration', {'event': description.strip()})

    duration = find_duration(reply)
    if duration is None:
        raise NoDurationInReply(f'no duration phrase in reply for {description!r}: {reply[:200]!r}')
    return duration


def _clean_step(text: str) -> str:
    previous = None
    text = text.strip()
    while previous != text:
        previous = text
        text = STEP_TAIL_RE.sub('', text).strip()
    return text


def parse_schedule_reply(reply: str, description: str = '') -> Schedule:
    """
    Steps are read at every "<duration> for <step>" position, so commas,
    numbered lists and line breaks all separate steps.
    """
    starts = list(STEP_START_RE.finditer(reply or ''))
    steps: List[Step] = []
    for i, m in enumerate(starts):
        end = starts[i + 1].start() if i + 1 < len(starts) else len(reply)
        step_text = _clean_step(reply[m.end():end].split('\n')[0])
        try:
            duration = parse_duration(f'{m.group(1)} {m.group(2)}')
        except ChronochatError:
            continue
        if step_text:
            steps.append(Step(description=step_text, duration=duration))

    if not steps:
        raise NoParsableSteps(f'no steps found in schedule reply for {description!r}')

    if len(steps) > MAX_SCHEDULE_STEPS:
        logger.warning('schedule for %r has %d steps, keeping the first %d',
                       description, len(steps), MAX_SCHEDULE_STEPS)
        steps = steps[:MAX_SCHEDULE_STEPS]
    return Schedule(tuple(steps))


def generate_event_schedule(description: str,
                            duration: Duration,
                            backend: Backend,
                            library: Optional[TemplateLibrary] = None,
                            template: str = 'get_schedule') -> Schedule:
    if not description or not description.strip() or duration.minutes < 1:
        raise UnparseableText('a schedule needs an event description and a positive duration')

    library = library or default_library()
    bindings = {'event': description.strip(), 'duration': str(duration)}
    reply = resolve_backend(backend).complete(library.messages(template, bindings),
                                              template=template,
                                              bindings=bindings)
    return parse_schedule_reply(reply, description)


def propose_life_events(duration: Duration,
                        count: int,
                        backend: Backend,
                        library: Optional[TemplateLibrary] = None) -> List[str]:
    """
    Candidate event descriptions needing around duration, one per reply line.
    """
    library = library or default_library()
    reply = _ask(resolve_backend(backend), library, 'generate_life_events',
                 {'duration': str(duration), 'count': count})
    seen = set()
    candidates = []
    for line in reply.splitlines():
        text = re.sub(r'^\s*(?:\d+[.)]|[-*•])\s*', '', line).strip().rstrip('.').strip()
        if text and text.lower() not in seen:
            seen.add(text.lower())
            candidates.append(text)
    return candidates[:count]


def author_life_event(description: str,
                      backend: Backend,
                      library: Optional[TemplateLibrary] = None) -> LifeEvent:
    """
    Estimate a duration and craft schedules for a new synthetic pool entry.
    Events longer than a month get a second schedule from the short
    schedule prompt.
    """
    backend = resolve_backend(backend)
    duration = estimate_event_duration(description, backend, library)

    schedules: Tuple[Schedule, ...] = ()
    if duration.minutes > 60:
        schedules = (generate_event_schedule(description, duration, backend, library, 'craft_event_steps'),)
        if duration > TWO_SCHEDULES_ABOVE:
            schedules += (generate_event_schedule(description, duration, backend, library, 'get_schedule'),)

    event = LifeEvent(id=re.sub(r'[^a-z0-9]+', '-', description.lower()).strip('-'),
                      description=description.strip(),
                      nominal_duration=duration,
                      schedules=schedules,
                      origin='synthetic')
    validate_life_event(event)
    return event


def generate_session_transcript(backend: Backend,
                                bindings: Mapping[str, Any],
                                first: bool,
                                library: Optional[TemplateLibrary] = None) -> Tuple[List[Tuple[str, str]], int]:
    """
    Whole-session generation with the conversation prompts. Returns the
    (speaker, text) utterances and the number of lines that were not
    utterances.
    """
    name = 'chatgpt_first_session' if first else 'chatgpt_subsequent_session'
    reply = _ask(resolve_backend(backend), library or default_library(), name, dict(bindings))

    utterances: List[Tuple[str, str]] = []
    skipped = 0
    for line in reply.splitlines():
        m = re.match(r'^\s*([AB])\s*:\s*(.+?)\s*$', line)
        if m:
            utterances.append((m.group(1), m.group(2)))
        elif line.strip():
            skipped += 1
    return utterances, skipped
