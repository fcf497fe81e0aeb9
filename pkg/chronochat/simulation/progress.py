"""
Progress labels and finished/to-do schedule splits, with the text forms
injected into model context.

    B: writing doctorate thesis [no significant progress], book reading event [finished].
    B: getting a driver license [finished: one week for learning rules | to-do: ...].
"""

import re

from fractions import Fraction
from typing import List, Sequence, Tuple

from chronochat.errors import EmptyItems, UnparseableText, ZeroDuration

from .specs import PROGRESS_LABEL_TEXT, ProgressLabel, Schedule, ScheduleSplit, Step
from .temporal import Duration, parse_duration


# label thresholds; a fraction exactly on a threshold rounds down
LABEL_THRESHOLDS = (
    (Fraction(1, 8), ProgressLabel.NO_SIGNIFICANT_PROGRESS),
    (Fraction(3, 8), ProgressLabel.QUARTER_FINISHED),
    (Fraction(5, 8), ProgressLabel.HALF_FINISHED),
)

NO_SIGNIFICANT_PROGRESS_MESSAGE = 'No significant progress.'

_TEXT_TO_LABEL = {text: label for label, text in PROGRESS_LABEL_TEXT.items()}


def compute_progress_label(duration: Duration, elapsed: Duration) -> ProgressLabel:
    """
    Nearest quartile of elapsed/duration; Finished only once the whole
    duration has passed.
    """
    if duration.minutes < 1:
        raise ZeroDuration('an event duration must be at least one minute')

    if elapsed.minutes >= duration.minutes:
        return ProgressLabel.FINISHED

    fraction = Fraction(elapsed.minutes, duration.minutes)
    for threshold, label in LABEL_THRESHOLDS:
        if fraction <= threshold:
            return label
    return ProgressLabel.THREE_QUARTERS_FINISHED


def describe_progress(label: ProgressLabel) -> str:
    return label.text


def label_from_text(text: str) -> ProgressLabel:
    try:
        return _TEXT_TO_LABEL[text.strip().lower()]
    except KeyError as e:
        raise UnparseableText(f'unknown progress label {text!r}') from e


def split_schedule(schedule: Schedule, elapsed: Duration) -> ScheduleSplit:
    """
    A step is finished only when the cumulative duration through it fits
    inside elapsed.
    """
    cumulative = 0
    finished: List[Step] = []
    for step in schedule.steps:
        cumulative += step.duration.minutes
        if cumulative > elapsed.minutes:
            break
        finished.append(step)
    return ScheduleSplit(finished=tuple(finished), todo=tuple(schedule.steps[len(finished):]))


def render_progress_line(speaker: str, items: Sequence[Tuple[str, ProgressLabel]]) -> str:
    if not items:
        raise EmptyItems('a progress line needs at least one event')
    body = ', '.join(f'{description} [{label.text}]' for description, label in items)
    return f'{speaker}: {body}.'


PROGRESS_ITEM_RE = re.compile(r'(.+?) \[([^\]]+)\](?:, |$)')
LINE_RE = re.compile(r'^([^:]+): (.*)\.$')


def _split_line(line: str) -> Tuple[str, str]:
    m = LINE_RE.match(line.strip())
    if m is None:
        raise UnparseableText(f'not a speaker line: {line!r}')
    return m.group(1), m.group(2)


def parse_progress_line(line: str) -> Tuple[str, List[Tuple[str, ProgressLabel]]]:
    """
    Inverse of render_progress_line.
    """
    speaker, body = _split_line(line)
    items = []
    position = 0
    for m in PROGRESS_ITEM_RE.finditer(body):
        if m.start() != position:
            raise UnparseableText(f'unexpected text in progress line {line!r}')
        items.append((m.group(1), label_from_text(m.group(2))))
        position = m.end()
    if not items or position != len(body):
        raise UnparseableText(f'cannot parse progress line {line!r}')
    return speaker, items


def _render_steps(steps: Sequence[Step]) -> str:
    return '; '.join(step.phrase() for step in steps) if steps else 'none'


def render_schedule_line(speaker: str, items: Sequence[Tuple[str, ScheduleSplit]]) -> str:
    if not items:
        raise EmptyItems('a schedule line needs at least one event')
    body = ', '.join(
        f'{description} [finished: {_render_steps(split.finished)} | to-do: {_render_steps(split.todo)}]'
        for description, split in items)
    return f'{speaker}: {body}.'


SCHEDULE_ITEM_RE = re.compile(r'(.+?) \[finished: ([^\]|]*) \| to-do: ([^\]|]*)\](?:, |$)')
STEP_PHRASE_RE = re.compile(r'^(.+?) for (.+)$')


def parse_step_phrase(phrase: str) -> Step:
    m = STEP_PHRASE_RE.match(phrase.strip())
    if m is None:
        raise UnparseableText(f'not a step phrase: {phrase!r}')
    return Step(description=m.group(2), duration=parse_duration(m.group(1)))


def _parse_steps(text: str) -> Tuple[Step, ...]:
    if text.strip() == 'none':
        return ()
    return tuple(parse_step_phrase(p) for p in text.split('; '))


def parse_schedule_line(line: str) -> Tuple[str, List[Tuple[str, ScheduleSplit]]]:
    """
    Inverse of render_schedule_line.
    """
    speaker, body = _split_line(line)
    items = []
    position = 0
    for m in SCHEDULE_ITEM_RE.finditer(body):
        if m.start() != position:
            raise UnparseableText(f'unexpected text in schedule line {line!r}')
        split = ScheduleSplit(finished=_parse_steps(m.group(2)), todo=_parse_steps(m.group(3)))
        items.append((m.group(1), split))
        position = m.end()
    if not items or position != len(body):
        raise UnparseableText(f'cannot parse schedule line {line!r}')
    return speaker, items
