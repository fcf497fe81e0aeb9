"""
Durations, gap buckets and session-gap sampling.

Durations are kept in whole minutes; a month is 30 days and a year 365 days.
The unit a phrase was written in is kept for display only and never takes
part in comparisons.
"""

import bisect
import logging
import random
import re

from dataclasses import dataclass, field
from enum import IntEnum
from typing import Dict, Optional, Tuple

from chronochat.errors import NonPositiveQuantity, UnparseableText, UnrecognizedUnit, ZeroGap

logger = logging.getLogger(__name__)

UNIT_MINUTES: Dict[str, int] = {
    'minute': 1,
    'hour': 60,
    'day': 1440,
    'week': 10080,
    'month': 43200,
    'year': 525600,
}

NUMBER_WORDS: Dict[str, int] = {
    'a': 1, 'an': 1,
    'one': 1, 'two': 2, 'three': 3, 'four': 4, 'five': 5, 'six': 6,
    'seven': 7, 'eight': 8, 'nine': 9, 'ten': 10, 'eleven': 11, 'twelve': 12,
}

QUANTITY_PATTERN = r'(?:\d+|' + '|'.join(sorted(NUMBER_WORDS, key=len, reverse=True)) + r')'
UNIT_PATTERN = r'(?:' + '|'.join(UNIT_MINUTES) + r')s?'

PHRASE_RE = re.compile(r'^\s*(?:about\s+)?(\S+)\s+([A-Za-z]+)\s*\.?\s*$', re.IGNORECASE)
DECIMAL_PATTERN = r'\d+\.\d+'
# a quantity never starts inside another number: "1.5 years" is not "5 years"
QUANTITY_START = r'(?<![\w.])'

SEARCH_RE = re.compile(rf'{QUANTITY_START}({DECIMAL_PATTERN}|{QUANTITY_PATTERN})\s+({UNIT_PATTERN})\b',
                       re.IGNORECASE)


@dataclass(frozen=True, order=True)
class Duration:
    """
    A non-negative span of simulated time.
    """
    minutes: int
    display_unit: str = field(default='minute', compare=False)

    def __post_init__(self) -> None:
        if self.minutes < 0:
            raise NonPositiveQuantity(f'duration cannot be negative: {self.minutes} minutes')
        if self.display_unit not in UNIT_MINUTES:
            raise UnrecognizedUnit(f'unknown unit {self.display_unit!r}')

    @classmethod
    def of(cls, quantity: int, unit: str) -> 'Duration':
        return cls(quantity * UNIT_MINUTES[unit], unit)

    @classmethod
    def from_minutes(cls, minutes: int) -> 'Duration':
        """
        Pick the largest unit that divides the value evenly.
        """
        for unit in reversed(list(UNIT_MINUTES)):
            if minutes and minutes % UNIT_MINUTES[unit] == 0:
                return cls(minutes, unit)
        return cls(minutes, 'minute')

    def _unit_and_quantity(self) -> Tuple[str, int]:
        unit = self.display_unit
        if self.minutes % UNIT_MINUTES[unit] != 0:
            unit = Duration.from_minutes(self.minutes).display_unit
        return unit, self.minutes // UNIT_MINUTES[unit]

    def format(self, spell_one: bool = False) -> str:
        """
        Render as "3 days"; with spell_one a single unit reads "one week".
        """
        unit, quantity = self._unit_and_quantity()
        if quantity == 1:
            return f'{"one" if spell_one else "1"} {unit}'
        return f'{quantity} {unit}s'

    def __str__(self) -> str:
        return self.format()

    def __add__(self, other: 'Duration') -> 'Duration':
        if not isinstance(other, Duration):
            return NotImplemented
        return Duration.from_minutes(self.minutes + other.minutes)

    def __sub__(self, other: 'Duration') -> 'Duration':
        if not isinstance(other, Duration):
            return NotImplemented
        return Duration.from_minutes(self.minutes - other.minutes)


class GapBucket(IntEnum):
    """Magnitude class of a session gap, ordered from shortest to longest."""
    MINUTES = 0
    HOURS = 1
    DAYS = 2
    WEEKS = 3
    MONTHS = 4
    YEAR = 5

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_label(cls, label: str) -> 'GapBucket':
        try:
            return cls[label.strip().upper()]
        except KeyError as e:
            raise UnparseableText(f'unknown gap bucket {label!r}') from e


# exclusive upper bounds, in minutes, of every bucket but the last
BUCKET_BOUNDS = (60, 1440, 10080, 43200, 525600)

# bucket -> (unit, lowest quantity, highest quantity)
GAP_RANGES: Dict[GapBucket, Tuple[str, int, int]] = {
    GapBucket.MINUTES: ('minute', 10, 59),
    GapBucket.HOURS: ('hour', 1, 23),
    GapBucket.DAYS: ('day', 1, 6),
    GapBucket.WEEKS: ('week', 1, 4),
    GapBucket.MONTHS: ('month', 1, 11),
    GapBucket.YEAR: ('year', 1, 1),
}

MIN_GAP = Duration.of(10, 'minute')
MAX_GAP = Duration.of(1, 'year')


def _quantity(token: str) -> int:
    if re.fullmatch(r'[+-]?\d+', token):
        return int(token)
    value = NUMBER_WORDS.get(token.lower())
    if value is None:
        raise UnparseableText(f'cannot read quantity {token!r}')
    return value


def _unit(token: str) -> str:
    unit = token.lower()
    if unit in UNIT_MINUTES:
        return unit
    if unit.endswith('s') and unit[:-1] in UNIT_MINUTES:
        return unit[:-1]
    raise UnrecognizedUnit(f'unknown time unit {token!r}')


def parse_duration(text: str, allow_zero: bool = False) -> Duration:
    """
    Parse phrases such as "2 months", "about one year" or "6 weeks".
    allow_zero admits "0 minutes", used for timeline offsets.
    """
    if not isinstance(text, str):
        raise UnparseableText(f'expected a duration phrase, got {type(text).__name__}')

    m = PHRASE_RE.match(text)
    if m is None:
        raise UnparseableText(f'cannot parse duration {text!r}')

    quantity = _quantity(m.group(1))
    unit = _unit(m.group(2))

    if quantity < 0 or (quantity == 0 and not allow_zero):
        raise NonPositiveQuantity(f'duration quantity must be positive in {text!r}')

    return Duration.of(quantity, unit)


def find_duration(text: str) -> Optional[Duration]:
    """
    First duration phrase found anywhere in free text, or None.
    Decimal quantities ("1.5 years") are rounded to whole minutes.
    """
    for m in SEARCH_RE.finditer(text or ''):
        unit = _unit(m.group(2))
        if '.' in m.group(1):
            minutes = round(float(m.group(1)) * UNIT_MINUTES[unit])
            if minutes > 0:
                logger.debug('read decimal duration %r as %d minutes', m.group(0), minutes)
                return Duration.from_minutes(minutes)
            continue
        quantity = _quantity(m.group(1))
        if quantity > 0:
            return Duration.of(quantity, unit)
    return None


def classify_gap_bucket(gap: Duration) -> GapBucket:
    if gap.minutes < 1:
        raise ZeroGap('a session gap must be at least one minute')
    return GapBucket(bisect.bisect_right(BUCKET_BOUNDS, gap.minutes))


def sample_session_gap(rng: random.Random) -> Duration:
    """
    Draw a bucket uniformly, then a whole quantity uniformly inside it.
    """
    bucket = rng.choice(list(GapBucket))
    unit, low, high = GAP_RANGES[bucket]
    gap = Duration.of(rng.randint(low, high), unit)
    logger.debug('sampled session gap %s (%s)', gap, bucket.label)
    return gap
