import random
from collections import Counter

import pytest
from scipy.stats import chisquare

from chronochat.errors import NonPositiveQuantity, UnparseableText, UnrecognizedUnit, ZeroGap
from chronochat.simulation import (
    MAX_GAP,
    MIN_GAP,
    Duration,
    GapBucket,
    classify_gap_bucket,
    find_duration,
    parse_duration,
    sample_session_gap,
)


@pytest.mark.parametrize('text, minutes', [
    ('2 months', 2 * 30 * 24 * 60),
    ('6 weeks', 6 * 7 * 24 * 60),
    ('about one year', 365 * 24 * 60),
    ('an hour', 60),
    ('3 Days.', 3 * 24 * 60),
    ('one week', 7 * 24 * 60),
])
def test_parse_duration(text, minutes):
    assert parse_duration(text).minutes == minutes


def test_parse_duration_errors():
    with pytest.raises(UnrecognizedUnit):
        parse_duration('2 fortnights')
    with pytest.raises(NonPositiveQuantity):
        parse_duration('0 days')
    with pytest.raises(UnparseableText):
        parse_duration('soon')
    with pytest.raises(UnparseableText):
        parse_duration('many weeks')


def test_zero_allowed_for_offsets():
    assert parse_duration('0 minutes', allow_zero=True).minutes == 0


def test_comparison_ignores_display_unit():
    assert Duration.of(4, 'week') == Duration.of(28, 'day')
    assert Duration.of(1, 'month') < Duration.of(5, 'week')
    assert Duration.of(1, 'hour') + Duration.of(30, 'minute') == Duration.of(90, 'minute')


def test_formatting():
    assert str(Duration.of(2, 'month')) == '2 months'
    assert str(Duration.of(1, 'week')) == '1 week'
    assert Duration.of(1, 'week').format(spell_one=True) == 'one week'
    assert str(Duration.from_minutes(3 * 24 * 60)) == '3 days'
    assert str(Duration.from_minutes(90)) == '90 minutes'


def test_find_duration():
    assert find_duration('It usually takes about one year.') == Duration.of(1, 'year')
    assert find_duration('Most campaigns run for about 3 months, sometimes 4 months.') == Duration.of(3, 'month')
    assert find_duration('It depends on the person.') is None


@pytest.mark.parametrize('text, minutes', [
    ('It usually takes about 1.5 years to finish.', 788400),
    ('Around 2.5 weeks.', 25200),
    ('Version 3.2 takes 2 days.', 2880),
])
def test_find_duration_reads_decimals_whole(text, minutes):
    assert find_duration(text).minutes == minutes


def test_decimal_quantity_is_not_a_phrase():
    with pytest.raises(UnparseableText):
        parse_duration('1.5 years')


@pytest.mark.parametrize('gap, bucket', [
    (Duration.of(10, 'minute'), GapBucket.MINUTES),
    (Duration.of(59, 'minute'), GapBucket.MINUTES),
    (Duration.of(60, 'minute'), GapBucket.HOURS),
    (Duration.of(23, 'hour'), GapBucket.HOURS),
    (Duration.of(1, 'day'), GapBucket.DAYS),
    (Duration.of(1, 'week'), GapBucket.WEEKS),
    (Duration.of(4, 'week'), GapBucket.WEEKS),
    (Duration.of(1, 'month'), GapBucket.MONTHS),
    (Duration.of(11, 'month'), GapBucket.MONTHS),
    (Duration.of(1, 'year'), GapBucket.YEAR),
])
def test_classify_gap_bucket(gap, bucket):
    assert classify_gap_bucket(gap) == bucket


def test_classify_zero_gap():
    with pytest.raises(ZeroGap):
        classify_gap_bucket(Duration(0))


def test_bucket_labels():
    assert GapBucket.WEEKS.label == 'weeks'
    assert GapBucket.from_label('Months') == GapBucket.MONTHS
    with pytest.raises(UnparseableText):
        GapBucket.from_label('decades')


def test_sampled_gaps_stay_in_range():
    rng = random.Random(11)
    for _ in range(10000):
        gap = sample_session_gap(rng)
        assert MIN_GAP <= gap <= MAX_GAP


def test_sampled_buckets_are_uniform():
    rng = random.Random(3)
    counts = Counter(classify_gap_bucket(sample_session_gap(rng)) for _ in range(10000))
    assert set(counts) == set(GapBucket)
    assert chisquare([counts[b] for b in GapBucket]).pvalue > 0.001


def test_sampling_is_deterministic():
    first = [sample_session_gap(random.Random(f'7/gap/{i}')) for i in range(5)]
    second = [sample_session_gap(random.Random(f'7/gap/{i}')) for i in range(5)]
    assert first == second
