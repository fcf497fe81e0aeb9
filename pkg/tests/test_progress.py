import random
from fractions import Fraction

import pytest

from chronochat.errors import EmptyItems, UnparseableText, ZeroDuration
from chronochat.simulation import (
    Duration,
    ProgressLabel,
    Schedule,
    ScheduleSplit,
    Step,
    compute_progress_label,
    describe_progress,
    parse_duration,
    parse_progress_line,
    parse_schedule_line,
    render_progress_line,
    render_schedule_line,
    split_schedule,
)


def test_three_quarters_example():
    label = compute_progress_label(parse_duration('2 months'), parse_duration('6 weeks'))
    assert label == ProgressLabel.THREE_QUARTERS_FINISHED
    assert describe_progress(label) == '3/4 finished'


@pytest.mark.parametrize('elapsed, label', [
    (0, ProgressLabel.NO_SIGNIFICANT_PROGRESS),
    (100, ProgressLabel.NO_SIGNIFICANT_PROGRESS),
    (101, ProgressLabel.QUARTER_FINISHED),
    (300, ProgressLabel.QUARTER_FINISHED),
    (301, ProgressLabel.HALF_FINISHED),
    (500, ProgressLabel.HALF_FINISHED),
    (501, ProgressLabel.THREE_QUARTERS_FINISHED),
    (799, ProgressLabel.THREE_QUARTERS_FINISHED),
    (800, ProgressLabel.FINISHED),
    (5000, ProgressLabel.FINISHED),
])
def test_label_boundaries(elapsed, label):
    assert compute_progress_label(Duration(800), Duration(elapsed)) == label


def test_label_is_monotonic():
    duration = Duration.of(3, 'week')
    labels = [compute_progress_label(duration, Duration(m)) for m in range(0, duration.minutes + 1, 97)]
    assert labels == sorted(labels)


def _nearest_quartile(duration, elapsed):
    if elapsed >= duration:
        return ProgressLabel.FINISHED
    fraction = Fraction(elapsed, duration)
    # min keeps the first of equal distances, so ties go to the lower quartile
    quartile = min(range(4), key=lambda q: abs(fraction - Fraction(q, 4)))
    return ProgressLabel(quartile)


def test_label_matches_nearest_quartile():
    rng = random.Random(2023)
    for _ in range(10000):
        duration = rng.randint(1, 600000)
        elapsed = rng.choice([rng.randint(0, 2 * duration), duration * rng.randint(0, 8) // 8])
        assert compute_progress_label(Duration(duration), Duration(elapsed)) == \
            _nearest_quartile(duration, elapsed), (duration, elapsed)


def test_zero_duration():
    with pytest.raises(ZeroDuration):
        compute_progress_label(Duration(0), Duration(10))


def test_driver_license_split(driver_license):
    split = split_schedule(driver_license.schedules[0], parse_duration('2 weeks'))
    assert [s.description for s in split.finished] == ['learning rules']
    assert [s.description for s in split.todo] == ['practicing', 'passing exams', 'road check', 'getting license']


def test_split_needs_the_whole_step():
    schedule = Schedule((Step('buying a guitar', Duration.of(1, 'week')),
                         Step('learning chords', Duration.of(2, 'week'))))
    assert split_schedule(schedule, Duration.of(6, 'day')).finished == ()
    assert len(split_schedule(schedule, Duration.of(1, 'week')).finished) == 1
    assert split_schedule(schedule, Duration.of(1, 'year')).todo == ()


def test_split_is_a_finished_prefix():
    rng = random.Random(42)
    for _ in range(1000):
        steps = tuple(Step(f'step {i}', Duration(rng.randint(1, 20000))) for i in range(rng.randint(1, 7)))
        total = sum(s.duration.minutes for s in steps)
        elapsed = rng.randint(0, total + 5000)

        split = split_schedule(Schedule(steps), Duration(elapsed))
        assert split.finished + split.todo == steps
        done = sum(s.duration.minutes for s in split.finished)
        assert done <= elapsed
        if split.todo:
            assert done + split.todo[0].duration.minutes > elapsed


def test_progress_line_round_trip():
    items = [('writing doctorate thesis', ProgressLabel.NO_SIGNIFICANT_PROGRESS),
             ('book reading event', ProgressLabel.FINISHED)]
    line = render_progress_line('B', items)
    assert line == 'B: writing doctorate thesis [no significant progress], book reading event [finished].'
    assert parse_progress_line(line) == ('B', items)


def test_schedule_line(driver_license):
    split = split_schedule(driver_license.schedules[0], parse_duration('2 weeks'))
    line = render_schedule_line('B', [('getting a driver license', split)])
    assert line == ('B: getting a driver license [finished: one week for learning rules | '
                    'to-do: 2 weeks for practicing; 2 weeks for passing exams; one week for road check; '
                    'one week for getting license].')
    speaker, items = parse_schedule_line(line)
    assert speaker == 'B'
    assert items[0][1] == split


def test_schedule_line_with_nothing_finished():
    split = ScheduleSplit(finished=(), todo=(Step('packing', Duration.of(2, 'day')),))
    line = render_schedule_line('A', [('moving house', split)])
    assert line == 'A: moving house [finished: none | to-do: 2 days for packing].'
    assert parse_schedule_line(line)[1][0][1] == split


def test_empty_items():
    with pytest.raises(EmptyItems):
        render_progress_line('A', [])
    with pytest.raises(EmptyItems):
        render_schedule_line('A', [])


def test_unparseable_lines():
    with pytest.raises(UnparseableText):
        parse_progress_line('A: walking the dog [somewhat done].')
    with pytest.raises(UnparseableText):
        parse_schedule_line('no speaker here')
