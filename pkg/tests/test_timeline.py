import random

import pytest

from chronochat.errors import BeyondHorizon, HorizonTooShort, PoolExhausted, ZeroGap
from chronochat.simulation import (
    ClockState,
    Duration,
    EventKind,
    EventPool,
    Timeline,
    TimelineEntry,
    advance,
    events_active_at,
    generate_pair_timelines,
    generate_timeline,
    initial_event_cards,
    load_event_pool,
    render_update_cards,
    timeline_from_dict,
    timeline_to_dict,
)
from chronochat.simulation.specs import MAX_CONCURRENT_LIFE_EVENTS

YEAR = Duration.of(1, 'year')


@pytest.fixture
def crafted(driver_license, small_pool_file):
    """Driver license from the origin, guitar from day 7, one headline on day 3."""
    small = load_event_pool(small_pool_file)
    guitar = small.life_event('guitar')
    entries = (
        TimelineEntry(event=driver_license, schedule_choice=0, start_offset=Duration(0),
                      duration=Duration.of(7, 'week'), kind=EventKind.LIFE, lane=0),
        TimelineEntry(event=small.world_event('w-park'), schedule_choice=0, start_offset=Duration.of(3, 'day'),
                      duration=Duration(0), kind=EventKind.WORLD),
        TimelineEntry(event=guitar, schedule_choice=0, start_offset=Duration.of(7, 'day'),
                      duration=Duration.of(3, 'week'), kind=EventKind.LIFE, lane=1),
    )
    return Timeline(speaker_id='A', entries=entries, horizon=YEAR)


def test_every_timeline_starts_with_an_event(pool):
    for seed in range(20):
        timelines = generate_pair_timelines(pool, YEAR, random.Random(seed))
        for timeline in timelines.values():
            assert events_active_at(timeline, Duration(0))
            assert initial_event_cards(timeline)[0].startswith('You just started ')


def test_concurrency_cap_and_horizon(pool):
    for seed in range(1000):
        timeline = generate_timeline(pool, 'A', YEAR, random.Random(seed))
        for entry in timeline.life_entries:
            assert entry.end_offset <= YEAR
            running = [e for e in timeline.life_entries
                       if e.start_offset <= entry.start_offset < e.end_offset]
            assert len(running) <= MAX_CONCURRENT_LIFE_EVENTS, seed


def test_pair_shares_world_events(pool):
    timelines = generate_pair_timelines(pool, YEAR, random.Random(9))
    a, b = timelines['A'], timelines['B']
    assert [(e.event_id, e.start_offset) for e in a.world_entries] == \
        [(e.event_id, e.start_offset) for e in b.world_entries]
    offsets = [e.start_offset for e in a.world_entries]
    assert offsets == sorted(offsets)


def test_generation_is_deterministic(pool):
    first = generate_pair_timelines(pool, YEAR, random.Random('7/timeline'))
    second = generate_pair_timelines(pool, YEAR, random.Random('7/timeline'))
    assert first == second


def test_generation_errors(pool):
    with pytest.raises(PoolExhausted):
        generate_timeline(EventPool(life_events=(), world_events=()), 'A', YEAR, random.Random(1))
    with pytest.raises(HorizonTooShort):
        generate_timeline(pool, 'A', Duration(0), random.Random(1))


def test_beyond_horizon(crafted):
    with pytest.raises(BeyondHorizon):
        events_active_at(crafted, Duration.of(2, 'year'))


def test_short_gap_means_no_significant_progress(crafted):
    clock, bundle = advance(crafted, ClockState(), Duration.of(10, 'minute'))
    assert clock.session_index == 2
    assert bundle.finished_progress == {'driver-license': 'No significant progress.'}

    cards = render_update_cards(crafted, bundle)
    assert cards['finished_progress'] == ['getting a driver license: No significant progress.']
    assert cards['future_plans'][0] == 'getting a driver license: next, one week for learning rules.'
    assert 'Coming up: learning to play guitar, which would take about 3 weeks.' in cards['future_plans']


def test_two_weeks_finish_the_first_step(crafted):
    _, bundle = advance(crafted, ClockState(), Duration.of(2, 'week'))
    assert bundle.finished_progress['driver-license'] == 'Finished: one week for learning rules.'
    assert bundle.new_events == ('w-park', 'guitar')

    cards = render_update_cards(crafted, bundle)
    assert cards['new_events'] == [
        'News: the city opened a new park',
        'You just started learning to play guitar, which would take about 3 weeks.',
    ]


def test_completion(crafted):
    _, bundle = advance(crafted, ClockState(), Duration.of(2, 'month'))
    assert set(bundle.completed) == {'driver-license', 'guitar'}
    cards = render_update_cards(crafted, bundle)
    assert 'You have finished getting a driver license.' in cards['completed']


def test_clock_additivity(crafted):
    g1, g2 = Duration.of(5, 'day'), Duration.of(3, 'week')
    step, _ = advance(crafted, ClockState(), g1)
    twice, _ = advance(crafted, step, g2)
    once, _ = advance(crafted, ClockState(), g1 + g2)
    assert twice.elapsed == once.elapsed
    assert twice.session_index == once.session_index + 1


def test_zero_gap(crafted):
    with pytest.raises(ZeroGap):
        advance(crafted, ClockState(), Duration(0))


def test_timeline_dump(pool):
    timeline = generate_timeline(pool, 'B', YEAR, random.Random(2))
    assert timeline_from_dict(timeline_to_dict(timeline), pool) == timeline
