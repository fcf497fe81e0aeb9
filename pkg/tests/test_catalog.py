import json
import random

import pytest

from chronochat.errors import InvariantViolation, MalformedDocument, MissingFile, NoSuchSchedule, PoolExhausted
from chronochat.simulation import (
    Duration,
    GapBucket,
    build_event_pool,
    bucket_sizes,
    dump_event_pool,
    effective_duration,
    get_life_event,
    life_event_bucket,
    load_event_pool,
    sample_life_events,
)


def _pool_with(event):
    return build_event_pool({'life_events': [event], 'world_events': []})


def test_reference_pool_loads(pool):
    assert len(pool.life_events) > 20
    assert pool.world_events
    indices = [w.real_world_index for w in pool.world_events]
    assert indices == sorted(indices)
    assert {e.origin for e in pool.life_events} <= {'curated', 'synthetic'}


def test_driver_license(driver_license):
    assert driver_license.description == 'getting a driver license'
    assert driver_license.nominal_duration == Duration.of(2, 'month')
    assert len(driver_license.schedules) == 2
    assert effective_duration(driver_license, 0) == Duration.of(7, 'week')
    assert effective_duration(driver_license, 1) == Duration.of(7, 'week')
    with pytest.raises(NoSuchSchedule):
        effective_duration(driver_license, 2)


def test_event_without_schedule_uses_nominal_duration():
    pool = _pool_with({'id': 'tea', 'description': 'making tea', 'duration': '10 minutes'})
    assert effective_duration(pool.life_events[0]) == Duration.of(10, 'minute')


def test_long_event_needs_a_schedule():
    with pytest.raises(InvariantViolation) as e:
        _pool_with({'id': 'move', 'description': 'moving house', 'duration': '2 weeks'})
    assert e.value.rule == 'schedule-required'
    assert e.value.subject_id == 'move'


def test_event_over_a_month_needs_two_schedules():
    with pytest.raises(InvariantViolation) as e:
        _pool_with({'id': 'thesis', 'description': 'writing a thesis', 'duration': '6 months',
                    'schedules': [[{'description': 'writing', 'duration': '6 months'}]]})
    assert e.value.rule == 'two-schedules'


@pytest.mark.parametrize('event, rule', [
    ({'id': 'tea', 'description': 'making tea', 'duration': '1 hour',
      'schedules': [[{'description': 'boiling water', 'duration': '10 minutes'}]]}, 'no-schedule'),
    ({'id': 'move', 'description': 'moving house', 'duration': '2 weeks',
      'schedules': [[{'description': 'packing', 'duration': '2 weeks'}],
                    [{'description': 'moving', 'duration': '2 weeks'}]]}, 'one-schedule'),
])
def test_schedule_count_follows_duration(event, rule):
    with pytest.raises(InvariantViolation) as e:
        _pool_with(event)
    assert e.value.rule == rule


def test_schedule_step_limit():
    steps = [{'description': f'step {i}', 'duration': '1 day'} for i in range(8)]
    with pytest.raises(InvariantViolation) as e:
        _pool_with({'id': 'many', 'description': 'many steps', 'duration': '8 days', 'schedules': [steps]})
    assert e.value.rule == 'max-7-steps'


def test_duplicate_ids_rejected():
    tea = {'id': 'tea', 'description': 'making tea', 'duration': '10 minutes'}
    with pytest.raises(InvariantViolation) as e:
        build_event_pool({'life_events': [tea, tea]})
    assert e.value.rule == 'unique-id'


def test_bad_duration_is_malformed():
    with pytest.raises(MalformedDocument):
        _pool_with({'id': 'tea', 'description': 'making tea', 'duration': 'a while'})


def test_missing_and_broken_files(tmp_path):
    with pytest.raises(MissingFile):
        load_event_pool(tmp_path / 'absent.json')

    broken = tmp_path / 'broken.json'
    broken.write_text('{"life_events": [', encoding='utf-8')
    with pytest.raises(MalformedDocument):
        load_event_pool(broken)

    empty = tmp_path / 'empty.json'
    empty.write_text('   ', encoding='utf-8')
    with pytest.raises(MalformedDocument):
        load_event_pool(empty)


def test_dump_and_reload(pool, tmp_path):
    path = tmp_path / 'pool.json'
    dump_event_pool(pool, path)
    assert json.loads(path.read_text(encoding='utf-8'))['life_events']
    assert load_event_pool(path) == pool


def test_get_life_event_unknown(pool):
    with pytest.raises(MalformedDocument):
        get_life_event(pool, 'flying-to-mars')


def test_sample_life_events(pool):
    drawn = sample_life_events(pool, 5, random.Random(1))
    assert len({e.id for e in drawn}) == 5
    assert drawn == sample_life_events(pool, 5, random.Random(1))
    with pytest.raises(PoolExhausted):
        sample_life_events(pool, len(pool.life_events) + 1, random.Random(1))


def test_bucket_index(pool, driver_license):
    assert life_event_bucket(driver_license) == GapBucket.MONTHS
    assert 'driver-license' in pool.bucket_index[GapBucket.MONTHS]
    sizes = bucket_sizes(pool)
    assert sum(sizes.values()) == len(pool.life_events)
