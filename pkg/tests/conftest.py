import json
import random

import pytest

from chronochat.llm import MockBackend
from chronochat.llm.backend import REFERENCE_FIXTURES
from chronochat.simulation import get_life_event, load_event_pool


@pytest.fixture(scope='session')
def pool():
    return load_event_pool()


@pytest.fixture(scope='session')
def driver_license(pool):
    return get_life_event(pool, 'driver-license')


@pytest.fixture
def rng():
    return random.Random(7)


@pytest.fixture(scope='session')
def reference_backend():
    return MockBackend.from_file(REFERENCE_FIXTURES)


@pytest.fixture
def small_pool_file(tmp_path):
    """A minimal valid pool written to disk."""
    document = {
        'life_events': [
            {'id': 'tea', 'description': 'making tea', 'duration': '10 minutes'},
            {'id': 'guitar', 'description': 'learning to play guitar', 'duration': '3 weeks',
             'schedules': [[{'description': 'buying a guitar', 'duration': 'one week'},
                            {'description': 'learning chords', 'duration': '2 weeks'}]]},
        ],
        'world_events': [
            {'id': 'w-park', 'headline': 'the city opened a new park', 'index': 1},
        ],
    }
    path = tmp_path / 'pool.json'
    path.write_text(json.dumps(document), encoding='utf-8')
    return path


@pytest.fixture
def token_secret(monkeypatch):
    monkeypatch.setenv('CHRONOCHAT_TOKEN_SECRET', 'test-secret')
    return 'test-secret'
