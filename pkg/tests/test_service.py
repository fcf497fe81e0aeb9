import pytest

from fastapi.testclient import TestClient
from prometheus_client import REGISTRY

from chronochat.dataset import import_conversations
from chronochat.dialogue import plan_self_chat
from chronochat.main import create_app
from chronochat.service import Phase, RoomEvent, RoomStore

SEED = 7


def _auth(token):
    return {'Authorization': f'Bearer {token}'}


def _sessions_ended(bucket):
    return REGISTRY.get_sample_value('chronochat_sessions_ended_total', {'gap_bucket': bucket}) or 0.0


@pytest.fixture
def client(tmp_path, token_secret):
    with TestClient(create_app(tmp_path, poll_wait=0.05, logging_config=None)) as client:
        yield client


def _open_room(client, **config):
    body = {'num_sessions': 3, 'min_utterances': 2, 'seed': SEED}
    body.update(config)
    room_id = client.post('/rooms', json=body).json()['room_id']
    a = client.post(f'/rooms/{room_id}/join', json={'display_name': 'Ann'}).json()
    b = client.post(f'/rooms/{room_id}/join', json={}).json()
    return room_id, a, b


def _talk(client, room_id, a, b, n=2):
    for i in range(n):
        who = a if i % 2 == 0 else b
        r = client.post(f'/rooms/{room_id}/utterances', json={'text': f'message {i}'}, headers=_auth(who['token']))
        assert r.status_code == 200


def test_health(client):
    assert client.get('/health').text == 'ok'


def test_join(client):
    room_id = client.post('/rooms', json={'num_sessions': 3, 'seed': SEED}).json()['room_id']
    assert room_id == 'room-000001'

    a = client.post(f'/rooms/{room_id}/join', json={'display_name': 'Ann'}).json()
    assert (a['speaker'], a['phase']) == ('A', Phase.WAITING_FOR_PARTNER)
    assert a['cards']['initial_events'][0].startswith('You just started ')

    b = client.post(f'/rooms/{room_id}/join').json()
    assert (b['speaker'], b['phase']) == ('B', Phase.IN_SESSION)

    full = client.post(f'/rooms/{room_id}/join', json={})
    assert full.status_code == 409
    assert full.json()['error'] == 'RoomFull'


def test_three_session_room(client, tmp_path, pool):
    gaps = [str(g) for g in plan_self_chat(pool, SEED, num_sessions=3).shared_gaps]
    room_id, a, b = _open_room(client)
    before = _sessions_ended('none')

    for index in (1, 2):
        _talk(client, room_id, a, b)
        ended = client.post(f'/rooms/{room_id}/end-session', headers=_auth(a['token'])).json()
        assert ended['phase'] == Phase.BETWEEN_SESSIONS
        assert ended['gap'] == gaps[index - 1]
        assert ended['cards']['gap'] == gaps[index - 1]
        assert set(ended['cards']) >= {'finished_progress', 'completed', 'new_events', 'future_plans'}

        late = client.post(f'/rooms/{room_id}/utterances', json={'text': 'wait'}, headers=_auth(b['token']))
        assert late.status_code == 409
        assert late.json()['error'] == 'WrongPhase'

        state = client.post(f'/rooms/{room_id}/next-session', headers=_auth(b['token'])).json()
        assert state['phase'] == Phase.IN_SESSION
        assert state['session_index'] == index + 1
        assert state['gap'] == gaps[index - 1]
        assert state['you'] == 'B'

    _talk(client, room_id, a, b)
    done = client.post(f'/rooms/{room_id}/end-session', headers=_auth(b['token'])).json()
    assert done['phase'] == Phase.COMPLETED
    assert done['conversation_id'] == room_id
    assert _sessions_ended('none') == before + 1

    conversations, report = import_conversations(RoomStore(tmp_path).corpus_path)
    assert report == []
    conv = conversations[0]
    assert conv.id == room_id
    assert [str(s.gap_before) for s in conv.sessions[1:]] == gaps
    assert [u.text for u in conv.sessions[2].utterances] == ['message 0', 'message 1']

    metrics = client.get('/metrics').text
    assert 'chronochat_rooms_created_total' in metrics
    assert 'chronochat_rooms{phase="Completed"}' in metrics


def test_end_session_needs_enough_utterances(client):
    room_id, a, b = _open_room(client, min_utterances=20)
    _talk(client, room_id, a, b, n=19)

    state = client.get(f'/rooms/{room_id}/state', headers=_auth(a['token'])).json()
    assert state['remaining'] == 1
    assert state['end_session_available'] is False

    r = client.post(f'/rooms/{room_id}/end-session', headers=_auth(a['token']))
    assert r.status_code == 409
    assert r.json()['error'] == 'TooFewUtterances'
    assert r.json()['remaining'] == 1

    _talk(client, room_id, a, b, n=1)
    assert client.post(f'/rooms/{room_id}/end-session', headers=_auth(b['token'])).status_code == 200


def test_poll_orders_events_and_hides_partner_cards(client):
    room_id, a, b = _open_room(client)
    _talk(client, room_id, a, b)
    client.post(f'/rooms/{room_id}/end-session', headers=_auth(a['token']))

    polled = client.get(f'/rooms/{room_id}/events', params={'since': 0}, headers=_auth(a['token'])).json()
    events = polled['events']
    assert [e['seq'] for e in events] == list(range(1, len(events) + 1))
    assert polled['last_seq'] == events[-1]['seq']
    assert [e['kind'] for e in events] == ['joined', 'joined', 'utterance', 'utterance',
                                           'session_ended', 'updates_shown', 'updates_shown']

    shown = {e['speaker']: e['payload'] for e in events if e['kind'] == 'updates_shown'}
    assert 'cards' in shown['A']
    assert 'cards' not in shown['B']
    assert 'cards' in events[0]['payload'] and 'cards' not in events[1]['payload']

    later = client.get(f'/rooms/{room_id}/events', params={'since': polled['last_seq'], 'wait': 0.01},
                       headers=_auth(b['token'])).json()
    assert later == {'events': [], 'last_seq': polled['last_seq']}


def test_restart_replays_the_log(tmp_path, token_secret):
    with TestClient(create_app(tmp_path, poll_wait=0.05, logging_config=None)) as first:
        room_id, a, b = _open_room(first)
        _talk(first, room_id, a, b)
        first.post(f'/rooms/{room_id}/end-session', headers=_auth(a['token']))
        before = first.get(f'/rooms/{room_id}/state', headers=_auth(a['token'])).json()

    snapshot = RoomStore(tmp_path).load_snapshot(room_id)
    assert (snapshot['seq'], snapshot['phase']) == (before['seq'], Phase.BETWEEN_SESSIONS)

    with TestClient(create_app(tmp_path, poll_wait=0.05, logging_config=None)) as second:
        after = second.get(f'/rooms/{room_id}/state', headers=_auth(a['token'])).json()
        assert after == before
        assert after['phase'] == Phase.BETWEEN_SESSIONS

        state = second.post(f'/rooms/{room_id}/next-session', headers=_auth(a['token'])).json()
        assert state['session_index'] == 2


@pytest.mark.parametrize('method, path', [
    ('get', '/rooms/room-999999/state'),
    ('post', '/rooms/room-999999/join'),
    ('get', '/rooms/not-a-room/state'),
])
def test_unknown_rooms(client, method, path):
    r = getattr(client, method)(path)
    assert r.status_code == 404
    assert r.json()['error'] == 'NoSuchRoom'


def test_token_errors(client):
    room_id, a, b = _open_room(client)
    other_room, c, _ = _open_room(client)

    assert client.post(f'/rooms/{room_id}/utterances', json={'text': 'hi'}).status_code == 401
    r = client.post(f'/rooms/{room_id}/utterances', json={'text': 'hi'}, headers=_auth(c['token']))
    assert r.status_code == 401
    assert r.json()['error'] == 'InvalidToken'
    assert client.post(f'/rooms/{room_id}/utterances', json={'text': 'hi'},
                       headers=_auth('not-a-jwt')).status_code == 401

    blank = client.post(f'/rooms/{room_id}/utterances', json={'text': '  '}, headers=_auth(a['token']))
    assert blank.status_code == 400
    assert blank.json()['error'] == 'EmptyText'


def test_bad_room_config(client):
    r = client.post('/rooms', json={'num_sessions': 9})
    assert r.status_code == 400
    assert r.json()['error'] == 'BadConfig'


def test_torn_last_line_is_ignored(tmp_path):
    store = RoomStore(tmp_path)
    store.create('room-000001', {'num_sessions': 3})
    for seq in (1, 2):
        store.append('room-000001', RoomEvent(seq=seq, kind='utterance', speaker='A', payload={'text': 'hi'}))
    with open(store.room_path('room-000001') / 'events.log', 'ab') as f:
        f.write(b'{"seq":3,"kind":"utterance","payload":{"text":"caf\xc3')

    assert [e.seq for e in store.read_events('room-000001')] == [1, 2]
