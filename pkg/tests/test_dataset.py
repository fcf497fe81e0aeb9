import json
import random

import pytest

from chronochat.dataset import (
    Conversation,
    SessionRecord,
    Utterance,
    assign_splits,
    compute_stats,
    export_conversation,
    import_conversation,
    import_conversations,
    import_gapchat,
    validate_conversation,
    write_corpus,
)
from chronochat.errors import EmptyCorpus, InvariantViolation, MalformedDocument, MissingFile
from chronochat.simulation import Duration


def _session(index, gap=None, n=4):
    utterances = tuple(Utterance(speaker='AB'[i % 2], text=f'line {i} of session {index}') for i in range(n))
    return SessionRecord(index=index, utterances=utterances, gap_before=gap,
                         events_shown={'A': ('getting a driver license',), 'B': ()})


def _conversation(conv_id='c1', sessions=3, split='train'):
    records = [_session(1)] + [_session(i, Duration.of(i, 'week')) for i in range(2, sessions + 1)]
    return Conversation(id=conv_id, sessions=tuple(records), split=split, metadata={'seed': '7'})


def test_export_and_import():
    conv = _conversation()
    line = export_conversation(conv)
    assert '\n' not in line
    assert json.loads(line)['sessions'][1]['gap_before'] == '2 weeks'
    assert import_conversation(line) == conv


ALPHABET = 'abcxyz ABC 0129 .,!?"\'\\/\té中🙂'


def _random_text(rng):
    return rng.choice('abc') + ''.join(rng.choice(ALPHABET) for _ in range(rng.randint(0, 30)))


def _random_conversation(rng, number):
    sessions = []
    for index in range(1, rng.randint(3, 5) + 1):
        utterances = tuple(Utterance(speaker=rng.choice('AB'), text=_random_text(rng))
                           for _ in range(rng.randint(1, 6)))
        gap = Duration(rng.randint(1, 2 * 365 * 24 * 60)) if index > 1 else None
        shown = {s: tuple(_random_text(rng) for _ in range(rng.randint(0, 3))) for s in 'AB'}
        sessions.append(SessionRecord(index=index, utterances=utterances, gap_before=gap, events_shown=shown))
    return Conversation(id=f'c{number}', sessions=tuple(sessions), split=rng.choice(['train', 'valid', 'test']),
                        metadata={'seed': str(number), 'note': _random_text(rng)})


def test_random_conversations_survive_export(tmp_path):
    rng = random.Random(5)
    conversations = [_random_conversation(rng, i) for i in range(1000)]
    for conv in conversations:
        assert import_conversation(export_conversation(conv)) == conv

    path = tmp_path / 'random.chrono.jsonl'
    assert write_corpus(conversations, path) == 1000
    assert import_conversations(path) == (conversations, [])


@pytest.mark.parametrize('conv, rule', [
    (_conversation(sessions=2), 'session-count'),
    (_conversation(sessions=6), 'session-count'),
    (_conversation(split='dev'), 'split'),
    (Conversation(id='c', sessions=(_session(1, Duration.of(1, 'day')), _session(2, Duration.of(1, 'day')),
                                    _session(3, Duration.of(1, 'day')))), 'first-session-gap'),
    (Conversation(id='c', sessions=(_session(1), _session(2), _session(3, Duration.of(1, 'day')))),
     'gap-required'),
    (Conversation(id='c', sessions=(_session(1), _session(3, Duration.of(1, 'day')),
                                    _session(2, Duration.of(1, 'day')))), 'session-index'),
])
def test_validation_rules(conv, rule):
    with pytest.raises(InvariantViolation) as e:
        validate_conversation(conv)
    assert e.value.rule == rule


def test_bad_speaker_and_empty_text():
    bad = _session(1)
    bad = SessionRecord(index=1, utterances=bad.utterances + (Utterance('C', 'hello'),))
    conv = _conversation()
    with pytest.raises(InvariantViolation) as e:
        validate_conversation(Conversation(id='c', sessions=(bad,) + conv.sessions[1:]))
    assert e.value.rule == 'speaker'

    blank = SessionRecord(index=1, utterances=(Utterance('A', '  '),))
    with pytest.raises(InvariantViolation) as e:
        validate_conversation(Conversation(id='c', sessions=(blank,) + conv.sessions[1:]))
    assert e.value.rule == 'non-empty-utterance'


def test_import_reports_bad_lines(tmp_path):
    path = tmp_path / 'corpus.chrono.jsonl'
    write_corpus([_conversation('c1'), _conversation('c2', sessions=4)], path)
    with open(path, 'a', encoding='utf-8') as f:
        f.write('{"id": "broken"\n\n')
        f.write(json.dumps({**_conversation('c3').to_dict(), 'split': 'dev'}) + '\n')

    conversations, report = import_conversations(path)
    assert [c.id for c in conversations] == ['c1', 'c2']
    assert [(issue.line_number, issue.error) for issue in report] == [(3, 'MalformedDocument'),
                                                                      (5, 'InvariantViolation')]
    with pytest.raises(MissingFile):
        import_conversations(tmp_path / 'absent.jsonl')


def test_import_reports_undecodable_lines(tmp_path):
    path = tmp_path / 'corpus.chrono.jsonl'
    path.write_bytes(export_conversation(_conversation('c1')).encode('utf-8') + b'\n'
                     + b'\xff\xfe{bad\n'
                     + export_conversation(_conversation('c2')).encode('utf-8') + b'\n')

    conversations, report = import_conversations(path)
    assert [c.id for c in conversations] == ['c1', 'c2']
    assert [(issue.line_number, issue.error) for issue in report] == [(2, 'UnparseableText')]


def test_import_rejects_non_objects():
    with pytest.raises(MalformedDocument):
        import_conversation('[1, 2]')
    with pytest.raises(MalformedDocument):
        import_conversation('{"id": "x"}')


def test_stats():
    corpus = [_conversation('c1'), _conversation('c2'), _conversation('c3', sessions=5, split='test')]
    stats = compute_stats(corpus)
    assert stats.to_dict()['rows'] == [{'sessions': 3, 'dialogues': 2, 'utterances': 24},
                                       {'sessions': 5, 'dialogues': 1, 'utterances': 20}]
    assert stats.total_dialogues == 3
    assert stats.total_utterances == 44
    assert stats.split_counts == {'train': 2, 'valid': 0, 'test': 1}


def test_stats_are_additive():
    first = [_conversation('c1'), _conversation('c2', sessions=4)]
    second = [_conversation('c3', sessions=4, split='valid'), _conversation('c4', sessions=5)]
    assert compute_stats(first + second) == compute_stats(first) + compute_stats(second)


def test_empty_corpus():
    with pytest.raises(EmptyCorpus):
        compute_stats([])


def test_assign_splits():
    corpus = [_conversation(f'c{i}') for i in range(10)]
    labelled = assign_splits(corpus, random.Random('7/splits'))
    assert [c.id for c in labelled] == [c.id for c in corpus]
    stats = compute_stats(labelled)
    assert stats.split_counts == {'train': 7, 'valid': 1, 'test': 2}
    assert stats.split_within_tolerance()
    assert labelled == assign_splits(corpus, random.Random('7/splits'))


def _turns(*texts):
    return [{'id': f'Speaker {1 + i % 2}', 'text': t} for i, t in enumerate(texts)]


def test_gapchat_import(tmp_path):
    good = {
        'id': 'g1',
        'previous_dialogs': [
            {'dialog': _turns('hi', 'hello'), 'time_num': 3, 'time_unit': 'days'},
            {'dialog': _turns('back again', 'welcome back'), 'time_num': 2, 'time_unit': 'weeks', 'mood': 'calm'},
        ],
        'dialog': _turns('it has been a while', 'indeed'),
        'extra': 'kept',
    }
    short = {'id': 'g2', 'dialog': _turns('only one session')}
    path = tmp_path / 'train.jsonl'
    path.write_text('\n'.join([json.dumps(good), json.dumps(short), '5']) + '\n', encoding='utf-8')

    conversations, report = import_gapchat(tmp_path)
    assert [c.id for c in conversations] == ['g1']
    conv = conversations[0]
    assert conv.split == 'train'
    assert [s.gap_before for s in conv.sessions] == [None, Duration.of(3, 'day'), Duration.of(2, 'week')]
    assert conv.sessions[0].utterances[1] == Utterance('B', 'hello')
    assert conv.metadata['unmapped'] == {'extra': 'kept', 'session2.mood': 'calm'}
    assert sorted(issue.error for issue in report) == ['InvariantViolation', 'MalformedDocument']


def test_gapchat_missing_directory(tmp_path):
    with pytest.raises(MissingFile):
        import_gapchat(tmp_path / 'absent')
