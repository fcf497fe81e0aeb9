import pytest

from chronochat.dialogue import SessionMemory, retrieve_top_k, store_session_document
from chronochat.errors import BadConfig, EmptyMemory, MissingFile, UnparseableText

SESSIONS = [
    'A: I bought a guitar yesterday.\nB: Nice, which chords are you learning?',
    'A: My driver license exam is next week.\nB: Good luck with the road test.',
    'A: The park downtown finally opened.\nB: We should walk there on Sunday.',
]


@pytest.fixture
def memory():
    memory = SessionMemory()
    for i, text in enumerate(SESSIONS, start=1):
        store_session_document(memory, text, i)
    return memory


def test_most_similar_session_ranks_first(memory):
    top = retrieve_top_k(memory, 'how are the guitar chords going?', k=2)
    assert top[0].session_index == 1
    assert len(top) == 2


def test_equal_scores_prefer_recent_sessions():
    memory = SessionMemory()
    memory.store('A: cooking pasta tonight', 1)
    memory.store('A: cooking pasta tonight', 2)
    assert [d.session_index for d in memory.retrieve_top_k('pasta', k=2)] == [2, 1]


def test_unrelated_query_still_returns_k_documents(memory):
    top = memory.retrieve_top_k('quantum chromodynamics', k=5)
    assert [d.session_index for d in top] == [3, 2, 1]


def test_document_counts(memory):
    doc = memory.documents[0]
    assert doc.doc_id == 1
    assert doc.token_count == len(SESSIONS[0].split())
    assert 0 < doc.content_token_count < doc.token_count


def test_errors():
    memory = SessionMemory()
    with pytest.raises(EmptyMemory):
        memory.retrieve_top_k('anything')
    with pytest.raises(UnparseableText):
        memory.store('  ', 1)
    memory.store('A: hello there friend', 1)
    with pytest.raises(BadConfig):
        memory.retrieve_top_k('hello', k=0)


def test_save_and_load(memory, tmp_path):
    path = tmp_path / 'memory.json'
    memory.save(path)
    loaded = SessionMemory.load(path)
    assert loaded.documents == memory.documents
    assert loaded.store('A: new session', 4) == 4

    with pytest.raises(MissingFile):
        SessionMemory.load(tmp_path / 'absent.json')
