import json
import logging

from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np

from chronochat.errors import BadConfig, EmptyMemory, MalformedDocument, MissingFile, UnparseableText
from chronochat.utils import content_words

logger = logging.getLogger(__name__)

DEFAULT_TOP_K = 5


@dataclass(frozen=True)
class SessionDocument:
    """One finished session kept as a retrievable document."""
    doc_id: int
    session_index: int
    text: str
    token_count: int
    content_token_count: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            'doc_id': self.doc_id,
            'session_index': self.session_index,
            'text': self.text,
            'token_count': self.token_count,
            'content_token_count': self.content_token_count,
        }


class SessionMemory:
    """
    Session documents ranked by term-frequency cosine over lowercased,
    stopword-filtered tokens. Equal scores rank the more recent session
    first.
    """

    def __init__(self):
        self.documents: List[SessionDocument] = []
        self._next_id = 1

    def __len__(self) -> int:
        return len(self.documents)

    def store(self, transcript: str, session_index: int) -> int:
        if not transcript or not transcript.strip():
            raise UnparseableText('cannot store an empty session transcript')
        doc = SessionDocument(doc_id=self._next_id,
                              session_index=session_index,
                              text=transcript,
                              token_count=len(transcript.split()),
                              content_token_count=len(content_words(transcript)))
        self.documents.append(doc)
        self._next_id += 1
        logger.debug('stored session %d as document %d', session_index, doc.doc_id)
        return doc.doc_id

    def scores(self, query: str) -> np.ndarray:
        """
        Cosine similarity of the query against every stored document, in
        storage order. Texts without content words score zero.
        """
        counts = [Counter(content_words(doc.text)) for doc in self.documents]
        query_counts = Counter(content_words(query))

        vocabulary = sorted(set(query_counts).union(*counts))
        if not vocabulary:
            return np.zeros(len(self.documents))
        position = {term: i for i, term in enumerate(vocabulary)}

        matrix = np.zeros((len(self.documents), len(vocabulary)))
        for row, doc_counts in enumerate(counts):
            for term, n in doc_counts.items():
                matrix[row, position[term]] = n
        vector = np.zeros(len(vocabulary))
        for term, n in query_counts.items():
            vector[position[term]] = n

        norms = np.linalg.norm(matrix, axis=1) * np.linalg.norm(vector)
        dots = matrix @ vector
        return np.divide(dots, norms, out=np.zeros_like(dots), where=norms > 0)

    def retrieve_top_k(self, query: str, k: int = DEFAULT_TOP_K) -> List[SessionDocument]:
        if k < 1:
            raise BadConfig(f'k must be at least 1, got {k}')
        if not self.documents:
            raise EmptyMemory('no session documents stored')

        scores = self.scores(query)
        ranked = sorted(range(len(self.documents)),
                        key=lambda i: (-scores[i], -self.documents[i].session_index, -self.documents[i].doc_id))
        return [self.documents[i] for i in ranked[:k]]

    def to_dict(self) -> Dict[str, Any]:
        return {'next_id': self._next_id, 'documents': [d.to_dict() for d in self.documents]}

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True), encoding='utf-8')

    @classmethod
    def load(cls, path: Union[str, Path]) -> 'SessionMemory':
        path = Path(path)
        if not path.exists():
            raise MissingFile(f'session memory {path} does not exist')
        try:
            data = json.loads(path.read_text(encoding='utf-8'))
            memory = cls()
            memory.documents = [SessionDocument(**raw) for raw in data['documents']]
            memory._next_id = int(data['next_id'])
        except (ValueError, KeyError, TypeError) as e:
            raise MalformedDocument(f'invalid session memory {path}: {e}') from e
        return memory


def store_session_document(memory: SessionMemory, transcript: str, session_index: int) -> int:
    return memory.store(transcript, session_index)


def retrieve_top_k(memory: SessionMemory, query: str, k: int = DEFAULT_TOP_K) -> List[SessionDocument]:
    return memory.retrieve_top_k(query, k)
