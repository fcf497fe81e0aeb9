import logging
import random

from collections import Counter
from dataclasses import replace
from typing import Iterable, List

from chronochat.errors import EmptyCorpus

from .specs import SPLIT_RATIOS, SPLITS, Conversation, CorpusStats

logger = logging.getLogger(__name__)


def compute_stats(corpus: Iterable[Conversation]) -> CorpusStats:
    """
    Dialogue and utterance totals grouped by session count. Every split
    key is present, zero when unused.
    """
    conversations = list(corpus)
    if not conversations:
        raise EmptyCorpus('cannot compute statistics of an empty corpus')

    dialogues: Counter = Counter()
    utterances: Counter = Counter()
    splits: Counter = Counter({split: 0 for split in SPLITS})
    for conv in conversations:
        n = len(conv.sessions)
        dialogues[n] += 1
        utterances[n] += conv.utterance_count
        splits[conv.split] += 1

    stats = CorpusStats(dialogues_by_sessions={n: dialogues[n] for n in sorted(dialogues)},
                        utterances_by_sessions={n: utterances[n] for n in sorted(utterances)},
                        split_counts={split: splits[split] for split in SPLITS})
    if not stats.split_within_tolerance():
        logger.warning('split counts %s deviate from the expected %s ratio',
                       dict(stats.split_counts), '/'.join(str(r) for r in SPLIT_RATIOS.values()))
    return stats


def assign_splits(conversations: Iterable[Conversation], rng: random.Random) -> List[Conversation]:
    """
    Shuffle and label: round(0.7 n) train, round(0.1 n) valid, the rest test.
    The returned list keeps the input order.
    """
    conversations = list(conversations)
    n = len(conversations)
    order = list(range(n))
    rng.shuffle(order)

    n_train = round(SPLIT_RATIOS['train'] * n)
    n_valid = round(SPLIT_RATIOS['valid'] * n)
    labels = {}
    for rank, i in enumerate(order):
        if rank < n_train:
            labels[i] = 'train'
        elif rank < n_train + n_valid:
            labels[i] = 'valid'
        else:
            labels[i] = 'test'
    return [replace(conv, split=labels[i]) for i, conv in enumerate(conversations)]
