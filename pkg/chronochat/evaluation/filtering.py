import logging

from collections import Counter
from typing import Iterable, List, Optional, Tuple

from chronochat.utils import content_words, tokenize

from .specs import JUSTIFIED_QUESTIONS, DropReason, DroppedJudgment, Judgment

logger = logging.getLogger(__name__)

MIN_WORK_SECONDS = 200
MIN_CONTENT_TOKENS = 2
REPETITION_LIMIT = 3
COPY_OVERLAP = 0.9


def copied_fraction(justification: str, transcript: str) -> float:
    """Share of the justification's tokens that also occur in the transcript."""
    tokens = tokenize(justification)
    if not tokens:
        return 0.0
    vocabulary = set(tokenize(transcript))
    return sum(t in vocabulary for t in tokens) / len(tokens)


def _needs_justification(judgment: Judgment) -> bool:
    return judgment.question_id in JUSTIFIED_QUESTIONS or bool(judgment.justification.strip())


def drop_reason(judgment: Judgment, repeats: Counter) -> Optional[str]:
    if judgment.work_seconds < MIN_WORK_SECONDS:
        return DropReason.SHORT_WORK_TIME
    if not _needs_justification(judgment):
        return None
    if len(content_words(judgment.justification)) < MIN_CONTENT_TOKENS:
        return DropReason.TOO_FEW_CONTENT_TOKENS
    if repeats[(judgment.annotator_id, judgment.justification)] >= REPETITION_LIMIT:
        return DropReason.REPETITIVE_JUSTIFICATION
    if judgment.transcript and copied_fraction(judgment.justification, judgment.transcript) >= COPY_OVERLAP:
        return DropReason.COPIED_JUSTIFICATION
    return None


def filter_judgments(raw: Iterable[Judgment]) -> Tuple[List[Judgment], List[DroppedJudgment]]:
    """
    Split judgments into kept and dropped, each drop with its reason.
    Justification checks apply to questions that ask for one, or to any
    answer that carries one.
    """
    judgments = list(raw)
    repeats = Counter((j.annotator_id, j.justification) for j in judgments if j.justification.strip())

    kept: List[Judgment] = []
    dropped: List[DroppedJudgment] = []
    for judgment in judgments:
        reason = drop_reason(judgment, repeats)
        if reason is None:
            kept.append(judgment)
        else:
            dropped.append(DroppedJudgment(judgment=judgment, reason=reason))

    if dropped:
        by_reason = Counter(d.reason for d in dropped)
        logger.info('dropped %d of %d judgments: %s', len(dropped), len(judgments),
                    ', '.join(f'{reason}={n}' for reason, n in sorted(by_reason.items())))
    return kept, dropped
