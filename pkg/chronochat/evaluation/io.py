import json
import logging

from pathlib import Path
from typing import Any, Dict, List, Union

from chronochat.errors import ChronochatError, MalformedDocument, MissingFile
from chronochat.simulation.temporal import GapBucket, classify_gap_bucket, parse_duration

from .specs import CHOICES, QUESTION_ATTRIBUTE, Judgment

logger = logging.getLogger(__name__)


def judgment_from_dict(raw: Dict[str, Any]) -> Judgment:
    """
    The gap bucket comes from "gap_bucket" (a label) or from "gap" (a
    duration phrase).
    """
    try:
        question_id = int(raw['question_id'])
        choice = str(raw['choice']).strip().lower()
        bucket = None
        if raw.get('gap_bucket'):
            bucket = GapBucket.from_label(str(raw['gap_bucket']))
        elif raw.get('gap'):
            bucket = classify_gap_bucket(parse_duration(str(raw['gap'])))
        judgment = Judgment(task_id=str(raw['task_id']),
                            annotator_id=str(raw['annotator_id']),
                            question_id=question_id,
                            choice=choice,
                            left_model=str(raw['left_model']),
                            right_model=str(raw['right_model']),
                            justification=str(raw.get('justification') or ''),
                            work_seconds=float(raw.get('work_seconds', 0)),
                            gap_bucket=bucket,
                            transcript=str(raw.get('transcript') or ''))
    except ChronochatError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise MalformedDocument(f'bad judgment record: {e!r}') from e

    if question_id not in QUESTION_ATTRIBUTE:
        raise MalformedDocument(f'question_id must be 1 to 11, got {question_id}')
    if choice not in CHOICES:
        raise MalformedDocument(f'choice must be left or right, got {choice!r}')
    return judgment


def load_judgments(path: Union[str, Path]) -> List[Judgment]:
    path = Path(path)
    if not path.exists():
        raise MissingFile(f'judgment file {path} does not exist')

    judgments = []
    with open(path, 'rb') as f:
        for number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                judgments.append(judgment_from_dict(json.loads(line.decode('utf-8'))))
            except (UnicodeDecodeError, json.JSONDecodeError, MalformedDocument) as e:
                raise MalformedDocument(f'{path}:{number}: {e}') from e
    logger.info('loaded %d judgments from %s', len(judgments), path)
    return judgments
